#include "mtl/experiment.hpp"

#include "mtl/io.hpp"
#include "mtl/random.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>

namespace mtl {

using json = nlohmann::json;

namespace {

using Vec = Vector<double>;
using Mat = Matrix<double>;

[[noreturn]] void fail(Errc code, const std::string& what) { throw Error(code, "cli-io", what); }

template <typename E, std::size_t N>
E parse_enum(const std::string& key, const std::string& s, const std::pair<const char*, E> (&table)[N]) {
    for (const auto& [name, value] : table)
        if (s == name) return value;
    fail(Errc::SchemaError, "config key '" + key + "': unknown value '" + s + "'");
}

template <typename E, std::size_t N>
const char* enum_name(E v, const std::pair<const char*, E> (&table)[N]) {
    for (const auto& [name, value] : table)
        if (v == value) return name;
    return "?";
}

constexpr std::pair<const char*, ClassifierKind> kinds[] = {{"binary", ClassifierKind::binary},
                                                            {"one_vs_all", ClassifierKind::one_vs_all},
                                                            {"one_vs_one", ClassifierKind::one_vs_one},
                                                            {"one_hot", ClassifierKind::one_hot}};
constexpr std::pair<const char*, LabelMode> label_modes[] = {{"classical", LabelMode::classical},
                                                             {"optimized", LabelMode::optimized}};
constexpr std::pair<const char*, StatsSource> sources[] = {{"true", StatsSource::truth},
                                                           {"estimated", StatsSource::estimated}};
constexpr std::pair<const char*, NormMode> norms[] = {{"trace", NormMode::trace}, {"sqrt_trace", NormMode::sqrt_trace}};
constexpr std::pair<const char*, MeanModel> mean_models[] = {
    {"orthogonal", MeanModel::orthogonal}, {"antipodal", MeanModel::antipodal}, {"rows", MeanModel::rows}};

IndexMatrix counts_from(double n, const std::vector<double>& fractions, Index k, Index m) {
    IndexMatrix c(k, m);
    for (Index a = 0; a < k * m; ++a) c(a / m, a % m) = std::lround(fractions[static_cast<std::size_t>(a)] * n);
    return c;
}

double percent(double x) { return 100.0 * x; }

/// Empirical error of "class 0 iff g >= zeta" on the target task's test blocks.
double empirical_threshold_error(const DualSolution<double>& dual, const Dataset<double>& test, Index task, double zeta) {
    const Vec g0 = dual.score_batch(test.block(task, 0), task).col(0);
    const Vec g1 = dual.score_batch(test.block(task, 1), task).col(0);
    return 0.5 * (double((g0.array() < zeta).count()) / double(g0.size()) +
                  double((g1.array() >= zeta).count()) / double(g1.size()));
}

json number_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

}  // namespace

const char* to_string(ClassifierKind kind) { return enum_name(kind, kinds); }
const char* to_string(LabelMode mode) { return enum_name(mode, label_modes); }

void ExperimentConfig::validate() const {
    if (k < 1 || m < 2 || p < 1) fail(Errc::BadSpec, "config needs k >= 1, m >= 2, p >= 1");
    const bool from_files = !train_path.empty();
    if (!from_files) {
        if (counts.rows() != k || counts.cols() != m) fail(Errc::BadSpec, "counts must be k x m");
        if (mean_model != MeanModel::rows && static_cast<Index>(betas.size()) != k - 1)
            fail(Errc::BadSpec, "need one beta per task after the first");
        if (mean_model == MeanModel::rows && (means.rows() != k * m || means.cols() != p))
            fail(Errc::BadSpec, "explicit means must be km x p");
        if (mean_model == MeanModel::antipodal && (m != 2 || p < 2))
            fail(Errc::BadSpec, "antipodal means need two classes and p >= 2");
        if (mean_model == MeanModel::orthogonal && p < 2 * m) fail(Errc::BadSpec, "orthogonal means need p >= 2m");
        if (test_per_class < 0) fail(Errc::BadSpec, "negative test count");
    }
    if (hyper.gamma.size() != k) fail(Errc::BadSpec, "gamma needs one entry per task");
    if (task < 0 || task >= k) fail(Errc::BadSpec, "task out of range");
    if (classifier == ClassifierKind::binary && m != 2) fail(Errc::BadSpec, "binary classifier needs m = 2");
    if (mc_samples < 2) fail(Errc::BadSpec, "mc_samples must be >= 2");
    for (double e : etas)
        if (!(e > 0.0 && e < 1.0)) fail(Errc::BadSpec, "false-alarm rates must lie in (0, 1)");
}

json to_json(const ExperimentConfig& cfg) {
    json j;
    j["schema_version"] = report_schema_version;
    j["preset"] = cfg.preset;
    j["seed"] = cfg.seed;
    j["k"] = cfg.k;
    j["m"] = cfg.m;
    j["p"] = cfg.p;
    json counts = json::array();
    for (Index i = 0; i < cfg.counts.rows(); ++i) {
        json row = json::array();
        for (Index c = 0; c < cfg.counts.cols(); ++c) row.push_back(cfg.counts(i, c));
        counts.push_back(row);
    }
    j["counts"] = counts;
    j["mean_model"] = enum_name(cfg.mean_model, mean_models);
    j["mean_norm"] = cfg.mean_norm;
    j["perp_norm"] = cfg.perp_norm;
    j["betas"] = cfg.betas;
    if (cfg.mean_model == MeanModel::rows) {
        json rows = json::array();
        for (Index r = 0; r < cfg.means.rows(); ++r) {
            std::vector<double> row(static_cast<std::size_t>(cfg.means.cols()));
            for (Index c = 0; c < cfg.means.cols(); ++c) row[static_cast<std::size_t>(c)] = cfg.means(r, c);
            rows.push_back(row);
        }
        j["means"] = rows;
    }
    j["test_per_class"] = cfg.test_per_class;
    j["lambda"] = cfg.hyper.lambda;
    j["gamma"] = std::vector<double>(cfg.hyper.gamma.data(), cfg.hyper.gamma.data() + cfg.hyper.gamma.size());
    j["classifier"] = to_string(cfg.classifier);
    j["labels"] = to_string(cfg.labels);
    j["stats"] = enum_name(cfg.stats, sources);
    j["norm"] = enum_name(cfg.norm, norms);
    j["task"] = cfg.task + 1;
    j["sweep"] = cfg.sweep;
    j["etas"] = cfg.etas;
    j["mc_samples"] = cfg.mc_samples;
    j["train_path"] = cfg.train_path;
    j["test_path"] = cfg.test_path;
    return j;
}

ExperimentConfig config_from_json(const json& j) {
    static const char* known[] = {"schema_version", "preset", "seed", "k", "m", "p", "counts", "mean_model",
                                  "mean_norm", "perp_norm", "betas", "means", "test_per_class", "lambda", "gamma",
                                  "classifier", "labels", "stats", "norm", "task", "sweep", "etas", "mc_samples",
                                  "train_path", "test_path"};
    if (!j.is_object()) fail(Errc::SchemaError, "config must be a JSON object");
    for (const auto& [key, value] : j.items())
        if (std::find_if(std::begin(known), std::end(known), [&](const char* s) { return key == s; }) == std::end(known))
            fail(Errc::SchemaError, "config key '" + key + "' is not recognized");
    if (j.contains("schema_version") && j["schema_version"] != report_schema_version)
        fail(Errc::SchemaError, "config key 'schema_version': unsupported version");

    // a named preset supplies the defaults, explicit keys override them
    ExperimentConfig cfg;
    if (j.contains("preset") && j["preset"].get<std::string>() != "custom") cfg = preset_config(j["preset"]);
    try {
        cfg.seed = j.value("seed", cfg.seed);
        cfg.k = j.value("k", cfg.k);
        cfg.m = j.value("m", cfg.m);
        cfg.p = j.value("p", cfg.p);
        if (j.contains("counts")) {
            const auto rows = j["counts"].get<std::vector<std::vector<Index>>>();
            cfg.counts.resize(static_cast<Index>(rows.size()), rows.empty() ? 0 : static_cast<Index>(rows[0].size()));
            for (std::size_t i = 0; i < rows.size(); ++i) {
                if (static_cast<Index>(rows[i].size()) != cfg.counts.cols())
                    fail(Errc::SchemaError, "config key 'counts': ragged rows");
                for (std::size_t c = 0; c < rows[i].size(); ++c) cfg.counts(Index(i), Index(c)) = rows[i][c];
            }
        }
        if (j.contains("mean_model")) cfg.mean_model = parse_enum("mean_model", j["mean_model"], mean_models);
        cfg.mean_norm = j.value("mean_norm", cfg.mean_norm);
        cfg.perp_norm = j.value("perp_norm", cfg.perp_norm);
        cfg.betas = j.value("betas", cfg.betas);
        if (j.contains("means")) {
            const auto rows = j["means"].get<std::vector<std::vector<double>>>();
            cfg.means.resize(static_cast<Index>(rows.size()), rows.empty() ? 0 : static_cast<Index>(rows[0].size()));
            for (std::size_t r = 0; r < rows.size(); ++r) {
                if (static_cast<Index>(rows[r].size()) != cfg.means.cols())
                    fail(Errc::SchemaError, "config key 'means': ragged rows");
                for (std::size_t c = 0; c < rows[r].size(); ++c) cfg.means(Index(r), Index(c)) = rows[r][c];
            }
        }
        cfg.test_per_class = j.value("test_per_class", cfg.test_per_class);
        cfg.hyper.lambda = j.value("lambda", cfg.hyper.lambda);
        if (j.contains("gamma")) {
            const auto g = j["gamma"].get<std::vector<double>>();
            cfg.hyper.gamma = Eigen::Map<const Vec>(g.data(), Index(g.size()));
        } else if (cfg.hyper.gamma.size() != cfg.k) {
            cfg.hyper.gamma = Vec::Ones(cfg.k);
        }
        if (j.contains("classifier")) cfg.classifier = parse_enum("classifier", j["classifier"], kinds);
        if (j.contains("labels")) cfg.labels = parse_enum("labels", j["labels"], label_modes);
        if (j.contains("stats")) cfg.stats = parse_enum("stats", j["stats"], sources);
        if (j.contains("norm")) cfg.norm = parse_enum("norm", j["norm"], norms);
        if (j.contains("task")) cfg.task = j["task"].get<Index>() - 1;
        cfg.sweep = j.value("sweep", cfg.sweep);
        cfg.etas = j.value("etas", cfg.etas);
        cfg.mc_samples = j.value("mc_samples", cfg.mc_samples);
        cfg.train_path = j.value("train_path", cfg.train_path);
        cfg.test_path = j.value("test_path", cfg.test_path);
        if (j.contains("preset")) cfg.preset = j["preset"];
    } catch (const json::exception& e) {
        fail(Errc::SchemaError, std::string("config has a value of the wrong type: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(Errc::IoError, "cannot open " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        fail(Errc::ParseError, path + ": byte " + std::to_string(e.byte) + ": malformed JSON");
    }
    return config_from_json(j);
}

ExperimentConfig preset_config(const std::string& name) {
    ExperimentConfig cfg;
    cfg.preset = name;
    if (name == "table3") {
        // m = 5, p = 100, c_1j = .16, c_2j = .04, lambda = 1, gamma = 1; n = 1500 fixes c0
        cfg.k = 2;
        cfg.m = 5;
        cfg.p = 100;
        cfg.counts = counts_from(1500, {.16, .16, .16, .16, .16, .04, .04, .04, .04, .04}, 2, 5);
        cfg.mean_model = MeanModel::orthogonal;
        cfg.mean_norm = 2.0;
        cfg.perp_norm = 2.0;
        cfg.betas = {0.1};
        cfg.sweep = {0.1, 0.5, 0.8};
        cfg.test_per_class = 2000;
        cfg.hyper = {1.0, Vec::Ones(2)};
        cfg.classifier = ClassifierKind::one_vs_all;
        cfg.task = 1;
    } else if (name == "fig2") {
        // p = 100, c = (.3, .4, .1, .2), lambda = 10, gamma = 1
        cfg.k = 2;
        cfg.m = 2;
        cfg.p = 100;
        cfg.counts = counts_from(1000, {.3, .4, .1, .2}, 2, 2);
        cfg.mean_model = MeanModel::antipodal;
        cfg.mean_norm = 1.5;
        cfg.perp_norm = 1.5;
        cfg.betas = {0.0};
        cfg.sweep = {-0.5, 0.0, 0.5};
        cfg.test_per_class = 1000;
        cfg.hyper = {10.0, Vec::Ones(2)};
        cfg.task = 1;
    } else if (name == "fig4") {
        // target task first, then sources with beta = 1, .9, .5, .2, .8; p = 100, lambda = 10, gamma = 1
        cfg.k = 6;
        cfg.m = 2;
        cfg.p = 100;
        cfg.counts = counts_from(1000, {.03, .03, .07, .11, .10, .10, .06, .08, .09, .12, .10, .11}, 6, 2);
        cfg.mean_model = MeanModel::antipodal;
        cfg.mean_norm = 1.5;
        cfg.perp_norm = 1.5;
        cfg.betas = {1.0, 0.9, 0.5, 0.2, 0.8};
        cfg.test_per_class = 5000;
        cfg.hyper = {10.0, Vec::Ones(6)};
        cfg.task = 0;
    } else if (name == "roc") {
        // p = 128, n = (384, 256, 64, 40), mu_11 = -mu_12 = e_1, mu_21 = -mu_22 = (.87, .5, 0, ...)
        cfg.k = 2;
        cfg.m = 2;
        cfg.p = 128;
        cfg.counts.resize(2, 2);
        cfg.counts << 384, 256, 64, 40;
        cfg.mean_model = MeanModel::rows;
        cfg.means = Mat::Zero(4, 128);
        cfg.means(0, 0) = 1.0;
        cfg.means(1, 0) = -1.0;
        cfg.means(2, 0) = 0.87;
        cfg.means(2, 1) = 0.5;
        cfg.means.row(3) = -cfg.means.row(2);
        cfg.test_per_class = 100000;
        cfg.hyper = {1.0, Vec::Ones(2)};
        cfg.task = 1;
        cfg.stats = StatsSource::truth;
        for (double e = 1e-3; e < 0.31; e *= std::sqrt(2.0)) cfg.etas.push_back(e);
    } else {
        fail(Errc::BadSpec, "unknown preset '" + name + "'");
    }
    cfg.validate();
    return cfg;
}

SyntheticSpec<double> synthetic_spec(const ExperimentConfig& cfg, std::optional<double> beta) {
    cfg.validate();
    SyntheticSpec<double> s;
    s.k = cfg.k;
    s.m = cfg.m;
    s.p = cfg.p;
    s.counts = cfg.counts;
    s.test_per_class = cfg.test_per_class;
    s.cov = CovModel<double>::identity(cfg.k, cfg.m);
    s.seed = cfg.seed;
    std::vector<double> betas = cfg.betas;
    if (beta && !betas.empty()) betas[0] = *beta;
    const Index k = cfg.k, m = cfg.m, p = cfg.p;
    Mat base = Mat::Zero(m, p);
    std::vector<Mat> perps(static_cast<std::size_t>(k - 1), Mat::Zero(m, p));
    switch (cfg.mean_model) {
        case MeanModel::rows:
            s.means = cfg.means;
            return s;
        case MeanModel::orthogonal:
            for (Index j = 0; j < m; ++j) {
                base(j, j) = cfg.mean_norm;
                for (Index t = 1; t < k; ++t) perps[std::size_t(t - 1)](j, p - 1 - j) = cfg.perp_norm;
            }
            break;
        case MeanModel::antipodal:
            base(0, 0) = cfg.mean_norm;
            base(1, 0) = -cfg.mean_norm;
            for (Index t = 1; t < k; ++t) {
                perps[std::size_t(t - 1)](0, 1) = cfg.perp_norm;
                perps[std::size_t(t - 1)](1, 1) = -cfg.perp_norm;
            }
            break;
    }
    s.means = beta_correlated_means<double>(base, betas, perps);
    return s;
}

ExperimentData experiment_data(const ExperimentConfig& cfg, std::optional<double> beta) {
    if (!cfg.train_path.empty()) {
        ExperimentData d{load_dataset(cfg.train_path), {}, {}};
        if (!cfg.test_path.empty()) d.test = load_dataset(cfg.test_path);
        if (d.train.tasks() != cfg.k || d.train.classes() != cfg.m || d.train.dim() != cfg.p)
            fail(Errc::DimensionMismatch, "training file does not match k, m, p of the config");
        if (d.test && (d.test->tasks() != cfg.k || d.test->classes() != cfg.m || d.test->dim() != cfg.p))
            fail(Errc::DimensionMismatch, "test file does not match k, m, p of the config");
        return d;
    }
    auto gen = generate_synthetic(synthetic_spec(cfg, beta));
    ExperimentData d{std::move(gen.train), {}, std::move(gen.truth)};
    if (cfg.test_per_class > 0) d.test = std::move(gen.test);
    return d;
}

TrainedClassifier train(const ExperimentConfig& cfg, const ExperimentData& data) {
    TrainOptions opt;
    opt.task = cfg.task;
    opt.labels = cfg.labels;
    opt.norm = cfg.norm;
    if (cfg.stats == StatsSource::truth) {
        if (!data.truth) fail(Errc::BadSpec, "true statistics requested but the data has none (loaded from file)");
        opt.truth = *data.truth;
    }
    switch (cfg.classifier) {
        case ClassifierKind::binary: return train_binary(data.train, cfg.hyper, opt);
        case ClassifierKind::one_vs_all: return train_one_vs_all(data.train, cfg.hyper, opt);
        case ClassifierKind::one_vs_one: return train_one_vs_one(data.train, cfg.hyper, opt);
        case ClassifierKind::one_hot: return train_one_hot(data.train, cfg.hyper, opt);
    }
    fail(Errc::BadSpec, "unknown classifier");
}

Dataset<double> select_tasks(const Dataset<double>& ds, const std::vector<Index>& tasks) {
    std::vector<Mat> blocks;
    for (Index t : tasks) {
        if (t < 0 || t >= ds.tasks()) fail(Errc::BadSpec, "task index out of range");
        for (Index j = 0; j < ds.classes(); ++j) blocks.push_back(ds.block(t, j));
    }
    return Dataset<double>(static_cast<Index>(tasks.size()), ds.classes(), std::move(blocks));
}

SufficientStats<double> select_task_stats(const SufficientStats<double>& st, const std::vector<Index>& tasks) {
    const Index m = st.classes(), kk = static_cast<Index>(tasks.size());
    SufficientStats<double> out = st;
    out.means.resize(kk * m, st.means.cols());
    out.half_a.resize(kk * m, st.half_a.cols());
    out.half_b.resize(kk * m, st.half_b.cols());
    out.proportions.counts.resize(kk, m);
    out.cov.alpha.resize(kk, m);
    out.cov.matrices.clear();
    for (Index r = 0; r < kk; ++r) {
        const Index t = tasks[static_cast<std::size_t>(r)];
        out.means.middleRows(r * m, m) = st.means.middleRows(t * m, m);
        out.half_a.middleRows(r * m, m) = st.half_a.middleRows(t * m, m);
        out.half_b.middleRows(r * m, m) = st.half_b.middleRows(t * m, m);
        out.proportions.counts.row(r) = st.proportions.counts.row(t);
        out.cov.alpha.row(r) = st.cov.alpha.row(t);
        if (!st.cov.scalar())
            for (Index j = 0; j < m; ++j) out.cov.matrices.push_back(st.cov.matrices[static_cast<std::size_t>(t * m + j)]);
    }
    return out;
}

std::vector<Table3Entry> run_table3(const ExperimentConfig& cfg) {
    std::vector<Table3Entry> out;
    const std::vector<double> betas = cfg.sweep.empty() ? cfg.betas : cfg.sweep;
    for (std::size_t b = 0; b < betas.size(); ++b) {
        ExperimentConfig run = cfg;
        run.seed = derive_seed(cfg.seed, b);
        const auto data = experiment_data(run, betas[b]);
        if (!data.test) fail(Errc::BadSpec, "table3 needs test samples");
        for (LabelMode mode : {LabelMode::classical, LabelMode::optimized}) {
            run.labels = mode;
            for (ClassifierKind kind : {ClassifierKind::one_vs_all, ClassifierKind::one_vs_one, ClassifierKind::one_hot}) {
                run.classifier = kind;
                const auto clf = train(run, data);
                Table3Entry e;
                e.beta = betas[b];
                e.labels = mode;
                e.method = kind;
                e.empirical = percent(evaluate(clf, *data.test).mean);
                if (kind != ClassifierKind::one_vs_one) {
                    const auto rep = predict_accuracy(clf, derive_seed(run.seed, 0x100 + b), cfg.mc_samples);
                    e.theory = percent(rep.mean);
                    e.theory_error = percent(rep.mean_std_error);
                }
                out.push_back(e);
            }
        }
    }
    return out;
}

std::vector<Fig4Point> run_fig4(const ExperimentConfig& cfg) {
    if (cfg.m != 2) fail(Errc::BadSpec, "fig4 is a binary experiment");
    const auto data = experiment_data(cfg);
    if (!data.test) fail(Errc::BadSpec, "fig4 needs test samples");
    std::vector<Fig4Point> out;
    std::vector<Index> tasks{cfg.task};
    for (Index t = 0; t < cfg.k; ++t)
        if (t != cfg.task) tasks.push_back(t);
    for (std::size_t used = 1; used <= tasks.size(); ++used) {
        const std::vector<Index> sub(tasks.begin(), tasks.begin() + static_cast<std::ptrdiff_t>(used));
        const Dataset<double> train = select_tasks(data.train, sub), test = select_tasks(*data.test, sub);
        Hyperparams<double> h{cfg.hyper.lambda, Vec(static_cast<Index>(used))};
        for (std::size_t r = 0; r < used; ++r) h.gamma(Index(r)) = cfg.hyper.gamma(sub[r]);
        TrainOptions opt;
        opt.task = 0;
        opt.norm = cfg.norm;
        if (cfg.stats == StatsSource::truth) {
            if (!data.truth) fail(Errc::BadSpec, "true statistics requested but the data has none");
            opt.truth = select_task_stats(*data.truth, sub);
        }
        Fig4Point pt;
        pt.tasks = static_cast<Index>(used);
        const Index added = sub.back();
        // betas describe tasks 1.. relative to task 0
        pt.beta_added = used == 1 || cfg.task != 0 || cfg.mean_model == MeanModel::rows
                            ? std::numeric_limits<double>::quiet_NaN()
                            : cfg.betas[static_cast<std::size_t>(added - 1)];
        for (LabelMode mode : {LabelMode::classical, LabelMode::optimized}) {
            opt.labels = mode;
            const auto clf = train_binary(train, h, opt);
            const double err = percent(1.0 - evaluate(clf, test).mean), theory = percent(clf.rule.errors(0));
            (mode == LabelMode::classical ? pt.classical : pt.optimized) = err;
            if (mode == LabelMode::classical)
                pt.classical_zero = percent(empirical_threshold_error(clf.duals.front(), test, 0, 0.0));
            (mode == LabelMode::classical ? pt.classical_theory : pt.optimized_theory) = theory;
        }
        out.push_back(pt);
    }
    return out;
}

std::vector<Fig2Row> run_fig2(const ExperimentConfig& cfg) {
    if (cfg.m != 2) fail(Errc::BadSpec, "fig2 is a binary experiment");
    std::vector<Fig2Row> out;
    const std::vector<double> betas = cfg.sweep.empty() ? cfg.betas : cfg.sweep;
    for (std::size_t b = 0; b < betas.size(); ++b) {
        ExperimentConfig run = cfg;
        run.seed = derive_seed(cfg.seed, b);
        run.classifier = ClassifierKind::binary;
        const auto data = experiment_data(run, betas[b]);
        if (!data.test) fail(Errc::BadSpec, "fig2 needs test samples");
        for (LabelMode mode : {LabelMode::classical, LabelMode::optimized}) {
            run.labels = mode;
            const auto clf = train(run, data);
            Fig2Row row;
            row.beta = betas[b];
            row.labels = mode;
            row.threshold = clf.rule.thresholds(cfg.task);
            row.error_at_threshold = percent(1.0 - evaluate(clf, *data.test).mean);
            row.error_at_zero = percent(empirical_threshold_error(clf.duals.front(), *data.test, cfg.task, 0.0));
            row.predicted_error = percent(clf.rule.errors(cfg.task));
            const Vec g0 = clf.duals.front().score_batch(data.test->block(cfg.task, 0), cfg.task).col(0);
            const Vec g1 = clf.duals.front().score_batch(data.test->block(cfg.task, 1), cfg.task).col(0);
            row.scores_class1.assign(g0.data(), g0.data() + g0.size());
            row.scores_class2.assign(g1.data(), g1.data() + g1.size());
            out.push_back(std::move(row));
        }
    }
    return out;
}

std::vector<RocSeries> run_roc(const ExperimentConfig& cfg) {
    if (cfg.m != 2) fail(Errc::BadSpec, "roc is a binary experiment");
    if (cfg.etas.empty()) fail(Errc::BadSpec, "roc needs false-alarm rates");
    const auto data = experiment_data(cfg);
    TrainOptions opt;
    opt.task = cfg.task;
    opt.norm = cfg.norm;
    if (cfg.stats == StatsSource::truth) {
        if (!data.truth) fail(Errc::BadSpec, "true statistics requested but the data has none");
        opt.truth = *data.truth;
    }
    const auto prob = prepare(data.train, opt);
    const auto law = build_law(prob.stats, cfg.hyper);
    std::vector<RocSeries> out;
    for (LabelMode mode : {LabelMode::classical, LabelMode::optimized}) {
        RocOptions ro;
        ro.labels = mode;
        ro.hyper = cfg.hyper;
        if (data.test) {
            ro.train = &prob.data;
            ro.test = &*data.test;
        }
        out.push_back({mode, roc_curve(law, cfg.task, cfg.etas, ro)});
    }
    return out;
}

nlohmann::json run_experiment(const ExperimentConfig& cfg, const std::string& out_dir) {
    cfg.validate();
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) fail(Errc::IoError, "cannot create " + out_dir);
    const auto path = [&](const std::string& f) { return (std::filesystem::path(out_dir) / f).string(); };

    json report;
    report["schema_version"] = report_schema_version;
    report["preset"] = cfg.preset;
    report["seed"] = cfg.seed;
    report["config"] = to_json(cfg);
    json results = json::array();
    std::vector<std::string> tables;

    if (cfg.preset == "table3") {
        Table t{{"beta", "labels", "method", "empirical", "theory", "theory_std_error"}, {}};
        for (const auto& e : run_table3(cfg)) {
            results.push_back({{"beta", e.beta},
                               {"labels", to_string(e.labels)},
                               {"method", to_string(e.method)},
                               {"empirical", e.empirical},
                               {"theory", e.theory ? json(*e.theory) : json(nullptr)},
                               {"theory_std_error", e.theory_error ? json(*e.theory_error) : json(nullptr)}});
            t.add({format_double(e.beta), to_string(e.labels), to_string(e.method), format_double(e.empirical),
                   e.theory ? format_double(*e.theory) : "", e.theory_error ? format_double(*e.theory_error) : ""});
        }
        t.save(path("table3.csv"));
        tables.push_back("table3.csv");
    } else if (cfg.preset == "fig4") {
        Table t{{"tasks", "beta_added", "classical_error", "classical_error_zero_threshold", "optimized_error", "classical_theory",
                 "optimized_theory"},
                {}};
        for (const auto& pt : run_fig4(cfg)) {
            results.push_back({{"tasks", pt.tasks},
                               {"beta_added", number_or_null(pt.beta_added)},
                               {"classical_error", pt.classical},
                               {"classical_error_zero_threshold", pt.classical_zero},
                               {"optimized_error", pt.optimized},
                               {"classical_theory", pt.classical_theory},
                               {"optimized_theory", pt.optimized_theory}});
            t.add({std::to_string(pt.tasks), std::isfinite(pt.beta_added) ? format_double(pt.beta_added) : "",
                   format_double(pt.classical), format_double(pt.classical_zero), format_double(pt.optimized),
                   format_double(pt.classical_theory),
                   format_double(pt.optimized_theory)});
        }
        t.save(path("fig4.csv"));
        tables.push_back("fig4.csv");
    } else if (cfg.preset == "fig2") {
        Table summary{{"beta", "labels", "threshold", "error_at_threshold", "error_at_zero", "predicted_error"}, {}};
        Table scores{{"beta", "labels", "class", "score"}, {}};
        for (const auto& r : run_fig2(cfg)) {
            results.push_back({{"beta", r.beta},
                               {"labels", to_string(r.labels)},
                               {"threshold", r.threshold},
                               {"error_at_threshold", r.error_at_threshold},
                               {"error_at_zero", r.error_at_zero},
                               {"predicted_error", r.predicted_error}});
            summary.add({format_double(r.beta), to_string(r.labels), format_double(r.threshold),
                         format_double(r.error_at_threshold), format_double(r.error_at_zero), format_double(r.predicted_error)});
            for (double s : r.scores_class1) scores.add({format_double(r.beta), to_string(r.labels), "1", format_double(s)});
            for (double s : r.scores_class2) scores.add({format_double(r.beta), to_string(r.labels), "2", format_double(s)});
        }
        summary.save(path("fig2.csv"));
        scores.save(path("fig2_scores.csv"));
        tables.insert(tables.end(), {"fig2.csv", "fig2_scores.csv"});
    } else if (cfg.preset == "roc") {
        Table t{{"labels", "eta", "threshold", "detection", "empirical_detection", "empirical_false_alarm", "ci_low", "ci_high"},
                {}};
        for (const auto& series : run_roc(cfg))
            for (const auto& pt : series.points) {
                results.push_back({{"labels", to_string(series.labels)},
                                   {"eta", pt.eta},
                                   {"threshold", pt.threshold},
                                   {"detection", pt.detection},
                                   {"empirical_detection", pt.empirical_detection ? json(*pt.empirical_detection) : json(nullptr)},
                                   {"empirical_false_alarm",
                                    pt.empirical_false_alarm ? json(*pt.empirical_false_alarm) : json(nullptr)},
                                   {"ci_low", pt.ci_low},
                                   {"ci_high", pt.ci_high}});
                t.add({to_string(series.labels), format_double(pt.eta), format_double(pt.threshold), format_double(pt.detection),
                       pt.empirical_detection ? format_double(*pt.empirical_detection) : "",
                       pt.empirical_false_alarm ? format_double(*pt.empirical_false_alarm) : "", format_double(pt.ci_low),
                       format_double(pt.ci_high)});
            }
        t.save(path("roc.csv"));
        tables.push_back("roc.csv");
    } else {
        const auto data = experiment_data(cfg);
        const auto clf = train(cfg, data);
        json r{{"classifier", to_string(clf.kind)}, {"labels", to_string(cfg.labels)}};
        const auto rep = predict_accuracy(clf, derive_seed(cfg.seed, 0x100), cfg.mc_samples);
        if (rep.method != AccuracyMethod::unavailable) {
            r["theory_per_class"] = rep.per_class;
            r["theory_std_errors"] = rep.std_errors;
            r["theory_mean"] = rep.mean;
            r["theory_mean_std_error"] = rep.mean_std_error;
        }
        if (data.test) {
            const auto emp = evaluate(clf, *data.test);
            r["empirical_per_class"] = emp.per_class;
            r["empirical_mean"] = emp.mean;
            r["tested"] = emp.tested;
        }
        results.push_back(r);
    }
    report["results"] = results;
    report["tables"] = tables;
    std::ofstream out(path("report.json"));
    if (!out) fail(Errc::IoError, "cannot write " + path("report.json"));
    out << report.dump(2) << '\n';
    return report;
}

}  // namespace mtl
