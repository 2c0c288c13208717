// mtl: experiment driver for the multi-task LS-SVM library.
//
//   mtl gen      --preset fig2 --out data/
//   mtl train    --config run.json
//   mtl predict  --config run.json --input points.csv
//   mtl accuracy --preset table3 --labels classical
//   mtl roc      --preset roc --out roc/
//   mtl sweep    --config run.json --lambdas 0.1,1,10
//   mtl report   --preset fig4 --seed 3 --out fig4/
//
// Failures print "error [Category] module: message" and exit with status 2.

#include "mtl/experiment.hpp"
#include "mtl/io.hpp"
#include "mtl/random.hpp"

#include "CLI11.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>

using namespace mtl;
using json = nlohmann::json;

namespace {

struct GlobalOptions {
    std::string config, preset, out = ".";
    std::optional<std::uint64_t> seed;
    std::string stats, labels, norm, classifier, train, test;
};

/// Built-in config when neither --config nor --preset is given.
ExperimentConfig default_config() {
    ExperimentConfig cfg;
    cfg.counts.resize(2, 2);
    cfg.counts << 200, 200, 50, 50;
    cfg.mean_norm = 1.5;
    cfg.perp_norm = 1.5;
    cfg.betas = {0.5};
    cfg.task = 1;
    return cfg;
}

ExperimentConfig resolve(const GlobalOptions& g) {
    json j;
    if (!g.config.empty()) {
        j = to_json(load_config(g.config));
    } else if (!g.preset.empty()) {
        j = to_json(preset_config(g.preset));
    } else {
        j = to_json(default_config());
    }
    // overrides go through the JSON reader so they get the same checks as a config file
    if (g.seed) j["seed"] = *g.seed;
    if (!g.stats.empty()) j["stats"] = g.stats;
    if (!g.labels.empty()) j["labels"] = g.labels;
    if (!g.norm.empty()) j["norm"] = g.norm;
    if (!g.classifier.empty()) j["classifier"] = g.classifier;
    if (!g.train.empty()) j["train_path"] = g.train;
    if (!g.test.empty()) j["test_path"] = g.test;
    return config_from_json(j);
}

std::string out_path(const GlobalOptions& g, const std::string& file) {
    std::error_code ec;
    std::filesystem::create_directories(g.out, ec);
    if (ec) throw Error(Errc::IoError, "cli-io", "cannot create " + g.out);
    return (std::filesystem::path(g.out) / file).string();
}

void write_json(const std::string& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw Error(Errc::IoError, "cli-io", "cannot write " + path);
    out << j.dump(2) << '\n';
}

json matrix_json(const Matrix<double>& a) {
    json rows = json::array();
    for (Index r = 0; r < a.rows(); ++r) {
        json row = json::array();
        for (Index c = 0; c < a.cols(); ++c) row.push_back(a(r, c));
        rows.push_back(row);
    }
    return rows;
}

json classifier_json(const TrainedClassifier& clf) {
    json j{{"classifier", to_string(clf.kind)}, {"task", clf.task + 1}, {"classes", clf.classes}};
    json machines = json::array();
    for (const auto& lab : clf.labels_used)
        machines.push_back({{"scores", matrix_json(lab.scores.values)}, {"objective", lab.objective}});
    j["machines"] = machines;
    if (clf.rule.thresholds.size() > 0) {
        j["thresholds"] = std::vector<double>(clf.rule.thresholds.data(), clf.rule.thresholds.data() + clf.rule.thresholds.size());
        j["upper_class"] = clf.rule.upper + 1;
    }
    if (clf.rule.errors.size() > 0)
        j["predicted_errors"] = std::vector<double>(clf.rule.errors.data(), clf.rule.errors.data() + clf.rule.errors.size());
    if (!clf.pair_thresholds.empty()) j["pair_thresholds"] = clf.pair_thresholds;
    return j;
}

int cmd_gen(const GlobalOptions& g) {
    auto cfg = resolve(g);
    if (!cfg.train_path.empty()) throw Error(Errc::BadSpec, "cli-io", "gen draws synthetic data; drop --train");
    // beta-sweep presets draw at their first beta
    const bool beta_sweep = (cfg.preset == "table3" || cfg.preset == "fig2") && !cfg.sweep.empty();
    const auto spec = synthetic_spec(cfg, beta_sweep ? std::optional<double>(cfg.sweep.front()) : std::nullopt);
    const auto data = generate_synthetic(spec);
    save_dataset(out_path(g, "train.csv"), data.train);
    if (cfg.test_per_class > 0) save_dataset(out_path(g, "test.csv"), data.test);
    write_json(out_path(g, "config.json"), to_json(cfg));
    std::cout << "wrote " << data.train.counts().sum() << " training and " << data.test.counts().sum()
              << " test samples to " << g.out << '\n';
    return 0;
}

int cmd_train(const GlobalOptions& g) {
    const auto cfg = resolve(g);
    const auto clf = train(cfg, experiment_data(cfg));
    json j{{"schema_version", report_schema_version}, {"config", to_json(cfg)}, {"model", classifier_json(clf)}};
    write_json(out_path(g, "model.json"), j);
    std::cout << j["model"].dump(2) << '\n';
    return 0;
}

int cmd_predict(const GlobalOptions& g, const std::string& input) {
    // the model is not persisted: predict retrains from the same config and seed
    const auto cfg = resolve(g);
    const auto clf = train(cfg, experiment_data(cfg));
    const auto points = load_dataset(input);
    if (points.dim() != cfg.p) throw Error(Errc::DimensionMismatch, "cli-io", input + " has a different dimension");
    if (points.tasks() <= cfg.task) throw Error(Errc::DimensionMismatch, "cli-io", input + " has no rows of the target task");
    Table t{{"row", "class", "predicted"}, {}};
    Index row = 0, correct = 0;
    for (Index j = 0; j < points.classes(); ++j) {
        const auto pred = clf.classify_batch(points.block(cfg.task, j));
        for (Index c : pred) {
            t.add({std::to_string(++row), std::to_string(j + 1), std::to_string(c + 1)});
            correct += c == j;
        }
    }
    t.save(out_path(g, "predictions.csv"));
    std::cout << row << " points classified, " << correct << " agree with the file's class column\n";
    return 0;
}

int cmd_accuracy(const GlobalOptions& g) {
    const auto cfg = resolve(g);
    const auto data = experiment_data(cfg);
    const auto clf = train(cfg, data);
    json j{{"schema_version", report_schema_version}, {"config", to_json(cfg)}, {"classifier", to_string(clf.kind)}};
    const auto rep = predict_accuracy(clf, derive_seed(cfg.seed, 0x100), cfg.mc_samples);
    if (rep.method != AccuracyMethod::unavailable) {
        j["theory_per_class"] = rep.per_class;
        j["theory_std_errors"] = rep.std_errors;
        j["theory_mean"] = rep.mean;
        j["theory_mean_std_error"] = rep.mean_std_error;
    }
    if (data.test) {
        const auto emp = evaluate(clf, *data.test);
        j["empirical_per_class"] = emp.per_class;
        j["empirical_mean"] = emp.mean;
        j["tested"] = emp.tested;
    }
    write_json(out_path(g, "accuracy.json"), j);
    std::cout << "theory " << (rep.method == AccuracyMethod::unavailable ? json(nullptr) : json(rep.mean)) << ", empirical "
              << (data.test ? j["empirical_mean"] : json(nullptr)) << '\n';
    return 0;
}

int cmd_roc(const GlobalOptions& g) {
    auto cfg = resolve(g);
    if (cfg.etas.empty())
        for (double e = 1e-3; e < 0.31; e *= std::sqrt(2.0)) cfg.etas.push_back(e);
    Table t{{"labels", "eta", "threshold", "detection", "empirical_detection", "empirical_false_alarm", "ci_low", "ci_high"}, {}};
    for (const auto& s : run_roc(cfg))
        for (const auto& pt : s.points)
            t.add({to_string(s.labels), format_double(pt.eta), format_double(pt.threshold), format_double(pt.detection),
                   pt.empirical_detection ? format_double(*pt.empirical_detection) : "",
                   pt.empirical_false_alarm ? format_double(*pt.empirical_false_alarm) : "", format_double(pt.ci_low),
                   format_double(pt.ci_high)});
    t.save(out_path(g, "roc.csv"));
    t.write(std::cout);
    return 0;
}

int cmd_sweep(const GlobalOptions& g, std::vector<double> lambdas) {
    auto cfg = resolve(g);
    if (cfg.m != 2) throw Error(Errc::BadSpec, "cli-io", "sweep runs the binary classifier");
    if (lambdas.empty()) lambdas = {0.01, 0.1, 1.0, 10.0, 100.0};
    cfg.classifier = ClassifierKind::binary;
    const auto data = experiment_data(cfg);
    Table t{{"lambda", "labels", "predicted_error", "empirical_error"}, {}};
    for (double lambda : lambdas) {
        cfg.hyper.lambda = lambda;
        for (LabelMode mode : {LabelMode::classical, LabelMode::optimized}) {
            cfg.labels = mode;
            const auto clf = train(cfg, data);
            t.add({format_double(lambda), to_string(mode), format_double(clf.rule.errors(cfg.task)),
                   data.test ? format_double(1.0 - evaluate(clf, *data.test).mean) : ""});
        }
    }
    t.save(out_path(g, "sweep.csv"));
    t.write(std::cout);
    return 0;
}

int cmd_report(const GlobalOptions& g) {
    const auto cfg = resolve(g);
    const auto report = run_experiment(cfg, g.out);
    std::cout << "wrote report.json";
    for (const auto& f : report["tables"]) std::cout << ", " << f.get<std::string>();
    std::cout << " to " << g.out << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multi-task LS-SVM experiments"};
    app.require_subcommand(1);
    GlobalOptions g;
    std::uint64_t seed = 0;
    auto* seed_opt = app.add_option("--seed", seed, "Base seed")->group("Global");
    app.add_option("--config", g.config, "Experiment config (JSON)")->check(CLI::ExistingFile)->group("Global");
    app.add_option("--preset", g.preset, "table3, fig2, fig4 or roc")->group("Global");
    app.add_option("--out", g.out, "Output directory")->capture_default_str()->group("Global");
    app.add_option("--stats", g.stats, "Statistics for the theory")->check(CLI::IsMember({"true", "estimated"}))->group("Global");
    app.add_option("--labels", g.labels, "Label scores")->check(CLI::IsMember({"classical", "optimized"}))->group("Global");
    app.add_option("--norm", g.norm, "Task normalization")->check(CLI::IsMember({"trace", "sqrt_trace"}))->group("Global");
    app.add_option("--classifier", g.classifier, "binary, one_vs_all, one_vs_one or one_hot")->group("Global");
    app.add_option("--train", g.train, "Training CSV instead of a synthetic draw")->group("Global");
    app.add_option("--test", g.test, "Test CSV")->group("Global");
    app.fallthrough();

    auto* gen = app.add_subcommand("gen", "Draw the configured synthetic train and test sets");
    auto* trn = app.add_subcommand("train", "Train and print the labels, thresholds and predicted errors");
    auto* prd = app.add_subcommand("predict", "Classify the target-task rows of a CSV file");
    std::string input;
    prd->add_option("--input", input, "Dataset CSV to classify")->required()->check(CLI::ExistingFile);
    auto* acc = app.add_subcommand("accuracy", "Predicted and empirical accuracy");
    auto* roc = app.add_subcommand("roc", "Neyman-Pearson operating points");
    auto* swp = app.add_subcommand("sweep", "Predicted error over a lambda grid");
    std::vector<double> lambdas;
    swp->add_option("--lambdas", lambdas, "Grid of lambda values")->delimiter(',');
    auto* rep = app.add_subcommand("report", "Run a preset and write report.json plus its CSV tables");
    for (auto* sub : {gen, trn, prd, acc, roc, swp, rep}) sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error [UsageError] cli-io: " << e.what() << '\n';
        return 2;
    }
    if (seed_opt->count() > 0) g.seed = seed;

    try {
        if (*gen) return cmd_gen(g);
        if (*trn) return cmd_train(g);
        if (*prd) return cmd_predict(g, input);
        if (*acc) return cmd_accuracy(g);
        if (*roc) return cmd_roc(g);
        if (*swp) return cmd_sweep(g, lambdas);
        if (*rep) return cmd_report(g);
    } catch (const Error& e) {
        std::cerr << "error [" << errc_name(e.code()) << "] " << e.module() << ": " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error [Internal] cli-io: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
