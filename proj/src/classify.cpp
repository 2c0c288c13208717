#include "mtl/classify.hpp"

#include "mtl/gaussian.hpp"
#include "mtl/orthant.hpp"
#include "mtl/random.hpp"
#include "mtl/stats.hpp"

#include <algorithm>
#include <cmath>

namespace mtl {

namespace {

using Vec = Vector<double>;
using Mat = Matrix<double>;

[[noreturn]] void fail(Errc code, const std::string& what) { throw Error(code, "classifiers-predictor", what); }

/// Ground truth restricted to a subset of classes, in the given order.
SufficientStats<double> select_stats(const SufficientStats<double>& st, const std::vector<Index>& classes) {
    const Index k = st.tasks(), m = st.classes(), mm = static_cast<Index>(classes.size());
    SufficientStats<double> out = st;
    out.means.resize(k * mm, st.means.cols());
    out.half_a.resize(k * mm, st.half_a.cols());
    out.half_b.resize(k * mm, st.half_b.cols());
    out.proportions.counts.resize(k, mm);
    out.cov.alpha.resize(k, mm);
    out.cov.matrices.clear();
    for (Index i = 0; i < k; ++i)
        for (Index c = 0; c < mm; ++c) {
            const Index from = i * m + classes[static_cast<std::size_t>(c)], to = i * mm + c;
            out.means.row(to) = st.means.row(from);
            out.half_a.row(to) = st.half_a.row(from);
            out.half_b.row(to) = st.half_b.row(from);
            out.proportions.counts(i, c) = st.proportions.counts(i, classes[static_cast<std::size_t>(c)]);
            out.cov.alpha(i, c) = st.cov.alpha(i, classes[static_cast<std::size_t>(c)]);
            if (!st.cov.scalar()) out.cov.matrices.push_back(st.cov.matrices[static_cast<std::size_t>(from)]);
        }
    return out;
}

double midpoint(const ScorePrediction<double>& pred, Index task) { return 0.5 * (pred.mean(task, 0) + pred.mean(task, 1)); }

OptimizedLabels<double> classical_binary(const ScoreLaw<double>& law, Index task) {
    OptimizedLabels<double> lab;
    lab.scores = classical_binary_scores<double>(law.tasks());
    lab.provenance = LabelProvenance::classical;
    lab.shift = Vec::Zero(law.tasks());
    const auto pred = law.predict(lab.scores.values);
    lab.threshold = midpoint(pred, task);
    lab.objective = binary_error(pred, task, lab.threshold);
    return lab;
}

/// Class-2-high labels with the threshold fixing the predicted false alarm at eta.
OptimizedLabels<double> neyman_pearson_labels(const ScoreLaw<double>& law, Index task, double eta, LabelMode mode,
                                              const DescentControl& ctl) {
    if (mode == LabelMode::optimized) return optimal_labels_neyman_pearson(law, task, eta, ctl);
    OptimizedLabels<double> lab;
    lab.scores = ScoreAssignment<double>::binary(-classical_binary_scores<double>(law.tasks()).values);
    lab.provenance = LabelProvenance::classical;
    lab.shift = Vec::Zero(law.tasks());
    const auto pred = law.predict(lab.scores.values);
    lab.threshold = pred.mean(task, 0) + std::sqrt(pred.variance(task, 0)) * normal_q_inverse(eta);
    lab.objective = normal_q((lab.threshold - pred.mean(task, 1)) / std::sqrt(pred.variance(task, 1)));
    return lab;
}

Index argmax_row(const Mat& s, Index row) {
    Index best = 0;
    for (Index c = 1; c < s.cols(); ++c)
        if (s(row, c) > s(row, best)) best = c;
    return best;
}

}  // namespace

PreparedProblem prepare(const Dataset<double>& ds, const TrainOptions& opt) {
    PreparedProblem out{normalize_tasks(center_tasks(ds), opt.norm), {}};
    if (opt.task < 0 || opt.task >= ds.tasks()) fail(Errc::BadSpec, "target task out of range");
    if (opt.truth) {
        if (opt.truth->tasks() != ds.tasks() || opt.truth->classes() != ds.classes())
            fail(Errc::DimensionMismatch, "ground-truth statistics do not match the dataset");
        out.stats = rescale_stats(*opt.truth, out.data.scales());
        out.stats.proportions.counts = ds.counts();
    } else {
        out.stats = estimate_stats(out.data, opt.cov);
    }
    return out;
}

Index majority_vote(const std::vector<Index>& winners, Index classes) {
    std::vector<Index> votes(static_cast<std::size_t>(classes), 0);
    for (Index w : winners) ++votes[static_cast<std::size_t>(w)];
    // max_element returns the first maximum, i.e. the smallest tied index
    return static_cast<Index>(std::max_element(votes.begin(), votes.end()) - votes.begin());
}

TrainedClassifier train_binary(const Dataset<double>& ds, const Hyperparams<double>& hyper, const TrainOptions& opt) {
    if (ds.classes() != 2) fail(Errc::BadSpec, "binary classifier needs two classes per task");
    const auto prob = prepare(ds, opt);
    TrainedClassifier clf;
    clf.kind = ClassifierKind::binary;
    clf.task = opt.task;
    clf.classes = 2;
    clf.hyper = hyper;
    if (opt.tune) {
        const std::function<double(const Hyperparams<double>&)> objective = [&](const Hyperparams<double>& h) {
            const auto law = build_law(prob.stats, h);
            return opt.labels == LabelMode::optimized ? optimal_labels_general(law, opt.task, opt.descent).objective
                                                      : classical_binary(law, opt.task).objective;
        };
        clf.hyper = tune_hyperparams(*opt.tune, objective);
    }
    clf.law = build_law(prob.stats, clf.hyper);

    OptimizedLabels<double> lab;
    if (opt.false_alarm) {
        lab = neyman_pearson_labels(clf.law, opt.task, *opt.false_alarm, opt.labels, opt.descent);
    } else {
        lab = opt.labels == LabelMode::optimized ? optimal_labels_general(clf.law, opt.task, opt.descent)
                                                 : classical_binary(clf.law, opt.task);
    }
    const auto pred = clf.law.predict(lab.scores.values);
    clf.rule = decision_threshold(pred, opt.task);
    if (opt.false_alarm) {
        clf.rule.upper = 1;
        clf.rule.thresholds(opt.task) = lab.threshold;
        clf.rule.errors(opt.task) = 1.0 - lab.objective;
    }
    clf.duals.push_back(solve_dual(prob.data, clf.hyper, lab.scores));
    clf.predictions.push_back(pred);
    clf.label_matrix = lab.scores.values;
    clf.labels_used.push_back(std::move(lab));
    return clf;
}

TrainedClassifier train_one_vs_all(const Dataset<double>& ds, const Hyperparams<double>& hyper, const TrainOptions& opt) {
    const Index k = ds.tasks(), m = ds.classes();
    const auto prob = prepare(ds, opt);
    TrainedClassifier clf;
    clf.kind = ClassifierKind::one_vs_all;
    clf.task = opt.task;
    clf.classes = m;
    clf.hyper = hyper;
    clf.law = build_law(prob.stats, hyper);
    clf.label_matrix.resize(k * m, m);
    clf.rule.kind = opt.labels == LabelMode::optimized ? DecisionKind::argmax_scaled : DecisionKind::argmax;
    clf.rule.scales = Mat::Ones(k, m);
    for (Index ell = 0; ell < m; ++ell) {
        OptimizedLabels<double> lab;
        if (opt.labels == LabelMode::optimized) {
            lab = optimal_labels_one_vs_all(clf.law, opt.task, ell, opt.one_vs_all);
        } else {
            lab.scores = ScoreAssignment<double>::binary(one_vs_rest_scores<double>(k, m, ell).values);
            lab.provenance = LabelProvenance::classical;
            lab.shift = Vec::Zero(k);
        }
        const Vec y = lab.scores.values.col(0);
        clf.label_matrix.col(ell) = y;
        const auto pred = clf.law.predict(y);
        if (opt.labels == LabelMode::optimized)
            for (Index i = 0; i < k; ++i) clf.rule.scales(i, ell) = std::sqrt(pred.variance(i, ell));
        clf.predictions.push_back(pred);
        clf.duals.push_back(solve_dual(prob.data, hyper, lab.scores));
        clf.labels_used.push_back(std::move(lab));
    }
    return clf;
}

TrainedClassifier train_one_vs_one(const Dataset<double>& ds, const Hyperparams<double>& hyper, const TrainOptions& opt) {
    const Index m = ds.classes();
    if (m < 2) fail(Errc::BadSpec, "one-vs-one needs at least two classes");
    TrainedClassifier clf;
    clf.kind = ClassifierKind::one_vs_one;
    clf.task = opt.task;
    clf.classes = m;
    clf.hyper = hyper;
    for (Index a = 0; a < m; ++a)
        for (Index b = a + 1; b < m; ++b) {
            TrainOptions sub = opt;
            sub.false_alarm.reset();
            if (opt.truth) sub.truth = select_stats(*opt.truth, {a, b});
            auto pair = train_binary(select_classes(ds, {a, b}), hyper, sub);
            clf.pairs.emplace_back(a, b);
            clf.pair_thresholds.push_back(pair.rule.thresholds(opt.task));
            clf.duals.push_back(std::move(pair.duals.front()));
            clf.predictions.push_back(std::move(pair.predictions.front()));
            clf.labels_used.push_back(std::move(pair.labels_used.front()));
        }
    clf.rule.kind = DecisionKind::threshold;
    clf.rule.thresholds = Eigen::Map<const Vec>(clf.pair_thresholds.data(), Index(clf.pair_thresholds.size()));
    return clf;
}

TrainedClassifier train_one_hot(const Dataset<double>& ds, const Hyperparams<double>& hyper, const TrainOptions& opt) {
    const auto prob = prepare(ds, opt);
    TrainedClassifier clf;
    clf.kind = ClassifierKind::one_hot;
    clf.task = opt.task;
    clf.classes = ds.classes();
    clf.hyper = hyper;
    clf.law = build_law(prob.stats, hyper);
    OptimizedLabels<double> lab;
    if (opt.labels == LabelMode::optimized) {
        lab = optimal_labels_one_hot(clf.law, opt.task, opt.one_hot);
    } else {
        lab.scores = one_hot_scores<double>(ds.tasks(), ds.classes());
        lab.provenance = LabelProvenance::classical;
        lab.shift = Vec::Zero(ds.tasks());
    }
    clf.rule.kind = DecisionKind::argmax;
    clf.label_matrix = lab.scores.values;
    clf.predictions.push_back(clf.law.predict(lab.scores.values));
    clf.duals.push_back(solve_dual(prob.data, hyper, lab.scores));
    clf.labels_used.push_back(std::move(lab));
    return clf;
}

std::vector<Index> TrainedClassifier::classify_batch(const Matrix<double>& x) const {
    const Index n = x.cols();
    std::vector<Index> out(static_cast<std::size_t>(n));
    switch (kind) {
        case ClassifierKind::binary: {
            const Mat s = duals.front().score_batch(x, task);
            const double zeta = rule.thresholds(task);
            for (Index t = 0; t < n; ++t) out[static_cast<std::size_t>(t)] = s(t, 0) >= zeta ? rule.upper : 1 - rule.upper;
            break;
        }
        case ClassifierKind::one_vs_all: {
            Mat s(n, classes);
            for (Index ell = 0; ell < classes; ++ell)
                s.col(ell) = duals[static_cast<std::size_t>(ell)].score_batch(x, task).col(0) / rule.scales(task, ell);
            for (Index t = 0; t < n; ++t) out[static_cast<std::size_t>(t)] = argmax_row(s, t);
            break;
        }
        case ClassifierKind::one_hot: {
            const Mat s = duals.front().score_batch(x, task);
            for (Index t = 0; t < n; ++t) out[static_cast<std::size_t>(t)] = argmax_row(s, t);
            break;
        }
        case ClassifierKind::one_vs_one: {
            std::vector<Vec> g;
            for (const auto& d : duals) g.push_back(d.score_batch(x, task).col(0));
            std::vector<Index> winners(pairs.size());
            for (Index t = 0; t < n; ++t) {
                for (std::size_t q = 0; q < pairs.size(); ++q)
                    winners[q] = g[q](t) >= pair_thresholds[q] ? pairs[q].first : pairs[q].second;
                out[static_cast<std::size_t>(t)] = majority_vote(winners, classes);
            }
            break;
        }
    }
    return out;
}

Index TrainedClassifier::classify(const Vector<double>& x) const { return classify_batch(Mat(x)).front(); }

AccuracyReport predict_accuracy(const ScoreLaw<double>& law, const Matrix<double>& y, Index task, const Vector<double>& scales,
                                std::uint64_t seed, Index samples) {
    const Index m = law.classes();
    AccuracyReport rep;
    rep.method = m == 2 ? AccuracyMethod::closed_form_1d : AccuracyMethod::mc_orthant;
    double se2 = 0.0;
    for (Index j = 0; j < m; ++j) {
        const auto [mean, cov] = decision_moments<double>(law, y, task, j, scales);
        double p = 0.0, se = 0.0;
        if (m == 2) {
            if (!(cov(0, 0) > 0.0)) fail(Errc::ZeroVariance, "score difference has no variance");
            p = normal_q(-mean(0) / std::sqrt(cov(0, 0)));
        } else {
            const auto est = orthant_probability(mean, cov, derive_seed(seed, std::uint64_t(j)), samples);
            p = est.probability;
            se = est.std_error;
        }
        rep.per_class.push_back(p);
        rep.std_errors.push_back(se);
        rep.mean += p / double(m);
        se2 += se * se / double(m * m);
    }
    rep.mean_std_error = std::sqrt(se2);
    return rep;
}

AccuracyReport predict_accuracy(const TrainedClassifier& clf, std::uint64_t seed, Index samples) {
    switch (clf.kind) {
        case ClassifierKind::one_vs_one: {
            AccuracyReport rep;
            rep.method = AccuracyMethod::unavailable;
            rep.mean = std::numeric_limits<double>::quiet_NaN();
            return rep;
        }
        case ClassifierKind::one_vs_all:
            return predict_accuracy(clf.law, clf.label_matrix, clf.task, Vec(clf.rule.scales.row(clf.task).transpose()), seed,
                                    samples);
        case ClassifierKind::one_hot:
            return predict_accuracy(clf.law, clf.label_matrix, clf.task, {}, seed, samples);
        case ClassifierKind::binary: {
            AccuracyReport rep;
            rep.method = AccuracyMethod::closed_form_1d;
            const auto& pred = clf.predictions.front();
            const double zeta = clf.rule.thresholds(clf.task);
            const double s1 = std::sqrt(pred.variance(clf.task, 0)), s2 = std::sqrt(pred.variance(clf.task, 1));
            // probability of landing on the own side of the threshold
            const double up0 = normal_q((zeta - pred.mean(clf.task, 0)) / s1), up1 = normal_q((zeta - pred.mean(clf.task, 1)) / s2);
            rep.per_class = clf.rule.upper == 0 ? std::vector<double>{up0, 1.0 - up1} : std::vector<double>{1.0 - up0, up1};
            rep.std_errors = {0.0, 0.0};
            rep.mean = 0.5 * (rep.per_class[0] + rep.per_class[1]);
            return rep;
        }
    }
    return {};
}

EmpiricalReport evaluate(const TrainedClassifier& clf, const Dataset<double>& test) {
    if (test.classes() != clf.classes) fail(Errc::DimensionMismatch, "test set has a different number of classes");
    EmpiricalReport rep;
    for (Index j = 0; j < clf.classes; ++j) {
        const auto& block = test.block(clf.task, j);
        const auto out = clf.classify_batch(block);
        const Index hits = std::count(out.begin(), out.end(), j);
        rep.tested.push_back(block.cols());
        rep.per_class.push_back(block.cols() > 0 ? double(hits) / double(block.cols()) : 0.0);
        rep.mean += rep.per_class.back() / double(clf.classes);
    }
    return rep;
}

std::vector<RocPoint> roc_curve(const ScoreLaw<double>& law, Index task, std::vector<double> etas, const RocOptions& opt) {
    if (law.classes() != 2) fail(Errc::BadSpec, "ROC needs a binary law");
    std::sort(etas.begin(), etas.end());
    std::vector<RocPoint> out;
    for (double eta : etas) {
        const auto lab = neyman_pearson_labels(law, task, eta, opt.labels, opt.descent);
        RocPoint pt;
        pt.eta = eta;
        pt.threshold = lab.threshold;
        pt.detection = lab.objective;
        if (opt.train && opt.test) {
            const auto dual = solve_dual(*opt.train, opt.hyper, lab.scores);
            const Vec g1 = dual.score_batch(opt.test->block(task, 0), task).col(0);
            const Vec g2 = dual.score_batch(opt.test->block(task, 1), task).col(0);
            const Index fa = (g1.array() > lab.threshold).count(), hits = (g2.array() > lab.threshold).count();
            pt.empirical_false_alarm = double(fa) / double(g1.size());
            pt.empirical_detection = double(hits) / double(g2.size());
            std::tie(pt.ci_low, pt.ci_high) = wilson_interval(hits, g2.size());
        }
        out.push_back(pt);
    }
    return out;
}

}  // namespace mtl
