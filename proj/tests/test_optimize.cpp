#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "mtl/gaussian.hpp"
#include "mtl/optimize.hpp"
#include "mtl/orthant.hpp"
#include "mtl/synthetic.hpp"
#include "support.hpp"

#include <cmath>
#include <random>

using namespace mtl;

namespace {

double max_abs(const Matrix<double>& a) { return a.cwiseAbs().maxCoeff(); }

struct BinaryConfig {
    SufficientStats<double> stats;
    Hyperparams<double> hyper;
};

/// Random binary multi-task config: means in a low-dimensional subspace, random counts and hyperparameters.
BinaryConfig random_binary(std::mt19937_64& rng, Index k, Index p, bool general_cov) {
    std::uniform_int_distribution<Index> n(20, 200);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    IndexMatrix c(k, 2);
    for (Index a = 0; a < 2 * k; ++a) c(a / 2, a % 2) = n(rng);
    Matrix<double> mu = Matrix<double>::Zero(2 * k, p);
    mu.leftCols(4) = testing::gaussian(2 * k, 4, rng, 0.6);
    CovModel<double> cov = CovModel<double>::identity(k, 2);
    if (general_cov) {
        Matrix<double> alpha(k, 2);
        for (Index a = 0; a < 2 * k; ++a) alpha(a / 2, a % 2) = 0.5 + 1.5 * u(rng);
        cov = CovModel<double>::isotropic(alpha);
    }
    Vector<double> g(k);
    for (Index i = 0; i < k; ++i) g(i) = 0.3 + 2.0 * u(rng);
    return {known_stats<double>(mu, cov, c), Hyperparams<double>{std::pow(10.0, 2.0 * u(rng) - 1.0), g}};
}

double midpoint_error(const ScoreLaw<double>& law, const Vector<double>& y, Index task) {
    const auto pred = law.predict(y);
    return binary_error(pred, task, 0.5 * (pred.mean(task, 0) + pred.mean(task, 1)));
}

Matrix<double> beta_means(Index m, Index p, double beta) {
    Matrix<double> base = Matrix<double>::Zero(m, p), perp = Matrix<double>::Zero(m, p);
    for (Index j = 0; j < m; ++j) {
        base(j, j) = 2.0;
        perp(j, p - 1 - j) = 1.0;
    }
    return beta_correlated_means<double>(base, {beta}, {perp});
}

}  // namespace

TEST_CASE("isotropic closed form is the Rayleigh optimum") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 10; ++trial) {
        const auto cfg = random_binary(rng, 3, 80, false);
        const auto iso = build_isotropic_stats(cfg.stats, cfg.hyper);
        const auto law = score_law(iso);
        for (Index task = 0; task < 3; ++task) {
            const auto opt = optimal_labels_isotropic(iso, task);
            CHECK(std::abs(opt.scores.values.norm() - 1.0) < 1e-12);
            CHECK(std::abs(opt.objective - optimal_error_isotropic(iso, task)) < 1e-10);
            const auto gen = optimal_labels_general(law, task);
            CHECK(gen.provenance == LabelProvenance::closed_form);
            CHECK(max_abs(gen.scores.values - opt.scores.values) < 1e-8);
            // random perturbations never beat it
            for (int r = 0; r < 5; ++r) {
                const Vector<double> y = opt.scores.values + 0.2 * testing::gaussian(6, 1, rng);
                CHECK(midpoint_error(law, y, task) >= opt.objective - 1e-12);
            }
        }
    }
}

TEST_CASE("equal counts give antisymmetric labels and a zero threshold") {
    const auto c = testing::counts({{50, 50}, {50, 50}, {50, 50}});
    std::mt19937_64 rng(5);
    Matrix<double> mu = Matrix<double>::Zero(6, 60);
    mu.leftCols(3) = testing::gaussian(6, 3, rng, 0.7);
    const auto iso = build_isotropic_stats(known_stats<double>(mu, CovModel<double>::identity(3, 2), c),
                                           Hyperparams<double>{1.0, Vector<double>::Ones(3)});
    const auto opt = optimal_labels_isotropic(iso, 1);
    for (Index i = 0; i < 3; ++i) CHECK(std::abs(opt.scores.values(2 * i) + opt.scores.values(2 * i + 1)) < 1e-12);
    CHECK(std::abs(opt.threshold) < 1e-12);
    CHECK(opt.scores.values(2) > 0.0);
}

TEST_CASE("orthogonal tasks receive no weight") {
    const auto c = testing::counts({{40, 70}, {60, 30}, {25, 45}});
    Matrix<double> mu = Matrix<double>::Zero(6, 50);
    mu(0, 0) = 1.2;
    mu(1, 0) = -0.8;
    mu(2, 1) = 1.0;
    mu(3, 2) = 0.7;
    mu(4, 3) = -1.5;
    mu(5, 3) = 0.5;
    const auto iso = build_isotropic_stats(known_stats<double>(mu, CovModel<double>::identity(3, 2), c),
                                           Hyperparams<double>{2.0, Vector<double>::Ones(3)});
    const auto opt = optimal_labels_isotropic(iso, 0);
    CHECK(opt.scores.values.col(0).tail(4).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("optimized labels dominate classical labels") {
    std::mt19937_64 rng(2024);
    const Vector<double> classical = classical_binary_scores<double>(3).values;
    for (int trial = 0; trial < 50; ++trial) {
        const auto cfg = random_binary(rng, 3, 100, false);
        const auto iso = build_isotropic_stats(cfg.stats, cfg.hyper);
        const double star = optimal_error_isotropic(iso, 0);
        CHECK(star <= midpoint_error(score_law(iso), classical, 0) + 1e-15);
    }
    SUBCASE("unequal class covariances") {
        for (int trial = 0; trial < 50; ++trial) {
            const auto cfg = random_binary(rng, 3, 100, true);
            const auto law = build_law(cfg.stats, cfg.hyper);
            const auto opt = optimal_labels_general(law, 0);
            CHECK(opt.provenance == LabelProvenance::gradient_descent);
            CHECK(opt.converged);
            CHECK(opt.objective <= midpoint_error(law, classical, 0) + 1e-15);
            CHECK(opt.objective <= opt.history.front() + 1e-15);
            for (std::size_t s = 1; s < opt.history.size(); ++s) CHECK(opt.history[s] <= opt.history[s - 1]);
        }
    }
}

TEST_CASE("scale and shift invariance of the predicted error") {
    std::mt19937_64 rng(8);
    const auto cfg = random_binary(rng, 2, 90, true);
    const auto law = build_law(cfg.stats, cfg.hyper);
    const auto opt = optimal_labels_general(law, 1);
    const Vector<double> y = opt.scores.values;
    for (double c : {1e-3, 0.5, 7.0, 1e4}) CHECK(std::abs(midpoint_error(law, c * y, 1) - opt.objective) < 1e-12);
    Vector<double> shifted = y;
    shifted.segment(0, 2).array() += 0.37;
    shifted.segment(2, 2).array() -= 1.1;
    const auto a = law.predict(y), b = law.predict(shifted);
    CHECK(std::abs((a.mean(1, 0) - a.mean(1, 1)) - (b.mean(1, 0) - b.mean(1, 1))) < 1e-12);
    CHECK(std::abs(a.variance(1, 0) - b.variance(1, 0)) < 1e-12);
    CHECK(std::abs(a.variance(1, 1) - b.variance(1, 1)) < 1e-12);
    CHECK(std::abs(midpoint_error(law, shifted, 1) - opt.objective) < 1e-12);
}

TEST_CASE("midpoint threshold and its error") {
    ScorePrediction<double> pred;
    pred.m = 2;
    pred.means.resize(4, 1);
    pred.means << 0.8, -0.8, 1.5, 0.1;
    for (double v : {0.25, 0.25, 0.49, 0.49}) pred.covariances.push_back(Matrix<double>::Constant(1, 1, v));
    const auto rule = decision_threshold(pred, 0);
    CHECK(rule.kind == DecisionKind::threshold);
    CHECK(rule.thresholds(0) == 0.0);
    CHECK(std::abs(rule.thresholds(1) - 0.8) < 1e-15);
    CHECK(std::abs(rule.errors(0) - normal_q(1.6 / (2 * 0.5))) < 1e-15);
    CHECK(std::abs(rule.errors(1) - normal_q(1.4 / (2 * 0.7))) < 1e-15);
}

TEST_CASE("zero shift") {
    std::mt19937_64 rng(13);
    const auto cfg = random_binary(rng, 3, 70, true);
    const auto law = build_law(cfg.stats, cfg.hyper);
    const Vector<double> y = optimal_labels_general(law, 2).scores.values;
    const double before = midpoint_error(law, y, 2);
    const auto mid = zero_shift(law, y, 2, ShiftMode::midpoint_zero);
    const auto pm = law.predict(mid.scores.values);
    CHECK(std::abs(pm.mean(2, 0) + pm.mean(2, 1)) < 1e-10);
    CHECK(std::abs(mid.objective - before) < 1e-10);
    CHECK(mid.shift.head(2).isZero());
    const auto first = zero_shift(law, y, 2, ShiftMode::class_mean_zero, 0);
    CHECK(std::abs(law.predict(first.scores.values).mean(2, 0)) < 1e-10);

    SUBCASE("balanced symmetric configuration needs no shift") {
        const auto c = testing::counts({{40, 40}, {40, 40}});
        Matrix<double> mu = Matrix<double>::Zero(4, 30);
        mu(0, 0) = 1.0;
        mu(1, 0) = -1.0;
        mu(2, 0) = 0.6;
        mu(2, 1) = 0.8;
        mu.row(3) = -mu.row(2);
        const auto iso = build_isotropic_stats(known_stats<double>(mu, CovModel<double>::identity(2, 2), c),
                                               Hyperparams<double>{1.0, Vector<double>::Ones(2)});
        const auto opt = optimal_labels_isotropic(iso, 0);
        CHECK(std::abs(zero_shift(score_law(iso), opt.scores.values.col(0).eval(), 0, ShiftMode::midpoint_zero).shift(0)) < 1e-12);
    }
}

TEST_CASE("Neyman-Pearson labels") {
    const Index p = 128;
    Matrix<double> mu = Matrix<double>::Zero(4, p);
    mu(0, 0) = 1.0;
    mu(1, 0) = -1.0;
    mu(2, 0) = 0.87;
    mu(2, 1) = 0.5;
    mu.row(3) = -mu.row(2);
    Matrix<double> alpha(2, 2);
    alpha << 1.0, 1.6, 0.8, 1.3;
    const auto st = known_stats<double>(mu, CovModel<double>::isotropic(alpha), testing::counts({{384, 256}, {64, 40}}));
    const auto law = build_law(st, Hyperparams<double>{1.0, Vector<double>::Ones(2)});

    const auto half = optimal_labels_neyman_pearson(law, 1, 0.5);
    CHECK(half.threshold == law.predict(half.scores.values).mean(1, 0));

    double last = 0.0;
    for (double eta : {1e-3, 1e-2, 0.05, 0.1, 0.2, 0.3, 0.5, 0.8}) {
        const auto np = optimal_labels_neyman_pearson(law, 1, eta);
        const auto pred = law.predict(np.scores.values);
        // false alarm under the predicted law is eta
        CHECK(std::abs(normal_q((np.threshold - pred.mean(1, 0)) / std::sqrt(pred.variance(1, 0))) - eta) < 1e-12);
        CHECK(np.objective >= np.history.front() - 1e-15);
        CHECK(np.objective >= last - 1e-12);
        last = np.objective;
    }
    CHECK_THROWS_AS(optimal_labels_neyman_pearson(law, 1, 0.0), Error);
}

TEST_CASE("one-vs-all labels") {
    const Index m = 3, p = 100;
    const auto c = testing::counts({{120, 90, 150}, {20, 60, 40}});
    const auto st = known_stats<double>(beta_means(m, p, 0.3), CovModel<double>::identity(2, m), c);
    const auto law = build_law(st, Hyperparams<double>{1.0, Vector<double>::Ones(2)});
    for (Index ell = 0; ell < m; ++ell) {
        const auto opt = optimal_labels_one_vs_all(law, 1, ell);
        const auto pred = law.predict(opt.scores.values);
        CHECK(std::abs(pred.mean(1, ell)) < 1e-9);
        CHECK(std::abs(pred.variance(1, ell) - 1.0) < 1e-9);
        for (std::size_t s = 1; s < opt.history.size(); ++s) {
            // the two relaxation passes restart the history at a new smoothing level
            if (opt.history[s] > opt.history[s - 1]) CHECK(s > 1);
        }
        // better separation than the +-1 initializer
        const auto naive = zero_shift(law, one_vs_rest_scores<double>(2, m, ell).values.col(0).eval(), 1,
                                      ShiftMode::class_mean_zero, ell);
        CHECK(opt.objective <= naive.objective + 1e-12);
    }
    SUBCASE("collapsed rest variant runs") {
        OneVsAllOptions o;
        o.collapse_rest = true;
        const auto opt = optimal_labels_one_vs_all(law, 1, 0, o);
        CHECK(std::isfinite(opt.objective));
    }
}

TEST_CASE("one-vs-all smoothing history decreases within a pass") {
    const Index m = 4, p = 60;
    const auto c = testing::counts({{50, 40, 30, 60}, {30, 30, 30, 30}});
    const auto st = known_stats<double>(beta_means(m, p, 0.6), CovModel<double>::identity(2, m), c);
    const auto law = build_law(st, Hyperparams<double>{0.5, Vector<double>::Ones(2)});
    OneVsAllOptions o;
    o.relax = {20.0};
    const auto opt = optimal_labels_one_vs_all(law, 0, 2, o);
    for (std::size_t s = 1; s < opt.history.size(); ++s) CHECK(opt.history[s] <= opt.history[s - 1]);
}

TEST_CASE("GHK gradient agrees with central differences") {
    Vector<double> mu(3);
    mu << 0.4, -0.2, 0.9;
    Matrix<double> cov(3, 3);
    cov << 1.0, 0.3, -0.2, 0.3, 0.8, 0.1, -0.2, 0.1, 1.5;
    const GhkOrthant ghk(3, 200000, 99);
    Vector<double> gm;
    Matrix<double> gc;
    const double base = ghk.gradient(mu, cov, gm, gc);
    CHECK(std::abs(base - ghk(mu, cov)) < 1e-14);
    const double h = 1e-3;
    for (Index r = 0; r < 3; ++r) {
        Vector<double> a = mu, b = mu;
        a(r) += h;
        b(r) -= h;
        CHECK(std::abs((ghk(a, cov) - ghk(b, cov)) / (2 * h) - gm(r)) < 1e-5);
    }
    for (Index r = 0; r < 3; ++r)
        for (Index s = 0; s <= r; ++s) {
            Matrix<double> a = cov, b = cov;
            a(r, s) += h;
            b(r, s) -= h;
            if (r != s) {
                a(s, r) += h;
                b(s, r) -= h;
            }
            const double fd = (ghk(mu, a) - ghk(mu, b)) / (2 * h);
            const double an = r == s ? gc(r, r) : 2.0 * gc(r, s);
            CHECK(std::abs(fd - an) < 1e-5);
        }
}

TEST_CASE("one-hot ascent") {
    const Index m = 3, p = 100;
    const auto c = testing::counts({{100, 100, 100}, {20, 30, 25}});
    const auto st = known_stats<double>(beta_means(m, p, 0.4), CovModel<double>::identity(2, m), c);
    const auto law = build_law(st, Hyperparams<double>{1.0, Vector<double>::Ones(2)});
    OneHotOptions o;
    o.max_iterations = 25;
    const auto opt = optimal_labels_one_hot(law, 1, o);
    for (std::size_t s = 1; s < opt.history.size(); ++s) CHECK(opt.history[s] >= opt.history[s - 1]);

    auto accuracy = [&](const Matrix<double>& y) {
        double acc = 0.0, se2 = 0.0;
        for (Index j = 0; j < m; ++j) {
            const auto [mean, cov] = decision_moments<double>(law, y, 1, j);
            const auto est = orthant_probability(mean, cov, 7 + std::uint64_t(j));
            acc += est.probability / m;
            se2 += est.std_error * est.std_error / double(m * m);
        }
        return std::pair{acc, std::sqrt(se2)};
    };
    const auto [start, se0] = accuracy(one_hot_scores<double>(2, m).values);
    const auto [end, se1] = accuracy(opt.scores.values);
    CHECK(end >= start - 2.0 * std::sqrt(se0 * se0 + se1 * se1));
    CHECK(std::abs(end - opt.objective) < 0.003);

    SUBCASE("a class-symmetric single task leaves the one-hot accuracy in place") {
        Matrix<double> mu = Matrix<double>::Zero(m, p);
        for (Index j = 0; j < m; ++j) mu(j, j) = 1.5;
        const auto same = known_stats<double>(mu, CovModel<double>::identity(1, m), testing::counts({{60, 60, 60}}));
        const auto sl = build_law(same, Hyperparams<double>{0.0, Vector<double>::Ones(1)});
        OneHotOptions q;
        q.max_iterations = 10;
        const auto res = optimal_labels_one_hot(sl, 0, q);
        CHECK(std::abs(res.objective - res.history.front()) < 0.002);
    }
    SUBCASE("identical tasks: the target role breaks the symmetry and ascent may only help") {
        Matrix<double> mu = Matrix<double>::Zero(2 * m, p);
        for (Index j = 0; j < m; ++j) mu(j, j) = mu(m + j, j) = 1.5;
        const auto same = known_stats<double>(mu, CovModel<double>::identity(2, m), testing::counts({{60, 60, 60}, {60, 60, 60}}));
        const auto sl = build_law(same, Hyperparams<double>{1.0, Vector<double>::Ones(2)});
        OneHotOptions q;
        q.max_iterations = 10;
        const auto res = optimal_labels_one_hot(sl, 0, q);
        CHECK(res.objective >= res.history.front());
    }
}

TEST_CASE("hyperparameter grid") {
    std::mt19937_64 rng(17);
    const auto cfg = random_binary(rng, 2, 80, false);
    HyperGrid grid;
    for (int e = -3; e <= 3; ++e) grid.lambdas.push_back(std::pow(10.0, e));
    grid.gammas = {{1.0, 1.0}, {0.5, 1.0}, {1.0, 0.5}};
    std::vector<double> seen;
    std::function<double(const Hyperparams<double>&)> objective = [&](const Hyperparams<double>& h) {
        const double v = optimal_labels_general(build_law(cfg.stats, h), 0).objective;
        seen.push_back(v);
        return v;
    };
    double best = 0.0;
    const auto h = tune_hyperparams(grid, objective, &best);
    CHECK(best == *std::min_element(seen.begin(), seen.end()));
    CHECK(std::abs(optimal_labels_general(build_law(cfg.stats, h), 0).objective - best) < 1e-15);

    SUBCASE("ties go to the smaller lambda and gamma") {
        std::function<double(const Hyperparams<double>&)> flat = [](const Hyperparams<double>&) { return 0.25; };
        const auto t = tune_hyperparams(grid, flat);
        CHECK(t.lambda == 1e-3);
        CHECK(t.gamma(0) == 0.5);
    }
}

TEST_CASE("unrelated tasks prefer decoupling") {
    const auto c = testing::counts({{50, 50}, {80, 80}});
    Matrix<double> mu = Matrix<double>::Zero(4, 100);
    mu(0, 0) = 1.0;
    mu(1, 0) = -1.0;
    mu(2, 1) = 1.2;
    mu(3, 1) = -1.2;
    const auto st = known_stats<double>(mu, CovModel<double>::identity(2, 2), c);
    HyperGrid grid;
    for (int e = -3; e <= 3; ++e) grid.lambdas.push_back(std::pow(10.0, e));
    grid.gammas = {{1.0, 1.0}};
    std::vector<double> curve;
    std::function<double(const Hyperparams<double>&)> objective = [&](const Hyperparams<double>& h) {
        const double v = optimal_error_isotropic(build_isotropic_stats(st, h), 0);
        curve.push_back(v);
        return v;
    };
    const auto h = tune_hyperparams(grid, objective);
    CHECK(h.lambda == 1e-3);
    for (std::size_t s = 1; s < curve.size(); ++s) CHECK(curve[s] >= curve[s - 1] - 1e-12);
}

TEST_CASE("optimized error curve is flat in lambda") {
    const auto c = testing::counts({{200, 200}, {40, 40}});
    Matrix<double> mu = Matrix<double>::Zero(4, 100);
    mu(0, 0) = 1.0;
    mu(1, 0) = -1.0;
    mu(2, 0) = 0.6;
    mu(2, 1) = 0.8;
    mu.row(3) = -mu.row(2);
    const auto st = known_stats<double>(mu, CovModel<double>::identity(2, 2), c);
    double lo = 1.0, hi = 0.0;
    for (int e = -3; e <= 3; ++e) {
        const double v = optimal_error_isotropic(build_isotropic_stats(st, Hyperparams<double>{std::pow(10.0, e), Vector<double>::Ones(2)}), 1);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    CHECK(hi - lo < 0.02);
}

TEST_CASE("negative transfer guard") {
    const auto c = testing::counts({{300, 300}, {40, 40}});
    Matrix<double> mu = Matrix<double>::Zero(4, 100);
    mu(0, 0) = 1.0;
    mu(1, 0) = -1.0;
    mu(2, 0) = -0.9;
    mu(2, 1) = 0.3;
    mu.row(3) = -mu.row(2);
    const auto st = known_stats<double>(mu, CovModel<double>::identity(2, 2), c);
    const Hyperparams<double> h{1.0, Vector<double>::Ones(2)};
    const auto iso = build_isotropic_stats(st, h);
    const double classical = midpoint_error(score_law(iso), classical_binary_scores<double>(2).values, 1);
    const double optimized = optimal_error_isotropic(iso, 1);

    const auto alone = known_stats<double>(Matrix<double>(mu.bottomRows(2)), CovModel<double>::identity(1, 2),
                                           IndexMatrix(c.bottomRows(1)));
    const double single = optimal_error_isotropic(build_isotropic_stats(alone, Hyperparams<double>{0.0, Vector<double>::Ones(1)}), 0);
    CHECK(classical > single);
    CHECK(optimized <= single + 1e-12);
}
