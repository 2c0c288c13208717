#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "mtl/classify.hpp"
#include "mtl/gaussian.hpp"
#include "mtl/orthant.hpp"
#include "mtl/stats.hpp"
#include "mtl/synthetic.hpp"
#include "support.hpp"

#include <cmath>
#include <random>

using namespace mtl;
using Mat = Matrix<double>;
using Vec = Vector<double>;

namespace {

/// Two-class, two-task mixture: mu_1j = +-r e_1, mu_2j = beta mu_1j + sqrt(1 - beta^2) (+-r e_2).
SyntheticSpec<double> binary_spec(double beta, const IndexMatrix& counts, Index p, Index test, std::uint64_t seed,
                                  double r = 1.5) {
    Mat base = Mat::Zero(2, p), perp = Mat::Zero(2, p);
    base(0, 0) = r;
    base(1, 0) = -r;
    perp(0, 1) = r;
    perp(1, 1) = -r;
    SyntheticSpec<double> s;
    s.k = 2;
    s.m = 2;
    s.p = p;
    s.counts = counts;
    s.test_per_class = test;
    s.means = beta_correlated_means<double>(base, {beta}, {perp});
    s.cov = CovModel<double>::identity(2, 2);
    s.seed = seed;
    return s;
}

IndexMatrix scaled_counts(std::initializer_list<std::initializer_list<double>> fractions, double n) {
    IndexMatrix c(static_cast<Index>(fractions.size()), static_cast<Index>(fractions.begin()->size()));
    Index i = 0;
    for (const auto& row : fractions) {
        Index j = 0;
        for (double f : row) c(i, j++) = std::lround(f * n);
        ++i;
    }
    return c;
}

/// Empirical error of "class 0 iff g >= zeta" on the target task's test blocks, equal priors.
double threshold_error(const TrainedClassifier& clf, const Dataset<double>& test, double zeta) {
    const Vec g0 = clf.duals.front().score_batch(test.block(clf.task, 0), clf.task).col(0);
    const Vec g1 = clf.duals.front().score_batch(test.block(clf.task, 1), clf.task).col(0);
    const double e0 = double((g0.array() < zeta).count()) / double(g0.size());
    const double e1 = double((g1.array() >= zeta).count()) / double(g1.size());
    return 0.5 * (e0 + e1);
}

/// P(X1 > 0, X2 > 0) by composite Simpson over x1 with the conditional law of X2 in closed form.
double orthant_2d_quadrature(const Vec& mu, const Mat& cov) {
    const double s1 = std::sqrt(cov(0, 0)), rho = cov(0, 1) / (s1 * std::sqrt(cov(1, 1)));
    const double s2 = std::sqrt(cov(1, 1)), cs = s2 * std::sqrt(1.0 - rho * rho);
    const double lo = std::max(0.0, mu(0) - 12.0 * s1), hi = mu(0) + 12.0 * s1;
    if (hi <= lo) return 0.0;
    const int n = 200000;
    const double h = (hi - lo) / n;
    auto f = [&](double x) {
        const double z = (x - mu(0)) / s1;
        const double cm = mu(1) + rho * s2 * z;
        return std::exp(-0.5 * z * z) / (s1 * std::sqrt(2.0 * M_PI)) * normal_q(-cm / cs);
    };
    double acc = f(lo) + f(hi);
    for (int i = 1; i < n; ++i) acc += f(lo + i * h) * (i % 2 ? 4.0 : 2.0);
    return acc * h / 3.0;
}

}  // namespace

TEST_CASE("orthant probability in one dimension is the tail function") {
    for (double mu : {-1.0, 0.0, 0.7, 2.5}) {
        Vec m(1);
        m << mu;
        Mat c(1, 1);
        c << 1.7;
        const auto est = orthant_probability(m, c, 3);
        CHECK(std::abs(est.probability - normal_q(-mu / std::sqrt(1.7))) <= 3.0 * est.std_error + 1e-12);
        // antithetic pairs cancel exactly at mu = 0
        CHECK(est.std_error >= 0.0);
        if (mu != 0.0) CHECK(est.std_error > 0.0);
    }
}

TEST_CASE("diagonal covariance factorizes") {
    Vec m(3);
    m << 0.4, -0.2, 1.1;
    Vec v(3);
    v << 0.5, 2.0, 1.3;
    double product = 1.0;
    for (Index i = 0; i < 3; ++i) product *= normal_q(-m(i) / std::sqrt(v(i)));
    const auto est = orthant_probability(m, Mat(v.asDiagonal()), 17);
    CHECK(std::abs(est.probability - product) <= 3.0 * est.std_error);
}

TEST_CASE("correlated two-dimensional orthant matches quadrature") {
    Vec m(2);
    m << 0.3, -0.5;
    Mat c(2, 2);
    c << 1.0, 0.6, 0.6, 2.0;
    const double oracle = orthant_2d_quadrature(m, c);
    const auto est = orthant_probability(m, c, 5);
    CHECK(std::abs(est.probability - oracle) < 1e-3);

    m << 1.2, 0.8;
    c << 1.5, -0.7, -0.7, 0.9;
    CHECK(std::abs(orthant_probability(m, c, 6).probability - orthant_2d_quadrature(m, c)) < 1e-3);
}

TEST_CASE("orthant probability rejects non-PSD and asymmetric covariances") {
    Vec m = Vec::Zero(2);
    Mat c(2, 2);
    c << 1.0, 2.0, 2.0, 1.0;
    CHECK_THROWS_AS(orthant_probability(m, c, 1), Error);
    c << 1.0, 0.5, 0.2, 1.0;
    CHECK_THROWS_AS(orthant_probability(m, c, 1), Error);
    try {
        c << 1.0, 2.0, 2.0, 1.0;
        orthant_probability(m, c, 1);
    } catch (const Error& e) {
        CHECK(e.code() == Errc::NonPSD);
    }
}

TEST_CASE("orthant probability is deterministic for a fixed seed") {
    Vec m(3);
    m << 0.1, 0.2, -0.3;
    Mat c = Mat::Identity(3, 3) + Mat::Constant(3, 3, 0.4);
    const auto a = orthant_probability(m, c, 42), b = orthant_probability(m, c, 42), d = orthant_probability(m, c, 43);
    CHECK(a.probability == b.probability);
    CHECK(a.std_error == b.std_error);
    CHECK(a.probability != d.probability);
}

TEST_CASE("midpoint threshold corrects unbalanced classes") {
    // p = 100, c = (.3, .4, .1, .2), lambda = 10, gamma = 1, beta = .5
    const auto data = generate_synthetic(binary_spec(0.5, scaled_counts({{.3, .4}, {.1, .2}}, 1000), 100, 2000, 7));
    const Hyperparams<double> h{10.0, Vec::Ones(2)};
    TrainOptions opt;
    opt.task = 1;
    opt.labels = LabelMode::classical;
    const auto classical = train_binary(data.train, h, opt);
    opt.labels = LabelMode::optimized;
    const auto optimized = train_binary(data.train, h, opt);

    const double zc = classical.rule.thresholds(1), zo = optimized.rule.thresholds(1);
    CHECK(std::abs(zc) > 0.05);
    CHECK(threshold_error(classical, data.test, zc) < threshold_error(classical, data.test, 0.0));
    CHECK(1.0 - evaluate(optimized, data.test).mean < 1.0 - evaluate(classical, data.test).mean);
    CHECK(threshold_error(optimized, data.test, zo) == doctest::Approx(1.0 - evaluate(optimized, data.test).mean));
    // predicted errors follow the same order
    CHECK(optimized.rule.errors(1) < classical.rule.errors(1));
}

TEST_CASE("anticorrelated tasks flip classical labels but not optimized ones") {
    // the switch needs a target task small enough for the shared direction to dominate
    const auto data = generate_synthetic(binary_spec(-1.0, testing::counts({{300, 400}, {10, 20}}), 100, 2000, 8));
    const Hyperparams<double> h{100.0, Vec::Ones(2)};
    TrainOptions opt;
    opt.task = 1;
    opt.truth = data.truth;
    opt.labels = LabelMode::classical;
    const double classical = 1.0 - evaluate(train_binary(data.train, h, opt), data.test).mean;
    opt.labels = LabelMode::optimized;
    const double optimized = 1.0 - evaluate(train_binary(data.train, h, opt), data.test).mean;
    CHECK(classical > 0.5);
    CHECK(optimized < 0.5);
}

TEST_CASE("single task reduces to a plain least-squares SVM") {
    std::mt19937_64 rng(3);
    const auto raw = testing::random_dataset(testing::counts({{70, 50}}), 40, rng, 0.4);
    const double gamma = 2.0, lambda = 0.5;
    TrainOptions opt;
    opt.labels = LabelMode::classical;
    const auto clf = train_binary(raw, Hyperparams<double>{lambda, Vec::Constant(1, gamma)}, opt);

    // textbook dual on the preprocessed data: [0 1^T; 1 K + I/c] [b; a] = [0; y], K = X^T X / p, c = lambda + gamma
    const auto prob = prepare(raw, opt);
    const Mat x = prob.data.task_block(0);
    const Index n = x.cols(), p = x.rows();
    Mat sys = Mat::Zero(n + 1, n + 1);
    sys.block(1, 1, n, n) = x.transpose() * x / double(p) + Mat::Identity(n, n) / (lambda + gamma);
    sys.block(0, 1, 1, n).setOnes();
    sys.block(1, 0, n, 1).setOnes();
    Vec rhs = Vec::Zero(n + 1);
    rhs.segment(1, 70).setOnes();
    rhs.segment(71, 50).setConstant(-1.0);
    const Vec sol = sys.partialPivLu().solve(rhs);

    const Mat test = testing::gaussian(40, 200, rng);
    Vec ours = clf.duals.front().score_batch(test, 0).col(0), plain(200);
    for (Index t = 0; t < 200; ++t) plain(t) = prob.data.transform(test.col(t), 0).dot(x * sol.tail(n)) / double(p) + sol(0);

    // same hyperplane: ours = a * plain + c with a > 0
    Mat design(200, 2);
    design.col(0) = plain;
    design.col(1).setOnes();
    const Vec fit = design.colPivHouseholderQr().solve(ours);
    CHECK(fit(0) > 0.0);
    CHECK((design * fit - ours).cwiseAbs().maxCoeff() < 1e-9 * ours.cwiseAbs().maxCoeff());
}

TEST_CASE("one-vs-all and one-hot with two classes match the binary machine") {
    const auto data = generate_synthetic(binary_spec(0.6, scaled_counts({{.3, .3}, {.2, .2}}, 400), 30, 300, 9));
    const Hyperparams<double> h{1.0, Vec::Ones(2)};
    TrainOptions opt;
    opt.task = 1;
    opt.labels = LabelMode::classical;
    auto bin = train_binary(data.train, h, opt);
    const auto ova = train_one_vs_all(data.train, h, opt);
    const auto hot = train_one_hot(data.train, h, opt);

    const Mat& x = data.test.block(1, 0);
    const Vec g = bin.duals.front().score_batch(x, 1).col(0);
    const Mat gh = hot.duals.front().score_batch(x, 1);
    CHECK((gh.col(0) - gh.col(1) - g).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((ova.duals[1].score_batch(x, 1).col(0) + g).cwiseAbs().maxCoeff() < 1e-10);

    bin.rule.thresholds(1) = 0.0;
    for (Index j = 0; j < 2; ++j) {
        const auto b = bin.classify_batch(data.test.block(1, j));
        CHECK(b == ova.classify_batch(data.test.block(1, j)));
        CHECK(b == hot.classify_batch(data.test.block(1, j)));
    }
}

TEST_CASE("indistinguishable classes give chance accuracy") {
    SyntheticSpec<double> s;
    s.k = 2;
    s.m = 3;
    s.p = 40;
    s.counts = testing::counts({{60, 60, 60}, {30, 30, 30}});
    s.test_per_class = 3000;
    s.means = Mat::Zero(6, 40);
    s.cov = CovModel<double>::identity(2, 3);
    s.seed = 10;
    const auto data = generate_synthetic(s);
    const Hyperparams<double> h{1.0, Vec::Ones(2)};
    TrainOptions opt;
    opt.task = 1;
    opt.labels = LabelMode::classical;
    for (auto train : {&train_one_vs_all, &train_one_hot}) {
        const auto clf = train(data.train, h, opt);
        CHECK(std::abs(evaluate(clf, data.test).mean - 1.0 / 3.0) < 0.02);
    }
    opt.truth = data.truth;
    const auto rep = predict_accuracy(train_one_hot(data.train, h, opt), 1);
    CHECK(std::abs(rep.mean - 1.0 / 3.0) < 3.0 * rep.mean_std_error + 1e-3);
    for (double p : rep.per_class) CHECK(std::abs(p - 1.0 / 3.0) < 0.01);
}

TEST_CASE("majority vote") {
    CHECK(majority_vote({2, 2, 2}, 3) == 2);
    CHECK(majority_vote({1, 1, 1, 1, 1, 1}, 4) == 1);
    // 3 classes, pairs (0,1) (0,2) (1,2) with one win each
    CHECK(majority_vote({0, 2, 1}, 3) == 0);
    CHECK(majority_vote({1, 2, 2, 1}, 4) == 1);
}

TEST_CASE("one-vs-one trains every pair and is not given a theoretical accuracy") {
    std::mt19937_64 rng(12);
    const auto raw = testing::random_dataset(testing::counts({{40, 30, 50, 20}, {20, 25, 15, 30}}), 25, rng, 1.0);
    TrainOptions opt;
    opt.task = 1;
    const auto clf = train_one_vs_one(raw, Hyperparams<double>{1.0, Vec::Ones(2)}, opt);
    CHECK(clf.duals.size() == 6);
    CHECK(clf.pairs.size() == 6);
    const auto rep = predict_accuracy(clf);
    CHECK(rep.method == AccuracyMethod::unavailable);
    CHECK(rep.per_class.empty());
    CHECK(std::isnan(rep.mean));
}

TEST_CASE("two-class accuracy report is the closed-form tail") {
    const auto data = generate_synthetic(binary_spec(0.3, scaled_counts({{.3, .4}, {.1, .2}}, 600), 60, 0, 13));
    TrainOptions opt;
    opt.task = 1;
    opt.truth = data.truth;
    opt.labels = LabelMode::classical;
    const auto hot = train_one_hot(data.train, Hyperparams<double>{3.0, Vec::Ones(2)}, opt);
    const auto rep = predict_accuracy(hot);
    CHECK(rep.method == AccuracyMethod::closed_form_1d);

    // argmax of two one-hot columns is the sign of their difference, whose law is Gaussian
    const Vec y = hot.label_matrix.col(0) - hot.label_matrix.col(1);
    const auto pred = hot.law.predict(y);
    const double p0 = normal_q(-pred.mean(1, 0) / std::sqrt(pred.variance(1, 0)));
    const double p1 = normal_q(pred.mean(1, 1) / std::sqrt(pred.variance(1, 1)));
    CHECK(rep.per_class[0] == doctest::Approx(p0).epsilon(1e-12));
    CHECK(rep.per_class[1] == doctest::Approx(p1).epsilon(1e-12));

    // same quantity through the orthant estimator
    for (Index j = 0; j < 2; ++j) {
        const auto [mean, cov] = decision_moments<double>(hot.law, hot.label_matrix, 1, j, {});
        const auto est = orthant_probability(mean, cov, 21 + std::uint64_t(j));
        CHECK(std::abs(est.probability - rep.per_class[std::size_t(j)]) <= 3.0 * est.std_error + 1e-12);
    }

    // binary classifier at the midpoint reports the complement of its predicted error
    const auto bin = train_binary(data.train, Hyperparams<double>{3.0, Vec::Ones(2)}, opt);
    CHECK(predict_accuracy(bin).mean == doctest::Approx(1.0 - bin.rule.errors(1)).epsilon(1e-12));
}

TEST_CASE("accuracy reports are bit-reproducible") {
    std::mt19937_64 rng(14);
    const auto raw = testing::random_dataset(testing::counts({{40, 30, 50}, {20, 25, 15}}), 25, rng, 1.0);
    TrainOptions opt;
    opt.task = 1;
    const Hyperparams<double> h{1.0, Vec::Ones(2)};
    const auto a = predict_accuracy(train_one_vs_all(raw, h, opt), 99, 100000);
    const auto b = predict_accuracy(train_one_vs_all(raw, h, opt), 99, 100000);
    CHECK(a.per_class == b.per_class);
    CHECK(a.std_errors == b.std_errors);
    CHECK(a.mean == b.mean);
    for (std::size_t j = 0; j < a.per_class.size(); ++j) {
        CHECK(a.per_class[j] >= 0.0);
        CHECK(a.per_class[j] <= 1.0);
        CHECK(a.std_errors[j] > 0.0);
    }
}

TEST_CASE("ROC curve: monotone, saturating and calibrated") {
    // p = 128, n = (384, 256, 64, 40), mu_11 = -mu_12 = e_1, mu_21 = -mu_22 = (.87, .5, 0, ...)
    SyntheticSpec<double> s;
    s.k = 2;
    s.m = 2;
    s.p = 128;
    s.counts = testing::counts({{384, 256}, {64, 40}});
    s.test_per_class = 100000;
    s.means = Mat::Zero(4, 128);
    s.means(0, 0) = 1.0;
    s.means(1, 0) = -1.0;
    s.means(2, 0) = 0.87;
    s.means(2, 1) = 0.5;
    s.means.row(3) = -s.means.row(2);
    s.cov = CovModel<double>::identity(2, 2);
    s.seed = 15;
    const auto data = generate_synthetic(s);
    TrainOptions topt;
    topt.truth = data.truth;
    const auto prob = prepare(data.train, topt);
    const Hyperparams<double> h{1.0, Vec::Ones(2)};
    const auto law = build_law(prob.stats, h);

    RocOptions ro;
    ro.hyper = h;
    ro.train = &prob.data;
    ro.test = &data.test;
    const auto curve = roc_curve(law, 1, {0.1, 0.01, 0.05}, ro);
    REQUIRE(curve.size() == 3);
    CHECK(curve[0].eta == 0.01);
    for (const auto& pt : curve) {
        CHECK(std::abs(*pt.empirical_false_alarm - pt.eta) < 0.01);
        CHECK(pt.ci_low <= *pt.empirical_detection);
        CHECK(*pt.empirical_detection <= pt.ci_high);
    }

    std::vector<double> etas;
    for (double e = 1e-3; e < 1.0; e *= 1.6) etas.push_back(e);
    etas.push_back(0.999);
    for (auto mode : {LabelMode::classical, LabelMode::optimized}) {
        RocOptions theory;
        theory.labels = mode;
        const auto c = roc_curve(law, 1, etas, theory);
        for (std::size_t q = 1; q < c.size(); ++q) CHECK(c[q].detection >= c[q - 1].detection - 1e-12);
        CHECK(c.back().detection > 0.99);
        CHECK(!c.front().empirical_detection);
    }
}

TEST_CASE("KS statistic and Wilson interval") {
    std::mt19937_64 rng(16);
    std::normal_distribution<double> nd;
    std::vector<double> z(2000), shifted(2000);
    for (std::size_t i = 0; i < z.size(); ++i) {
        z[i] = nd(rng);
        shifted[i] = z[i] + 0.3;
    }
    CHECK(ks_pvalue(ks_statistic_normal(z), z.size()) > 0.01);
    CHECK(ks_pvalue(ks_statistic_normal(shifted), shifted.size()) < 1e-6);
    // one point at the median: D = 1/2
    CHECK(ks_statistic_normal({0.0}) == doctest::Approx(0.5));

    const auto [lo, hi] = wilson_interval(5, 10);
    CHECK(lo == doctest::Approx(0.2365931).epsilon(1e-6));
    CHECK(hi == doctest::Approx(0.7634069).epsilon(1e-6));
    const auto [l0, h0] = wilson_interval(0, 50);
    CHECK(l0 == 0.0);
    CHECK(h0 > 0.0);
}
