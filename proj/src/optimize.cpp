#include "mtl/optimize.hpp"

#include "mtl/gaussian.hpp"
#include "mtl/orthant.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mtl {

namespace {

[[noreturn]] void fail(Errc code, const std::string& what) { throw Error(code, "score-optimizer", what); }

using Vec = Vector<double>;
using Mat = Matrix<double>;

void require_binary(Index classes) {
    if (classes != 2) fail(Errc::BadSpec, "binary operation needs two classes per task");
}

void require_task(Index task, Index k) {
    if (task < 0 || task >= k) fail(Errc::BadSpec, "task index out of range");
}

/// Removes the plain per-task mean, so task constants never enter the iterate.
Vec strip_task_constants(const Vec& y, Index k, Index m) {
    Vec out = y;
    for (Index t = 0; t < k; ++t) out.segment(t * m, m).array() -= out.segment(t * m, m).mean();
    return out;
}

/// Orthonormal basis of {y : sum_j y_tj = 0 for every task t}.
Mat zero_sum_basis(Index k, Index m) {
    Mat b = Mat::Zero(k * m, k * (m - 1));
    for (Index t = 0; t < k; ++t)
        for (Index c = 1; c < m; ++c) {
            // Helmert column: c ones, then -c, scaled
            const double s = 1.0 / std::sqrt(double(c * (c + 1)));
            for (Index r = 0; r < c; ++r) b(t * m + r, t * (m - 1) + c - 1) = s;
            b(t * m + c, t * (m - 1) + c - 1) = -double(c) * s;
        }
    return b;
}

/// Weighted-centered, unit-norm representative with m_i1 >= m_i2 (or the opposite when `class2_high`).
Vec canonical(const ScoreLaw<double>& law, const Vec& y, Index task, bool class2_high = false) {
    Vec c = score_centering<double>(law.counts) * y;
    const double n = c.norm();
    if (!(n > 0.0)) fail(Errc::SingularMatrix, "optimal labels vanish");
    c /= n;
    const Index m = law.classes();
    const double dm = (law.mean_map.row(task * m) - law.mean_map.row(task * m + 1)).dot(c);
    if ((dm < 0.0) != class2_high) c = -c;
    return c;
}

struct DescentOutcome {
    Vec x;
    double f = 0.0;
    double gradient_norm = 0.0;
    long iterations = 0;
    bool converged = false;
    std::vector<double> history;
};

/// Armijo steepest descent for scale-invariant objectives; the iterate is kept on the unit sphere
/// of the zero-sum subspace.
template <typename F>
DescentOutcome descend(const F& objective, Vec x, Index k, Index m, const DescentControl& ctl) {
    DescentOutcome out;
    x = strip_task_constants(x, k, m);
    x /= x.norm();
    Vec g;
    double f = objective(x, &g);
    g = strip_task_constants(g, k, m);
    double step = 1.0;
    out.history.push_back(f);
    long it = 0;
    bool stalled = false;
    for (; it < ctl.max_iterations; ++it) {
        const double gn2 = g.squaredNorm();
        if (std::sqrt(gn2) < ctl.tolerance) break;
        bool accepted = false;
        for (int tries = 0; tries < 80; ++tries) {
            Vec trial = x - step * g;
            trial /= trial.norm();
            const double ft = objective(trial, nullptr);
            if (ft <= f - ctl.armijo * step * gn2) {
                x = trial;
                f = ft;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) {
            stalled = true;
            break;
        }
        f = objective(x, &g);
        g = strip_task_constants(g, k, m);
        out.history.push_back(f);
        step *= 2.0;
    }
    out.x = x;
    out.f = f;
    out.gradient_norm = g.norm();
    out.iterations = it;
    // a stalled search at a tiny gradient is numerical stationarity
    out.converged = out.gradient_norm < ctl.tolerance || (stalled && out.gradient_norm < 1e-6);
    return out;
}

/// Midpoint-threshold error of a binary task and its gradient in y.
struct BinaryView {
    Vec ell;      ///< L_i1 - L_i2
    Vec row1, row2;
    Mat k1, k2;

    BinaryView(const ScoreLaw<double>& law, Index task) {
        const Index m = law.classes();
        row1 = law.mean_map.row(task * m).transpose();
        row2 = law.mean_map.row(task * m + 1).transpose();
        ell = row1 - row2;
        k1 = law.form(task, 0);
        k2 = law.form(task, 1);
    }

    double error(const Vec& y, Vec* grad) const {
        const double dm = ell.dot(y);
        const Vec ky1 = k1 * y, ky2 = k2 * y;
        const double c1 = std::max(y.dot(ky1), 1e-300), c2 = std::max(y.dot(ky2), 1e-300);
        const double t1 = dm / (2.0 * std::sqrt(c1)), t2 = dm / (2.0 * std::sqrt(c2));
        if (grad) {
            const Vec g1 = ell / (2.0 * std::sqrt(c1)) - dm * ky1 / (2.0 * c1 * std::sqrt(c1));
            const Vec g2 = ell / (2.0 * std::sqrt(c2)) - dm * ky2 / (2.0 * c2 * std::sqrt(c2));
            *grad = -0.5 * (normal_pdf(t1) * g1 + normal_pdf(t2) * g2);
        }
        return 0.5 * (normal_q(t1) + normal_q(t2));
    }
};

struct RayleighSolution {
    Vec y;
    bool pseudo = false;
};

/// argmax (ell^T y)^2 / y^T K y over the zero-sum subspace.
RayleighSolution rayleigh(const Mat& form, const Vec& ell, Index k, Index m) {
    const Mat b = zero_sum_basis(k, m);
    const Mat kr = b.transpose() * form * b;
    const Vec rhs = b.transpose() * ell;
    Eigen::SelfAdjointEigenSolver<Mat> eig(0.5 * (kr + kr.transpose()));
    const double top = eig.eigenvalues().cwiseAbs().maxCoeff();
    if (!(top > 0.0)) fail(Errc::SingularMatrix, "score covariance form vanishes");
    const double low = eig.eigenvalues().minCoeff();
    RayleighSolution out;
    if (low <= 0.0 || top / low > 1e12) {
        out.pseudo = true;
        out.y = b * Eigen::CompleteOrthogonalDecomposition<Mat>(kr).solve(rhs);
    } else {
        out.y = b * eig.eigenvectors() * (eig.eigenvectors().transpose() * rhs).cwiseQuotient(eig.eigenvalues());
    }
    return out;
}

Vec task_indicator(Index k, Index m, Index task) {
    Vec p = Vec::Zero(k * m);
    p.segment(task * m, m).setOnes();
    return p;
}

}  // namespace

template <typename Scalar>
Scalar binary_error(const ScorePrediction<Scalar>& pred, Index task, Scalar zeta) {
    require_binary(pred.m);
    const Scalar s1 = std::sqrt(pred.variance(task, 0)), s2 = std::sqrt(pred.variance(task, 1));
    return Scalar(0.5) * Scalar(normal_q((pred.mean(task, 0) - zeta) / s1)) +
           Scalar(0.5) * Scalar(normal_q((zeta - pred.mean(task, 1)) / s2));
}

template <typename Scalar>
DecisionRule<Scalar> decision_threshold(const ScorePrediction<Scalar>& pred, Index task) {
    require_binary(pred.m);
    const Index k = pred.means.rows() / 2;
    require_task(task, k);
    DecisionRule<Scalar> rule;
    rule.kind = DecisionKind::threshold;
    rule.thresholds.resize(k);
    rule.errors.resize(k);
    for (Index i = 0; i < k; ++i) {
        rule.thresholds(i) = Scalar(0.5) * (pred.mean(i, 0) + pred.mean(i, 1));
        rule.errors(i) = binary_error(pred, i, rule.thresholds(i));
    }
    return rule;
}

template <typename Scalar>
Scalar optimal_error_isotropic(const IsotropicStats<Scalar>& iso, Index task) {
    const Index k = iso.counts.rows();
    require_task(task, k);
    Vec e = Vec::Zero(2 * k);
    e(2 * task) = 1.0;
    e(2 * task + 1) = -1.0;
    const Vec w = iso.coupled * iso.delta_2k.cwiseSqrt().cwiseInverse().asDiagonal() * e;
    Eigen::FullPivLU<Mat> lu(iso.v_mats[static_cast<std::size_t>(task)]);
    if (!lu.isInvertible()) fail(Errc::SingularMatrix, "V_i is not invertible");
    const double r = iso.delta_k(task) * w.dot(lu.solve(w));
    return Scalar(normal_q(0.5 * std::sqrt(std::max(0.0, r))));
}

template <typename Scalar>
OptimizedLabels<Scalar> optimal_labels_isotropic(const IsotropicStats<Scalar>& iso, Index task) {
    const Index k = iso.counts.rows();
    require_task(task, k);
    Vec e = Vec::Zero(2 * k);
    e(2 * task) = 1.0;
    e(2 * task + 1) = -1.0;
    const Vec dmh = iso.delta_2k.cwiseSqrt().cwiseInverse();
    Eigen::FullPivLU<Mat> lu(iso.v_mats[static_cast<std::size_t>(task)]);
    if (!lu.isInvertible()) fail(Errc::SingularMatrix, "V_i is not invertible");
    const Vec inner = lu.solve(iso.coupled * dmh.asDiagonal() * e);
    const Vec y = dmh.asDiagonal() * Eigen::FullPivLU<Mat>(iso.gamma_mat).solve(inner);

    const auto law = score_law(iso);
    OptimizedLabels<Scalar> out;
    out.scores = ScoreAssignment<Scalar>::binary(canonical(law, y, task));
    out.provenance = LabelProvenance::closed_form;
    out.shift = Vector<Scalar>::Zero(k);
    const auto pred = law.predict(out.scores.values);
    out.threshold = Scalar(0.5) * (pred.mean(task, 0) + pred.mean(task, 1));
    out.objective = binary_error(pred, task, out.threshold);
    return out;
}

template <typename Scalar>
OptimizedLabels<Scalar> optimal_labels_general(const ScoreLaw<Scalar>& law, Index task, const DescentControl& ctl) {
    const Index k = law.tasks(), m = law.classes();
    require_binary(m);
    require_task(task, k);
    const BinaryView view(law, task);
    const double scale = std::max(view.k1.cwiseAbs().maxCoeff(), view.k2.cwiseAbs().maxCoeff());
    const bool equal_forms = (view.k1 - view.k2).cwiseAbs().maxCoeff() < 1e-8 * scale;

    const auto start = rayleigh(equal_forms ? view.k1 : Mat(0.5 * (view.k1 + view.k2)), view.ell, k, m);
    OptimizedLabels<Scalar> out;
    out.shift = Vector<Scalar>::Zero(k);
    out.pseudo_solution = start.pseudo;
    Vec y = start.y;
    if (equal_forms) {
        out.provenance = LabelProvenance::closed_form;
    } else {
        auto res = descend([&](const Vec& x, Vec* g) { return view.error(x, g); }, y, k, m, ctl);
        y = res.x;
        out.provenance = LabelProvenance::gradient_descent;
        out.gradient_norm = res.gradient_norm;
        out.iterations = res.iterations;
        out.converged = res.converged;
        out.history.assign(res.history.begin(), res.history.end());
    }
    out.scores = ScoreAssignment<Scalar>::binary(canonical(law, y, task));
    const auto pred = law.predict(out.scores.values);
    out.threshold = Scalar(0.5) * (pred.mean(task, 0) + pred.mean(task, 1));
    out.objective = binary_error(pred, task, out.threshold);
    return out;
}

template <typename Scalar>
OptimizedLabels<Scalar> optimal_labels_neyman_pearson(const ScoreLaw<Scalar>& law, Index task, Scalar eta,
                                                      const DescentControl& ctl) {
    const Index k = law.tasks(), m = law.classes();
    require_binary(m);
    require_task(task, k);
    if (!(eta > Scalar(0) && eta < Scalar(1))) fail(Errc::BadSpec, "false-alarm rate must lie in (0, 1)");
    const BinaryView view(law, task);
    const double q = normal_q_inverse(double(eta));

    // t = (m2 - m1 - sqrt(C1) q) / sqrt(C2); detection = Q(-t)
    auto negative_t = [&](const Vec& y, Vec* grad) {
        const double gap = -view.ell.dot(y);
        const Vec ky1 = view.k1 * y, ky2 = view.k2 * y;
        const double c1 = std::max(y.dot(ky1), 1e-300), c2 = std::max(y.dot(ky2), 1e-300);
        const double s1 = std::sqrt(c1), s2 = std::sqrt(c2);
        const double t = (gap - s1 * q) / s2;
        if (grad) *grad = -((-view.ell - q * ky1 / s1) / s2 - t * ky2 / c2);
        return -t;
    };

    const auto start = rayleigh(Mat(0.5 * (view.k1 + view.k2)), view.ell, k, m);
    auto res = descend(negative_t, Vec(-start.y), k, m, ctl);
    OptimizedLabels<Scalar> out;
    out.shift = Vector<Scalar>::Zero(k);
    out.pseudo_solution = start.pseudo;
    out.provenance = LabelProvenance::gradient_descent;
    out.gradient_norm = res.gradient_norm;
    out.iterations = res.iterations;
    out.converged = res.converged;
    for (double h : res.history) out.history.push_back(Scalar(normal_q(h)));
    out.scores = ScoreAssignment<Scalar>::binary(canonical(law, res.x, task, true));
    const auto pred = law.predict(out.scores.values);
    out.threshold = Scalar(pred.mean(task, 0) + std::sqrt(pred.variance(task, 0)) * q);
    out.objective = Scalar(normal_q((out.threshold - pred.mean(task, 1)) / std::sqrt(pred.variance(task, 1))));
    return out;
}

namespace {

/// Smoothed max over j != ell of Q((m_ell - m_j) / sqrt(C_j)) and its gradient.
struct OneVsAllView {
    std::vector<Vec> diffs;  ///< L_(i,ell) - L_(i,j)
    std::vector<Mat> forms;
    std::vector<double> weights;

    OneVsAllView(const ScoreLaw<double>& law, Index task, Index ell, bool collapse) {
        const Index m = law.classes();
        const Vec target = law.mean_map.row(task * m + ell).transpose();
        if (!collapse) {
            for (Index j = 0; j < m; ++j) {
                if (j == ell) continue;
                diffs.push_back(target - law.mean_map.row(task * m + j).transpose());
                forms.push_back(law.form(task, j));
            }
            return;
        }
        // rest pooled into one pseudo-class with count-weighted mean and variance
        double total = 0.0;
        for (Index j = 0; j < m; ++j)
            if (j != ell) total += double(law.counts(task, j));
        Vec rest = Vec::Zero(target.size());
        Mat form = Mat::Zero(target.size(), target.size());
        for (Index j = 0; j < m; ++j) {
            if (j == ell) continue;
            const double w = double(law.counts(task, j)) / total;
            rest += w * law.mean_map.row(task * m + j).transpose();
            form += w * law.form(task, j);
        }
        diffs.push_back(target - rest);
        forms.push_back(form);
    }

    double value(const Vec& y, double gamma, Vec* grad) const {
        const std::size_t n = diffs.size();
        std::vector<double> x(n), t(n), c(n);
        for (std::size_t a = 0; a < n; ++a) {
            c[a] = std::max(y.dot(forms[a] * y), 1e-300);
            t[a] = diffs[a].dot(y) / std::sqrt(c[a]);
            x[a] = normal_q(t[a]);
        }
        const double top = *std::max_element(x.begin(), x.end());
        double sum = 0.0;
        for (double v : x) sum += std::exp(gamma * (v - top));
        const double nn = double(n);
        if (grad) {
            grad->setZero(y.size());
            for (std::size_t a = 0; a < n; ++a) {
                const double w = std::exp(gamma * (x[a] - top)) / sum / nn;
                const Vec ky = forms[a] * y;
                const Vec dt = diffs[a] / std::sqrt(c[a]) - diffs[a].dot(y) * ky / (c[a] * std::sqrt(c[a]));
                *grad -= w * normal_pdf(t[a]) * dt;
            }
        }
        return (gamma * top + std::log(sum)) / (gamma * nn);
    }

    double max_q(const Vec& y) const {
        double best = 0.0;
        for (std::size_t a = 0; a < diffs.size(); ++a)
            best = std::max(best, normal_q(diffs[a].dot(y) / std::sqrt(std::max(y.dot(forms[a] * y), 1e-300))));
        return best;
    }
};

}  // namespace

template <typename Scalar>
OptimizedLabels<Scalar> zero_shift(const ScoreLaw<Scalar>& law, const Vector<Scalar>& scores, Index task, ShiftMode mode,
                                   Index anchor_class) {
    const Index k = law.tasks(), m = law.classes();
    require_task(task, k);
    if (scores.size() != k * m) fail(Errc::DimensionMismatch, "one score per (task, class) expected");
    if (anchor_class < 0 || anchor_class >= m) fail(Errc::BadSpec, "anchor class out of range");
    Vec row;
    if (mode == ShiftMode::midpoint_zero) {
        require_binary(m);
        row = 0.5 * (law.mean_map.row(task * m) + law.mean_map.row(task * m + 1)).transpose();
    } else {
        row = law.mean_map.row(task * m + anchor_class).transpose();
    }
    const Vec p = task_indicator(k, m, task);
    const double coefficient = row.dot(p);
    if (std::abs(coefficient) < 1e-14) throw Error(Errc::DegenerateShift, "score-optimizer", "shift coefficient vanishes");
    const double ybar = -row.dot(scores) / coefficient;

    OptimizedLabels<Scalar> out;
    out.scores = ScoreAssignment<Scalar>::binary(scores + ybar * p);
    out.shift = Vector<Scalar>::Zero(k);
    out.shift(task) = ybar;
    const auto pred = law.predict(out.scores.values);
    if (m == 2) {
        out.threshold = Scalar(0.5) * (pred.mean(task, 0) + pred.mean(task, 1));
        out.objective = binary_error(pred, task, out.threshold);
    } else {
        out.objective = OneVsAllView(law, task, anchor_class, false).max_q(out.scores.values);
    }
    return out;
}

template <typename Scalar>
OptimizedLabels<Scalar> optimal_labels_one_vs_all(const ScoreLaw<Scalar>& law, Index task, Index ell,
                                                  const OneVsAllOptions& opt) {
    const Index k = law.tasks(), m = law.classes();
    require_task(task, k);
    if (ell < 0 || ell >= m) fail(Errc::BadSpec, "class index out of range");
    const OneVsAllView view(law, task, ell, opt.collapse_rest);

    Vec y = one_vs_rest_scores<double>(k, m, ell).values;
    OptimizedLabels<Scalar> out;
    out.provenance = LabelProvenance::gradient_descent;
    for (double gamma : opt.relax) {
        auto res = descend([&](const Vec& x, Vec* g) { return view.value(x, gamma, g); }, y, k, m, opt.control);
        y = res.x;
        out.history.insert(out.history.end(), res.history.begin(), res.history.end());
        out.gradient_norm = res.gradient_norm;
        out.iterations += res.iterations;
        out.converged = res.converged;
    }
    // zero the class-ell mean, then unit variance for class ell
    auto shifted = zero_shift(law, Vec(score_centering<double>(law.counts) * y), task, ShiftMode::class_mean_zero, ell);
    const double c = shifted.scores.values.col(0).dot(law.form(task, ell) * shifted.scores.values.col(0));
    if (!(c > 0.0)) fail(Errc::SingularMatrix, "class variance of the one-vs-all score vanishes");
    out.scores = ScoreAssignment<Scalar>::binary(shifted.scores.values / std::sqrt(c));
    out.shift = shifted.shift / std::sqrt(c);
    out.objective = view.max_q(out.scores.values);
    return out;
}

template <typename Scalar>
std::pair<Vector<Scalar>, Matrix<Scalar>> decision_moments(const ScoreLaw<Scalar>& law, const Matrix<Scalar>& y, Index task,
                                                           Index j, const Vector<Scalar>& scales) {
    const Index m = law.classes();
    if (y.cols() != m) fail(Errc::DimensionMismatch, "one score column per class expected");
    Mat ys = y;
    if (scales.size() == m) ys = y * scales.cwiseInverse().asDiagonal();
    Mat e = Mat::Zero(m - 1, m);
    for (Index r = 0, row = 0; r < m; ++r) {
        if (r == j) continue;
        e(row, j) = 1.0;
        e(row, r) = -1.0;
        ++row;
    }
    const Vec mean = e * (law.mean_map.row(task * m + j) * ys).transpose();
    Mat cov = e * ys.transpose() * law.form(task, j) * ys * e.transpose();
    cov = 0.5 * (cov + cov.transpose());
    return {mean, cov};
}

template <typename Scalar>
OptimizedLabels<Scalar> optimal_labels_one_hot(const ScoreLaw<Scalar>& law, Index task, const OneHotOptions& opt) {
    const Index k = law.tasks(), m = law.classes();
    require_task(task, k);
    const GhkOrthant ghk(m - 1, opt.samples, opt.seed);

    auto accuracy = [&](const Mat& y, Mat* grad) {
        double total = 0.0;
        if (grad) grad->setZero(y.rows(), y.cols());
        for (Index j = 0; j < m; ++j) {
            auto [mu, cov] = decision_moments<double>(law, y, task, j);
            Mat e = Mat::Zero(m - 1, m);
            for (Index r = 0, row = 0; r < m; ++r) {
                if (r == j) continue;
                e(row, j) = 1.0;
                e(row, r) = -1.0;
                ++row;
            }
            if (!grad) {
                total += ghk(mu, cov);
                continue;
            }
            Vec gm;
            Mat gc;
            total += ghk.gradient(mu, cov, gm, gc);
            const Vec lrow = law.mean_map.row(task * m + j).transpose();
            *grad += lrow * (e.transpose() * gm).transpose();
            *grad += 2.0 * law.form(task, j) * y * e.transpose() * gc * e;
        }
        if (grad) *grad /= double(m);
        return total / double(m);
    };

    Mat y = one_hot_scores<double>(k, m).values;
    y /= y.norm();
    Mat g;
    double f = accuracy(y, &g);
    OptimizedLabels<Scalar> out;
    out.provenance = LabelProvenance::gradient_descent;
    out.history.push_back(f);
    double step = 1.0;
    long it = 0;
    bool stalled = false;
    for (; it < opt.max_iterations; ++it) {
        const double gn2 = g.squaredNorm();
        if (std::sqrt(gn2) < 1e-8) break;
        bool accepted = false;
        for (int tries = 0; tries < 60; ++tries) {
            Mat trial = y + step * g;
            trial /= trial.norm();
            const double ft = accuracy(trial, nullptr);
            if (ft >= f + opt.armijo * step * gn2) {
                y = trial;
                f = ft;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) {
            stalled = true;
            break;
        }
        f = accuracy(y, &g);
        out.history.push_back(f);
        step *= 2.0;
    }
    out.iterations = it;
    out.gradient_norm = g.norm();
    out.converged = out.gradient_norm < 1e-8 || stalled;
    out.scores = ScoreAssignment<Scalar>::vector(y);
    out.shift = Vector<Scalar>::Zero(k);
    out.objective = f;
    return out;
}

template <typename Scalar>
Hyperparams<Scalar> tune_hyperparams(const HyperGrid& grid, const std::function<Scalar(const Hyperparams<Scalar>&)>& objective,
                                     Scalar* best_value) {
    if (grid.lambdas.empty() || grid.gammas.empty()) fail(Errc::BadSpec, "empty hyperparameter grid");
    std::vector<double> lambdas = grid.lambdas;
    std::vector<std::vector<double>> gammas = grid.gammas;
    std::sort(lambdas.begin(), lambdas.end());
    std::sort(gammas.begin(), gammas.end());
    Hyperparams<Scalar> best;
    Scalar value = std::numeric_limits<Scalar>::infinity();
    // visiting in (lambda, gamma) order and keeping only strict improvements implements the tie rule
    for (double lambda : lambdas)
        for (const auto& gamma : gammas) {
            Hyperparams<Scalar> h{Scalar(lambda), Eigen::Map<const Vec>(gamma.data(), Index(gamma.size())).cast<Scalar>()};
            const Scalar v = objective(h);
            if (v < value) {
                value = v;
                best = h;
            }
        }
    if (best_value) *best_value = value;
    return best;
}

template double binary_error<double>(const ScorePrediction<double>&, Index, double);
template DecisionRule<double> decision_threshold<double>(const ScorePrediction<double>&, Index);
template double optimal_error_isotropic<double>(const IsotropicStats<double>&, Index);
template OptimizedLabels<double> optimal_labels_isotropic<double>(const IsotropicStats<double>&, Index);
template OptimizedLabels<double> optimal_labels_general<double>(const ScoreLaw<double>&, Index, const DescentControl&);
template OptimizedLabels<double> optimal_labels_neyman_pearson<double>(const ScoreLaw<double>&, Index, double,
                                                                       const DescentControl&);
template OptimizedLabels<double> optimal_labels_one_vs_all<double>(const ScoreLaw<double>&, Index, Index,
                                                                   const OneVsAllOptions&);
template OptimizedLabels<double> optimal_labels_one_hot<double>(const ScoreLaw<double>&, Index, const OneHotOptions&);
template std::pair<Vector<double>, Matrix<double>> decision_moments<double>(const ScoreLaw<double>&, const Matrix<double>&,
                                                                            Index, Index, const Vector<double>&);
template OptimizedLabels<double> zero_shift<double>(const ScoreLaw<double>&, const Vector<double>&, Index, ShiftMode, Index);
template Hyperparams<double> tune_hyperparams<double>(const HyperGrid&,
                                                      const std::function<double(const Hyperparams<double>&)>&, double*);

}  // namespace mtl
