#include "mtl/rmt.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>

#include <cmath>
#include <string>

namespace mtl {

namespace {

[[noreturn]] void fail(Errc code, const std::string& what) { throw Error(code, "rmt-engine", what); }

template <typename Scalar>
Matrix<Scalar> symmetrize(const Matrix<Scalar>& a) {
    return Scalar(0.5) * (a + a.transpose());
}

template <typename Scalar>
Matrix<Scalar> spd_inverse(const Matrix<Scalar>& a, const char* what) {
    Eigen::LLT<Matrix<Scalar>> llt(a);
    if (llt.info() != Eigen::Success) fail(Errc::SingularMatrix, std::string(what) + " is not positive definite");
    return llt.solve(Matrix<Scalar>::Identity(a.rows(), a.cols()));
}

/// Expands a k x k matrix to km x km by repeating each entry over the classes of both tasks.
template <typename Scalar>
Matrix<Scalar> expand_tasks(const Matrix<Scalar>& a, Index m) {
    const Index k = a.rows();
    Matrix<Scalar> out(k * m, k * m);
    for (Index i = 0; i < k; ++i)
        for (Index l = 0; l < k; ++l) out.block(i * m, l * m, m, m).setConstant(a(i, l));
    return out;
}

template <typename Scalar>
Vector<Scalar> class_counts(const IndexMatrix& counts) {
    const Index k = counts.rows(), m = counts.cols();
    Vector<Scalar> n(k * m);
    for (Index a = 0; a < k * m; ++a) n(a) = Scalar(counts(a / m, a % m));
    return n;
}

/// L = I - (I + F) D^{-1/2} Gamma D^{1/2} C, with F the within-task finite-sample centering term.
template <typename Scalar>
Matrix<Scalar> mean_map(const IndexMatrix& counts, const Vector<Scalar>& weight, const Vector<Scalar>& trace_delta,
                        const Matrix<Scalar>& gamma) {
    const Index k = counts.rows(), m = counts.cols(), km = k * m;
    const Vector<Scalar> root = weight.cwiseSqrt();
    Matrix<Scalar> f = Matrix<Scalar>::Identity(km, km);
    for (Index i = 0; i < k; ++i) {
        const Scalar ni = Scalar(counts.row(i).sum());
        for (Index a = i * m; a < (i + 1) * m; ++a)
            for (Index b = i * m; b < (i + 1) * m; ++b)
                f(a, b) += Scalar(counts(i, b - i * m)) / ni * trace_delta(b) / (Scalar(1) + trace_delta(b));
    }
    const Matrix<Scalar> inner = root.cwiseInverse().asDiagonal() * gamma * root.asDiagonal();
    return Matrix<Scalar>::Identity(km, km) - f * inner * score_centering<Scalar>(counts);
}

template <typename Scalar>
Matrix<Scalar> cov_form(const IndexMatrix& counts, const Vector<Scalar>& weight, const Matrix<Scalar>& gamma,
                        const Matrix<Scalar>& v) {
    const Matrix<Scalar> u = weight.cwiseSqrt().asDiagonal() * score_centering<Scalar>(counts);
    const Matrix<Scalar> g = gamma * u;
    return symmetrize<Scalar>(g.transpose() * v * g);
}

}  // namespace

template <typename Scalar>
CovModel<Scalar> CovModel<Scalar>::sample(Index k, Index m, std::vector<Matrix<Scalar>> mats) {
    if (static_cast<Index>(mats.size()) != k * m) fail(Errc::DimensionMismatch, "one covariance per class required");
    Matrix<Scalar> alpha(k, m);
    for (Index a = 0; a < k * m; ++a) {
        const auto& s = mats[static_cast<std::size_t>(a)];
        alpha(a / m, a % m) = s.trace() / Scalar(s.rows());
    }
    return {CovKind::sample, std::move(alpha), std::move(mats)};
}

template <typename Scalar>
Matrix<Scalar> CovModel<Scalar>::dense(Index a, Index p) const {
    if (kind == CovKind::sample) return matrices[static_cast<std::size_t>(a)];
    const Index m = alpha.cols();
    return alpha(a / m, a % m) * Matrix<Scalar>::Identity(p, p);
}

template <typename Scalar>
Matrix<Scalar> SufficientStats<Scalar>::raw_gram() const {
    Matrix<Scalar> g = means * means.transpose();
    for (Index a = 0; a < g.rows(); ++a) g(a, a) = half_a.row(a).dot(half_b.row(a));
    return g;
}

template <typename Scalar>
Matrix<Scalar> SufficientStats<Scalar>::centered_gram() const {
    const Matrix<Scalar> c = score_centering<Scalar>(proportions.counts);
    return symmetrize<Scalar>(c * raw_gram() * c.transpose());
}

template <typename Scalar>
Matrix<Scalar> SufficientStats<Scalar>::mean_products() const {
    if (classes() != 2) fail(Errc::ModelMismatch, "mean-difference products need two classes per task");
    const Index k = tasks();
    Matrix<Scalar> d = Matrix<Scalar>::Zero(k, 2 * k);
    for (Index i = 0; i < k; ++i) {
        d(i, 2 * i) = Scalar(1);
        d(i, 2 * i + 1) = Scalar(-1);
    }
    return symmetrize<Scalar>(d * raw_gram() * d.transpose());
}

template <typename Scalar>
SufficientStats<Scalar> known_stats(const Matrix<Scalar>& means, CovModel<Scalar> cov, const IndexMatrix& counts) {
    if (means.rows() != counts.size()) fail(Errc::DimensionMismatch, "one mean per class required");
    SufficientStats<Scalar> s;
    s.means = means;
    s.half_a = means;
    s.half_b = means;
    s.proportions = {counts, means.cols()};
    s.cov = std::move(cov);
    s.source = StatsSource::truth;
    return s;
}

template <typename Scalar>
SufficientStats<Scalar> rescale_stats(const SufficientStats<Scalar>& stats, const Vector<Scalar>& scales) {
    const Index k = stats.tasks(), m = stats.classes();
    if (scales.size() != k) fail(Errc::DimensionMismatch, "one scale per task required");
    SufficientStats<Scalar> out = stats;
    for (Index a = 0; a < k * m; ++a) {
        const Scalar s = scales(a / m);
        out.means.row(a) /= s;
        out.half_a.row(a) /= s;
        out.half_b.row(a) /= s;
        out.cov.alpha(a / m, a % m) /= s * s;
        if (out.cov.kind == CovKind::sample) out.cov.matrices[static_cast<std::size_t>(a)] /= s * s;
    }
    if (out.cov.kind == CovKind::identity && (scales.array() != Scalar(1)).any()) out.cov.kind = CovKind::isotropic;
    return out;
}

template <typename Scalar>
SufficientStats<Scalar> estimate_mean_products(const Dataset<Scalar>& ds) {
    const Index k = ds.tasks(), m = ds.classes(), p = ds.dim();
    SufficientStats<Scalar> s;
    s.means.resize(k * m, p);
    s.half_a.resize(k * m, p);
    s.half_b.resize(k * m, p);
    for (Index i = 0; i < k; ++i)
        for (Index j = 0; j < m; ++j) {
            const Index a = i * m + j;
            const auto& x = ds.block(i, j);
            const Index n = x.cols();
            if (n == 0) fail(Errc::InsufficientSamples, "empty class");
            s.means.row(a) = x.rowwise().mean().transpose();
            if (n >= 2) {
                const Index h = n / 2;
                s.half_a.row(a) = x.leftCols(h).rowwise().mean().transpose();
                s.half_b.row(a) = x.rightCols(n - h).rowwise().mean().transpose();
            } else {
                s.half_a.row(a) = s.means.row(a);
                s.half_b.row(a) = s.means.row(a);
                s.biased_diagonal = true;
            }
        }
    s.proportions = proportions(ds);
    s.cov = CovModel<Scalar>::identity(k, m);
    s.source = StatsSource::estimated;
    return s;
}

template <typename Scalar>
CovModel<Scalar> estimate_covariances(const Dataset<Scalar>& ds, CovStrategy strategy) {
    const Index k = ds.tasks(), m = ds.classes(), p = ds.dim();
    Matrix<Scalar> alpha(k, m);
    std::vector<Matrix<Scalar>> mats;
    for (Index i = 0; i < k; ++i)
        for (Index j = 0; j < m; ++j) {
            const auto& x = ds.block(i, j);
            const Index n = x.cols();
            // a single sample keeps its task-centered value
            const Matrix<Scalar> xc = n >= 2 ? Matrix<Scalar>(x.colwise() - x.rowwise().mean()) : x;
            alpha(i, j) = xc.squaredNorm() / (Scalar(p) * Scalar(n));
            if (strategy == CovStrategy::sample) {
                Matrix<Scalar> s = Matrix<Scalar>::Zero(p, p);
                s.template selfadjointView<Eigen::Lower>().rankUpdate(xc, Scalar(1) / Scalar(n));
                mats.push_back(s.template selfadjointView<Eigen::Lower>());
            }
        }
    if (strategy == CovStrategy::sample) return {CovKind::sample, alpha, std::move(mats)};
    return CovModel<Scalar>::isotropic(alpha);
}

template <typename Scalar>
SufficientStats<Scalar> estimate_stats(const Dataset<Scalar>& ds, CovStrategy strategy) {
    auto s = estimate_mean_products(ds);
    s.cov = estimate_covariances(ds, strategy);
    return s;
}

template <typename Scalar>
IsotropicDelta<Scalar> solve_delta_isotropic(const ClassProportions<Scalar>& prop, const Hyperparams<Scalar>& hyper,
                                             const SolverControl& ctl) {
    const Index k = prop.tasks();
    hyper.validate(k);
    const Matrix<Scalar> ainv = spd_inverse<Scalar>(hyper.coupling(), "coupling matrix");
    Vector<Scalar> target(k);
    for (Index i = 0; i < k; ++i) target(i) = prop.c0() * prop.c_task(i);

    auto curly_a = [&](const Vector<Scalar>& d) {
        const Vector<Scalar> r = d.cwiseSqrt().cwiseInverse();
        Matrix<Scalar> a = r.asDiagonal() * ainv * r.asDiagonal();
        a.diagonal().array() += Scalar(1);
        return spd_inverse<Scalar>(a, "isotropic core");
    };
    auto map = [&](const Vector<Scalar>& d) -> Vector<Scalar> {
        return (target - curly_a(d).diagonal()) / Scalar(k);
    };

    for (double theta = ctl.damping; theta >= 1e-3; theta *= 0.5) {
        Vector<Scalar> d = target / Scalar(2 * k);
        bool positive = true;
        for (long it = 0; it < ctl.max_iterations; ++it) {
            const Vector<Scalar> f = map(d);
            const Scalar res = (f - d).cwiseAbs().maxCoeff();
            if (res < Scalar(ctl.tolerance)) {
                IsotropicDelta<Scalar> out;
                out.delta_k = d;
                out.curly_a = curly_a(d);
                out.delta_2k.resize(k * prop.classes());
                for (Index i = 0; i < k; ++i)
                    for (Index j = 0; j < prop.classes(); ++j)
                        out.delta_2k(i * prop.classes() + j) =
                            Scalar(prop.counts(i, j)) / Scalar(prop.counts.row(i).sum()) * d(i);
                out.residual = res;
                out.iterations = it;
                return out;
            }
            const Vector<Scalar> next = (Scalar(1) - Scalar(theta)) * d + Scalar(theta) * f;
            if ((next.array() <= Scalar(0)).any()) {
                positive = false;
                break;
            }
            d = next;
        }
        if (positive) fail(Errc::NoConvergence, "isotropic fixed point did not converge");
    }
    fail(Errc::NonPositive, "isotropic fixed point left the positive orthant");
}

template <typename Scalar>
Scalar single_task_delta(const ClassProportions<Scalar>& prop, const Hyperparams<Scalar>& hyper) {
    if (prop.tasks() != 1) fail(Errc::ModelMismatch, "closed form needs a single task");
    const Scalar a = hyper.gamma(0) + hyper.lambda;
    const Scalar r = Scalar(prop.n()) / Scalar(prop.p);
    const Scalar b = Scalar(1) + a - a * r;
    return (-b + std::sqrt(b * b + Scalar(4) * a * r)) / (Scalar(2) * a);
}

template <typename Scalar>
IsotropicStats<Scalar> build_isotropic_stats(const SufficientStats<Scalar>& stats, const Hyperparams<Scalar>& hyper,
                                             const SolverControl& ctl) {
    if (stats.classes() != 2) fail(Errc::ModelMismatch, "isotropic theory needs two classes per task");
    if (stats.cov.kind != CovKind::identity) fail(Errc::ModelMismatch, "isotropic theory needs identity covariances");
    const Index k = stats.tasks();
    const auto& prop = stats.proportions;
    const auto dl = solve_delta_isotropic(prop, hyper, ctl);

    IsotropicStats<Scalar> iso;
    iso.delta_k = dl.delta_k;
    iso.delta_2k = dl.delta_2k;
    iso.curly_a = dl.curly_a;
    iso.residual = dl.residual;
    iso.iterations = dl.iterations;
    iso.counts = prop.counts;

    const Matrix<Scalar> dmu = stats.mean_products();
    Matrix<Scalar> cvec(k, 2);
    for (Index i = 0; i < k; ++i) {
        const Scalar ni = Scalar(prop.counts.row(i).sum());
        const Scalar r1 = Scalar(prop.counts(i, 0)) / ni, r2 = Scalar(prop.counts(i, 1)) / ni;
        const Scalar s = std::sqrt(r1) * std::sqrt(r2);
        cvec(i, 0) = s * std::sqrt(r2);
        cvec(i, 1) = -s * std::sqrt(r1);
    }
    iso.curly_m.resize(2 * k, 2 * k);
    for (Index a = 0; a < 2 * k; ++a)
        for (Index b = 0; b < 2 * k; ++b) iso.curly_m(a, b) = dmu(a / 2, b / 2) * cvec(a / 2, a % 2) * cvec(b / 2, b % 2);

    iso.coupled = expand_tasks<Scalar>(iso.curly_a, 2).cwiseProduct(iso.curly_m);
    iso.gamma_mat = symmetrize<Scalar>((Matrix<Scalar>::Identity(2 * k, 2 * k) + iso.coupled).inverse());

    const Matrix<Scalar> a2 = iso.curly_a.cwiseProduct(iso.curly_a);
    Matrix<Scalar> base = -a2;
    for (Index i = 0; i < k; ++i) base(i, i) += prop.c0() * prop.c_task(i);
    Eigen::PartialPivLU<Matrix<Scalar>> lu(base);
    if (lu.rcond() < 1e-12) fail(Errc::CriticalRegime, "variance system is singular");
    iso.kappa = a2 * lu.inverse();

    for (Index i = 0; i < k; ++i) {
        Vector<Scalar> w = iso.kappa.row(i).transpose();
        w(i) += Scalar(1);
        const Matrix<Scalar> inner = iso.curly_a * w.asDiagonal() * iso.curly_a;
        Matrix<Scalar> v = expand_tasks<Scalar>(inner, 2).cwiseProduct(iso.curly_m);
        for (Index b = 0; b < 2 * k; ++b) v(b, b) += iso.kappa(i, b / 2);
        iso.v_mats.push_back(symmetrize<Scalar>(v));
    }
    return iso;
}

template <typename Scalar>
GeneralStats<Scalar> solve_delta_general(const SufficientStats<Scalar>& stats, const Hyperparams<Scalar>& hyper,
                                         const SolverControl& ctl, Index dense_limit) {
    const Index k = stats.tasks(), m = stats.classes(), p = stats.dim(), km = k * m;
    hyper.validate(k);
    const Scalar s = Scalar(k * p);
    const Vector<Scalar> n = class_counts<Scalar>(stats.proportions.counts);
    const Matrix<Scalar> ainv = spd_inverse<Scalar>(hyper.coupling(), "coupling matrix");
    const bool scalar = stats.cov.scalar();
    if (!scalar && k * p > dense_limit)
        fail(Errc::DenseLimitExceeded, "kp = " + std::to_string(k * p) + " exceeds the dense limit");

    Vector<Scalar> alpha(km);
    for (Index a = 0; a < km; ++a) alpha(a) = stats.cov.alpha(a / m, a % m);
    std::vector<Matrix<Scalar>> sig;
    if (!scalar)
        for (Index a = 0; a < km; ++a) sig.push_back(stats.cov.dense(a, p));

    GeneralStats<Scalar> g;
    g.path = scalar ? GeneralStats<Scalar>::Path::scalar : GeneralStats<Scalar>::Path::dense;
    g.counts = stats.proportions.counts;

    auto resolvent_scalar = [&](const Vector<Scalar>& beta) {
        Matrix<Scalar> r = ainv;
        for (Index a = 0; a < km; ++a) r(a / m, a / m) += beta(a) * alpha(a);
        return spd_inverse<Scalar>(r, "resolvent");
    };
    auto resolvent_dense = [&](const Vector<Scalar>& beta) {
        Matrix<Scalar> r(k * p, k * p);
        for (Index i = 0; i < k; ++i)
            for (Index l = 0; l < k; ++l)
                r.block(i * p, l * p, p, p) = ainv(i, l) * Matrix<Scalar>::Identity(p, p);
        for (Index a = 0; a < km; ++a) {
            const Index i = a / m;
            r.block(i * p, i * p, p, p) += beta(a) * sig[static_cast<std::size_t>(a)];
        }
        return spd_inverse<Scalar>(r, "resolvent");
    };
    auto traces = [&](const Vector<Scalar>& beta, Matrix<Scalar>& res) {
        Vector<Scalar> d(km);
        if (scalar) {
            res = resolvent_scalar(beta);
            for (Index a = 0; a < km; ++a) d(a) = alpha(a) * res(a / m, a / m) / Scalar(k);
        } else {
            res = resolvent_dense(beta);
            for (Index a = 0; a < km; ++a) {
                const Index i = a / m;
                d(a) = sig[static_cast<std::size_t>(a)].cwiseProduct(res.block(i * p, i * p, p, p)).sum() / s;
            }
        }
        return d;
    };

    Vector<Scalar> beta = n / s;
    Matrix<Scalar> res;
    bool converged = false;
    for (long it = 0; it < ctl.max_iterations; ++it) {
        const Vector<Scalar> d = traces(beta, res);
        const Vector<Scalar> next = (n.array() / (s * (Scalar(1) + d.array()))).matrix();
        g.residual = (next - beta).cwiseAbs().maxCoeff();
        g.iterations = it;
        if (g.residual < Scalar(ctl.tolerance)) {
            converged = true;
            break;
        }
        beta = (Scalar(1) - Scalar(ctl.damping)) * beta + Scalar(ctl.damping) * next;
        if ((beta.array() <= Scalar(0)).any()) fail(Errc::NonPositive, "fixed point left the positive orthant");
    }
    if (!converged) fail(Errc::NoConvergence, "general fixed point did not converge");

    g.beta = beta;
    g.delta = traces(beta, res);
    const Vector<Scalar> root = beta.cwiseSqrt();
    const Matrix<Scalar> cent = score_centering<Scalar>(g.counts);

    // mean Gram through the resolvent, and the centered mean matrix for variance terms
    Matrix<Scalar> gram;
    Matrix<Scalar> nmat;  // R0 M, kp x km (dense path)
    if (scalar) {
        g.h = res;
        gram = expand_tasks<Scalar>(res, m).cwiseProduct(stats.centered_gram());
    } else {
        g.r0 = res;
        Matrix<Scalar> raw(km, km);
        for (Index a = 0; a < km; ++a)
            for (Index b = 0; b < km; ++b) {
                const auto blk = res.block((a / m) * p, (b / m) * p, p, p);
                raw(a, b) = a == b ? stats.half_a.row(a) * blk * stats.half_b.row(a).transpose()
                                   : stats.means.row(a) * blk * stats.means.row(b).transpose();
            }
        gram = symmetrize<Scalar>(cent * raw * cent.transpose());
        const Matrix<Scalar> centered = cent * stats.means;
        Matrix<Scalar> mm = Matrix<Scalar>::Zero(k * p, km);
        for (Index a = 0; a < km; ++a) mm.block((a / m) * p, a, p, 1) = centered.row(a).transpose();
        nmat = res * mm;
    }
    g.mm_gram = root.asDiagonal() * gram * root.asDiagonal();
    g.gamma_mat = symmetrize<Scalar>((Matrix<Scalar>::Identity(km, km) + g.mm_gram).inverse());

    // second-order trace terms
    g.t_cal.resize(km, km);
    if (scalar) {
        for (Index a = 0; a < km; ++a)
            for (Index b = 0; b < km; ++b) {
                const Scalar hab = res(a / m, b / m);
                g.t_cal(a, b) = alpha(a) * alpha(b) * hab * hab / Scalar(k);
            }
    } else {
        // prod[a][l] = Sigma_a R0_{i_a, l}
        std::vector<std::vector<Matrix<Scalar>>> prod(static_cast<std::size_t>(km));
        for (Index a = 0; a < km; ++a)
            for (Index l = 0; l < k; ++l)
                prod[static_cast<std::size_t>(a)].push_back(sig[static_cast<std::size_t>(a)] *
                                                             res.block((a / m) * p, l * p, p, p));
        for (Index a = 0; a < km; ++a)
            for (Index b = 0; b <= a; ++b) {
                const auto& x = prod[static_cast<std::size_t>(a)][static_cast<std::size_t>(b / m)];
                const auto& y = prod[static_cast<std::size_t>(b)][static_cast<std::size_t>(a / m)];
                g.t_cal(a, b) = g.t_cal(b, a) = x.cwiseProduct(y.transpose()).sum() / s;
            }
    }
    g.t_bar = g.t_cal;
    g.d = (n.array() / (s * (Scalar(1) + g.delta.array()).square())).matrix();
    const Matrix<Scalar> sys = Matrix<Scalar>::Identity(km, km) - g.t_cal * g.d.asDiagonal();
    Eigen::PartialPivLU<Matrix<Scalar>> lu(sys);
    if (!(lu.rcond() > 1e-12)) fail(Errc::CriticalRegime, "I - T D is singular");
    const Matrix<Scalar> tau = lu.solve(g.t_bar);  // column t holds tau_t
    g.kappa.resize(km, km);
    for (Index t = 0; t < km; ++t)
        for (Index b = 0; b < km; ++b) g.kappa(t, b) = g.d(b) * tau(b, t) / beta(b);
    g.curly_k = beta.asDiagonal() * g.kappa;

    for (Index t = 0; t < km; ++t) {
        const Index it = t / m;
        Matrix<Scalar> inner_terms;
        if (scalar) {
            Vector<Scalar> w = Vector<Scalar>::Zero(k);
            for (Index b = 0; b < km; ++b) w(b / m) += beta(b) * g.kappa(t, b) * alpha(b);
            w(it) += alpha(t);
            const Matrix<Scalar> hh = res * w.asDiagonal() * res;
            inner_terms = expand_tasks<Scalar>(hh, m).cwiseProduct(stats.centered_gram());
        } else {
            inner_terms = Matrix<Scalar>::Zero(km, km);
            for (Index i = 0; i < k; ++i) {
                Matrix<Scalar> blk = Matrix<Scalar>::Zero(p, p);
                for (Index b = i * m; b < (i + 1) * m; ++b)
                    blk += beta(b) * g.kappa(t, b) * sig[static_cast<std::size_t>(b)];
                if (i == it) blk += sig[static_cast<std::size_t>(t)];
                const auto ni = nmat.middleRows(i * p, p);
                inner_terms.noalias() += ni.transpose() * blk * ni;
            }
        }
        Matrix<Scalar> v = root.asDiagonal() * inner_terms * root.asDiagonal();
        v.diagonal() += g.kappa.row(t).transpose();
        g.v_mats.push_back(symmetrize<Scalar>(v));
    }
    return g;
}

template <typename Scalar>
ScorePrediction<Scalar> ScoreLaw<Scalar>::predict(const Matrix<Scalar>& y) const {
    if (y.rows() != mean_map.cols()) fail(Errc::DimensionMismatch, "score rows must equal k*m");
    ScorePrediction<Scalar> out;
    out.m = classes();
    out.source = source;
    out.means = mean_map * y;
    for (const auto& k : cov_forms) out.covariances.push_back(symmetrize<Scalar>(y.transpose() * k * y));
    return out;
}

template <typename Scalar>
ScoreLaw<Scalar> score_law(const IsotropicStats<Scalar>& iso) {
    const Index k = iso.counts.rows();
    ScoreLaw<Scalar> law;
    law.counts = iso.counts;
    // equal trace terms within a task: no finite-sample centering term
    law.mean_map = mean_map<Scalar>(iso.counts, iso.delta_2k, Vector<Scalar>::Zero(2 * k), iso.gamma_mat);
    for (Index a = 0; a < 2 * k; ++a)
        law.cov_forms.push_back(cov_form<Scalar>(iso.counts, iso.delta_2k, iso.gamma_mat,
                                                 iso.v_mats[static_cast<std::size_t>(a / 2)]) /
                                iso.delta_k(a / 2));
    return law;
}

template <typename Scalar>
ScoreLaw<Scalar> score_law(const GeneralStats<Scalar>& gen) {
    ScoreLaw<Scalar> law;
    law.counts = gen.counts;
    law.mean_map = mean_map<Scalar>(gen.counts, gen.beta, gen.delta, gen.gamma_mat);
    for (const auto& v : gen.v_mats) law.cov_forms.push_back(cov_form<Scalar>(gen.counts, gen.beta, gen.gamma_mat, v));
    return law;
}

template <typename Scalar>
ScorePrediction<Scalar> predict_binary_isotropic(const IsotropicStats<Scalar>& iso, const ScoreAssignment<Scalar>& scores) {
    if (scores.mode != ScoreMode::binary || scores.columns() != 1)
        fail(Errc::DimensionMismatch, "binary scores expected");
    return score_law(iso).predict(scores.values);
}

template <typename Scalar>
ScorePrediction<Scalar> predict_general(const GeneralStats<Scalar>& gen, const ScoreAssignment<Scalar>& scores) {
    if (scores.mode == ScoreMode::binary && scores.columns() != 1) fail(Errc::DimensionMismatch, "binary scores expected");
    return score_law(gen).predict(scores.values);
}

template <typename Scalar>
ScoreLaw<Scalar> build_law(const SufficientStats<Scalar>& stats, const Hyperparams<Scalar>& hyper) {
    auto law = score_law(solve_delta_general(stats, hyper));
    law.source = stats.source;
    return law;
}

template struct CovModel<double>;
template struct SufficientStats<double>;
template struct ScoreLaw<double>;
template SufficientStats<double> known_stats<double>(const Matrix<double>&, CovModel<double>, const IndexMatrix&);
template SufficientStats<double> rescale_stats<double>(const SufficientStats<double>&, const Vector<double>&);
template SufficientStats<double> estimate_mean_products<double>(const Dataset<double>&);
template CovModel<double> estimate_covariances<double>(const Dataset<double>&, CovStrategy);
template SufficientStats<double> estimate_stats<double>(const Dataset<double>&, CovStrategy);
template IsotropicDelta<double> solve_delta_isotropic<double>(const ClassProportions<double>&, const Hyperparams<double>&,
                                                              const SolverControl&);
template double single_task_delta<double>(const ClassProportions<double>&, const Hyperparams<double>&);
template IsotropicStats<double> build_isotropic_stats<double>(const SufficientStats<double>&, const Hyperparams<double>&,
                                                              const SolverControl&);
template GeneralStats<double> solve_delta_general<double>(const SufficientStats<double>&, const Hyperparams<double>&,
                                                          const SolverControl&, Index);
template ScoreLaw<double> score_law<double>(const IsotropicStats<double>&);
template ScoreLaw<double> score_law<double>(const GeneralStats<double>&);
template ScorePrediction<double> predict_binary_isotropic<double>(const IsotropicStats<double>&,
                                                                  const ScoreAssignment<double>&);
template ScorePrediction<double> predict_general<double>(const GeneralStats<double>&, const ScoreAssignment<double>&);
template ScoreLaw<double> build_law<double>(const SufficientStats<double>&, const Hyperparams<double>&);

}  // namespace mtl
