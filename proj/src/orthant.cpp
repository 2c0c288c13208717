#include "mtl/orthant.hpp"

#include "mtl/gaussian.hpp"
#include "mtl/random.hpp"

#include <algorithm>
#include <cmath>

namespace mtl {

Matrix<double> psd_sqrt(const Matrix<double>& cov, const char* module) {
    if (cov.rows() != cov.cols()) throw Error(Errc::DimensionMismatch, module, "covariance must be square");
    if (!cov.isApprox(cov.transpose(), 1e-10)) throw Error(Errc::NonPSD, module, "covariance is not symmetric");
    Eigen::SelfAdjointEigenSolver<Matrix<double>> eig(0.5 * (cov + cov.transpose()));
    const double top = std::max(1.0, eig.eigenvalues().cwiseAbs().maxCoeff());
    if (eig.eigenvalues().minCoeff() < -1e-10 * top) throw Error(Errc::NonPSD, module, "covariance has a negative eigenvalue");
    return eig.eigenvectors() * eig.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal() * eig.eigenvectors().transpose();
}

OrthantEstimate orthant_probability(const Vector<double>& mean, const Matrix<double>& cov, std::uint64_t seed,
                                    Index samples) {
    const Index d = mean.size();
    if (cov.rows() != d) throw Error(Errc::DimensionMismatch, "classifiers-predictor", "mean and covariance disagree");
    const Matrix<double> root = psd_sqrt(cov, "classifiers-predictor");
    const Index pairs = std::max<Index>(1, samples / 2);
    NormalSource src(seed);
    Vector<double> z(d), w(d);
    double s1 = 0.0, s2 = 0.0;
    for (Index t = 0; t < pairs; ++t) {
        for (Index r = 0; r < d; ++r) z(r) = src();
        w.noalias() = root * z;
        const double a = ((mean + w).array() > 0.0).all() ? 1.0 : 0.0;
        const double b = ((mean - w).array() > 0.0).all() ? 1.0 : 0.0;
        const double v = 0.5 * (a + b);
        s1 += v;
        s2 += v * v;
    }
    const double np = double(pairs), est = s1 / np;
    const double var = pairs > 1 ? std::max(0.0, (s2 - np * est * est) / (np - 1.0)) : 0.0;
    return {est, std::sqrt(var / np)};
}

GhkOrthant::GhkOrthant(Index dim, Index samples, std::uint64_t seed) : dim_(dim), u_(dim, std::max<Index>(1, samples / 2)) {
    Philox4x32 gen(seed);
    for (Index c = 0; c < u_.cols(); ++c)
        for (Index r = 0; r < dim; ++r) u_(r, c) = gen.uniform();
}

namespace {

// accuracy ~1e-9 is ample for GHK
double tail_inverse(double q) {
    if (q <= 1e-300) return 37.5;
    if (q >= 1.0) return -37.5;
    return normal_q_inverse_fast(q);
}

}  // namespace

double GhkOrthant::operator()(const Vector<double>& mean, const Matrix<double>& cov) const {
    Vector<double> gm;
    Matrix<double> gc;
    return evaluate(mean, cov, nullptr, gm, gc);
}

double GhkOrthant::gradient(const Vector<double>& mean, const Matrix<double>& cov, Vector<double>& grad_mean,
                            Matrix<double>& grad_cov) const {
    Vector<double> unused;
    return evaluate(mean, cov, &unused, grad_mean, grad_cov);
}

double GhkOrthant::evaluate(const Vector<double>& mean, const Matrix<double>& cov, Vector<double>* want,
                            Vector<double>& grad_mean, Matrix<double>& grad_cov) const {
    const Index d = dim_;
    if (mean.size() != d || cov.rows() != d || cov.cols() != d)
        throw Error(Errc::DimensionMismatch, "classifiers-predictor", "GHK dimension");
    Eigen::LLT<Matrix<double>> llt(0.5 * (cov + cov.transpose()));
    if (llt.info() != Eigen::Success)
        throw Error(Errc::NonPSD, "classifiers-predictor", "GHK needs a positive definite covariance");
    const Matrix<double> l = llt.matrixL();

    // directions: d mean coordinates, then the symmetric covariance units (r >= s)
    const bool grad = want != nullptr;
    const Index nd = grad ? d + d * (d + 1) / 2 : 0;
    std::vector<Matrix<double>> dl;  // dL for each covariance direction
    if (grad) {
        const Matrix<double> linv = l.triangularView<Eigen::Lower>().solve(Matrix<double>::Identity(d, d));
        for (Index r = 0; r < d; ++r)
            for (Index s = 0; s <= r; ++s) {
                Matrix<double> unit = Matrix<double>::Zero(d, d);
                unit(r, s) = 1.0;
                unit(s, r) = 1.0;
                Matrix<double> a = linv * unit * linv.transpose();
                Matrix<double> low = a.triangularView<Eigen::StrictlyLower>();
                low.diagonal() = 0.5 * a.diagonal();
                dl.push_back(l * low);
            }
    }

    Vector<double> e(d);
    Matrix<double> de = Matrix<double>::Zero(d, nd);  // de(r, t): derivative of e_r along direction t
    Vector<double> dprob(nd), acc_grad(nd), dlow(nd), total_grad = Vector<double>::Zero(nd);
    double total = 0.0;
    for (Index c = 0; c < u_.cols(); ++c) {
        for (int side = 0; side < 2; ++side) {
            double prob = 1.0;
            if (grad) dprob.setZero();
            bool dead = false;
            for (Index r = 0; r < d; ++r) {
                double acc = mean(r);
                for (Index s = 0; s < r; ++s) acc += l(r, s) * e(s);
                const double lower = -acc / l(r, r);
                const double q = normal_q(lower);
                if (q <= 0.0) {
                    dead = true;
                    break;
                }
                if (grad) {
                    // d acc along every direction, then d lower, then d q = -phi(lower) d lower
                    acc_grad.setZero();
                    acc_grad(r) = 1.0;
                    for (Index s = 0; s < r; ++s) acc_grad += l(r, s) * de.row(s).transpose();
                    for (Index t = d; t < nd; ++t) {
                        const auto& dlt = dl[static_cast<std::size_t>(t - d)];
                        double v = 0.0;
                        for (Index s = 0; s < r; ++s) v += dlt(r, s) * e(s);
                        acc_grad(t) += v;
                    }
                    dlow = -acc_grad / l(r, r);
                    for (Index t = d; t < nd; ++t) dlow(t) += acc * dl[static_cast<std::size_t>(t - d)](r, r) / (l(r, r) * l(r, r));
                    const Vector<double> dq = -normal_pdf(lower) * dlow;
                    dprob = dprob * q + prob * dq;
                    prob *= q;
                    if (r + 1 < d) {
                        const double u = side == 0 ? u_(r, c) : 1.0 - u_(r, c);
                        e(r) = tail_inverse(u * q);
                        const double pe = normal_pdf(e(r));
                        if (pe > 0.0)
                            de.row(r) = (-u / pe) * dq.transpose();
                        else
                            de.row(r).setZero();
                    }
                } else {
                    prob *= q;
                    if (r + 1 < d) {
                        const double u = side == 0 ? u_(r, c) : 1.0 - u_(r, c);
                        e(r) = tail_inverse(u * q);
                    }
                }
            }
            if (dead) continue;
            total += prob;
            if (grad) total_grad += dprob;
        }
    }
    const double norm = 2.0 * double(u_.cols());
    if (grad) {
        total_grad /= norm;
        grad_mean = total_grad.head(d);
        grad_cov.setZero(d, d);
        Index t = d;
        for (Index r = 0; r < d; ++r)
            for (Index s = 0; s <= r; ++s, ++t) {
                if (r == s) {
                    grad_cov(r, r) = total_grad(t);
                } else {
                    grad_cov(r, s) = 0.5 * total_grad(t);
                    grad_cov(s, r) = grad_cov(r, s);
                }
            }
    }
    return total / norm;
}

}  // namespace mtl
