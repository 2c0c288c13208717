#pragma once

#include "mtl/common.hpp"

#include <cstdint>

namespace mtl {

struct OrthantEstimate {
    double probability = 0.0;
    double std_error = 0.0;
};

/// P(w > 0 componentwise) for w ~ N(mean, cov), by antithetic Monte Carlo through a
/// symmetric square root of cov. Deterministic for a fixed seed.
OrthantEstimate orthant_probability(const Vector<double>& mean, const Matrix<double>& cov, std::uint64_t seed,
                                    Index samples = 1000000);

/// Smooth orthant estimator (Genz-Hajivassiliou-Keane) over a fixed set of uniforms.
///
/// Reusing the same uniforms across calls gives common random numbers, so finite
/// differences of the estimate are smooth in (mean, cov).
class GhkOrthant {
public:
    GhkOrthant(Index dim, Index samples, std::uint64_t seed);

    Index dim() const noexcept { return dim_; }
    double operator()(const Vector<double>& mean, const Matrix<double>& cov) const;

    /// Estimate with its exact derivatives: dP = grad_mean . dmean + tr(grad_cov dcov), grad_cov symmetric.
    double gradient(const Vector<double>& mean, const Matrix<double>& cov, Vector<double>& grad_mean,
                    Matrix<double>& grad_cov) const;

private:
    double evaluate(const Vector<double>& mean, const Matrix<double>& cov, Vector<double>* want, Vector<double>& grad_mean,
                    Matrix<double>& grad_cov) const;

    Index dim_;
    Matrix<double> u_;  ///< dim x samples/2; each column is also used antithetically
};

/// Symmetric PSD square root; throws NonPSD when cov has a negative eigenvalue beyond round-off.
Matrix<double> psd_sqrt(const Matrix<double>& cov, const char* module);

}  // namespace mtl
