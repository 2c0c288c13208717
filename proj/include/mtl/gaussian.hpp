#pragma once

#include <cmath>

namespace mtl {

/// Gaussian tail Q(t) = P(N(0,1) > t).
inline double normal_q(double t) { return 0.5 * std::erfc(t / std::sqrt(2.0)); }

/// Standard normal density.
inline double normal_pdf(double t) { return 0.3989422804014327 * std::exp(-0.5 * t * t); }

/// Inverse tail: Q(normal_q_inverse(eta)) = eta for eta in (0, 1).
double normal_q_inverse(double eta);

/// Unrefined rational approximation of the same, relative error about 1e-9; eta must lie in (0, 1).
double normal_q_inverse_fast(double eta);

}  // namespace mtl
