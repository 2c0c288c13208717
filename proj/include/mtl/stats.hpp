#pragma once

#include "mtl/common.hpp"
#include "mtl/gaussian.hpp"

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

namespace mtl {

/// Two-sided Kolmogorov-Smirnov distance of a sample to N(0, 1).
inline double ks_statistic_normal(std::vector<double> z) {
    std::sort(z.begin(), z.end());
    const double n = static_cast<double>(z.size());
    double d = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
        const double f = 1.0 - normal_q(z[i]);
        d = std::max({d, f - double(i) / n, double(i + 1) / n - f});
    }
    return d;
}

/// Asymptotic p-value of the KS distance d for sample size n (Stephens' finite-n correction).
inline double ks_pvalue(double d, std::size_t n) {
    const double sn = std::sqrt(double(n));
    const double lam = (sn + 0.12 + 0.11 / sn) * d;
    if (lam < 0.2) return 1.0;
    double sum = 0.0, sign = 1.0;
    for (int j = 1; j <= 100; ++j) {
        const double term = std::exp(-2.0 * j * j * lam * lam);
        sum += sign * term;
        if (term < 1e-16) break;
        sign = -sign;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

/// Wilson score interval for `hits` successes out of `n` at normal quantile z.
inline std::pair<double, double> wilson_interval(Index hits, Index n, double z = 1.959963984540054) {
    if (n == 0) return {0.0, 1.0};
    const double nn = double(n), ph = double(hits) / nn, z2 = z * z;
    const double centre = (ph + z2 / (2 * nn)) / (1 + z2 / nn);
    const double half = z / (1 + z2 / nn) * std::sqrt(ph * (1 - ph) / nn + z2 / (4 * nn * nn));
    return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

}  // namespace mtl
