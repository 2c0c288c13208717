#pragma once

#include "mtl/core.hpp"
#include "mtl/rmt.hpp"

#include <cstdint>

namespace mtl {

/// Gaussian mixture: class (i, j) ~ N(means.row(i*m + j), Sigma_ij).
template <typename Scalar>
struct SyntheticSpec {
    Index k = 0;
    Index m = 0;
    Index p = 0;
    IndexMatrix counts;        ///< training samples per class
    Index test_per_class = 0;  ///< held-out samples per class
    Matrix<Scalar> means;      ///< km x p
    CovModel<Scalar> cov;
    std::uint64_t seed = 0;

    void validate() const;
};

/// Task 0 keeps `base` (m x p); task t >= 1 gets beta_t * base + sqrt(1 - beta_t^2) * perps[t-1].
template <typename Scalar>
Matrix<Scalar> beta_correlated_means(const Matrix<Scalar>& base, const std::vector<Scalar>& betas,
                                     const std::vector<Matrix<Scalar>>& perps);

template <typename Scalar>
struct SyntheticData {
    Dataset<Scalar> train;
    Dataset<Scalar> test;
    SufficientStats<Scalar> truth;  ///< raw coordinates
};

/// Train block (i, j) uses Philox stream 2a, test block stream 2a + 1 (a = i*m + j).
template <typename Scalar>
SyntheticData<Scalar> generate_synthetic(const SyntheticSpec<Scalar>& spec);

/// Draws `count` samples of class a; `stream` selects the Philox stream.
template <typename Scalar>
Matrix<Scalar> draw_class(const SyntheticSpec<Scalar>& spec, Index a, Index count, std::uint64_t stream);

}  // namespace mtl
