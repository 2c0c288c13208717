#include "mtl/synthetic.hpp"

#include "mtl/random.hpp"

#include <cmath>

namespace mtl {

namespace {

[[noreturn]] void fail(const std::string& what) { throw Error(Errc::BadSpec, "cli-io", what); }

}  // namespace

template <typename Scalar>
void SyntheticSpec<Scalar>::validate() const {
    if (k < 1 || m < 2 || p < 1) fail("synthetic spec needs k >= 1, m >= 2, p >= 1");
    if (counts.rows() != k || counts.cols() != m) fail("counts must be k x m");
    if (counts.minCoeff() < 1) fail("every class needs at least one training sample");
    if (test_per_class < 0) fail("negative test count");
    if (means.rows() != k * m || means.cols() != p) fail("means must be km x p");
    if (!means.allFinite()) fail("non-finite mean");
    if (cov.scalar()) {
        if (cov.alpha.rows() != k || cov.alpha.cols() != m) fail("covariance scalars must be k x m");
        if (cov.alpha.minCoeff() <= Scalar(0)) fail("covariance scalars must be positive");
    } else {
        if (static_cast<Index>(cov.matrices.size()) != k * m) fail("need one covariance per class");
        for (const auto& s : cov.matrices)
            if (s.rows() != p || s.cols() != p) fail("covariance matrices must be p x p");
    }
}

template <typename Scalar>
Matrix<Scalar> beta_correlated_means(const Matrix<Scalar>& base, const std::vector<Scalar>& betas,
                                     const std::vector<Matrix<Scalar>>& perps) {
    if (betas.size() != perps.size()) fail("one orthogonal component per correlated task");
    const Index m = base.rows(), k = static_cast<Index>(betas.size()) + 1;
    Matrix<Scalar> out(k * m, base.cols());
    out.topRows(m) = base;
    for (Index t = 1; t < k; ++t) {
        const Scalar b = betas[static_cast<std::size_t>(t - 1)];
        const auto& perp = perps[static_cast<std::size_t>(t - 1)];
        if (b < Scalar(-1) || b > Scalar(1)) fail("beta must lie in [-1, 1]");
        if (perp.rows() != m || perp.cols() != base.cols()) fail("orthogonal component must match the base means");
        out.middleRows(t * m, m) = b * base + std::sqrt(Scalar(1) - b * b) * perp;
    }
    return out;
}

template <typename Scalar>
Matrix<Scalar> draw_class(const SyntheticSpec<Scalar>& spec, Index a, Index count, std::uint64_t stream) {
    NormalSource src(spec.seed, stream);
    Matrix<Scalar> z = src.template matrix<Scalar>(spec.p, count);
    if (spec.cov.scalar()) {
        z *= std::sqrt(spec.cov.alpha(a / spec.m, a % spec.m));
    } else {
        Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> eig(spec.cov.matrices[static_cast<std::size_t>(a)]);
        if (eig.eigenvalues().minCoeff() < -Scalar(1e-10) * std::max(Scalar(1), eig.eigenvalues().maxCoeff()))
            throw Error(Errc::NonPSD, "cli-io", "class covariance is not positive semidefinite");
        const Matrix<Scalar> root =
            eig.eigenvectors() * eig.eigenvalues().cwiseMax(Scalar(0)).cwiseSqrt().asDiagonal() * eig.eigenvectors().transpose();
        z = root * z;
    }
    z.colwise() += spec.means.row(a).transpose();
    return z;
}

template <typename Scalar>
SyntheticData<Scalar> generate_synthetic(const SyntheticSpec<Scalar>& spec) {
    spec.validate();
    std::vector<Matrix<Scalar>> train, test;
    for (Index a = 0; a < spec.k * spec.m; ++a) {
        train.push_back(draw_class(spec, a, spec.counts(a / spec.m, a % spec.m), 2 * std::uint64_t(a)));
        test.push_back(draw_class(spec, a, spec.test_per_class, 2 * std::uint64_t(a) + 1));
    }
    Dataset<Scalar> tr(spec.k, spec.m, std::move(train));
    // an empty test set still needs a well-formed container
    Dataset<Scalar> te = spec.test_per_class > 0 ? Dataset<Scalar>(spec.k, spec.m, std::move(test)) : Dataset<Scalar>();
    return {std::move(tr), std::move(te), known_stats(spec.means, spec.cov, spec.counts)};
}

template struct SyntheticSpec<double>;
template Matrix<double> beta_correlated_means<double>(const Matrix<double>&, const std::vector<double>&,
                                                      const std::vector<Matrix<double>>&);
template Matrix<double> draw_class<double>(const SyntheticSpec<double>&, Index, Index, std::uint64_t);
template SyntheticData<double> generate_synthetic<double>(const SyntheticSpec<double>&);

}  // namespace mtl
