#include "mtl/core.hpp"

#include <cmath>
#include <string>

namespace mtl {

const char* errc_name(Errc code) noexcept {
    switch (code) {
        case Errc::BadSpec: return "BadSpec";
        case Errc::ParseError: return "ParseError";
        case Errc::SchemaError: return "SchemaError";
        case Errc::IoError: return "IoError";
        case Errc::DimensionMismatch: return "DimensionMismatch";
        case Errc::ZeroVariance: return "ZeroVariance";
        case Errc::SingularSystem: return "SingularSystem";
        case Errc::SingularMatrix: return "SingularMatrix";
        case Errc::NoConvergence: return "NoConvergence";
        case Errc::NonPositive: return "NonPositive";
        case Errc::ModelMismatch: return "ModelMismatch";
        case Errc::DenseLimitExceeded: return "DenseLimitExceeded";
        case Errc::CriticalRegime: return "CriticalRegime";
        case Errc::InsufficientSamples: return "InsufficientSamples";
        case Errc::DegenerateShift: return "DegenerateShift";
        case Errc::NonPSD: return "NonPSD";
    }
    return "Unknown";
}

namespace {
[[noreturn]] void fail(Errc code, const std::string& what) { throw Error(code, "core-model", what); }
}  // namespace

template <typename Scalar>
Dataset<Scalar>::Dataset(Index k, Index m, std::vector<Matrix<Scalar>> blocks)
    : k_(k), m_(m), blocks_(std::move(blocks)) {
    if (k < 1) fail(Errc::BadSpec, "task count must be >= 1");
    if (m < 2) fail(Errc::BadSpec, "class count must be >= 2");
    if (static_cast<Index>(blocks_.size()) != k * m)
        fail(Errc::DimensionMismatch, "expected " + std::to_string(k * m) + " blocks");
    p_ = blocks_.front().rows();
    if (p_ < 1) fail(Errc::BadSpec, "feature dimension must be >= 1");
    for (Index i = 0; i < k; ++i)
        for (Index j = 0; j < m; ++j) {
            const auto& b = block(i, j);
            if (b.rows() != p_) fail(Errc::DimensionMismatch, "block rows differ from p");
            if (b.cols() < 1)
                fail(Errc::InsufficientSamples,
                     "class " + std::to_string(j + 1) + " of task " + std::to_string(i + 1) + " is empty");
            if (!b.allFinite()) fail(Errc::BadSpec, "non-finite feature value");
        }
    offsets_.assign(static_cast<std::size_t>(k), Vector<Scalar>::Zero(p_));
    scales_ = Vector<Scalar>::Ones(k);
}

template <typename Scalar>
IndexMatrix Dataset<Scalar>::counts() const {
    IndexMatrix c(k_, m_);
    for (Index i = 0; i < k_; ++i)
        for (Index j = 0; j < m_; ++j) c(i, j) = count(i, j);
    return c;
}

template <typename Scalar>
Index Dataset<Scalar>::task_size(Index i) const {
    Index s = 0;
    for (Index j = 0; j < m_; ++j) s += count(i, j);
    return s;
}

template <typename Scalar>
Index Dataset<Scalar>::size() const {
    Index s = 0;
    for (const auto& b : blocks_) s += b.cols();
    return s;
}

template <typename Scalar>
Matrix<Scalar> Dataset<Scalar>::task_block(Index i) const {
    Matrix<Scalar> x(p_, task_size(i));
    Index c = 0;
    for (Index j = 0; j < m_; ++j) {
        x.middleCols(c, count(i, j)) = block(i, j);
        c += count(i, j);
    }
    return x;
}

template <typename Scalar>
Dataset<Scalar> Dataset<Scalar>::with_record(std::vector<Matrix<Scalar>> blocks,
                                             std::vector<Vector<Scalar>> offsets,
                                             Vector<Scalar> scales) const {
    Dataset out(k_, m_, std::move(blocks));
    out.offsets_ = std::move(offsets);
    out.scales_ = std::move(scales);
    return out;
}

template <typename Scalar>
Matrix<Scalar> Hyperparams<Scalar>::coupling() const {
    const Index k = gamma.size();
    Matrix<Scalar> a = Matrix<Scalar>::Constant(k, k, lambda);
    a.diagonal() += gamma;
    return a;
}

template <typename Scalar>
void Hyperparams<Scalar>::validate(Index k) const {
    if (gamma.size() != k) fail(Errc::DimensionMismatch, "gamma must have one entry per task");
    if (!std::isfinite(static_cast<double>(lambda)) || lambda < Scalar(0))
        fail(Errc::BadSpec, "lambda must be finite and nonnegative");
    if (!gamma.allFinite() || (gamma.array() <= Scalar(0)).any())
        fail(Errc::BadSpec, "gamma entries must be positive");
}

template <typename Scalar>
Matrix<Scalar> score_centering(const IndexMatrix& counts) {
    const Index k = counts.rows(), m = counts.cols();
    Matrix<Scalar> c = Matrix<Scalar>::Identity(k * m, k * m);
    for (Index i = 0; i < k; ++i) {
        const Scalar ni = Scalar(counts.row(i).sum());
        for (Index j = 0; j < m; ++j)
            for (Index l = 0; l < m; ++l) c(i * m + j, i * m + l) -= Scalar(counts(i, l)) / ni;
    }
    return c;
}

template <typename Scalar>
Matrix<Scalar> ScoreAssignment<Scalar>::centered(const IndexMatrix& counts) const {
    if (values.rows() != counts.size())
        throw Error(Errc::DimensionMismatch, "core-model", "score rows must equal k*m");
    return score_centering<Scalar>(counts) * values;
}

template <typename Scalar>
ScoreAssignment<Scalar> classical_binary_scores(Index k) {
    Vector<Scalar> y(2 * k);
    for (Index i = 0; i < k; ++i) {
        y(2 * i) = Scalar(1);
        y(2 * i + 1) = Scalar(-1);
    }
    return ScoreAssignment<Scalar>::binary(y);
}

template <typename Scalar>
ScoreAssignment<Scalar> one_vs_rest_scores(Index k, Index m, Index ell) {
    Vector<Scalar> y = Vector<Scalar>::Constant(k * m, Scalar(-1));
    for (Index i = 0; i < k; ++i) y(i * m + ell) = Scalar(1);
    return ScoreAssignment<Scalar>::binary(y);
}

template <typename Scalar>
ScoreAssignment<Scalar> one_hot_scores(Index k, Index m) {
    Matrix<Scalar> y(k * m, m);
    for (Index i = 0; i < k; ++i) y.middleRows(i * m, m).setIdentity();
    return ScoreAssignment<Scalar>::vector(y);
}

template <typename Scalar>
Dataset<Scalar> center_tasks(const Dataset<Scalar>& ds) {
    const Index k = ds.tasks(), m = ds.classes();
    std::vector<Matrix<Scalar>> blocks;
    std::vector<Vector<Scalar>> offsets;
    blocks.reserve(ds.blocks().size());
    for (Index i = 0; i < k; ++i) {
        Vector<Scalar> mu = Vector<Scalar>::Zero(ds.dim());
        for (Index j = 0; j < m; ++j) mu += ds.block(i, j).rowwise().sum();
        mu /= Scalar(ds.task_size(i));
        for (Index j = 0; j < m; ++j) blocks.push_back(ds.block(i, j).colwise() - mu);
        // record composes with any earlier one: raw -> (raw - off)/s - mu
        offsets.push_back(ds.offset(i) + ds.scale(i) * mu);
    }
    return ds.with_record(std::move(blocks), std::move(offsets), ds.scales());
}

template <typename Scalar>
Dataset<Scalar> normalize_tasks(const Dataset<Scalar>& ds, NormMode mode) {
    const Index k = ds.tasks(), m = ds.classes(), p = ds.dim();
    std::vector<Matrix<Scalar>> blocks;
    std::vector<Vector<Scalar>> offsets;
    Vector<Scalar> scales(k);
    for (Index i = 0; i < k; ++i) {
        Scalar tr(0);
        for (Index j = 0; j < m; ++j) tr += ds.block(i, j).squaredNorm();
        if (!(tr > Scalar(0)))
            fail(Errc::ZeroVariance, "task " + std::to_string(i + 1) + " has zero variance");
        const Scalar ratio = tr / (Scalar(ds.task_size(i)) * Scalar(p));
        const Scalar div = mode == NormMode::trace ? ratio : std::sqrt(ratio);
        for (Index j = 0; j < m; ++j) blocks.push_back(ds.block(i, j) / div);
        offsets.push_back(ds.offset(i));
        scales(i) = ds.scale(i) * div;
    }
    return ds.with_record(std::move(blocks), std::move(offsets), std::move(scales));
}

template <typename Scalar>
Dataset<Scalar> select_classes(const Dataset<Scalar>& ds, const std::vector<Index>& classes) {
    std::vector<Matrix<Scalar>> blocks;
    for (Index i = 0; i < ds.tasks(); ++i)
        for (Index j : classes) {
            if (j < 0 || j >= ds.classes()) fail(Errc::BadSpec, "class index out of range");
            blocks.push_back(ds.block(i, j));
        }
    return Dataset<Scalar>(ds.tasks(), static_cast<Index>(classes.size()), std::move(blocks));
}

template <typename Scalar>
BlockOperator<Scalar>::BlockOperator(const Dataset<Scalar>& ds, const Hyperparams<Scalar>& hyper)
    : k_(ds.tasks()), p_(ds.dim()), n_(ds.size()), coupling_(hyper.coupling()) {
    hyper.validate(k_);
    Index c = 0;
    for (Index i = 0; i < k_; ++i) {
        x_.push_back(ds.task_block(i));
        start_.push_back(c);
        c += x_.back().cols();
    }
}

template <typename Scalar>
Matrix<Scalar> BlockOperator<Scalar>::apply_a(const Eigen::Ref<const Matrix<Scalar>>& u) const {
    if (u.rows() != rows()) throw Error(Errc::DimensionMismatch, "core-model", "A operand has wrong length");
    Matrix<Scalar> out = Matrix<Scalar>::Zero(u.rows(), u.cols());
    for (Index i = 0; i < k_; ++i)
        for (Index l = 0; l < k_; ++l) out.middleRows(i * p_, p_) += coupling_(i, l) * u.middleRows(l * p_, p_);
    return out;
}

template <typename Scalar>
Matrix<Scalar> BlockOperator<Scalar>::apply_z(const Eigen::Ref<const Matrix<Scalar>>& v) const {
    if (v.rows() != n_) throw Error(Errc::DimensionMismatch, "core-model", "Z operand has wrong length");
    Matrix<Scalar> out(rows(), v.cols());
    for (Index i = 0; i < k_; ++i)
        out.middleRows(i * p_, p_).noalias() = x_[static_cast<std::size_t>(i)] * v.middleRows(task_offset(i), x_[static_cast<std::size_t>(i)].cols());
    return out;
}

template <typename Scalar>
Matrix<Scalar> BlockOperator<Scalar>::apply_zt(const Eigen::Ref<const Matrix<Scalar>>& u) const {
    if (u.rows() != rows()) throw Error(Errc::DimensionMismatch, "core-model", "Z^T operand has wrong length");
    Matrix<Scalar> out(n_, u.cols());
    for (Index i = 0; i < k_; ++i) {
        const auto& x = x_[static_cast<std::size_t>(i)];
        out.middleRows(task_offset(i), x.cols()).noalias() = x.transpose() * u.middleRows(i * p_, p_);
    }
    return out;
}

template <typename Scalar>
Matrix<Scalar> BlockOperator<Scalar>::dense_z() const {
    Matrix<Scalar> z = Matrix<Scalar>::Zero(rows(), n_);
    for (Index i = 0; i < k_; ++i) {
        const auto& x = x_[static_cast<std::size_t>(i)];
        z.block(i * p_, task_offset(i), p_, x.cols()) = x;
    }
    return z;
}

template <typename Scalar>
Matrix<Scalar> BlockOperator<Scalar>::dense_a() const {
    Matrix<Scalar> a(rows(), rows());
    for (Index i = 0; i < k_; ++i)
        for (Index l = 0; l < k_; ++l)
            a.block(i * p_, l * p_, p_, p_) = coupling_(i, l) * Matrix<Scalar>::Identity(p_, p_);
    return a;
}

template class Dataset<double>;
template struct Hyperparams<double>;
template struct ScoreAssignment<double>;
template class BlockOperator<double>;
template Matrix<double> score_centering<double>(const IndexMatrix&);
template ScoreAssignment<double> classical_binary_scores<double>(Index);
template ScoreAssignment<double> one_vs_rest_scores<double>(Index, Index, Index);
template ScoreAssignment<double> one_hot_scores<double>(Index, Index);
template Dataset<double> center_tasks<double>(const Dataset<double>&);
template Dataset<double> normalize_tasks<double>(const Dataset<double>&, NormMode);
template Dataset<double> select_classes<double>(const Dataset<double>&, const std::vector<Index>&);

}  // namespace mtl
