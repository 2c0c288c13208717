#pragma once

#include "mtl/common.hpp"

#include <vector>

namespace mtl {

/// Per-task, per-class feature blocks. Block (i, j) holds the p x n_ij samples of
/// class j in task i; storage is task-major, class-minor.
///
/// The dataset also carries the affine map applied by preprocessing so that raw
/// test points can be brought into the same coordinates: x -> (x - offset_i) / scale_i.
template <typename Scalar>
class Dataset {
public:
    Dataset() = default;
    Dataset(Index k, Index m, std::vector<Matrix<Scalar>> blocks);

    Index tasks() const noexcept { return k_; }
    Index classes() const noexcept { return m_; }
    Index dim() const noexcept { return p_; }

    const Matrix<Scalar>& block(Index i, Index j) const { return blocks_[static_cast<std::size_t>(i * m_ + j)]; }
    const std::vector<Matrix<Scalar>>& blocks() const noexcept { return blocks_; }
    Index count(Index i, Index j) const { return block(i, j).cols(); }
    IndexMatrix counts() const;
    Index task_size(Index i) const;
    Index size() const;

    /// Columns of task i, classes concatenated in order.
    Matrix<Scalar> task_block(Index i) const;

    const Vector<Scalar>& offset(Index i) const { return offsets_[static_cast<std::size_t>(i)]; }
    Scalar scale(Index i) const { return scales_(i); }
    const Vector<Scalar>& scales() const noexcept { return scales_; }

    /// Maps a raw point of task i into preprocessed coordinates.
    template <typename Derived>
    Vector<Scalar> transform(const Eigen::MatrixBase<Derived>& x, Index i) const {
        return (x - offset(i)) / scale(i);
    }

    /// Same data with a new preprocessing record; used by the preprocessing functions.
    Dataset with_record(std::vector<Matrix<Scalar>> blocks, std::vector<Vector<Scalar>> offsets,
                        Vector<Scalar> scales) const;

private:
    Index k_ = 0;
    Index m_ = 0;
    Index p_ = 0;
    std::vector<Matrix<Scalar>> blocks_;
    std::vector<Vector<Scalar>> offsets_;
    Vector<Scalar> scales_;
};

template <typename Scalar>
struct Hyperparams {
    Scalar lambda = Scalar(1);
    Vector<Scalar> gamma;

    /// The k x k factor D_gamma + lambda 11^T of A.
    Matrix<Scalar> coupling() const;
    void validate(Index k) const;
};

enum class ScoreMode { binary, vector };

/// Input scores per (task, class): a km x r matrix, r = 1 in binary mode.
template <typename Scalar>
struct ScoreAssignment {
    ScoreMode mode = ScoreMode::binary;
    Matrix<Scalar> values;

    static ScoreAssignment binary(const Vector<Scalar>& y) { return {ScoreMode::binary, y}; }
    static ScoreAssignment vector(const Matrix<Scalar>& y) { return {ScoreMode::vector, y}; }

    Index columns() const noexcept { return values.cols(); }

    /// Task-wise centered scores, weights n_ij / n_i.
    Matrix<Scalar> centered(const IndexMatrix& counts) const;
};

/// [1, -1] in every task.
template <typename Scalar>
ScoreAssignment<Scalar> classical_binary_scores(Index k);
/// +1 for class ell in every task, -1 elsewhere.
template <typename Scalar>
ScoreAssignment<Scalar> one_vs_rest_scores(Index k, Index m, Index ell);
/// Row (i, j) equal to e_j.
template <typename Scalar>
ScoreAssignment<Scalar> one_hot_scores(Index k, Index m);

/// Centering matrix acting on km-vectors of scores: entry (i,j) -> y_ij - sum_j' (n_ij'/n_i) y_ij'.
template <typename Scalar>
Matrix<Scalar> score_centering(const IndexMatrix& counts);

template <typename Scalar>
struct ClassProportions {
    IndexMatrix counts;
    Index p = 0;

    Index n() const { return counts.sum(); }
    Index tasks() const { return counts.rows(); }
    Index classes() const { return counts.cols(); }
    Scalar c0() const { return Scalar(n()) / Scalar(p); }
    Scalar c(Index i, Index j) const { return Scalar(counts(i, j)) / Scalar(n()); }
    Scalar c_task(Index i) const { return Scalar(counts.row(i).sum()) / Scalar(n()); }
};

template <typename Scalar>
ClassProportions<Scalar> proportions(const Dataset<Scalar>& ds) {
    return {ds.counts(), ds.dim()};
}

enum class NormMode { trace, sqrt_trace };

template <typename Scalar>
Dataset<Scalar> center_tasks(const Dataset<Scalar>& ds);

/// Divides task i by (1/(n_i p)) tr(X_i X_i^T) (trace) or by its square root (sqrt_trace).
template <typename Scalar>
Dataset<Scalar> normalize_tasks(const Dataset<Scalar>& ds, NormMode mode);

/// Keeps the listed classes (in the given order) of every task; preprocessing record reset.
template <typename Scalar>
Dataset<Scalar> select_classes(const Dataset<Scalar>& ds, const std::vector<Index>& classes);

/// Z = blockdiag(X_1, ..., X_k) and A = (D_gamma + lambda 11^T) (x) I_p as operators.
template <typename Scalar>
class BlockOperator {
public:
    BlockOperator(const Dataset<Scalar>& ds, const Hyperparams<Scalar>& hyper);

    Index rows() const noexcept { return k_ * p_; }
    Index cols() const noexcept { return n_; }
    const Matrix<Scalar>& coupling() const noexcept { return coupling_; }
    const Matrix<Scalar>& task_block(Index i) const { return x_[static_cast<std::size_t>(i)]; }
    Index task_offset(Index i) const { return start_[static_cast<std::size_t>(i)]; }

    Matrix<Scalar> apply_a(const Eigen::Ref<const Matrix<Scalar>>& u) const;
    Matrix<Scalar> apply_z(const Eigen::Ref<const Matrix<Scalar>>& v) const;
    Matrix<Scalar> apply_zt(const Eigen::Ref<const Matrix<Scalar>>& u) const;

    Matrix<Scalar> dense_z() const;
    Matrix<Scalar> dense_a() const;

private:
    Index k_, p_, n_;
    Matrix<Scalar> coupling_;
    std::vector<Matrix<Scalar>> x_;
    std::vector<Index> start_;
};

template <typename Scalar>
BlockOperator<Scalar> assemble_block_diagonal(const Dataset<Scalar>& ds, const Hyperparams<Scalar>& hyper) {
    return BlockOperator<Scalar>(ds, hyper);
}

extern template class Dataset<double>;
extern template struct Hyperparams<double>;
extern template struct ScoreAssignment<double>;
extern template class BlockOperator<double>;

}  // namespace mtl
