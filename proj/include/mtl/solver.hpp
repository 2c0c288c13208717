#pragma once

#include "mtl/core.hpp"

#include <Eigen/Cholesky>

#include <memory>

namespace mtl {

/// Exact solution of the coupled least-squares SVM through its dual.
///
/// Q^{-1} = (1/kp) Z^T A Z + I_n is factorized on whichever side is smaller: directly
/// when n <= kp, otherwise through the kp x kp capacitance matrix kp (Abar^{-1} (x) I) + Z Z^T.
template <typename Scalar>
class DualSolution {
public:
    enum class Side { samples, features };

    const Matrix<Scalar>& alpha() const noexcept { return alpha_; }
    const Matrix<Scalar>& bias() const noexcept { return b_; }
    /// Stacked hyperplanes A Z alpha, kp x r; task i occupies rows [ip, (i+1)p).
    const Matrix<Scalar>& hyperplanes() const noexcept { return w_; }
    Side side() const noexcept { return side_; }
    Index tasks() const noexcept { return k_; }
    Index dim() const noexcept { return p_; }
    Index columns() const noexcept { return alpha_.cols(); }
    const IndexMatrix& counts() const noexcept { return counts_; }
    ScoreMode mode() const noexcept { return mode_; }

    /// Q v for an n x r block.
    Matrix<Scalar> apply_q(const Eigen::Ref<const Matrix<Scalar>>& v) const;
    /// Q^{-1} v for an n x r block.
    Matrix<Scalar> apply_q_inverse(const Eigen::Ref<const Matrix<Scalar>>& v) const;

    /// g_i(x) for a raw point of task i; one entry per score column.
    Vector<Scalar> score(const Eigen::Ref<const Vector<Scalar>>& x, Index task) const;
    /// Scores of every column of a raw p x N batch from task i, N x r.
    Matrix<Scalar> score_batch(const Eigen::Ref<const Matrix<Scalar>>& x, Index task) const;

    /// Same scores evaluated through the operator form alpha^T Z^T A (e_i (x) x), without W.
    Vector<Scalar> score_operator(const Eigen::Ref<const Vector<Scalar>>& x, Index task) const;

    template <typename S>
    friend DualSolution<S> solve_dual(const Dataset<S>&, const Hyperparams<S>&, const ScoreAssignment<S>&);

private:
    Index k_ = 0, p_ = 0;
    ScoreMode mode_ = ScoreMode::binary;
    IndexMatrix counts_;
    Side side_ = Side::samples;
    std::shared_ptr<const BlockOperator<Scalar>> op_;
    Eigen::LLT<Matrix<Scalar>> factor_;
    Matrix<Scalar> alpha_, b_, w_;
    std::vector<Vector<Scalar>> offsets_;
    Vector<Scalar> scales_;
};

/// Expands per-(task, class) scores to one row per training sample, n x r.
template <typename Scalar>
Matrix<Scalar> expand_scores(const IndexMatrix& counts, const Matrix<Scalar>& values);

template <typename Scalar>
DualSolution<Scalar> solve_dual(const Dataset<Scalar>& ds, const Hyperparams<Scalar>& hyper,
                                const ScoreAssignment<Scalar>& scores);

/// Direct minimizer of the primal objective with xi_i = Y_i - X_i^T W_i / sqrt(kp) - 1 b_i^T.
template <typename Scalar>
struct PrimalSolution {
    Matrix<Scalar> w0;  ///< p x r
    Matrix<Scalar> v;   ///< kp x r, task-stacked
    Matrix<Scalar> b;   ///< k x r
    Scalar gradient_norm = Scalar(0);
    Index iterations = 0;
};

template <typename Scalar>
PrimalSolution<Scalar> primal_oracle(const Dataset<Scalar>& ds, const Hyperparams<Scalar>& hyper,
                                     const ScoreAssignment<Scalar>& scores, Index max_iter = 20000);

extern template class DualSolution<double>;

}  // namespace mtl
