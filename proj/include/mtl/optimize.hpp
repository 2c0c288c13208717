#pragma once

#include "mtl/rmt.hpp"

#include <cstdint>
#include <functional>
#include <vector>

namespace mtl {

enum class LabelProvenance { classical, closed_form, gradient_descent };

/// Steepest descent with backtracking Armijo search.
struct DescentControl {
    double armijo = 1e-4;
    long max_iterations = 2000;
    double tolerance = 1e-8;  ///< on the gradient norm
};

template <typename Scalar>
struct OptimizedLabels {
    ScoreAssignment<Scalar> scores;
    Scalar objective = Scalar(0);  ///< predicted error, detection rate or accuracy, per operation
    Vector<Scalar> shift;          ///< per-task constant added to the scores
    LabelProvenance provenance = LabelProvenance::closed_form;
    Scalar gradient_norm = Scalar(0);
    long iterations = 0;
    bool converged = true;
    bool pseudo_solution = false;  ///< restricted covariance form too ill-conditioned for a plain solve
    Scalar threshold = Scalar(0);  ///< decision threshold where the operation fixes one
    std::vector<Scalar> history;   ///< objective after each accepted step
};

enum class DecisionKind { threshold, argmax, argmax_scaled };

template <typename Scalar>
struct DecisionRule {
    DecisionKind kind = DecisionKind::threshold;
    Vector<Scalar> thresholds;  ///< per task (threshold kind)
    Matrix<Scalar> scales;      ///< k x m divisors (argmax_scaled)
    Index upper = 0;            ///< class declared when g >= threshold (threshold kind)
    Vector<Scalar> errors;      ///< predicted error per task at the threshold
};

/// Error of the rule "class 1 iff g >= zeta" under the predicted law, equal priors.
template <typename Scalar>
Scalar binary_error(const ScorePrediction<Scalar>& pred, Index task, Scalar zeta);

/// Midpoint thresholds zeta_i = (m_i1 + m_i2) / 2 for every task.
template <typename Scalar>
DecisionRule<Scalar> decision_threshold(const ScorePrediction<Scalar>& pred, Index task);

/// Optimal error Q(sqrt(r) / 2), r = delta_i^[k] e^T D^{-1/2} W V_i^{-1} W D^{-1/2} e, W = (A (x) 11^T) o M.
template <typename Scalar>
Scalar optimal_error_isotropic(const IsotropicStats<Scalar>& iso, Index task);

template <typename Scalar>
OptimizedLabels<Scalar> optimal_labels_isotropic(const IsotropicStats<Scalar>& iso, Index task);

/// Closed form when the two class forms agree, descent on the midpoint error otherwise.
template <typename Scalar>
OptimizedLabels<Scalar> optimal_labels_general(const ScoreLaw<Scalar>& law, Index task, const DescentControl& ctl = {});
template <typename Scalar>
OptimizedLabels<Scalar> optimal_labels_general(const GeneralStats<Scalar>& gen, Index task, const DescentControl& ctl = {}) {
    return optimal_labels_general(score_law(gen), task, ctl);
}

/// Class 1 is the null hypothesis: false alarm P(g > zeta | C1) = eta, detection P(g > zeta | C2).
/// `objective` holds the detection rate and `threshold` zeta(eta).
template <typename Scalar>
OptimizedLabels<Scalar> optimal_labels_neyman_pearson(const ScoreLaw<Scalar>& law, Index task, Scalar eta,
                                                      const DescentControl& ctl = {});

struct OneVsAllOptions {
    std::vector<double> relax{20.0, 100.0};
    DescentControl control{};
    bool collapse_rest = false;  ///< treat the rest as a single pseudo-class (for comparison only)
};

/// Label vector of the ell-vs-rest machine, shifted so m_i,ell(ell) = 0 and scaled so C_i,ell(ell) = 1.
template <typename Scalar>
OptimizedLabels<Scalar> optimal_labels_one_vs_all(const ScoreLaw<Scalar>& law, Index task, Index ell,
                                                  const OneVsAllOptions& opt = {});

struct OneHotOptions {
    Index samples = 50000;
    double step = 1e-3;
    std::uint64_t seed = 0x5eed;
    long max_iterations = 60;
    double armijo = 1e-4;
};

/// km x m scores maximizing the mean predicted accuracy of `task`, ascent from one-hot.
template <typename Scalar>
OptimizedLabels<Scalar> optimal_labels_one_hot(const ScoreLaw<Scalar>& law, Index task, const OneHotOptions& opt = {});

/// Law of the differences w_r = g_j - g_r (r != j) for x in class j of `task`, columns of y
/// first divided by `scales` when given. Correct decision iff w > 0.
template <typename Scalar>
std::pair<Vector<Scalar>, Matrix<Scalar>> decision_moments(const ScoreLaw<Scalar>& law, const Matrix<Scalar>& y, Index task,
                                                           Index j, const Vector<Scalar>& scales = {});

enum class ShiftMode { midpoint_zero, class_mean_zero };

/// Adds ybar to the task's own scores so the chosen predicted mean vanishes.
template <typename Scalar>
OptimizedLabels<Scalar> zero_shift(const ScoreLaw<Scalar>& law, const Vector<Scalar>& scores, Index task, ShiftMode mode,
                                   Index anchor_class = 0);

struct HyperGrid {
    std::vector<double> lambdas;
    std::vector<std::vector<double>> gammas;  ///< each entry a full gamma vector
};

/// Grid search; ties go to the smaller lambda, then the lexicographically smaller gamma.
template <typename Scalar>
Hyperparams<Scalar> tune_hyperparams(const HyperGrid& grid, const std::function<Scalar(const Hyperparams<Scalar>&)>& objective,
                                     Scalar* best_value = nullptr);

}  // namespace mtl
