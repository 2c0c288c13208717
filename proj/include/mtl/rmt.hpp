#pragma once

#include "mtl/core.hpp"

#include <vector>

namespace mtl {

enum class CovKind { identity, isotropic, sample };
enum class CovStrategy { isotropic, sample };
enum class StatsSource { truth, estimated };

/// Class covariances: alpha(i, j) * I_p (identity / isotropic) or explicit p x p matrices.
template <typename Scalar>
struct CovModel {
    CovKind kind = CovKind::identity;
    Matrix<Scalar> alpha;                  ///< k x m scalars; ones for identity
    std::vector<Matrix<Scalar>> matrices;  ///< km blocks, task-major, for sample

    static CovModel identity(Index k, Index m) { return {CovKind::identity, Matrix<Scalar>::Ones(k, m), {}}; }
    static CovModel isotropic(Matrix<Scalar> alpha) { return {CovKind::isotropic, std::move(alpha), {}}; }
    static CovModel sample(Index k, Index m, std::vector<Matrix<Scalar>> mats);

    /// Sigma of class a = (i, j) as a dense matrix.
    Matrix<Scalar> dense(Index a, Index p) const;
    bool scalar() const noexcept { return kind != CovKind::sample; }
};

/// Inputs of the asymptotic theory.
///
/// `means` holds class means row-wise (km x p). The diagonal of the mean Gram is taken
/// from two independent halves (`half_a`, `half_b`) so plug-in estimates stay unbiased;
/// for known statistics both halves equal `means`.
template <typename Scalar>
struct SufficientStats {
    Matrix<Scalar> means;
    Matrix<Scalar> half_a;
    Matrix<Scalar> half_b;
    ClassProportions<Scalar> proportions;
    CovModel<Scalar> cov;
    StatsSource source = StatsSource::truth;
    bool biased_diagonal = false;

    Index tasks() const { return proportions.tasks(); }
    Index classes() const { return proportions.classes(); }
    Index dim() const { return proportions.p; }

    /// Gram of the raw class means, km x km.
    Matrix<Scalar> raw_gram() const;
    /// Gram of the task-centered class means (weights n_ij / n_i).
    Matrix<Scalar> centered_gram() const;
    /// k x k products of the class-mean differences (two-class tasks only).
    Matrix<Scalar> mean_products() const;
};

/// Statistics known exactly (synthetic data), expressed in raw coordinates.
template <typename Scalar>
SufficientStats<Scalar> known_stats(const Matrix<Scalar>& means, CovModel<Scalar> cov, const IndexMatrix& counts);

/// Maps raw-coordinate statistics through the dataset's preprocessing scales.
template <typename Scalar>
SufficientStats<Scalar> rescale_stats(const SufficientStats<Scalar>& stats, const Vector<Scalar>& scales);

template <typename Scalar>
SufficientStats<Scalar> estimate_mean_products(const Dataset<Scalar>& ds);

template <typename Scalar>
CovModel<Scalar> estimate_covariances(const Dataset<Scalar>& ds, CovStrategy strategy);

/// Both estimators combined, on a preprocessed dataset.
template <typename Scalar>
SufficientStats<Scalar> estimate_stats(const Dataset<Scalar>& ds, CovStrategy strategy);

struct SolverControl {
    double damping = 0.5;
    double tolerance = 1e-10;
    long max_iterations = 10000;
};

template <typename Scalar>
struct IsotropicDelta {
    Vector<Scalar> delta_k;
    Vector<Scalar> delta_2k;
    Matrix<Scalar> curly_a;
    Scalar residual = Scalar(0);
    long iterations = 0;
};

/// Two-class, identity-covariance theory.
template <typename Scalar>
struct IsotropicStats {
    Vector<Scalar> delta_k;
    Vector<Scalar> delta_2k;
    Matrix<Scalar> curly_a;
    Matrix<Scalar> curly_m;
    Matrix<Scalar> gamma_mat;
    Matrix<Scalar> kappa;                ///< k x k
    std::vector<Matrix<Scalar>> v_mats;  ///< one 2k x 2k matrix per task
    Matrix<Scalar> coupled;              ///< (A (x) 11^T) o M
    IndexMatrix counts;
    Scalar residual = Scalar(0);
    long iterations = 0;
};

template <typename Scalar>
IsotropicDelta<Scalar> solve_delta_isotropic(const ClassProportions<Scalar>& prop, const Hyperparams<Scalar>& hyper,
                                             const SolverControl& ctl = {});

/// Positive root of the single-task equation; used to cross-check the iteration.
template <typename Scalar>
Scalar single_task_delta(const ClassProportions<Scalar>& prop, const Hyperparams<Scalar>& hyper);

template <typename Scalar>
IsotropicStats<Scalar> build_isotropic_stats(const SufficientStats<Scalar>& stats, const Hyperparams<Scalar>& hyper,
                                             const SolverControl& ctl = {});

/// General theory (m classes, generic covariances).
///
/// `beta` is the per-class resolvent weight n_a / (kp (1 + delta_a)) and `delta` the trace term
/// (1/kp) tr(Sigma_a R0_{ii}), with R0 = (blockdiag_i sum_j beta_ij Sigma_ij + Abar^{-1} (x) I)^{-1}.
template <typename Scalar>
struct GeneralStats {
    enum class Path { scalar, dense };
    Path path = Path::scalar;
    Vector<Scalar> beta;
    Vector<Scalar> delta;
    Matrix<Scalar> h;                    ///< k x k resolvent factor (scalar path)
    Matrix<Scalar> r0;                   ///< kp x kp resolvent (dense path)
    Matrix<Scalar> mm_gram;
    Matrix<Scalar> gamma_mat;
    Matrix<Scalar> t_cal;
    Matrix<Scalar> t_bar;
    Vector<Scalar> d;
    Matrix<Scalar> kappa;                ///< row t: kappa_{t, .}
    Matrix<Scalar> curly_k;              ///< beta_t kappa_{t, .}
    std::vector<Matrix<Scalar>> v_mats;  ///< one km x km matrix per class
    IndexMatrix counts;
    Scalar residual = Scalar(0);
    long iterations = 0;
};

template <typename Scalar>
GeneralStats<Scalar> solve_delta_general(const SufficientStats<Scalar>& stats, const Hyperparams<Scalar>& hyper,
                                         const SolverControl& ctl = {1.0 / 2, 1e-9, 10000},
                                         Index dense_limit = 4096);

/// Predicted Gaussian law of the scores, one entry per (task, class).
template <typename Scalar>
struct ScorePrediction {
    Matrix<Scalar> means;                     ///< km x r
    std::vector<Matrix<Scalar>> covariances;  ///< km matrices r x r
    StatsSource source = StatsSource::truth;

    Index classes_per_task() const noexcept { return m; }
    Index m = 0;
    Scalar mean(Index i, Index j, Index col = 0) const { return means(i * m + j, col); }
    Scalar variance(Index i, Index j, Index col = 0) const { return covariances[static_cast<std::size_t>(i * m + j)](col, col); }
};

/// Scores enter the law linearly: mean_a = L_a Y and C_a = Y^T K_a Y.
template <typename Scalar>
struct ScoreLaw {
    Matrix<Scalar> mean_map;
    std::vector<Matrix<Scalar>> cov_forms;
    IndexMatrix counts;
    StatsSource source = StatsSource::truth;

    Index tasks() const { return counts.rows(); }
    Index classes() const { return counts.cols(); }
    ScorePrediction<Scalar> predict(const Matrix<Scalar>& y) const;
    const Matrix<Scalar>& form(Index i, Index j) const { return cov_forms[static_cast<std::size_t>(i * classes() + j)]; }
};

template <typename Scalar>
ScoreLaw<Scalar> score_law(const IsotropicStats<Scalar>& iso);
template <typename Scalar>
ScoreLaw<Scalar> score_law(const GeneralStats<Scalar>& gen);

template <typename Scalar>
ScorePrediction<Scalar> predict_binary_isotropic(const IsotropicStats<Scalar>& iso, const ScoreAssignment<Scalar>& scores);
template <typename Scalar>
ScorePrediction<Scalar> predict_general(const GeneralStats<Scalar>& gen, const ScoreAssignment<Scalar>& scores);

/// Scalar-covariance statistics take the scalar path; explicit covariances the dense one.
template <typename Scalar>
ScoreLaw<Scalar> build_law(const SufficientStats<Scalar>& stats, const Hyperparams<Scalar>& hyper);

}  // namespace mtl
