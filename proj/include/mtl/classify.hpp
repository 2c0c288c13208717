#pragma once

#include "mtl/optimize.hpp"
#include "mtl/solver.hpp"

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

namespace mtl {

enum class ClassifierKind { binary, one_vs_all, one_vs_one, one_hot };
enum class LabelMode { classical, optimized };

struct TrainOptions {
    Index task = 0;  ///< target task
    LabelMode labels = LabelMode::optimized;
    NormMode norm = NormMode::sqrt_trace;
    CovStrategy cov = CovStrategy::isotropic;
    /// Raw-coordinate ground truth; when set, replaces the estimated statistics.
    std::optional<SufficientStats<double>> truth;
    /// Binary only: Neyman-Pearson operation at this false-alarm rate instead of the midpoint test.
    std::optional<double> false_alarm;
    /// Binary only: grid search of the hyperparameters on the predicted error before training.
    std::optional<HyperGrid> tune;
    DescentControl descent{};
    OneVsAllOptions one_vs_all{};
    OneHotOptions one_hot{};
};

/// One trained pipeline. Binary and one-hot hold one dual, one-vs-all m, one-vs-one m(m-1)/2.
struct TrainedClassifier {
    ClassifierKind kind = ClassifierKind::binary;
    Index task = 0;
    Index classes = 0;
    Hyperparams<double> hyper;
    std::vector<DualSolution<double>> duals;
    DecisionRule<double> rule;
    std::vector<OptimizedLabels<double>> labels_used;  ///< per machine
    std::vector<ScorePrediction<double>> predictions;  ///< per machine, used for thresholds
    std::vector<std::pair<Index, Index>> pairs;        ///< one-vs-one class pairs
    std::vector<double> pair_thresholds;               ///< one-vs-one, target task
    ScoreLaw<double> law;                              ///< law on the full problem (not one-vs-one)
    Matrix<double> label_matrix;                       ///< km x m score columns (one-vs-all, one-hot)

    /// Class of a raw point of the target task.
    Index classify(const Vector<double>& x) const;
    /// Classes of the columns of a raw p x N batch.
    std::vector<Index> classify_batch(const Matrix<double>& x) const;
};

TrainedClassifier train_binary(const Dataset<double>& ds, const Hyperparams<double>& hyper, const TrainOptions& opt);
TrainedClassifier train_one_vs_all(const Dataset<double>& ds, const Hyperparams<double>& hyper, const TrainOptions& opt);
TrainedClassifier train_one_vs_one(const Dataset<double>& ds, const Hyperparams<double>& hyper, const TrainOptions& opt);
TrainedClassifier train_one_hot(const Dataset<double>& ds, const Hyperparams<double>& hyper, const TrainOptions& opt);

/// Mode of the pairwise winners; ties go to the smallest class index.
Index majority_vote(const std::vector<Index>& winners, Index classes);

enum class AccuracyMethod { mc_orthant, closed_form_1d, unavailable };

struct AccuracyReport {
    std::vector<double> per_class;
    std::vector<double> std_errors;
    double mean = 0.0;
    double mean_std_error = 0.0;
    AccuracyMethod method = AccuracyMethod::mc_orthant;
};

/// Predicted probability of correct classification per class of the target task.
/// One-vs-one has no theoretical accuracy: method `unavailable`, empty vectors.
AccuracyReport predict_accuracy(const TrainedClassifier& clf, std::uint64_t seed = 0, Index samples = 1000000);

/// Same, from a law and score columns directly; `scales` divide the columns before the argmax.
AccuracyReport predict_accuracy(const ScoreLaw<double>& law, const Matrix<double>& y, Index task,
                                const Vector<double>& scales = {}, std::uint64_t seed = 0, Index samples = 1000000);

struct EmpiricalReport {
    std::vector<double> per_class;
    std::vector<Index> tested;
    double mean = 0.0;  ///< average of the per-class accuracies
};

/// Accuracy on the raw held-out blocks of the target task.
EmpiricalReport evaluate(const TrainedClassifier& clf, const Dataset<double>& test);

/// Preprocessed data plus the statistics the theory uses for it.
struct PreparedProblem {
    Dataset<double> data;
    SufficientStats<double> stats;
};

PreparedProblem prepare(const Dataset<double>& ds, const TrainOptions& opt);

struct RocPoint {
    double eta = 0.0;
    double threshold = 0.0;
    double detection = 0.0;  ///< predicted
    std::optional<double> empirical_detection;
    std::optional<double> empirical_false_alarm;
    double ci_low = 0.0;
    double ci_high = 0.0;
};

struct RocOptions {
    LabelMode labels = LabelMode::optimized;
    /// When both are set, every eta also gets empirical rates on the target task's held-out draws.
    const Dataset<double>* train = nullptr;  ///< preprocessed, matching the law
    const Dataset<double>* test = nullptr;   ///< raw
    Hyperparams<double> hyper;
    DescentControl descent{};
};

/// Neyman-Pearson operating points, class 1 as the null. Sorted by eta.
std::vector<RocPoint> roc_curve(const ScoreLaw<double>& law, Index task, std::vector<double> etas, const RocOptions& opt = {});

}  // namespace mtl
