#pragma once

#include "mtl/classify.hpp"
#include "mtl/synthetic.hpp"

#include "json.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace mtl {

inline constexpr int report_schema_version = 1;

/// How synthetic class means are laid out.
///   orthogonal: mu_0j = a e_j, perpendicular part b e_{p-1-j}
///   antipodal:  mu_00 = -mu_01 = a e_0, perpendicular part +-b e_1 (binary)
///   rows:       explicit km x p matrix
/// Task t >= 1 mixes as beta_t mu_0j + sqrt(1 - beta_t^2) perp_j; the perpendicular part depends on the class only.
enum class MeanModel { orthogonal, antipodal, rows };

struct ExperimentConfig {
    std::string preset = "custom";  ///< table3 | fig2 | fig4 | roc | custom
    std::uint64_t seed = 1;

    Index k = 2;
    Index m = 2;
    Index p = 100;
    IndexMatrix counts;
    MeanModel mean_model = MeanModel::antipodal;
    double mean_norm = 1.0;
    double perp_norm = 1.0;
    std::vector<double> betas;  ///< one per task after the first
    Matrix<double> means;       ///< rows model only
    Index test_per_class = 1000;

    Hyperparams<double> hyper{1.0, Vector<double>::Ones(2)};
    ClassifierKind classifier = ClassifierKind::binary;
    LabelMode labels = LabelMode::optimized;
    StatsSource stats = StatsSource::estimated;
    NormMode norm = NormMode::sqrt_trace;
    Index task = 0;

    std::vector<double> sweep;  ///< table3 / fig2: beta values; sweep verb: lambda grid
    std::vector<double> etas;   ///< roc
    Index mc_samples = 1000000;

    std::string train_path;  ///< CSV files replace the synthetic draw when set
    std::string test_path;

    void validate() const;
};

nlohmann::json to_json(const ExperimentConfig& cfg);
ExperimentConfig config_from_json(const nlohmann::json& j);
ExperimentConfig load_config(const std::string& path);

/// table3, fig2, fig4 or roc.
ExperimentConfig preset_config(const std::string& name);

/// Synthetic spec of a config; `beta` overrides betas[0] when given.
SyntheticSpec<double> synthetic_spec(const ExperimentConfig& cfg, std::optional<double> beta = {});

/// Train and test sets of a config, from its CSV paths or its synthetic spec.
struct ExperimentData {
    Dataset<double> train;
    std::optional<Dataset<double>> test;
    std::optional<SufficientStats<double>> truth;
};
ExperimentData experiment_data(const ExperimentConfig& cfg, std::optional<double> beta = {});

/// Classifier of cfg.classifier trained on the data under the config's options.
TrainedClassifier train(const ExperimentConfig& cfg, const ExperimentData& data);

struct Table3Entry {
    double beta = 0.0;
    LabelMode labels = LabelMode::classical;
    ClassifierKind method = ClassifierKind::one_vs_all;
    double empirical = 0.0;             ///< accuracy in percent
    std::optional<double> theory;       ///< percent
    std::optional<double> theory_error; ///< MC standard error, percent
};
std::vector<Table3Entry> run_table3(const ExperimentConfig& cfg);

/// Error after each task addition; tasks = 1 is the target alone.
struct Fig4Point {
    Index tasks = 1;
    double beta_added = 0.0;  ///< NaN for the single-task baseline
    double classical = 0.0;       ///< empirical error, percent, midpoint threshold
    double classical_zero = 0.0;  ///< classical labels with the uncorrected threshold zeta = 0
    double optimized = 0.0;
    double classical_theory = 0.0;
    double optimized_theory = 0.0;
};
std::vector<Fig4Point> run_fig4(const ExperimentConfig& cfg);

struct Fig2Row {
    double beta = 0.0;
    LabelMode labels = LabelMode::classical;
    double threshold = 0.0;
    double error_at_threshold = 0.0;  ///< empirical, percent
    double error_at_zero = 0.0;
    double predicted_error = 0.0;
    std::vector<double> scores_class1;
    std::vector<double> scores_class2;
};
std::vector<Fig2Row> run_fig2(const ExperimentConfig& cfg);

struct RocSeries {
    LabelMode labels = LabelMode::classical;
    std::vector<RocPoint> points;
};
std::vector<RocSeries> run_roc(const ExperimentConfig& cfg);

/// Runs the preset (or the single configured classifier for custom), writes report.json and
/// the CSV tables into `out_dir`, and returns the report.
nlohmann::json run_experiment(const ExperimentConfig& cfg, const std::string& out_dir);

/// Dataset with the listed tasks only, in order; preprocessing record reset.
Dataset<double> select_tasks(const Dataset<double>& ds, const std::vector<Index>& tasks);
SufficientStats<double> select_task_stats(const SufficientStats<double>& st, const std::vector<Index>& tasks);

const char* to_string(ClassifierKind kind);
const char* to_string(LabelMode mode);

}  // namespace mtl
