#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "perfband/features/um_features.hpp"
#include "perfband/predict/predictor.hpp"
#include "perfband/sim/drift_sim.hpp"
#include "perfband/tabular/dataset.hpp"

namespace perfband::harness {

inline constexpr const char* kLibraryFormat = "perfband-library/1";
inline constexpr const char* kScenarioFormat = "perfband-scenario/1";

struct DatasetRef {
  std::string csv;
  std::string schema;

  bool operator==(const DatasetRef&) const = default;
};

// Full experiment description; loadable from JSON with defaults matching the
// reference settings (fifteen skew ratios, five seeds, two base models).
struct ExperimentConfig {
  std::vector<DatasetRef> datasets;
  std::string generator = "linear_skew";  // or "nearest_neighbors"

  // linear-skew settings
  std::vector<int> ratios = {0, 1, 5, 10, 20, 30, 40, 50, 60, 70, 80, 90, 95, 99, 100};
  int seeds = 5;
  int features_per_dataset = 2;
  int minibatch = 20;

  // nearest-neighbors settings
  int nn_scenarios = 300;  // per dataset and base kind
  double nn_p_set = 0.5;
  double nn_p_near = 0.5;
  double nn_p_down_lo = 0.5;
  double nn_p_down_hi = 0.7;

  double p_train = 0.4;
  double p_test = 0.2;
  double p_prod = 0.4;

  std::vector<learn::ClassifierKind> base_kinds = {learn::ClassifierKind::random_forest,
                                                   learn::ClassifierKind::logistic};
  std::vector<predict::PredictorKind> predictor_kinds = {
      predict::PredictorKind::confidence, predict::PredictorKind::meta_model,
      predict::PredictorKind::crossval, predict::PredictorKind::dropout};

  std::vector<double> alphas = {0.5, 0.55, 0.6, 0.65, 0.7, 0.75, 0.8, 0.85, 0.9, 0.95};
  std::vector<std::string> calibrations = {"z", "tl"};
  double ablation_alpha = 0.9;
  predict::PredictorKind ablation_kind = predict::PredictorKind::meta_model;

  std::string out_dir = "out";
  std::uint64_t master_seed = 0;
  int jobs = 1;
};

void validate_config(const ExperimentConfig& config);
ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& config);
ExperimentConfig load_config(const std::string& path);

// FNV-1a over the canonical JSON form, hex-encoded; stamps reports so runs
// can be traced back to their exact configuration.
std::string config_hash(const ExperimentConfig& config);

// Shortest exact decimal form; CSV cells round-trip to the identical double
// and emission is byte-deterministic.
std::string format_double(double v);

// Per-predictor-kind measurements of one scenario.
struct KindRecord {
  double predicted_accuracy = 0.0;          // accuracy points
  double delta = 0.0;                        // |true prod - predicted|
  double se_width = 0.0;                     // standard error of the mean confidence
  double bs_width = 0.0;                     // bootstrap half-width of the mean
  std::optional<double> intrinsic_width;     // absent for kinds without one
  std::vector<double> features;              // UM feature vector, schema order

  bool operator==(const KindRecord&) const = default;
};

struct ScenarioRecord {
  std::string id;
  std::string dataset_id;
  std::string generator;
  std::string base_kind;
  nlohmann::json provenance;
  double true_test_accuracy = 0.0;
  double true_prod_accuracy = 0.0;
  std::map<std::string, KindRecord> kinds;  // keyed by predictor kind token

  bool operator==(const ScenarioRecord&) const = default;
};

struct ScenarioLibrary {
  std::string root;
  std::vector<std::string> feature_names;
  std::vector<ScenarioRecord> records;
  std::vector<std::string> dataset_ids;  // distinct, in first-seen order
};

// Numeric columns ranked by random-forest importance, keeping only columns
// whose median threshold leaves both buckets larger than the minibatch.
std::vector<int> select_skew_features(const tabular::Dataset& data, int count, int minibatch,
                                      std::uint64_t seed);

// Builds every configured scenario, writes the library directory
// (scenario_<id>/ with meta, splits, and serialized models, plus features.csv
// and schema.json at the root), and returns the in-memory view. Scenarios
// whose model fits fail are logged and skipped.
ScenarioLibrary generate_library(const ExperimentConfig& config);

ScenarioLibrary load_library(const std::string& dir);

// Full reload of one scenario directory, models included.
struct StoredScenario {
  ScenarioRecord record;
  tabular::SplitTriple split;
  tabular::TabularClassifier base;
  predict::MetaFeatureTransform transform;
  std::map<std::string, predict::PerformancePredictor> predictors;
};

StoredScenario load_scenario(const std::string& scenario_dir);

}  // namespace perfband::harness
