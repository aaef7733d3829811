#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "perfband/harness/library.hpp"
#include "perfband/uncertainty/uncertainty.hpp"

namespace perfband::harness {

inline constexpr const char* kReportFormat = "perfband-report/1";
inline constexpr int kCostCiResamples = 2000;
inline constexpr double kCostCiLevel = 0.95;

// Pooled evaluation of one (predictor kind, method, alpha) combination over
// every target scenario; per-scenario costs are retained so any reported
// mean can be recomputed.
struct CostCell {
  std::string predictor;
  std::string method;  // um, se_z, se_tl, bs_z, bs_tl, c_z, c_tl, i_z, i_tl
  double alpha = 0.0;
  double mean_cost = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  std::vector<std::string> scenario_ids;
  std::vector<double> deltas;
  std::vector<double> widths;
  std::vector<double> costs;

  bool operator==(const CostCell&) const = default;
};

// Per-scenario interval data for the UM method (plot columns: truth,
// prediction, and band edges).
struct ScenarioPlotRow {
  std::string scenario_id;
  std::string dataset_id;
  std::string predictor;
  double alpha = 0.0;
  double true_prod_accuracy = 0.0;
  double predicted_prod_accuracy = 0.0;
  double delta = 0.0;
  double raw_width = 0.0;
  double calibrated_width = 0.0;
  double lower = 0.0;
  double upper = 0.0;

  bool operator==(const ScenarioPlotRow&) const = default;
};

struct AblationCell {
  std::string source;  // distance, internal, prediction, noise, all
  std::string group;   // base, perf_pred, proxy, drift, all
  int n_features = 0;
  double mean_cost = 0.0;
  double normalized = 0.0;

  bool operator==(const AblationCell&) const = default;
};

struct ReportBundle {
  nlohmann::json config;
  std::string config_hash;
  std::string train_library;
  std::string eval_library;
  std::vector<CostCell> costs;
  std::vector<ScenarioPlotRow> scenarios;
  std::vector<AblationCell> ablation;

  bool operator==(const ReportBundle&) const = default;
};

// Feature indices selected by an ablation cell; "all" leaves an axis
// unconstrained. Empty selections mark undefined (omitted) cells.
std::vector<int> ablation_feature_indices(const std::vector<features::UmFeatureInfo>& schema,
                                          const std::string& source, const std::string& group);

// Leave-one-out evaluation: per target dataset, UMs train on the other
// datasets' scenarios from `train` and are scored on the target's scenarios
// from `eval` (pass the same library for the within-generator experiment).
// Baseline TL scales come from 100% of the external scenarios.
ReportBundle run_loo_experiment(const ExperimentConfig& config, const ScenarioLibrary& train,
                                const ScenarioLibrary& eval);

// Table-style ablation grid for config.ablation_kind at config.ablation_alpha,
// normalized by the all-features cell (which is 1 by construction).
std::vector<AblationCell> run_ablation(const ExperimentConfig& config,
                                       const ScenarioLibrary& train, const ScenarioLibrary& eval);

// Writes report.json plus costs.csv and scenarios.csv with a stable column
// order; `formats` may restrict to {"json"} or {"csv"}.
void emit_report(const ReportBundle& bundle, const std::string& out_dir,
                 const std::vector<std::string>& formats = {"json", "csv"});

ReportBundle load_report(const std::string& json_path);

}  // namespace perfband::harness
