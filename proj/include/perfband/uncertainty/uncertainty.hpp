#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "perfband/common/matrix.hpp"
#include "perfband/common/rng.hpp"
#include "perfband/learn/gbt.hpp"

namespace perfband::uncertainty {

inline constexpr int kUmMembers = 10;
inline constexpr int kUmTrees = 200;
inline constexpr double kUmSubsample = 0.8;
inline constexpr double kUmLearningRate = 0.1;
inline constexpr int kUmTreeDepth = 3;
inline constexpr int kMinTrainScenarios = 50;
inline constexpr double kUmTrainFraction = 0.8;

// Interval cost: each unit of error outside the interval costs alpha, each
// unit of interval beyond the error costs 1 - alpha, summed over scenarios.
double interval_cost(const std::vector<double>& deltas, const std::vector<double>& widths,
                     double alpha);

struct CostReport {
  double alpha = 0.0;
  std::string method;
  std::vector<double> deltas;
  std::vector<double> widths;
  double total = 0.0;
  double mean = 0.0;
};

CostReport make_cost_report(const std::vector<double>& deltas,
                            const std::vector<double>& widths, double alpha,
                            const std::string& method);

// Ensemble of ten quantile-loss boosted-tree regressors predicting the
// absolute accuracy-prediction error of one performance-predictor kind, on
// the 0-100 accuracy-point scale. Width = mean member output, floored at 0.
struct UncertaintyModel {
  std::string schema_version = "um-features/1";
  std::vector<std::string> feature_names;
  std::string predictor_kind;
  double alpha = 0.0;
  std::vector<learn::GbtModel> members;

  double predict_width(const std::vector<double>& features) const;
  std::vector<double> predict_widths(const Matrix& features) const;

  bool operator==(const UncertaintyModel&) const = default;
};

UncertaintyModel train_um(const Matrix& features, const std::vector<double>& deltas,
                          double alpha, const std::vector<std::string>& feature_names,
                          const std::string& predictor_kind, Rng& rng);

struct PredictionInterval {
  double raw_width = 0.0;
  double calibrated_width = 0.0;
  std::string method = "none";  // none, target_z, tl_constant
  double scale = 1.0;
};

// Raw interval for one feature vector; `names` is the caller's feature
// schema and must match the model's, or the error lists the disagreement.
PredictionInterval predict_interval(const UncertaintyModel& um,
                                    const std::vector<double>& features,
                                    const std::vector<std::string>& names);

// Two-sided standard-normal quantile for central coverage alpha.
double z_scale(double alpha);
std::vector<double> z_calibrate(const std::vector<double>& raw_widths, double alpha);

// Constant scale minimizing the interval cost on a holdout set. The cost is
// piecewise linear in the scale, so the optimum is found exactly over the
// breakpoints {delta_i / width_i} plus zero; ties take the smallest scale.
double tl_calibrate(const std::vector<double>& raw_widths, const std::vector<double>& deltas,
                    double alpha);

struct UmPipeline {
  UncertaintyModel model;
  double scale = 1.0;
  std::vector<int> train_index;  // row indices used for training
  std::vector<int> calib_index;  // row indices used for the scale factor
};

// 80/20 scenario split, model trained on the large part, constant-scale
// calibration on the rest.
UmPipeline build_um_pipeline(const Matrix& features, const std::vector<double>& deltas,
                             const std::vector<std::string>& feature_names,
                             const std::string& predictor_kind, double alpha, Rng& rng);

namespace io {

using json = nlohmann::json;

json um_to_json(const UncertaintyModel& um);
UncertaintyModel um_from_json(const json& j);

}  // namespace io

}  // namespace perfband::uncertainty
