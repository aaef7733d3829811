#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "perfband/learn/gbt.hpp"
#include "perfband/learn/isotonic.hpp"
#include "perfband/predict/transform.hpp"

namespace perfband::predict {

enum class PredictorKind { confidence, meta_model, crossval, dropout };

std::string to_string(PredictorKind kind);
PredictorKind predictor_kind_from(const std::string& name);

inline constexpr int kMetaHpoIters = 20;
inline constexpr int kMetaHpoFolds = 3;
inline constexpr double kCalibrationFraction = 0.2;
inline constexpr int kCrossvalMembers = 10;
inline constexpr int kDropoutDraws = 10;
inline constexpr double kDropoutRate = 0.25;
inline constexpr int kDropoutPatience = 10;

// Top-confidence recalibration bins, 0.1 wide over [0, 1]. Queries landing in
// an empty bin use the nearest nonempty bin (ties toward the lower bin).
struct ConfidenceBins {
  std::vector<double> accuracy;     // a_k, mean correctness per bin
  std::vector<std::int64_t> count;  // n_k

  int lookup(double confidence) const;
  double predict(double confidence) const;
  // Bernoulli standard error sqrt(a_k (1 - a_k) / n_k) of the resolved bin.
  double uncertainty(double confidence) const;

  bool operator==(const ConfidenceBins&) const = default;
};

ConfidenceBins build_confidence_bins(const std::vector<double>& confidences,
                                     const std::vector<int>& correct);

// Column standardization for the logistic ensemble member; tree members take
// the meta features as-is.
struct MetaScaler {
  std::vector<double> mean;
  std::vector<double> std;

  static MetaScaler fit(const Matrix& X);
  Matrix apply(const Matrix& X) const;

  bool operator==(const MetaScaler&) const = default;
};

struct PerformancePredictor {
  PredictorKind kind = PredictorKind::confidence;

  ConfidenceBins bins;  // confidence kind

  // meta_model: members = {gbm, logistic}; crossval: one forest per fold.
  std::vector<learn::ClassifierModel> members;
  MetaScaler scaler;
  learn::GbtModel dropout_model;
  learn::IsotonicMap calibration;

  // Degenerate relabeled test sets (all correct or all incorrect) cannot
  // train a meta-learner; the predictor then emits this constant confidence.
  bool constant_fallback = false;
  double constant_confidence = 0.0;

  bool operator==(const PerformancePredictor&) const = default;
};

struct PerformancePrediction {
  std::vector<double> confidences;      // calibrated, in [0, 1]
  std::vector<double> raw_confidences;  // ensemble output before calibration
  Matrix member_confidences;            // rows x members (or dropout draws)
  double predicted_accuracy = 0.0;      // accuracy points, 100 * mean(confidences)
  // Mean per-point ensemble spread (confidence scale); absent for meta_model.
  std::optional<double> intrinsic_width;
};

// Fits the predictor on the labeled test split. The meta kinds hold out
// kCalibrationFraction of it for isotonic calibration with the T_ir targets.
PerformancePredictor train_predictor(PredictorKind kind, const tabular::Dataset& data,
                                     const std::vector<int>& test_rows,
                                     const tabular::TabularClassifier& base,
                                     const MetaFeatureTransform& transform, Rng& rng);

// Scores unlabeled rows. `draw_rng` drives the dropout kind's stochastic
// draws; other kinds ignore it.
PerformancePrediction predict_performance(const PerformancePredictor& predictor,
                                          const tabular::TabularClassifier& base,
                                          const MetaFeatureTransform& transform,
                                          const tabular::Dataset& data,
                                          const std::vector<int>& rows, Rng& draw_rng);

// Isotonic calibration targets: 1/(n_neg + 2) for incorrect points and
// (n_pos + 1)/(n_pos + 2) for correct ones.
std::vector<double> isotonic_targets(const std::vector<int>& correct);

}  // namespace perfband::predict
