#pragma once

#include <array>
#include <string>
#include <vector>

#include "perfband/common/rng.hpp"
#include "perfband/predict/predictor.hpp"
#include "perfband/predict/transform.hpp"
#include "perfband/tabular/histogram.hpp"
#include "perfband/tabular/model.hpp"

namespace perfband::features {

inline constexpr int kUmFeatureCount = 76;
inline constexpr const char* kUmSchemaVersion = "um-features/1";

inline constexpr int kDriftTrees = 50;
inline constexpr double kDriftHoldout = 0.25;
inline constexpr int kNoiseResamples = 500;
inline constexpr double kNoiseLevel = 0.95;
inline constexpr double kImportanceMass = 0.9;

// Distances between two identically binned, normalized histograms:
// d1 = max CDF difference, d2 = sum of positive mass excess,
// d3 = sum of squared positive mass excess.
enum class DistanceMetric { d1, d2, d3 };

double histogram_distance(const std::vector<double>& test_values,
                          const std::vector<double>& prod_values,
                          const tabular::BinSpec& bins, DistanceMetric metric);

// All three metrics in d1, d2, d3 order.
std::array<double, 3> histogram_distances(const std::vector<double>& test_values,
                                          const std::vector<double>& prod_values,
                                          const tabular::BinSpec& bins);

// Fixed bin layouts for the distance features.
tabular::BinSpec top_confidence_bins();    // 0.1 steps to 0.9, then 0.01 steps to 1.0
tabular::BinSpec top_minus_second_bins();  // 0.1 steps over [0, 1]
tabular::BinSpec entropy_bins();           // 0.01 steps to 0.1, then 0.1 steps to 3.0
tabular::BinSpec drift_confidence_bins();  // 11 equal bins over [0, 1]

// Ten equal bins spanning the pooled 10th-90th quantiles. Outliers are
// dropped unless that would empty either sample's histogram, in which case
// they clip to the edge bins.
tabular::BinSpec quantile_bins(const std::vector<double>& test_values,
                               const std::vector<double>& prod_values);

// Binary test-vs-prod discriminators on three representations of the same
// rows: the tree-encoded original features, the meta-feature transform
// output, and their concatenation. Accuracies come from a stratified 25%
// holdout the models never trained on.
struct DriftModelSet {
  tabular::Encoder encoder;  // tree encoding fitted on test + prod rows
  learn::RandomForestModel raw;
  learn::RandomForestModel transformed;
  learn::RandomForestModel concat;
  double accuracy_raw = 0.0;
  double accuracy_transformed = 0.0;
  double accuracy_concat = 0.0;

  bool operator==(const DriftModelSet&) const = default;
};

DriftModelSet train_drift_models(const tabular::Dataset& data,
                                 const std::vector<int>& test_rows,
                                 const std::vector<int>& prod_rows,
                                 const tabular::TabularClassifier& base,
                                 const predict::MetaFeatureTransform& transform, Rng& rng);

// Top minus second-highest drift-model confidence per row; columns are the
// raw, transformed, concat discriminators.
Matrix drift_top_minus_second(const DriftModelSet& drift, const tabular::Dataset& data,
                              const std::vector<int>& rows,
                              const tabular::TabularClassifier& base,
                              const predict::MetaFeatureTransform& transform);

struct UmFeatureInfo {
  std::string name;
  std::string group;  // base, perf_pred, proxy, drift, other
  std::string type;   // distance, prediction, noise, internal
};

const std::vector<UmFeatureInfo>& um_feature_schema();
std::vector<std::string> um_feature_names();

// The scenario-level feature vector, ordered as um_feature_schema().
// `prod_prediction` must be the predictor's output on `prod_rows`; `rng`
// seeds the bootstrap noise features.
std::vector<double> extract_um_features(const tabular::Dataset& data,
                                        const std::vector<int>& test_rows,
                                        const std::vector<int>& prod_rows,
                                        const tabular::TabularClassifier& base,
                                        const predict::MetaFeatureTransform& transform,
                                        const predict::PerformancePredictor& predictor,
                                        const predict::PerformancePrediction& prod_prediction,
                                        const DriftModelSet& drift, Rng& rng);

}  // namespace perfband::features
