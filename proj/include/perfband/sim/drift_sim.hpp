#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "perfband/common/rng.hpp"
#include "perfband/predict/predictor.hpp"
#include "perfband/tabular/split.hpp"

namespace perfband::sim {

// Linear-skew resampling: a numeric column and threshold split the rows into
// buckets A (value <= threshold) and B; minibatches draw R% of the train/test
// mass from A and the mirrored share into the production set, so R=50 means
// no drift and R=0/100 puts train/test and production on disjoint buckets.
struct LinearSkewConfig {
  int feature = 0;
  double threshold = 0.0;
  int ratio = 50;     // R in [0, 100]
  int minibatch = 20;
  double p_train = 0.4;
  double p_test = 0.2;
  double p_prod = 0.4;
  std::uint64_t seed = 0;
};

// Nearest-neighbors resampling: one of the two row pools is biased by
// removing the fraction p_down of points nearest (or furthest) to a random
// anchor; the other pool is thinned by the same fraction uniformly.
struct NearestNeighborsConfig {
  double p_set = 0.5;
  double p_near = 0.5;
  double p_down = 0.5;
  double p_train = 0.4;
  double p_test = 0.2;
  double p_prod = 0.4;
  std::uint64_t seed = 0;
};

// Default threshold for a linear-skew column.
double median_threshold(const tabular::Dataset& data, int column);

tabular::SplitTriple linear_skew(const tabular::Dataset& data, const LinearSkewConfig& config);

tabular::SplitTriple nearest_neighbors_drift(const tabular::Dataset& data,
                                             const NearestNeighborsConfig& config);

struct DriftScenario {
  std::string dataset_id;
  tabular::SplitTriple split;
  tabular::TabularClassifier base;
  predict::MetaFeatureTransform transform;
  predict::PerformancePredictor predictor;
  predict::PerformancePrediction prod_prediction;
  double true_test_accuracy = 0.0;      // accuracy points, 0-100
  double true_prod_accuracy = 0.0;      // accuracy points, 0-100
  double predicted_prod_accuracy = 0.0; // accuracy points, 0-100
  double delta = 0.0;                   // |true_prod - predicted|
  nlohmann::json provenance;            // generator config, set by the caller
  bool failed = false;
  std::string failure_reason;
};

// Fits the base model on the train split, the predictor on the test split,
// and scores the production split. Training failures mark the scenario
// failed with the reason instead of propagating.
DriftScenario build_scenario(const tabular::Dataset& data, const tabular::SplitTriple& split,
                             learn::ClassifierKind base_kind, predict::PredictorKind predictor_kind,
                             std::uint64_t seed);

}  // namespace perfband::sim
