#pragma once

#include <span>
#include <string>
#include <vector>

#include "perfband/common/matrix.hpp"
#include "perfband/common/rng.hpp"
#include "perfband/learn/density.hpp"
#include "perfband/learn/pca.hpp"
#include "perfband/tabular/model.hpp"

namespace perfband::predict {

inline constexpr int kMetaFeatureDim = 12;
inline constexpr int kProxyHpoIters = 15;
inline constexpr int kPcaComponents = 6;
inline constexpr int kOutlierNeighbors = 10;
inline constexpr double kKdeBandwidth = 0.2;

double top_confidence(std::span<const double> proba);
double top_minus_second(std::span<const double> proba);

// Feature transform shared by the learned performance predictors. Fitted on
// the base model's train split (proxies, outlier scorer, PCA, per-class KDE)
// plus the test split (predicted-class proportions).
struct MetaFeatureTransform {
  tabular::TabularClassifier proxy_logistic;
  tabular::TabularClassifier proxy_forest;
  tabular::TabularClassifier proxy_gbm;
  tabular::Encoder distance_encoder;
  learn::KnnOutlierScorer outlier;
  learn::PcaModel pca;
  learn::ClassKde kde;
  std::vector<double> test_class_freq;  // indexed by class

  bool operator==(const MetaFeatureTransform&) const = default;
};

MetaFeatureTransform fit_meta_transform(const tabular::Dataset& data,
                                        const std::vector<int>& train_rows,
                                        const std::vector<int>& test_rows,
                                        const tabular::TabularClassifier& base, Rng& rng);

// One row per input row, columns ordered as meta_feature_names():
// base top confidence, base top minus 2nd, base confidence entropy,
// predicted-class test frequency, proxy top confidences (logistic, forest,
// gbm), proxy top minus 2nd (same order), outlier score, density score.
Matrix meta_features(const MetaFeatureTransform& transform,
                     const tabular::TabularClassifier& base, const tabular::Dataset& data,
                     const std::vector<int>& rows);

std::vector<std::string> meta_feature_names();

}  // namespace perfband::predict
