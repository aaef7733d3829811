#include "perfband/predict/transform.hpp"

#include <algorithm>
#include <stdexcept>

#include "perfband/common/log.hpp"
#include "perfband/common/stats.hpp"

namespace perfband::predict {

double top_confidence(std::span<const double> proba) {
  return *std::max_element(proba.begin(), proba.end());
}

double top_minus_second(std::span<const double> proba) {
  if (proba.size() < 2) return top_confidence(proba);
  double top = -1.0, second = -1.0;
  for (double p : proba) {
    if (p > top) {
      second = top;
      top = p;
    } else if (p > second) {
      second = p;
    }
  }
  return top - second;
}

MetaFeatureTransform fit_meta_transform(const tabular::Dataset& data,
                                        const std::vector<int>& train_rows,
                                        const std::vector<int>& test_rows,
                                        const tabular::TabularClassifier& base, Rng& rng) {
  if (train_rows.empty() || test_rows.empty())
    throw std::invalid_argument("fit_meta_transform: empty train or test rows");

  MetaFeatureTransform out;
  Rng logit_rng = rng.child(1);
  out.proxy_logistic = tabular::fit_tabular_classifier(learn::ClassifierKind::logistic, data,
                                                       train_rows, {}, logit_rng);
  Rng forest_rng = rng.child(2);
  out.proxy_forest =
      tabular::fit_tabular_classifier_hpo(learn::ClassifierKind::random_forest, data, train_rows,
                                          learn::rf_meta_space(), kProxyHpoIters, 3, forest_rng);
  Rng gbm_rng = rng.child(3);
  out.proxy_gbm =
      tabular::fit_tabular_classifier_hpo(learn::ClassifierKind::gbt, data, train_rows,
                                          learn::gbm_meta_space(), kProxyHpoIters, 3, gbm_rng);

  out.distance_encoder = tabular::Encoder::fit(data, train_rows, tabular::EncodeMode::distance);
  Matrix train_feat = out.distance_encoder.transform(data, train_rows);
  out.outlier = learn::KnnOutlierScorer::fit(train_feat, kOutlierNeighbors);
  int components = std::min<int>(kPcaComponents, static_cast<int>(train_feat.cols));
  out.pca = learn::PcaModel::fit(train_feat, components);
  std::vector<int> train_labels;
  train_labels.reserve(train_rows.size());
  for (int r : train_rows) train_labels.push_back(data.labels[static_cast<std::size_t>(r)]);
  out.kde = learn::ClassKde::fit(out.pca.transform(train_feat), train_labels, data.n_classes(),
                                 kKdeBandwidth);

  out.test_class_freq.assign(static_cast<std::size_t>(data.n_classes()), 0.0);
  std::vector<int> test_pred = base.predict(data, test_rows);
  for (int cls : test_pred) out.test_class_freq[static_cast<std::size_t>(cls)] += 1.0;
  for (double& f : out.test_class_freq) f /= static_cast<double>(test_rows.size());
  return out;
}

Matrix meta_features(const MetaFeatureTransform& transform,
                     const tabular::TabularClassifier& base, const tabular::Dataset& data,
                     const std::vector<int>& rows) {
  Matrix base_proba = base.predict_proba(data, rows);
  Matrix logit_proba = transform.proxy_logistic.predict_proba(data, rows);
  Matrix forest_proba = transform.proxy_forest.predict_proba(data, rows);
  Matrix gbm_proba = transform.proxy_gbm.predict_proba(data, rows);
  Matrix dist_feat = transform.distance_encoder.transform(data, rows);
  Matrix pca_feat = transform.pca.transform(dist_feat);

  Matrix out(rows.size(), kMetaFeatureDim);
  bool unseen_class = false;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    auto proba = base_proba.row(i);
    int predicted = static_cast<int>(std::max_element(proba.begin(), proba.end()) -
                                     proba.begin());
    double freq = transform.test_class_freq[static_cast<std::size_t>(predicted)];
    if (freq == 0.0) unseen_class = true;

    auto row = out.row(i);
    row[0] = top_confidence(proba);
    row[1] = top_minus_second(proba);
    row[2] = entropy_nats(proba);
    row[3] = freq;
    row[4] = top_confidence(logit_proba.row(i));
    row[5] = top_confidence(forest_proba.row(i));
    row[6] = top_confidence(gbm_proba.row(i));
    row[7] = top_minus_second(logit_proba.row(i));
    row[8] = top_minus_second(forest_proba.row(i));
    row[9] = top_minus_second(gbm_proba.row(i));
    row[10] = transform.outlier.score(dist_feat.row(i));
    row[11] = transform.kde.max_class_density(pca_feat.row(i));
  }
  if (unseen_class)
    log_warn("meta_features: a predicted class never appears in the test split; frequency 0");
  return out;
}

std::vector<std::string> meta_feature_names() {
  return {"base_top_conf",    "base_top_minus_2nd", "base_entropy",     "pred_class_freq",
          "logit_top_conf",   "forest_top_conf",    "gbm_top_conf",     "logit_top_minus_2nd",
          "forest_top_minus_2nd", "gbm_top_minus_2nd", "outlier_score", "density_score"};
}

}  // namespace perfband::predict
