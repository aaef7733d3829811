#include "perfband/features/um_features.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "perfband/common/log.hpp"
#include "perfband/common/stats.hpp"
#include "perfband/learn/hpo.hpp"
#include "perfband/tabular/bootstrap.hpp"

namespace perfband::features {

using tabular::BinSpec;
using tabular::Histogram;
using tabular::OutOfRange;

double histogram_distance(const std::vector<double>& test_values,
                          const std::vector<double>& prod_values, const BinSpec& bins,
                          DistanceMetric metric) {
  Histogram p = tabular::build_histogram(test_values, bins);
  Histogram q = tabular::build_histogram(prod_values, bins);
  switch (metric) {
    case DistanceMetric::d1: {
      double cdf_p = 0.0, cdf_q = 0.0, worst = 0.0;
      for (std::size_t i = 0; i < p.mass.size(); ++i) {
        cdf_p += p.mass[i];
        cdf_q += q.mass[i];
        worst = std::max(worst, std::abs(cdf_p - cdf_q));
      }
      return worst;
    }
    case DistanceMetric::d2: {
      double total = 0.0;
      for (std::size_t i = 0; i < p.mass.size(); ++i)
        total += std::max(p.mass[i] - q.mass[i], 0.0);
      return total;
    }
    case DistanceMetric::d3: {
      double total = 0.0;
      for (std::size_t i = 0; i < p.mass.size(); ++i) {
        double excess = std::max(p.mass[i] - q.mass[i], 0.0);
        total += excess * excess;
      }
      return total;
    }
  }
  throw std::logic_error("histogram_distance: unknown metric");
}

std::array<double, 3> histogram_distances(const std::vector<double>& test_values,
                                          const std::vector<double>& prod_values,
                                          const BinSpec& bins) {
  return {histogram_distance(test_values, prod_values, bins, DistanceMetric::d1),
          histogram_distance(test_values, prod_values, bins, DistanceMetric::d2),
          histogram_distance(test_values, prod_values, bins, DistanceMetric::d3)};
}

BinSpec top_confidence_bins() {
  std::vector<double> edges;
  for (int i = 0; i <= 9; ++i) edges.push_back(0.1 * i);
  for (int i = 1; i <= 10; ++i) edges.push_back(0.9 + 0.01 * i);
  return BinSpec::from_edges(std::move(edges));
}

BinSpec top_minus_second_bins() { return BinSpec::uniform(0.0, 1.0, 10); }

BinSpec entropy_bins() {
  std::vector<double> edges;
  for (int i = 0; i <= 10; ++i) edges.push_back(0.01 * i);
  for (int i = 2; i <= 30; ++i) edges.push_back(0.1 * i);
  return BinSpec::from_edges(std::move(edges));
}

BinSpec drift_confidence_bins() { return BinSpec::uniform(0.0, 1.0, 11); }

BinSpec quantile_bins(const std::vector<double>& test_values,
                      const std::vector<double>& prod_values) {
  std::vector<double> pooled = test_values;
  pooled.insert(pooled.end(), prod_values.begin(), prod_values.end());
  double lo = quantile(pooled, 0.1);
  double hi = quantile(pooled, 0.9);
  if (!(hi > lo)) {
    lo -= 0.5;
    hi = lo + 1.0;
  }
  BinSpec spec = BinSpec::uniform(lo, hi, 10, OutOfRange::drop);
  auto any_included = [&](const std::vector<double>& values) {
    for (double v : values)
      if (spec.bin_index(v) >= 0) return true;
    return false;
  };
  if (!any_included(test_values) || !any_included(prod_values))
    spec.policy = OutOfRange::clip;
  return spec;
}

namespace {

struct ConfidenceStats {
  std::vector<double> top;
  std::vector<double> top2;
  std::vector<double> entropy;
  std::vector<double> predicted;  // class code as a double, for categorical bins
};

ConfidenceStats confidence_stats(const Matrix& proba) {
  ConfidenceStats out;
  for (std::size_t r = 0; r < proba.rows; ++r) {
    auto row = proba.row(r);
    out.top.push_back(predict::top_confidence(row));
    out.top2.push_back(predict::top_minus_second(row));
    out.entropy.push_back(entropy_nats(row));
    std::size_t best = 0;
    for (std::size_t c = 1; c < row.size(); ++c)
      if (row[c] > row[best]) best = c;
    out.predicted.push_back(static_cast<double>(best));
  }
  return out;
}

Matrix hstack(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows, a.cols + b.cols);
  for (std::size_t r = 0; r < a.rows; ++r) {
    std::copy(a.row(r).begin(), a.row(r).end(), out.row(r).begin());
    std::copy(b.row(r).begin(), b.row(r).end(), out.row(r).begin() + a.cols);
  }
  return out;
}

double holdout_accuracy(const learn::RandomForestModel& model, const Matrix& X,
                        const std::vector<int>& labels, const std::vector<int>& holdout) {
  Matrix Xh = X.select_rows(holdout);
  std::vector<int> pred = model.predict(Xh);
  double hits = 0.0;
  for (std::size_t i = 0; i < holdout.size(); ++i)
    hits += pred[i] == labels[static_cast<std::size_t>(holdout[i])];
  return hits / static_cast<double>(holdout.size());
}

// Per-tree whitebox accumulators over a GBT ensemble.
struct GbtWhitebox {
  // Mean distance |x_f - threshold| between a point and the thresholds it is
  // compared against, grouped by node level (root = level 1) and the mean
  // per-traversal sum across all levels.
  std::array<double, 3> dd_level{0.0, 0.0, 0.0};
  double dd_all = 0.0;
  // Node-frequency deltas |freq_test - freq_prod| over every node of every
  // tree: global max/mean/stdev plus the same statistics per level 1..3.
  double nfd_max = 0.0, nfd_mean = 0.0, nfd_stdev = 0.0;
  std::array<std::array<double, 3>, 3> nfd_level{};  // [level][max, mean, stdev]
};

void nfd_stats(const std::vector<double>& deltas, double& max_out, double& mean_out,
               double& stdev_out) {
  if (deltas.empty()) {
    max_out = mean_out = stdev_out = 0.0;
    return;
  }
  max_out = *std::max_element(deltas.begin(), deltas.end());
  mean_out = mean(deltas);
  stdev_out = stdev(deltas, 0);
}

GbtWhitebox gbt_whitebox(const learn::GbtModel& model, const Matrix& meta_test,
                         const Matrix& meta_prod) {
  GbtWhitebox out;
  std::vector<const learn::DecisionTree*> trees;
  for (const auto& stage : model.stages)
    for (const auto& tree : stage.trees) trees.push_back(&tree);
  if (trees.empty() || meta_prod.rows == 0) return out;

  std::array<double, 3> level_sum{0.0, 0.0, 0.0};
  std::array<std::int64_t, 3> level_count{0, 0, 0};
  double path_sum = 0.0;
  std::vector<int> path;
  for (std::size_t r = 0; r < meta_prod.rows; ++r) {
    auto x = meta_prod.row(r);
    for (const auto* tree : trees) {
      tree->traverse_path(x, path);
      for (int idx : path) {
        const auto& node = tree->nodes[static_cast<std::size_t>(idx)];
        if (node.feature < 0) continue;
        double dist = std::abs(x[static_cast<std::size_t>(node.feature)] - node.threshold);
        path_sum += dist;
        if (node.depth < 3) {
          level_sum[static_cast<std::size_t>(node.depth)] += dist;
          level_count[static_cast<std::size_t>(node.depth)] += 1;
        }
      }
    }
  }
  for (int l = 0; l < 3; ++l)
    if (level_count[static_cast<std::size_t>(l)] > 0)
      out.dd_level[static_cast<std::size_t>(l)] =
          level_sum[static_cast<std::size_t>(l)] /
          static_cast<double>(level_count[static_cast<std::size_t>(l)]);
  out.dd_all = path_sum / (static_cast<double>(meta_prod.rows) * trees.size());

  // Traversal frequency per node, normalized by row count, for each side.
  auto frequencies = [&](const Matrix& X) {
    std::vector<std::vector<double>> freq(trees.size());
    for (std::size_t t = 0; t < trees.size(); ++t)
      freq[t].assign(trees[t]->nodes.size(), 0.0);
    std::vector<int> walk;
    for (std::size_t r = 0; r < X.rows; ++r)
      for (std::size_t t = 0; t < trees.size(); ++t) {
        trees[t]->traverse_path(X.row(r), walk);
        for (int idx : walk) freq[t][static_cast<std::size_t>(idx)] += 1.0;
      }
    for (auto& f : freq)
      for (double& v : f) v /= static_cast<double>(X.rows);
    return freq;
  };
  auto freq_test = frequencies(meta_test);
  auto freq_prod = frequencies(meta_prod);

  std::vector<double> all_deltas;
  std::array<std::vector<double>, 3> level_deltas;
  for (std::size_t t = 0; t < trees.size(); ++t)
    for (std::size_t n = 0; n < trees[t]->nodes.size(); ++n) {
      double delta = std::abs(freq_test[t][n] - freq_prod[t][n]);
      all_deltas.push_back(delta);
      int depth = trees[t]->nodes[n].depth;
      if (depth < 3) level_deltas[static_cast<std::size_t>(depth)].push_back(delta);
    }
  nfd_stats(all_deltas, out.nfd_max, out.nfd_mean, out.nfd_stdev);
  for (int l = 0; l < 3; ++l)
    nfd_stats(level_deltas[static_cast<std::size_t>(l)], out.nfd_level[static_cast<std::size_t>(l)][0],
              out.nfd_level[static_cast<std::size_t>(l)][1],
              out.nfd_level[static_cast<std::size_t>(l)][2]);
  return out;
}

// The GBT ensemble whose internals feed the gbm whitebox features: the GBM
// member for the meta_model kind, the dropout regressor for the dropout
// kind. The other kinds have no boosted component and report zeros.
const learn::GbtModel* whitebox_gbt(const predict::PerformancePredictor& predictor) {
  if (predictor.constant_fallback) return nullptr;
  if (predictor.kind == predict::PredictorKind::meta_model && !predictor.members.empty())
    return &predictor.members[0].boosted;
  if (predictor.kind == predict::PredictorKind::dropout &&
      !predictor.dropout_model.stages.empty())
    return &predictor.dropout_model;
  return nullptr;
}

void require_fitted(bool ok, const std::string& component) {
  if (!ok) throw std::invalid_argument("extract_um_features: " + component + " is not fitted");
}

}  // namespace

DriftModelSet train_drift_models(const tabular::Dataset& data,
                                 const std::vector<int>& test_rows,
                                 const std::vector<int>& prod_rows,
                                 const tabular::TabularClassifier& base,
                                 const predict::MetaFeatureTransform& transform, Rng& rng) {
  if (test_rows.empty()) throw std::invalid_argument("train_drift_models: empty test split");
  if (prod_rows.size() < 8)
    throw std::invalid_argument("train_drift_models: production split smaller than 8 rows");

  std::vector<int> combined = test_rows;
  combined.insert(combined.end(), prod_rows.begin(), prod_rows.end());
  std::vector<int> origin(combined.size(), 0);
  std::fill(origin.begin() + static_cast<std::ptrdiff_t>(test_rows.size()), origin.end(), 1);

  DriftModelSet out;
  out.encoder = tabular::Encoder::fit(data, combined, tabular::EncodeMode::tree);
  Matrix X_raw = out.encoder.transform(data, combined);
  Matrix X_trans = predict::meta_features(transform, base, data, combined);
  Matrix X_concat = hstack(X_raw, X_trans);

  Rng fold_rng = rng.child(1);
  auto folds = learn::stratified_folds(origin, 4, fold_rng);
  const std::vector<int>& holdout = folds[0];
  std::vector<int> train;
  for (std::size_t f = 1; f < folds.size(); ++f)
    train.insert(train.end(), folds[f].begin(), folds[f].end());
  std::sort(train.begin(), train.end());

  std::vector<int> train_labels;
  for (int i : train) train_labels.push_back(origin[static_cast<std::size_t>(i)]);
  std::vector<double> class_weight = learn::balanced_sample_weights(train_labels, 2);
  // fit() indexes labels and weights by absolute row, so spread the balanced
  // weights back over the combined index space.
  std::vector<double> weights(combined.size(), 0.0);
  for (std::size_t i = 0; i < train.size(); ++i)
    weights[static_cast<std::size_t>(train[i])] = class_weight[i];

  learn::RfParams params;
  params.n_estimators = kDriftTrees;
  auto fit_one = [&](learn::RandomForestModel& model, const Matrix& X, std::uint64_t stream) {
    Matrix Xt = X.select_rows(train);
    std::vector<int> yt;
    std::vector<double> wt;
    for (int i : train) {
      yt.push_back(origin[static_cast<std::size_t>(i)]);
      wt.push_back(weights[static_cast<std::size_t>(i)]);
    }
    model.params = params;
    model.fit(Xt, yt, wt, 2, rng.child(stream).seed());
    return holdout_accuracy(model, X, origin, holdout);
  };
  out.accuracy_raw = fit_one(out.raw, X_raw, 2);
  out.accuracy_transformed = fit_one(out.transformed, X_trans, 3);
  out.accuracy_concat = fit_one(out.concat, X_concat, 4);
  return out;
}

Matrix drift_top_minus_second(const DriftModelSet& drift, const tabular::Dataset& data,
                              const std::vector<int>& rows,
                              const tabular::TabularClassifier& base,
                              const predict::MetaFeatureTransform& transform) {
  Matrix X_raw = drift.encoder.transform(data, rows);
  Matrix X_trans = predict::meta_features(transform, base, data, rows);
  Matrix X_concat = hstack(X_raw, X_trans);

  Matrix out(rows.size(), 3);
  const learn::RandomForestModel* models[3] = {&drift.raw, &drift.transformed, &drift.concat};
  const Matrix* inputs[3] = {&X_raw, &X_trans, &X_concat};
  for (int m = 0; m < 3; ++m) {
    Matrix proba = models[m]->predict_proba(*inputs[m]);
    for (std::size_t r = 0; r < proba.rows; ++r)
      out.at(r, static_cast<std::size_t>(m)) = predict::top_minus_second(proba.row(r));
  }
  return out;
}

const std::vector<UmFeatureInfo>& um_feature_schema() {
  static const std::vector<UmFeatureInfo> schema = [] {
    std::vector<UmFeatureInfo> s;
    auto triple = [&](const std::string& stem, const std::string& group) {
      for (const char* m : {"d1", "d2", "d3"})
        s.push_back({stem + "_" + m, group, "distance"});
    };
    triple("base_top_conf", "base");
    triple("base_top2_conf", "base");
    triple("base_entropy", "base");
    triple("base_class_freq", "base");
    s.push_back({"base_entropy_ratio", "base", "prediction"});
    s.push_back({"base_bootstrap_width", "base", "noise"});

    s.push_back({"pred_change", "perf_pred", "prediction"});
    s.push_back({"pred_conf_stdev", "perf_pred", "prediction"});
    s.push_back({"pred_conf_entropy", "perf_pred", "prediction"});
    s.push_back({"pred_intrinsic_width", "perf_pred", "internal"});
    s.push_back({"pred_bootstrap_width", "perf_pred", "noise"});
    s.push_back({"ens_stdev_of_means", "perf_pred", "internal"});
    s.push_back({"ens_mean_of_stdevs", "perf_pred", "internal"});
    s.push_back({"calib_delta_signed", "perf_pred", "internal"});
    s.push_back({"calib_delta_abs", "perf_pred", "internal"});
    for (const char* level : {"level1", "level2", "level3", "all"})
      s.push_back({std::string("gbm_dd_") + level, "perf_pred", "internal"});
    for (const char* stat : {"max", "mean", "stdev"})
      s.push_back({std::string("gbm_nfd_") + stat, "perf_pred", "internal"});
    for (const char* level : {"l1", "l2", "l3"})
      for (const char* stat : {"max", "mean", "stdev"})
        s.push_back({std::string("gbm_nfd_") + level + "_" + stat, "perf_pred", "internal"});

    for (const char* proxy : {"logistic", "forest", "gbm"})
      triple(std::string("proxy_") + proxy + "_top_conf", "proxy");
    for (const char* proxy : {"logistic", "forest", "gbm"})
      triple(std::string("proxy_") + proxy + "_top2_conf", "proxy");
    triple("proxy_best_feature", "proxy");
    s.push_back({"proxy_num_important_features", "proxy", "internal"});

    for (const char* rep : {"raw", "transformed", "concat"})
      s.push_back({std::string("drift_accuracy_") + rep, "drift", "prediction"});
    for (const char* rep : {"raw", "transformed", "concat"})
      triple(std::string("drift_") + rep + "_top2", "drift");

    triple("pca_projection", "other");
    return s;
  }();
  return schema;
}

std::vector<std::string> um_feature_names() {
  std::vector<std::string> names;
  for (const auto& info : um_feature_schema()) names.push_back(info.name);
  return names;
}

std::vector<double> extract_um_features(const tabular::Dataset& data,
                                        const std::vector<int>& test_rows,
                                        const std::vector<int>& prod_rows,
                                        const tabular::TabularClassifier& base,
                                        const predict::MetaFeatureTransform& transform,
                                        const predict::PerformancePredictor& predictor,
                                        const predict::PerformancePrediction& prod_prediction,
                                        const DriftModelSet& drift, Rng& rng) {
  require_fitted(base.model.n_classes() > 0, "base model");
  require_fitted(transform.proxy_forest.model.n_classes() > 0, "proxy models");
  require_fitted(!drift.raw.trees.empty(), "drift models");
  require_fitted(prod_prediction.confidences.size() == prod_rows.size(),
                 "performance prediction");
  if (test_rows.empty() || prod_rows.empty())
    throw std::invalid_argument("extract_um_features: empty split");

  std::vector<double> out;
  out.reserve(kUmFeatureCount);
  auto emit_triple = [&](const std::vector<double>& test_values,
                         const std::vector<double>& prod_values, const BinSpec& bins) {
    auto d = histogram_distances(test_values, prod_values, bins);
    out.insert(out.end(), d.begin(), d.end());
  };

  // Base group.
  ConfidenceStats test_stats = confidence_stats(base.predict_proba(data, test_rows));
  ConfidenceStats prod_stats = confidence_stats(base.predict_proba(data, prod_rows));
  emit_triple(test_stats.top, prod_stats.top, top_confidence_bins());
  emit_triple(test_stats.top2, prod_stats.top2, top_minus_second_bins());
  emit_triple(test_stats.entropy, prod_stats.entropy, entropy_bins());
  emit_triple(test_stats.predicted, prod_stats.predicted,
              BinSpec::categorical(data.n_classes()));
  out.push_back(mean(prod_stats.entropy) / std::max(mean(test_stats.entropy), 1e-12));
  out.push_back(100.0 * tabular::bootstrap_interval_width(prod_stats.top, kNoiseResamples,
                                                          kNoiseLevel, rng.child(1).seed()));

  // Performance-predictor group.
  double test_accuracy = 0.0;
  {
    std::vector<int> pred = base.predict(data, test_rows);
    for (std::size_t i = 0; i < test_rows.size(); ++i)
      test_accuracy += pred[i] == data.labels[static_cast<std::size_t>(test_rows[i])];
    test_accuracy /= static_cast<double>(test_rows.size());
  }
  out.push_back(prod_prediction.predicted_accuracy - 100.0 * test_accuracy);
  out.push_back(stdev(prod_prediction.confidences, 0));
  {
    Histogram h = tabular::build_histogram(prod_prediction.confidences,
                                           BinSpec::uniform(0.0, 1.0, 10));
    out.push_back(entropy_nats(h.mass));
  }
  out.push_back(100.0 * prod_prediction.intrinsic_width.value_or(0.0));
  out.push_back(100.0 * tabular::bootstrap_interval_width(prod_prediction.confidences,
                                                          kNoiseResamples, kNoiseLevel,
                                                          rng.child(2).seed()));

  const Matrix& members = prod_prediction.member_confidences;
  if (members.cols >= 2 && members.rows > 0) {
    std::vector<double> member_means;
    for (std::size_t c = 0; c < members.cols; ++c) {
      double total = 0.0;
      for (std::size_t r = 0; r < members.rows; ++r) total += members.at(r, c);
      member_means.push_back(total / static_cast<double>(members.rows));
    }
    out.push_back(stdev(member_means, 0));
    double spread = 0.0;
    for (std::size_t r = 0; r < members.rows; ++r) spread += stdev(members.row(r), 0);
    out.push_back(spread / static_cast<double>(members.rows));
  } else {
    out.push_back(0.0);
    out.push_back(0.0);
  }

  double calib_delta =
      prod_prediction.raw_confidences.size() == prod_prediction.confidences.size() &&
              !prod_prediction.confidences.empty()
          ? 100.0 * (mean(prod_prediction.confidences) - mean(prod_prediction.raw_confidences))
          : 0.0;
  out.push_back(calib_delta);
  out.push_back(std::abs(calib_delta));

  {
    GbtWhitebox wb;
    if (const learn::GbtModel* model = whitebox_gbt(predictor)) {
      Matrix meta_test = predict::meta_features(transform, base, data, test_rows);
      Matrix meta_prod = predict::meta_features(transform, base, data, prod_rows);
      wb = gbt_whitebox(*model, meta_test, meta_prod);
    }
    for (double v : wb.dd_level) out.push_back(v);
    out.push_back(wb.dd_all);
    out.push_back(wb.nfd_max);
    out.push_back(wb.nfd_mean);
    out.push_back(wb.nfd_stdev);
    for (const auto& level : wb.nfd_level)
      for (double v : level) out.push_back(v);
  }

  // Proxy group.
  const tabular::TabularClassifier* proxies[3] = {&transform.proxy_logistic,
                                                  &transform.proxy_forest, &transform.proxy_gbm};
  std::array<ConfidenceStats, 3> proxy_test, proxy_prod;
  for (int m = 0; m < 3; ++m) {
    proxy_test[static_cast<std::size_t>(m)] =
        confidence_stats(proxies[m]->predict_proba(data, test_rows));
    proxy_prod[static_cast<std::size_t>(m)] =
        confidence_stats(proxies[m]->predict_proba(data, prod_rows));
  }
  for (int m = 0; m < 3; ++m)
    emit_triple(proxy_test[static_cast<std::size_t>(m)].top,
                proxy_prod[static_cast<std::size_t>(m)].top, top_confidence_bins());
  for (int m = 0; m < 3; ++m)
    emit_triple(proxy_test[static_cast<std::size_t>(m)].top2,
                proxy_prod[static_cast<std::size_t>(m)].top2, top_minus_second_bins());

  {
    std::vector<double> importances = transform.proxy_forest.model.forest.feature_importances();
    std::size_t best = 0;
    for (std::size_t i = 1; i < importances.size(); ++i)
      if (importances[i] > importances[best]) best = i;
    Matrix enc_test = transform.proxy_forest.encoder.transform(data, test_rows);
    Matrix enc_prod = transform.proxy_forest.encoder.transform(data, prod_rows);
    std::vector<double> best_test, best_prod;
    for (std::size_t r = 0; r < enc_test.rows; ++r) best_test.push_back(enc_test.at(r, best));
    for (std::size_t r = 0; r < enc_prod.rows; ++r) best_prod.push_back(enc_prod.at(r, best));
    emit_triple(best_test, best_prod, quantile_bins(best_test, best_prod));

    std::vector<double> sorted = importances;
    std::sort(sorted.begin(), sorted.end(), std::greater<double>());
    double mass = 0.0;
    int needed = 0;
    for (double v : sorted) {
      mass += v;
      ++needed;
      if (mass >= kImportanceMass) break;
    }
    out.push_back(static_cast<double>(needed));
  }

  // Drift group.
  out.push_back(drift.accuracy_raw);
  out.push_back(drift.accuracy_transformed);
  out.push_back(drift.accuracy_concat);
  Matrix drift_test = drift_top_minus_second(drift, data, test_rows, base, transform);
  Matrix drift_prod = drift_top_minus_second(drift, data, prod_rows, base, transform);
  for (int m = 0; m < 3; ++m) {
    std::vector<double> t, q;
    for (std::size_t r = 0; r < drift_test.rows; ++r)
      t.push_back(drift_test.at(r, static_cast<std::size_t>(m)));
    for (std::size_t r = 0; r < drift_prod.rows; ++r)
      q.push_back(drift_prod.at(r, static_cast<std::size_t>(m)));
    emit_triple(t, q, drift_confidence_bins());
  }

  // Other group: projection onto the leading PCA component.
  {
    Matrix enc_test = transform.distance_encoder.transform(data, test_rows);
    Matrix enc_prod = transform.distance_encoder.transform(data, prod_rows);
    std::vector<double> proj_test = transform.pca.project(enc_test, 0);
    std::vector<double> proj_prod = transform.pca.project(enc_prod, 0);
    emit_triple(proj_test, proj_prod, quantile_bins(proj_test, proj_prod));
  }

  if (out.size() != static_cast<std::size_t>(kUmFeatureCount))
    throw std::logic_error("extract_um_features: schema size mismatch");
  return out;
}

}  // namespace perfband::features
