#include "perfband/sim/drift_sim.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "perfband/common/stats.hpp"
#include "perfband/tabular/encoding.hpp"

namespace perfband::sim {

namespace {

void check_fractions(double p_train, double p_test, double p_prod) {
  if (p_train <= 0.0 || p_test <= 0.0 || p_prod <= 0.0) {
    throw std::invalid_argument("drift_sim: split fractions must be positive");
  }
  if (std::abs(p_train + p_test + p_prod - 1.0) > 1e-9) {
    throw std::invalid_argument("drift_sim: split fractions must sum to 1");
  }
}

// floor(x), plus 1 with probability frac(x), so batch counts are unbiased.
std::size_t stochastic_round(double x, Rng& rng) {
  double base = std::floor(x);
  double frac = x - base;
  std::size_t n = static_cast<std::size_t>(base);
  if (frac > 0.0 && rng.bernoulli(frac)) ++n;
  return n;
}

// Moves up to `count` uniformly chosen entries from `pool` into `out` and
// returns how many were moved; the pool may run short of the request.
std::size_t draw_into(std::vector<int>& pool, std::size_t count, Rng& rng, std::vector<int>& out) {
  std::size_t moved = std::min(count, pool.size());
  for (std::size_t i = 0; i < moved; ++i) {
    std::size_t j = rng.uniform_index(pool.size());
    out.push_back(pool[j]);
    pool[j] = pool.back();
    pool.pop_back();
  }
  return moved;
}

}  // namespace

double median_threshold(const tabular::Dataset& data, int column) {
  if (column < 0 || column >= static_cast<int>(data.dim())) {
    throw std::invalid_argument("median_threshold: column out of range");
  }
  if (data.columns[column].kind != tabular::ColumnKind::numeric) {
    throw std::invalid_argument("median_threshold: column is not numeric");
  }
  std::vector<double> values;
  values.reserve(data.n());
  for (std::size_t r = 0; r < data.n(); ++r) {
    double v = data.values.at(r, column);
    if (!std::isnan(v)) values.push_back(v);
  }
  if (values.empty()) {
    throw std::invalid_argument("median_threshold: column has no observed values");
  }
  return quantile(std::move(values), 0.5);
}

tabular::SplitTriple linear_skew(const tabular::Dataset& data, const LinearSkewConfig& config) {
  check_fractions(config.p_train, config.p_test, config.p_prod);
  if (config.ratio < 0 || config.ratio > 100) {
    throw std::invalid_argument("linear_skew: ratio must be in [0, 100]");
  }
  if (config.minibatch < 1) {
    throw std::invalid_argument("linear_skew: minibatch must be positive");
  }
  if (config.feature < 0 || config.feature >= static_cast<int>(data.dim())) {
    throw std::invalid_argument("linear_skew: feature out of range");
  }
  if (data.columns[config.feature].kind != tabular::ColumnKind::numeric) {
    throw std::invalid_argument("linear_skew: feature is not numeric");
  }

  // Bucket A holds rows at or below the threshold; missing values land in B.
  std::vector<int> bucket_a;
  std::vector<int> bucket_b;
  for (std::size_t r = 0; r < data.n(); ++r) {
    double v = data.values.at(r, config.feature);
    bool below = !std::isnan(v) && v <= config.threshold;
    (below ? bucket_a : bucket_b).push_back(static_cast<int>(r));
  }
  if (bucket_a.empty() || bucket_b.empty()) {
    throw std::invalid_argument("linear_skew: threshold leaves a bucket empty");
  }
  const std::size_t batch = static_cast<std::size_t>(config.minibatch);
  if (bucket_a.size() <= batch || bucket_b.size() <= batch) {
    throw std::invalid_argument("linear_skew: minibatch larger than a bucket");
  }

  const double b = static_cast<double>(config.minibatch);
  const double r = config.ratio / 100.0;
  const double p_tt = config.p_train + config.p_test;

  Rng rng(config.seed);
  Rng loop_rng = rng.child(1);

  // Each minibatch feeds the train/test pool with ratio r from bucket A and
  // the production pool with the mirrored ratio, so the two pools drift apart
  // as r moves away from 1/2. Leftover rows are discarded.
  std::vector<int> pool_tt;
  std::vector<int> pool_pr;
  while (bucket_a.size() > batch && bucket_b.size() > batch) {
    std::size_t want_tt_a = stochastic_round(p_tt * r * b, loop_rng);
    std::size_t want_tt_b = stochastic_round(p_tt * (1.0 - r) * b, loop_rng);
    std::size_t want_pr_a = stochastic_round(config.p_prod * (1.0 - r) * b, loop_rng);
    std::size_t want_pr_b = stochastic_round(config.p_prod * r * b, loop_rng);
    bool short_draw = draw_into(bucket_a, want_tt_a, loop_rng, pool_tt) < want_tt_a;
    short_draw = (draw_into(bucket_b, want_tt_b, loop_rng, pool_tt) < want_tt_b) || short_draw;
    short_draw = (draw_into(bucket_a, want_pr_a, loop_rng, pool_pr) < want_pr_a) || short_draw;
    short_draw = (draw_into(bucket_b, want_pr_b, loop_rng, pool_pr) < want_pr_b) || short_draw;
    if (short_draw) break;
  }
  if (pool_tt.empty() || pool_pr.empty()) {
    throw std::runtime_error("linear_skew: produced an empty split");
  }

  tabular::SplitTriple out;
  auto [train, test] = tabular::split_rows(pool_tt, config.p_train / p_tt, rng.child(2).seed());
  out.train = std::move(train);
  out.test = std::move(test);
  out.prod = std::move(pool_pr);
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.test.begin(), out.test.end());
  std::sort(out.prod.begin(), out.prod.end());
  return out;
}

tabular::SplitTriple nearest_neighbors_drift(const tabular::Dataset& data,
                                             const NearestNeighborsConfig& config) {
  check_fractions(config.p_train, config.p_test, config.p_prod);
  for (double p : {config.p_set, config.p_near, config.p_down}) {
    if (p < 0.0 || p > 1.0) {
      throw std::invalid_argument("nearest_neighbors_drift: probabilities must be in [0, 1]");
    }
  }

  Rng rng(config.seed);
  std::vector<int> all(data.n());
  std::iota(all.begin(), all.end(), 0);
  auto [pool_pr, pool_tt] = tabular::split_rows(all, config.p_prod, rng.child(1).seed());
  if (pool_pr.empty() || pool_tt.empty()) {
    throw std::invalid_argument("nearest_neighbors_drift: dataset too small for the fractions");
  }

  Rng choice = rng.child(2);
  bool bias_tt = choice.bernoulli(config.p_set);
  std::vector<int>& down = bias_tt ? pool_tt : pool_pr;
  std::vector<int>& rest = bias_tt ? pool_pr : pool_tt;

  int anchor = down[choice.uniform_index(down.size())];
  bool near = choice.bernoulli(config.p_near);

  // Distances use the mixed-type embedding fit on the whole dataset, so both
  // pools live in the same space regardless of which one is biased.
  tabular::Encoder encoder = tabular::Encoder::fit(data, all, tabular::EncodeMode::distance);
  Matrix emb = encoder.transform(data, all);
  auto dist2 = [&](int a, int c) {
    auto ra = emb.row(a);
    auto rc = emb.row(c);
    double d = 0.0;
    for (std::size_t j = 0; j < ra.size(); ++j) {
      double diff = ra[j] - rc[j];
      d += diff * diff;
    }
    return d;
  };

  struct Cand {
    double d;
    int row;
  };
  std::vector<Cand> cands;
  cands.reserve(down.size());
  for (int row : down) {
    if (row != anchor) cands.push_back({dist2(anchor, row), row});
  }
  std::sort(cands.begin(), cands.end(),
            [](const Cand& a, const Cand& c) { return a.d < c.d || (a.d == c.d && a.row < c.row); });

  // The anchor counts toward the pool size but always survives.
  std::size_t k = static_cast<std::size_t>(std::floor(config.p_down * static_cast<double>(down.size())));
  k = std::min(k, cands.size());
  std::vector<char> removed(data.n(), 0);
  for (std::size_t i = 0; i < k; ++i) {
    const Cand& c = near ? cands[i] : cands[cands.size() - 1 - i];
    removed[c.row] = 1;
  }
  std::vector<int> down_kept;
  down_kept.reserve(down.size() - k);
  for (int row : down) {
    if (!removed[row]) down_kept.push_back(row);
  }

  // The other pool is thinned uniformly by the same fraction.
  std::size_t k_rest =
      static_cast<std::size_t>(std::floor(config.p_down * static_cast<double>(rest.size())));
  std::vector<int> rest_kept = rest;
  Rng thin = rng.child(3);
  thin.shuffle(rest_kept);
  rest_kept.resize(rest_kept.size() - k_rest);

  std::vector<int> final_tt = bias_tt ? std::move(down_kept) : std::move(rest_kept);
  std::vector<int> final_pr = bias_tt ? std::move(rest_kept) : std::move(down_kept);
  if (final_tt.size() < 2 || final_pr.empty()) {
    throw std::runtime_error("nearest_neighbors_drift: produced an empty split");
  }

  const double p_tt = config.p_train + config.p_test;
  tabular::SplitTriple out;
  auto [train, test] = tabular::split_rows(final_tt, config.p_train / p_tt, rng.child(4).seed());
  out.train = std::move(train);
  out.test = std::move(test);
  out.prod = std::move(final_pr);
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.test.begin(), out.test.end());
  std::sort(out.prod.begin(), out.prod.end());
  return out;
}

DriftScenario build_scenario(const tabular::Dataset& data, const tabular::SplitTriple& split,
                             learn::ClassifierKind base_kind, predict::PredictorKind predictor_kind,
                             std::uint64_t seed) {
  DriftScenario scenario;
  scenario.dataset_id = data.id;
  scenario.split = split;
  try {
    if (split.train.empty() || split.test.empty() || split.prod.empty()) {
      throw std::invalid_argument("build_scenario: split has an empty part");
    }
    Rng rng(seed);
    Rng base_rng = rng.child(1);
    scenario.base = tabular::fit_tabular_classifier(base_kind, data, split.train, {}, base_rng);
    Rng transform_rng = rng.child(2);
    scenario.transform =
        predict::fit_meta_transform(data, split.train, split.test, scenario.base, transform_rng);
    Rng predictor_rng = rng.child(3);
    scenario.predictor = predict::train_predictor(predictor_kind, data, split.test, scenario.base,
                                                  scenario.transform, predictor_rng);
    Rng draw_rng = rng.child(4);
    scenario.prod_prediction = predict::predict_performance(scenario.predictor, scenario.base,
                                                            scenario.transform, data, split.prod,
                                                            draw_rng);
    scenario.true_test_accuracy = 100.0 * tabular::classifier_accuracy(scenario.base, data, split.test);
    scenario.true_prod_accuracy = 100.0 * tabular::classifier_accuracy(scenario.base, data, split.prod);
    scenario.predicted_prod_accuracy = scenario.prod_prediction.predicted_accuracy;
    scenario.delta = std::abs(scenario.true_prod_accuracy - scenario.predicted_prod_accuracy);
  } catch (const std::exception& e) {
    scenario.failed = true;
    scenario.failure_reason = e.what();
  }
  return scenario;
}

}  // namespace perfband::sim
