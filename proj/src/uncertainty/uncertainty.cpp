#include "perfband/uncertainty/uncertainty.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "perfband/common/log.hpp"
#include "perfband/common/stats.hpp"
#include "perfband/learn/serialize.hpp"
#include "perfband/tabular/split.hpp"

namespace perfband::uncertainty {

double interval_cost(const std::vector<double>& deltas, const std::vector<double>& widths,
                     double alpha) {
  if (deltas.size() != widths.size())
    throw std::invalid_argument("interval_cost: deltas and widths differ in length");
  if (alpha < 0.0 || alpha > 1.0)
    throw std::invalid_argument("interval_cost: alpha outside [0, 1]");
  double total = 0.0;
  for (std::size_t i = 0; i < deltas.size(); ++i)
    total += alpha * std::max(deltas[i] - widths[i], 0.0) +
             (1.0 - alpha) * std::max(widths[i] - deltas[i], 0.0);
  return total;
}

CostReport make_cost_report(const std::vector<double>& deltas,
                            const std::vector<double>& widths, double alpha,
                            const std::string& method) {
  CostReport report;
  report.alpha = alpha;
  report.method = method;
  report.deltas = deltas;
  report.widths = widths;
  report.total = interval_cost(deltas, widths, alpha);
  report.mean = deltas.empty() ? 0.0 : report.total / static_cast<double>(deltas.size());
  return report;
}

double UncertaintyModel::predict_width(const std::vector<double>& features) const {
  Matrix X(1, features.size());
  std::copy(features.begin(), features.end(), X.row(0).begin());
  return predict_widths(X)[0];
}

std::vector<double> UncertaintyModel::predict_widths(const Matrix& features) const {
  if (members.empty()) throw std::logic_error("UncertaintyModel: no trained members");
  std::vector<double> total(features.rows, 0.0);
  for (const auto& member : members) {
    std::vector<double> out = member.predict(features);
    for (std::size_t r = 0; r < total.size(); ++r) total[r] += out[r];
  }
  for (double& v : total) v = std::max(v / static_cast<double>(members.size()), 0.0);
  return total;
}

UncertaintyModel train_um(const Matrix& features, const std::vector<double>& deltas,
                          double alpha, const std::vector<std::string>& feature_names,
                          const std::string& predictor_kind, Rng& rng) {
  if (features.rows != deltas.size())
    throw std::invalid_argument("train_um: features and deltas differ in length");
  if (features.rows < static_cast<std::size_t>(kMinTrainScenarios))
    throw std::invalid_argument("train_um: fewer than " + std::to_string(kMinTrainScenarios) +
                                " training scenarios");
  if (features.cols != feature_names.size())
    throw std::invalid_argument("train_um: feature names do not match the matrix width");
  if (alpha <= 0.0 || alpha >= 1.0)
    throw std::invalid_argument("train_um: alpha outside (0, 1)");
  for (double d : deltas)
    if (d < 0.0) throw std::invalid_argument("train_um: negative delta target");

  UncertaintyModel um;
  um.feature_names = feature_names;
  um.predictor_kind = predictor_kind;
  um.alpha = alpha;

  learn::GbtParams params;
  params.loss = learn::GbtLoss::quantile;
  params.tau = alpha;
  params.n_estimators = kUmTrees;
  params.learning_rate = kUmLearningRate;
  params.subsample = kUmSubsample;
  params.tree.max_depth = kUmTreeDepth;
  params.tree.max_features = learn::MaxFeatures::log2_of_dim;

  um.members.resize(kUmMembers);
  for (int m = 0; m < kUmMembers; ++m) {
    um.members[static_cast<std::size_t>(m)].params = params;
    um.members[static_cast<std::size_t>(m)].fit(features, deltas,
                                                rng.child(static_cast<std::uint64_t>(m + 1)).seed());
  }
  return um;
}

PredictionInterval predict_interval(const UncertaintyModel& um,
                                    const std::vector<double>& features,
                                    const std::vector<std::string>& names) {
  if (names != um.feature_names) {
    std::string missing, extra;
    for (const auto& name : um.feature_names)
      if (std::find(names.begin(), names.end(), name) == names.end())
        missing += (missing.empty() ? "" : ", ") + name;
    for (const auto& name : names)
      if (std::find(um.feature_names.begin(), um.feature_names.end(), name) ==
          um.feature_names.end())
        extra += (extra.empty() ? "" : ", ") + name;
    std::string detail = names.size() != um.feature_names.size() || !missing.empty() ||
                                 !extra.empty()
                             ? "missing: [" + missing + "], extra: [" + extra + "]"
                             : "same names in a different order";
    throw std::invalid_argument("predict_interval: feature schema mismatch; " + detail);
  }
  PredictionInterval interval;
  interval.raw_width = um.predict_width(features);
  interval.calibrated_width = interval.raw_width;
  return interval;
}

double z_scale(double alpha) {
  if (alpha <= 0.0 || alpha >= 1.0)
    throw std::invalid_argument("z_scale: alpha outside (0, 1)");
  return two_sided_normal_quantile(alpha);
}

std::vector<double> z_calibrate(const std::vector<double>& raw_widths, double alpha) {
  double scale = z_scale(alpha);
  std::vector<double> out = raw_widths;
  for (double& w : out) w *= scale;
  return out;
}

double tl_calibrate(const std::vector<double>& raw_widths, const std::vector<double>& deltas,
                    double alpha) {
  if (raw_widths.size() != deltas.size())
    throw std::invalid_argument("tl_calibrate: widths and deltas differ in length");
  if (raw_widths.empty()) throw std::invalid_argument("tl_calibrate: empty holdout");

  std::vector<double> candidates{0.0};
  for (std::size_t i = 0; i < raw_widths.size(); ++i)
    if (raw_widths[i] > 0.0) candidates.push_back(deltas[i] / raw_widths[i]);
  if (candidates.size() == 1) {
    log_warn("tl_calibrate: all raw widths are zero; scale 0");
    return 0.0;
  }
  std::sort(candidates.begin(), candidates.end());

  double best_scale = 0.0;
  double best_cost = std::numeric_limits<double>::infinity();
  std::vector<double> scaled(raw_widths.size());
  for (double s : candidates) {
    for (std::size_t i = 0; i < raw_widths.size(); ++i) scaled[i] = s * raw_widths[i];
    double cost = interval_cost(deltas, scaled, alpha);
    if (cost < best_cost) {
      best_cost = cost;
      best_scale = s;
    }
  }
  return best_scale;
}

UmPipeline build_um_pipeline(const Matrix& features, const std::vector<double>& deltas,
                             const std::vector<std::string>& feature_names,
                             const std::string& predictor_kind, double alpha, Rng& rng) {
  if (features.rows != deltas.size())
    throw std::invalid_argument("build_um_pipeline: features and deltas differ in length");
  std::vector<int> local(features.rows);
  for (std::size_t i = 0; i < local.size(); ++i) local[i] = static_cast<int>(i);
  auto [train_idx, calib_idx] =
      tabular::split_rows(local, kUmTrainFraction, rng.child(1).seed());
  if (train_idx.empty() || calib_idx.empty())
    throw std::invalid_argument("build_um_pipeline: empty scenario split");

  UmPipeline pipeline;
  pipeline.train_index = train_idx;
  pipeline.calib_index = calib_idx;

  Matrix train_feat = features.select_rows(train_idx);
  std::vector<double> train_delta, calib_delta;
  for (int i : train_idx) train_delta.push_back(deltas[static_cast<std::size_t>(i)]);
  for (int i : calib_idx) calib_delta.push_back(deltas[static_cast<std::size_t>(i)]);

  Rng train_rng = rng.child(2);
  pipeline.model =
      train_um(train_feat, train_delta, alpha, feature_names, predictor_kind, train_rng);

  Matrix calib_feat = features.select_rows(calib_idx);
  std::vector<double> raw = pipeline.model.predict_widths(calib_feat);
  pipeline.scale = tl_calibrate(raw, calib_delta, alpha);
  return pipeline;
}

namespace io {

json um_to_json(const UncertaintyModel& um) {
  json members = json::array();
  for (const auto& member : um.members) members.push_back(learn::io::gbt_to_json(member));
  return json{{"format", "perfband-um/1"},
              {"schema_version", um.schema_version},
              {"feature_names", um.feature_names},
              {"predictor_kind", um.predictor_kind},
              {"alpha", um.alpha},
              {"members", members}};
}

UncertaintyModel um_from_json(const json& j) {
  if (!j.contains("format") || j.at("format").get<std::string>() != "perfband-um/1")
    throw std::invalid_argument("um_from_json: unexpected model format");
  UncertaintyModel um;
  um.schema_version = j.at("schema_version").get<std::string>();
  um.feature_names = j.at("feature_names").get<std::vector<std::string>>();
  um.predictor_kind = j.at("predictor_kind").get<std::string>();
  um.alpha = j.at("alpha").get<double>();
  for (const auto& member : j.at("members")) um.members.push_back(learn::io::gbt_from_json(member));
  return um;
}

}  // namespace io

}  // namespace perfband::uncertainty
