#include "perfband/learn/serialize.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace perfband::learn::io {

namespace {

json num_to_json(double v) {
  if (std::isnan(v)) return nullptr;
  return v;
}

double num_from_json(const json& j) {
  if (j.is_null()) return std::numeric_limits<double>::quiet_NaN();
  return j.get<double>();
}

json vec_to_json(const std::vector<double>& v) {
  json out = json::array();
  for (double x : v) out.push_back(num_to_json(x));
  return out;
}

std::vector<double> vec_from_json(const json& j) {
  std::vector<double> out;
  out.reserve(j.size());
  for (const auto& el : j) out.push_back(num_from_json(el));
  return out;
}

std::string max_features_to_string(MaxFeatures mf) {
  switch (mf) {
    case MaxFeatures::all: return "all";
    case MaxFeatures::sqrt_of_dim: return "sqrt";
    case MaxFeatures::log2_of_dim: return "log2";
  }
  throw std::logic_error("max_features_to_string: unknown value");
}

json tree_params_to_json(const TreeParams& p) {
  return {{"max_depth", p.max_depth},
          {"max_leaf_nodes", p.max_leaf_nodes},
          {"min_samples_split", p.min_samples_split},
          {"min_samples_leaf", p.min_samples_leaf},
          {"max_features", max_features_to_string(p.max_features)}};
}

TreeParams tree_params_from_json(const json& j) {
  TreeParams p;
  p.max_depth = j.at("max_depth").get<int>();
  p.max_leaf_nodes = j.at("max_leaf_nodes").get<int>();
  p.min_samples_split = j.at("min_samples_split").get<double>();
  p.min_samples_leaf = j.at("min_samples_leaf").get<double>();
  p.max_features = max_features_from(j.at("max_features").get<std::string>());
  return p;
}

void check_format(const json& j) {
  if (!j.is_object() || j.value("format", "") != kModelFormat)
    throw std::runtime_error("model JSON: missing or unsupported format tag");
}

}  // namespace

json matrix_to_json(const Matrix& m) {
  return {{"rows", m.rows}, {"cols", m.cols}, {"data", vec_to_json(m.data)}};
}

Matrix matrix_from_json(const json& j) {
  Matrix m(j.at("rows").get<std::size_t>(), j.at("cols").get<std::size_t>());
  m.data = vec_from_json(j.at("data"));
  if (m.data.size() != m.rows * m.cols)
    throw std::runtime_error("matrix JSON: data length does not match shape");
  return m;
}

// Tree nodes use short keys; serialized ensembles dominate scenario-library
// size.
json tree_to_json(const DecisionTree& tree) {
  json nodes = json::array();
  for (const TreeNode& n : tree.nodes) {
    nodes.push_back({{"f", n.feature},
                     {"t", num_to_json(n.threshold)},
                     {"l", n.left},
                     {"r", n.right},
                     {"d", n.depth},
                     {"n", n.count},
                     {"w", num_to_json(n.weight)},
                     {"v", vec_to_json(n.value)}});
  }
  return {{"nodes", nodes}, {"importance", vec_to_json(tree.importance)}};
}

DecisionTree tree_from_json(const json& j) {
  DecisionTree tree;
  for (const auto& el : j.at("nodes")) {
    TreeNode n;
    n.feature = el.at("f").get<int>();
    n.threshold = num_from_json(el.at("t"));
    n.left = el.at("l").get<int>();
    n.right = el.at("r").get<int>();
    n.depth = el.at("d").get<int>();
    n.count = el.at("n").get<std::int64_t>();
    n.weight = num_from_json(el.at("w"));
    n.value = vec_from_json(el.at("v"));
    tree.nodes.push_back(std::move(n));
  }
  tree.importance = vec_from_json(j.at("importance"));
  return tree;
}

json forest_to_json(const RandomForestModel& model) {
  json trees = json::array();
  for (const DecisionTree& t : model.trees) trees.push_back(tree_to_json(t));
  return {{"params",
           {{"n_estimators", model.params.n_estimators},
            {"tree", tree_params_to_json(model.params.tree)},
            {"bootstrap", model.params.bootstrap}}},
          {"n_classes", model.n_classes},
          {"trees", trees}};
}

RandomForestModel forest_from_json(const json& j) {
  RandomForestModel model;
  const json& p = j.at("params");
  model.params.n_estimators = p.at("n_estimators").get<int>();
  model.params.tree = tree_params_from_json(p.at("tree"));
  model.params.bootstrap = p.at("bootstrap").get<bool>();
  model.n_classes = j.at("n_classes").get<int>();
  for (const auto& el : j.at("trees")) model.trees.push_back(tree_from_json(el));
  return model;
}

namespace {

std::string gbt_loss_to_string(GbtLoss loss) {
  switch (loss) {
    case GbtLoss::logloss: return "logloss";
    case GbtLoss::squared: return "squared";
    case GbtLoss::quantile: return "quantile";
  }
  throw std::logic_error("gbt_loss_to_string: unknown value");
}

GbtLoss gbt_loss_from_string(const std::string& s) {
  if (s == "logloss") return GbtLoss::logloss;
  if (s == "squared") return GbtLoss::squared;
  if (s == "quantile") return GbtLoss::quantile;
  throw std::runtime_error("gbt loss JSON: unknown value '" + s + "'");
}

}  // namespace

json gbt_to_json(const GbtModel& model) {
  const GbtParams& p = model.params;
  json stages = json::array();
  for (const GbtStage& s : model.stages) {
    json trees = json::array();
    for (const DecisionTree& t : s.trees) trees.push_back(tree_to_json(t));
    stages.push_back({{"w", num_to_json(s.weight)}, {"trees", trees}});
  }
  return {{"params",
           {{"loss", gbt_loss_to_string(p.loss)},
            {"tau", p.tau},
            {"n_estimators", p.n_estimators},
            {"learning_rate", p.learning_rate},
            {"subsample", p.subsample},
            {"l2_leaf_reg", p.l2_leaf_reg},
            {"tree", tree_params_to_json(p.tree)},
            {"dropout_rate", p.dropout_rate},
            {"normalize", p.normalize == DartNormalize::forest ? "forest" : "tree"},
            {"sample", p.sample == DartSample::weighted ? "weighted" : "normal"},
            {"early_stopping_patience", p.early_stopping_patience},
            {"validation_fraction", p.validation_fraction}}},
          {"n_classes", model.n_classes},
          {"base_score", vec_to_json(model.base_score)},
          {"stages", stages}};
}

GbtModel gbt_from_json(const json& j) {
  GbtModel model;
  const json& p = j.at("params");
  model.params.loss = gbt_loss_from_string(p.at("loss").get<std::string>());
  model.params.tau = p.at("tau").get<double>();
  model.params.n_estimators = p.at("n_estimators").get<int>();
  model.params.learning_rate = p.at("learning_rate").get<double>();
  model.params.subsample = p.at("subsample").get<double>();
  model.params.l2_leaf_reg = p.at("l2_leaf_reg").get<double>();
  model.params.tree = tree_params_from_json(p.at("tree"));
  model.params.dropout_rate = p.at("dropout_rate").get<double>();
  model.params.normalize = p.at("normalize").get<std::string>() == "forest"
                               ? DartNormalize::forest
                               : DartNormalize::tree;
  model.params.sample = p.at("sample").get<std::string>() == "weighted" ? DartSample::weighted
                                                                        : DartSample::normal;
  model.params.early_stopping_patience = p.at("early_stopping_patience").get<int>();
  model.params.validation_fraction = p.at("validation_fraction").get<double>();
  model.n_classes = j.at("n_classes").get<int>();
  model.base_score = vec_from_json(j.at("base_score"));
  for (const auto& el : j.at("stages")) {
    GbtStage s;
    s.weight = num_from_json(el.at("w"));
    for (const auto& t : el.at("trees")) s.trees.push_back(tree_from_json(t));
    model.stages.push_back(std::move(s));
  }
  return model;
}

json logistic_to_json(const LogisticModel& model) {
  const LogisticParams& p = model.params;
  return {{"params",
           {{"penalty", p.penalty == Penalty::l1 ? "l1" : "l2"},
            {"C", p.C},
            {"tol", p.tol},
            {"max_iter", p.max_iter}}},
          {"n_classes", model.n_classes},
          {"weights", matrix_to_json(model.weights)}};
}

LogisticModel logistic_from_json(const json& j) {
  LogisticModel model;
  const json& p = j.at("params");
  model.params.penalty = p.at("penalty").get<std::string>() == "l1" ? Penalty::l1 : Penalty::l2;
  model.params.C = p.at("C").get<double>();
  model.params.tol = p.at("tol").get<double>();
  model.params.max_iter = p.at("max_iter").get<int>();
  model.n_classes = j.at("n_classes").get<int>();
  model.weights = matrix_from_json(j.at("weights"));
  return model;
}

json classifier_to_json(const ClassifierModel& model) {
  json body;
  switch (model.kind) {
    case ClassifierKind::logistic: body = logistic_to_json(model.logistic); break;
    case ClassifierKind::random_forest: body = forest_to_json(model.forest); break;
    case ClassifierKind::gbt: body = gbt_to_json(model.boosted); break;
  }
  return {{"format", kModelFormat}, {"kind", to_string(model.kind)}, {"model", body}};
}

ClassifierModel classifier_from_json(const json& j) {
  check_format(j);
  ClassifierModel model;
  model.kind = classifier_kind_from(j.at("kind").get<std::string>());
  const json& body = j.at("model");
  switch (model.kind) {
    case ClassifierKind::logistic: model.logistic = logistic_from_json(body); break;
    case ClassifierKind::random_forest: model.forest = forest_from_json(body); break;
    case ClassifierKind::gbt: model.boosted = gbt_from_json(body); break;
  }
  return model;
}

json isotonic_to_json(const IsotonicMap& map) {
  return {{"x", vec_to_json(map.x)}, {"y", vec_to_json(map.y)}, {"identity", map.identity}};
}

IsotonicMap isotonic_from_json(const json& j) {
  IsotonicMap map;
  map.x = vec_from_json(j.at("x"));
  map.y = vec_from_json(j.at("y"));
  map.identity = j.at("identity").get<bool>();
  return map;
}

json pca_to_json(const PcaModel& model) {
  return {{"center", vec_to_json(model.center)},
          {"components", matrix_to_json(model.components)},
          {"eigenvalues", vec_to_json(model.eigenvalues)}};
}

PcaModel pca_from_json(const json& j) {
  PcaModel model;
  model.center = vec_from_json(j.at("center"));
  model.components = matrix_from_json(j.at("components"));
  model.eigenvalues = vec_from_json(j.at("eigenvalues"));
  return model;
}

json kde_to_json(const ClassKde& kde) {
  json points = json::array();
  for (const Matrix& m : kde.class_points) points.push_back(matrix_to_json(m));
  return {{"bandwidth", kde.bandwidth}, {"class_points", points}};
}

ClassKde kde_from_json(const json& j) {
  ClassKde kde;
  kde.bandwidth = j.at("bandwidth").get<double>();
  for (const auto& el : j.at("class_points")) kde.class_points.push_back(matrix_from_json(el));
  return kde;
}

json knn_to_json(const KnnOutlierScorer& scorer) {
  return {{"k", scorer.k}, {"reference", matrix_to_json(scorer.reference)}};
}

KnnOutlierScorer knn_from_json(const json& j) {
  KnnOutlierScorer scorer;
  scorer.k = j.at("k").get<int>();
  scorer.reference = matrix_from_json(j.at("reference"));
  return scorer;
}

namespace {

std::string encode_mode_to_string(tabular::EncodeMode mode) {
  switch (mode) {
    case tabular::EncodeMode::tree: return "tree";
    case tabular::EncodeMode::linear: return "linear";
    case tabular::EncodeMode::distance: return "distance";
  }
  throw std::logic_error("encode_mode_to_string: unknown value");
}

tabular::EncodeMode encode_mode_from_string(const std::string& s) {
  if (s == "tree") return tabular::EncodeMode::tree;
  if (s == "linear") return tabular::EncodeMode::linear;
  if (s == "distance") return tabular::EncodeMode::distance;
  throw std::runtime_error("encoder JSON: unknown mode '" + s + "'");
}

}  // namespace

json encoder_to_json(const tabular::Encoder& encoder) {
  json cols = json::array();
  for (const tabular::ColumnMeta& c : encoder.columns) {
    cols.push_back({{"name", c.name},
                    {"kind", c.kind == tabular::ColumnKind::numeric ? "numeric" : "categorical"},
                    {"categories", c.categories}});
  }
  return {{"mode", encode_mode_to_string(encoder.mode)},
          {"medians", vec_to_json(encoder.medians)},
          {"means", vec_to_json(encoder.means)},
          {"stds", vec_to_json(encoder.stds)},
          {"columns", cols}};
}

tabular::Encoder encoder_from_json(const json& j) {
  tabular::Encoder encoder;
  encoder.mode = encode_mode_from_string(j.at("mode").get<std::string>());
  encoder.medians = vec_from_json(j.at("medians"));
  encoder.means = vec_from_json(j.at("means"));
  encoder.stds = vec_from_json(j.at("stds"));
  for (const auto& el : j.at("columns")) {
    tabular::ColumnMeta c;
    c.name = el.at("name").get<std::string>();
    c.kind = el.at("kind").get<std::string>() == "numeric" ? tabular::ColumnKind::numeric
                                                           : tabular::ColumnKind::categorical;
    c.categories = el.at("categories").get<std::vector<std::string>>();
    encoder.columns.push_back(std::move(c));
  }
  return encoder;
}

}  // namespace perfband::learn::io
