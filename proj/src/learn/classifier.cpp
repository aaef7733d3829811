#include "perfband/learn/classifier.hpp"

#include <stdexcept>

namespace perfband::learn {

std::string to_string(ClassifierKind kind) {
  switch (kind) {
    case ClassifierKind::logistic: return "logistic";
    case ClassifierKind::random_forest: return "random_forest";
    case ClassifierKind::gbt: return "gbt";
  }
  throw std::logic_error("to_string: unknown classifier kind");
}

ClassifierKind classifier_kind_from(const std::string& name) {
  if (name == "logistic") return ClassifierKind::logistic;
  if (name == "random_forest") return ClassifierKind::random_forest;
  if (name == "gbt") return ClassifierKind::gbt;
  throw std::invalid_argument("unknown classifier kind '" + name + "'");
}

Matrix ClassifierModel::predict_proba(const Matrix& X) const {
  switch (kind) {
    case ClassifierKind::logistic: return logistic.predict_proba(X);
    case ClassifierKind::random_forest: return forest.predict_proba(X);
    case ClassifierKind::gbt: return boosted.predict_proba(X);
  }
  throw std::logic_error("predict_proba: unknown classifier kind");
}

std::vector<int> ClassifierModel::predict(const Matrix& X) const {
  return argmax_rows(predict_proba(X));
}

int ClassifierModel::n_classes() const {
  switch (kind) {
    case ClassifierKind::logistic: return logistic.n_classes;
    case ClassifierKind::random_forest: return forest.n_classes;
    case ClassifierKind::gbt: return boosted.n_classes;
  }
  throw std::logic_error("n_classes: unknown classifier kind");
}

MaxFeatures max_features_from(const std::string& label) {
  if (label == "all") return MaxFeatures::all;
  if (label == "sqrt") return MaxFeatures::sqrt_of_dim;
  if (label == "log2") return MaxFeatures::log2_of_dim;
  throw std::invalid_argument("unknown max_features '" + label + "'");
}

namespace {

// max_depth may be numeric or the label "none" (unlimited).
int depth_from(const ParamSet& params, int fallback) {
  auto it = params.find("max_depth");
  if (it == params.end()) return fallback;
  if (const double* v = std::get_if<double>(&it->second)) return static_cast<int>(*v);
  if (std::get<std::string>(it->second) == "none") return 0;
  throw std::invalid_argument("max_depth: expected a number or 'none'");
}

}  // namespace

LogisticParams logistic_params_from(const ParamSet& params) {
  LogisticParams out;
  out.C = param_num(params, "C", out.C);
  std::string penalty = param_str(params, "penalty", "l2");
  if (penalty == "l1") {
    out.penalty = Penalty::l1;
  } else if (penalty == "l2") {
    out.penalty = Penalty::l2;
  } else {
    throw std::invalid_argument("unknown penalty '" + penalty + "'");
  }
  return out;
}

RfParams rf_params_from(const ParamSet& params) {
  RfParams out;
  out.n_estimators = static_cast<int>(param_num(params, "n_estimators", out.n_estimators));
  out.tree.max_depth = depth_from(params, 0);
  out.tree.min_samples_split =
      param_num(params, "min_samples_split", out.tree.min_samples_split);
  out.tree.min_samples_leaf = param_num(params, "min_samples_leaf", out.tree.min_samples_leaf);
  out.tree.max_features = max_features_from(param_str(params, "max_features", "sqrt"));
  return out;
}

GbtParams gbt_params_from(const ParamSet& params) {
  GbtParams out;
  out.learning_rate = param_num(params, "learning_rate", out.learning_rate);
  out.n_estimators = static_cast<int>(param_num(params, "n_estimators", out.n_estimators));
  out.subsample = param_num(params, "subsample", out.subsample);
  out.l2_leaf_reg = param_num(params, "reg_lambda", out.l2_leaf_reg);
  out.tree.max_leaf_nodes =
      static_cast<int>(param_num(params, "max_leaf_nodes", out.tree.max_leaf_nodes));
  // Leaf-count-limited trees grow best-first without a depth cap unless one
  // is given explicitly.
  out.tree.max_depth = depth_from(params, out.tree.max_leaf_nodes > 0 ? 0 : 3);
  out.tree.min_samples_split =
      param_num(params, "min_samples_split", out.tree.min_samples_split);
  out.tree.min_samples_leaf = param_num(params, "min_samples_leaf", out.tree.min_samples_leaf);
  out.tree.max_features = max_features_from(param_str(params, "max_features", "all"));
  std::string sample = param_str(params, "sample_type", "normal");
  out.sample = sample == "weighted" ? DartSample::weighted : DartSample::normal;
  std::string normalize = param_str(params, "normalize_type", "tree");
  out.normalize = normalize == "forest" ? DartNormalize::forest : DartNormalize::tree;
  return out;
}

ClassifierModel fit_classifier(ClassifierKind kind, const Matrix& X, const std::vector<int>& y,
                               int n_classes, const ParamSet& params, Rng& rng) {
  ClassifierModel model;
  model.kind = kind;
  switch (kind) {
    case ClassifierKind::logistic:
      model.logistic.params = logistic_params_from(params);
      model.logistic.fit(X, y, n_classes, rng.child(0).seed());
      break;
    case ClassifierKind::random_forest:
      model.forest.params = rf_params_from(params);
      model.forest.fit(X, y, {}, n_classes, rng.child(0).seed());
      break;
    case ClassifierKind::gbt: {
      model.boosted.params = gbt_params_from(params);
      model.boosted.params.loss = GbtLoss::logloss;
      model.boosted.fit_classification(X, y, n_classes, rng.child(0).seed());
      break;
    }
  }
  return model;
}

ClassifierModel fit_classifier_hpo(ClassifierKind kind, const Matrix& X,
                                   const std::vector<int>& y, int n_classes,
                                   const ParamSpace& space, int n_iter, int n_folds, Rng& rng,
                                   ParamSet* best_out) {
  HpoFitFn fit = [kind, n_classes](const ParamSet& candidate, const Matrix& X_tr,
                                   const std::vector<int>& y_tr, const Matrix& X_val,
                                   Rng& fit_rng) {
    ClassifierModel m = fit_classifier(kind, X_tr, y_tr, n_classes, candidate, fit_rng);
    return m.predict_proba(X_val);
  };
  Rng search_rng = rng.child(0xC5);
  HpoResult result = random_search_hpo(space, fit, X, y, n_iter, n_folds, search_rng);
  if (best_out != nullptr) *best_out = result.best;
  Rng final_rng = rng.child(0xF1);
  return fit_classifier(kind, X, y, n_classes, result.best, final_rng);
}

ParamSpace gbm_meta_space() {
  return {
      {"learning_rate", ParamRange::values({0.1, 0.15, 0.2})},
      {"min_samples_split", ParamRange::linspace(0.005, 0.01, 5)},
      {"min_samples_leaf", ParamRange::linspace(0.0005, 0.001, 5)},
      {"max_leaf_nodes", ParamRange::values({3, 5, 7, 9, 11})},
      {"max_features", ParamRange::labels({"log2", "sqrt"})},
      {"subsample", ParamRange::values({0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9})},
      {"n_estimators", ParamRange::values({100, 150, 200, 250, 300, 350, 400})},
  };
}

ParamSpace logistic_meta_space() {
  return {
      {"C", ParamRange::values({0.001, 0.01, 0.1, 1, 10, 100, 1000})},
      {"penalty", ParamRange::labels({"l1", "l2"})},
  };
}

ParamSpace rf_meta_space() {
  ParamRange depth;
  depth.choices = {2.0, 3.0, 4.0, 6.0, std::string("none")};
  return {
      {"n_estimators", ParamRange::integers(5, 100)},
      {"max_depth", depth},
      {"min_samples_split", ParamRange::values({2, 3, 4, 5, 6})},
      {"max_features", ParamRange::labels({"log2", "sqrt"})},
  };
}

ParamSpace dropout_meta_space() {
  return {
      {"max_depth", ParamRange::values({2, 4, 6})},
      {"learning_rate", ParamRange::values({0.05, 0.1, 0.2, 0.3, 0.4, 0.5})},
      {"n_estimators", ParamRange::values({50, 100, 150, 200})},
      {"reg_lambda", ParamRange::logspace(-1.0, 1.0, 20)},
      {"sample_type", ParamRange::labels({"normal", "weighted"})},
      {"normalize_type", ParamRange::labels({"tree", "forest"})},
  };
}

}  // namespace perfband::learn
