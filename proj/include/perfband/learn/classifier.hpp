#pragma once

#include <string>
#include <vector>

#include "perfband/common/matrix.hpp"
#include "perfband/common/rng.hpp"
#include "perfband/learn/gbt.hpp"
#include "perfband/learn/hpo.hpp"
#include "perfband/learn/logistic.hpp"
#include "perfband/learn/params.hpp"
#include "perfband/learn/random_forest.hpp"

namespace perfband::learn {

enum class ClassifierKind { logistic, random_forest, gbt };

std::string to_string(ClassifierKind kind);
ClassifierKind classifier_kind_from(const std::string& name);

// Tagged union over the three classifier families. Only the member matching
// `kind` is populated. Logistic members expect standardized inputs; tree
// members take features as-is (the caller's Encoder chooses the mode).
struct ClassifierModel {
  ClassifierKind kind = ClassifierKind::logistic;
  LogisticModel logistic;
  RandomForestModel forest;
  GbtModel boosted;

  Matrix predict_proba(const Matrix& X) const;
  std::vector<int> predict(const Matrix& X) const;
  int n_classes() const;

  bool operator==(const ClassifierModel&) const = default;
};

// Hyperparameter-map decoding. Unknown keys are ignored; missing keys keep
// the family defaults.
LogisticParams logistic_params_from(const ParamSet& params);
RfParams rf_params_from(const ParamSet& params);
GbtParams gbt_params_from(const ParamSet& params);
MaxFeatures max_features_from(const std::string& label);

ClassifierModel fit_classifier(ClassifierKind kind, const Matrix& X, const std::vector<int>& y,
                               int n_classes, const ParamSet& params, Rng& rng);

// Random-search HPO over `space`, then a final fit of the winning
// configuration on all rows. `best_out`, when given, receives the winner.
ClassifierModel fit_classifier_hpo(ClassifierKind kind, const Matrix& X,
                                   const std::vector<int>& y, int n_classes,
                                   const ParamSpace& space, int n_iter, int n_folds, Rng& rng,
                                   ParamSet* best_out = nullptr);

// Search spaces for the meta-model families and the tree-dropout regressor.
ParamSpace gbm_meta_space();
ParamSpace logistic_meta_space();
ParamSpace rf_meta_space();
ParamSpace dropout_meta_space();

}  // namespace perfband::learn
