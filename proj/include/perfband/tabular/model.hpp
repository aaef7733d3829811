#pragma once

#include <vector>

#include "perfband/common/rng.hpp"
#include "perfband/learn/classifier.hpp"
#include "perfband/tabular/dataset.hpp"
#include "perfband/tabular/encoding.hpp"

namespace perfband::tabular {

// A classifier bundled with the feature encoding it was fitted under, so it
// can be applied to raw dataset rows. Logistic models get the standardized
// linear encoding; tree models get the median-imputed integer-code encoding.
struct TabularClassifier {
  Encoder encoder;
  learn::ClassifierModel model;

  Matrix predict_proba(const Dataset& data, const std::vector<int>& rows) const;
  std::vector<int> predict(const Dataset& data, const std::vector<int>& rows) const;

  bool operator==(const TabularClassifier&) const = default;
};

EncodeMode encode_mode_for(learn::ClassifierKind kind);

TabularClassifier fit_tabular_classifier(learn::ClassifierKind kind, const Dataset& data,
                                         const std::vector<int>& train_rows,
                                         const learn::ParamSet& params, Rng& rng);

// Fraction of `rows` where the predicted class matches the stored label.
double classifier_accuracy(const TabularClassifier& model, const Dataset& data,
                           const std::vector<int>& rows);

TabularClassifier fit_tabular_classifier_hpo(learn::ClassifierKind kind, const Dataset& data,
                                             const std::vector<int>& train_rows,
                                             const learn::ParamSpace& space, int n_iter,
                                             int n_folds, Rng& rng,
                                             learn::ParamSet* best_out = nullptr);

}  // namespace perfband::tabular
