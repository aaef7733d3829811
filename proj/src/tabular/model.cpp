#include "perfband/tabular/model.hpp"

namespace perfband::tabular {

Matrix TabularClassifier::predict_proba(const Dataset& data, const std::vector<int>& rows) const {
  return model.predict_proba(encoder.transform(data, rows));
}

std::vector<int> TabularClassifier::predict(const Dataset& data,
                                            const std::vector<int>& rows) const {
  return learn::argmax_rows(predict_proba(data, rows));
}

EncodeMode encode_mode_for(learn::ClassifierKind kind) {
  return kind == learn::ClassifierKind::logistic ? EncodeMode::linear : EncodeMode::tree;
}

double classifier_accuracy(const TabularClassifier& model, const Dataset& data,
                           const std::vector<int>& rows) {
  if (rows.empty()) return 0.0;
  std::vector<int> pred = model.predict(data, rows);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (pred[i] == data.labels[static_cast<std::size_t>(rows[i])]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(rows.size());
}

TabularClassifier fit_tabular_classifier(learn::ClassifierKind kind, const Dataset& data,
                                         const std::vector<int>& train_rows,
                                         const learn::ParamSet& params, Rng& rng) {
  TabularClassifier out;
  out.encoder = Encoder::fit(data, train_rows, encode_mode_for(kind));
  Matrix X = out.encoder.transform(data, train_rows);
  std::vector<int> y;
  y.reserve(train_rows.size());
  for (int r : train_rows) y.push_back(data.labels[static_cast<std::size_t>(r)]);
  out.model = learn::fit_classifier(kind, X, y, data.n_classes(), params, rng);
  return out;
}

TabularClassifier fit_tabular_classifier_hpo(learn::ClassifierKind kind, const Dataset& data,
                                             const std::vector<int>& train_rows,
                                             const learn::ParamSpace& space, int n_iter,
                                             int n_folds, Rng& rng, learn::ParamSet* best_out) {
  TabularClassifier out;
  out.encoder = Encoder::fit(data, train_rows, encode_mode_for(kind));
  Matrix X = out.encoder.transform(data, train_rows);
  std::vector<int> y;
  y.reserve(train_rows.size());
  for (int r : train_rows) y.push_back(data.labels[static_cast<std::size_t>(r)]);
  out.model = learn::fit_classifier_hpo(kind, X, y, data.n_classes(), space, n_iter, n_folds,
                                        rng, best_out);
  return out;
}

}  // namespace perfband::tabular
