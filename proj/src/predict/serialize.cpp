#include "perfband/predict/serialize.hpp"

#include <stdexcept>

namespace perfband::predict::io {

namespace {

using learn::io::classifier_from_json;
using learn::io::classifier_to_json;
using learn::io::encoder_from_json;
using learn::io::encoder_to_json;

void check_format(const json& j, const char* expected) {
  if (!j.is_object() || j.value("format", "") != expected)
    throw std::runtime_error(std::string("JSON: missing or unsupported format tag, expected ") +
                             expected);
}

}  // namespace

json tabular_classifier_to_json(const tabular::TabularClassifier& model) {
  return {{"format", "perfband-model/1"},
          {"encoder", encoder_to_json(model.encoder)},
          {"classifier", classifier_to_json(model.model)}};
}

tabular::TabularClassifier tabular_classifier_from_json(const json& j) {
  check_format(j, "perfband-model/1");
  tabular::TabularClassifier out;
  out.encoder = encoder_from_json(j.at("encoder"));
  out.model = classifier_from_json(j.at("classifier"));
  return out;
}

json transform_to_json(const MetaFeatureTransform& transform) {
  return {{"format", "perfband-transform/1"},
          {"proxy_logistic", tabular_classifier_to_json(transform.proxy_logistic)},
          {"proxy_forest", tabular_classifier_to_json(transform.proxy_forest)},
          {"proxy_gbm", tabular_classifier_to_json(transform.proxy_gbm)},
          {"distance_encoder", encoder_to_json(transform.distance_encoder)},
          {"outlier", learn::io::knn_to_json(transform.outlier)},
          {"pca", learn::io::pca_to_json(transform.pca)},
          {"kde", learn::io::kde_to_json(transform.kde)},
          {"test_class_freq", transform.test_class_freq}};
}

MetaFeatureTransform transform_from_json(const json& j) {
  check_format(j, "perfband-transform/1");
  MetaFeatureTransform out;
  out.proxy_logistic = tabular_classifier_from_json(j.at("proxy_logistic"));
  out.proxy_forest = tabular_classifier_from_json(j.at("proxy_forest"));
  out.proxy_gbm = tabular_classifier_from_json(j.at("proxy_gbm"));
  out.distance_encoder = encoder_from_json(j.at("distance_encoder"));
  out.outlier = learn::io::knn_from_json(j.at("outlier"));
  out.pca = learn::io::pca_from_json(j.at("pca"));
  out.kde = learn::io::kde_from_json(j.at("kde"));
  out.test_class_freq = j.at("test_class_freq").get<std::vector<double>>();
  return out;
}

json predictor_to_json(const PerformancePredictor& predictor) {
  json members = json::array();
  for (const auto& m : predictor.members) members.push_back(classifier_to_json(m));
  return {{"format", "perfband-predictor/1"},
          {"kind", to_string(predictor.kind)},
          {"bins", {{"accuracy", predictor.bins.accuracy}, {"count", predictor.bins.count}}},
          {"members", members},
          {"scaler", {{"mean", predictor.scaler.mean}, {"std", predictor.scaler.std}}},
          {"dropout_model", learn::io::gbt_to_json(predictor.dropout_model)},
          {"calibration", learn::io::isotonic_to_json(predictor.calibration)},
          {"constant_fallback", predictor.constant_fallback},
          {"constant_confidence", predictor.constant_confidence}};
}

PerformancePredictor predictor_from_json(const json& j) {
  check_format(j, "perfband-predictor/1");
  PerformancePredictor out;
  out.kind = predictor_kind_from(j.at("kind").get<std::string>());
  out.bins.accuracy = j.at("bins").at("accuracy").get<std::vector<double>>();
  out.bins.count = j.at("bins").at("count").get<std::vector<std::int64_t>>();
  for (const auto& m : j.at("members")) out.members.push_back(classifier_from_json(m));
  out.scaler.mean = j.at("scaler").at("mean").get<std::vector<double>>();
  out.scaler.std = j.at("scaler").at("std").get<std::vector<double>>();
  out.dropout_model = learn::io::gbt_from_json(j.at("dropout_model"));
  out.calibration = learn::io::isotonic_from_json(j.at("calibration"));
  out.constant_fallback = j.at("constant_fallback").get<bool>();
  out.constant_confidence = j.at("constant_confidence").get<double>();
  return out;
}

}  // namespace perfband::predict::io
