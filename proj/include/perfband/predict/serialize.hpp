#pragma once

#include "perfband/learn/serialize.hpp"
#include "perfband/predict/predictor.hpp"
#include "perfband/predict/transform.hpp"

namespace perfband::predict::io {

using json = nlohmann::json;

json tabular_classifier_to_json(const tabular::TabularClassifier& model);
tabular::TabularClassifier tabular_classifier_from_json(const json& j);

json transform_to_json(const MetaFeatureTransform& transform);
MetaFeatureTransform transform_from_json(const json& j);

json predictor_to_json(const PerformancePredictor& predictor);
PerformancePredictor predictor_from_json(const json& j);

}  // namespace perfband::predict::io
