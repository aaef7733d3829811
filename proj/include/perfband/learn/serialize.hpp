#pragma once

#include <json.hpp>

#include "perfband/common/matrix.hpp"
#include "perfband/learn/classifier.hpp"
#include "perfband/learn/density.hpp"
#include "perfband/learn/isotonic.hpp"
#include "perfband/learn/pca.hpp"
#include "perfband/tabular/encoding.hpp"

// JSON persistence for fitted models. One format tag covers the whole family;
// every reader validates it, so stored scenario libraries fail loudly when
// the layout changes. Round-trips are bit-exact: doubles are written with
// shortest round-trip formatting and NaN maps to null.
namespace perfband::learn::io {

inline constexpr const char* kModelFormat = "perfband-model/1";

using json = nlohmann::json;

json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const json& j);

json tree_to_json(const DecisionTree& tree);
DecisionTree tree_from_json(const json& j);

json forest_to_json(const RandomForestModel& model);
RandomForestModel forest_from_json(const json& j);

json gbt_to_json(const GbtModel& model);
GbtModel gbt_from_json(const json& j);

json logistic_to_json(const LogisticModel& model);
LogisticModel logistic_from_json(const json& j);

// Tagged wrapper with the format marker; the entry point used by scenario
// persistence.
json classifier_to_json(const ClassifierModel& model);
ClassifierModel classifier_from_json(const json& j);

json isotonic_to_json(const IsotonicMap& map);
IsotonicMap isotonic_from_json(const json& j);

json pca_to_json(const PcaModel& model);
PcaModel pca_from_json(const json& j);

json kde_to_json(const ClassKde& kde);
ClassKde kde_from_json(const json& j);

json knn_to_json(const KnnOutlierScorer& scorer);
KnnOutlierScorer knn_from_json(const json& j);

json encoder_to_json(const tabular::Encoder& encoder);
tabular::Encoder encoder_from_json(const json& j);

}  // namespace perfband::learn::io
