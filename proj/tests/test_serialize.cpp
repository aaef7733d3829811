#include <doctest.h>

#include <vector>

#include "perfband/common/rng.hpp"
#include "perfband/learn/serialize.hpp"

using namespace perfband;
using namespace perfband::learn;
using namespace perfband::learn::io;

namespace {

// Every round-trip goes through a dumped string so the test covers the
// number formatting actually written to disk.
json reparse(const json& j) { return json::parse(j.dump()); }

struct Blobs {
  Matrix X;
  std::vector<int> y;
};

Blobs make_blobs(int per_class, std::uint64_t seed) {
  Rng rng(seed);
  Blobs out;
  out.X = Matrix(static_cast<std::size_t>(2 * per_class), 3);
  for (int i = 0; i < 2 * per_class; ++i) {
    int cls = i % 2;
    out.X.at(i, 0) = cls * 2.0 + rng.normal();
    out.X.at(i, 1) = rng.normal();
    out.X.at(i, 2) = rng.uniform(-0.3, 11.7);
    out.y.push_back(cls);
  }
  return out;
}

}  // namespace

TEST_CASE("matrix json: bit-exact including awkward doubles") {
  Matrix m(2, 2);
  m.at(0, 0) = 0.1 + 0.2;
  m.at(0, 1) = -1.0 / 3.0;
  m.at(1, 0) = 1e-308;
  m.at(1, 1) = std::numeric_limits<double>::quiet_NaN();
  Matrix back = matrix_from_json(reparse(matrix_to_json(m)));
  CHECK(back.rows == 2);
  CHECK(back.at(0, 0) == m.at(0, 0));
  CHECK(back.at(0, 1) == m.at(0, 1));
  CHECK(back.at(1, 0) == m.at(1, 0));
  CHECK(std::isnan(back.at(1, 1)));
}

TEST_CASE("forest json: round-trips and predicts identically") {
  Blobs data = make_blobs(40, 3);
  RandomForestModel model;
  model.params.n_estimators = 12;
  model.fit(data.X, data.y, {}, 2, 17);
  RandomForestModel back = forest_from_json(reparse(forest_to_json(model)));
  CHECK(back == model);
  CHECK(back.predict_proba(data.X) == model.predict_proba(data.X));
}

TEST_CASE("gbt json: round-trips regression with dropout settings") {
  Rng rng(5);
  Matrix X(80, 2);
  std::vector<double> y(80);
  for (int i = 0; i < 80; ++i) {
    X.at(i, 0) = rng.uniform();
    X.at(i, 1) = rng.normal();
    y[i] = X.at(i, 0) * 2.0 + 0.1 * rng.normal();
  }
  GbtModel model;
  model.params.loss = GbtLoss::quantile;
  model.params.tau = 0.75;
  model.params.n_estimators = 15;
  model.params.dropout_rate = 0.25;
  model.params.sample = DartSample::weighted;
  model.params.normalize = DartNormalize::forest;
  model.fit(X, y, 23);
  GbtModel back = gbt_from_json(reparse(gbt_to_json(model)));
  CHECK(back == model);
  CHECK(back.predict(X) == model.predict(X));
}

TEST_CASE("gbt json: round-trips a multiclass model") {
  Rng rng(7);
  Matrix X(60, 2);
  std::vector<int> y;
  for (int i = 0; i < 60; ++i) {
    int cls = i % 3;
    X.at(i, 0) = cls + 0.2 * rng.normal();
    X.at(i, 1) = rng.normal();
    y.push_back(cls);
  }
  GbtModel model;
  model.params.loss = GbtLoss::logloss;
  model.params.n_estimators = 8;
  model.fit_classification(X, y, 3, 29);
  GbtModel back = gbt_from_json(reparse(gbt_to_json(model)));
  CHECK(back == model);
  CHECK(back.predict_proba(X) == model.predict_proba(X));
}

TEST_CASE("logistic json: round-trips weights exactly") {
  Blobs data = make_blobs(30, 11);
  LogisticModel model;
  model.params.penalty = Penalty::l1;
  model.params.C = 0.7;
  model.fit(data.X, data.y, 2, 0);
  LogisticModel back = logistic_from_json(reparse(logistic_to_json(model)));
  CHECK(back == model);
  CHECK(back.predict_proba(data.X) == model.predict_proba(data.X));
}

TEST_CASE("classifier wrapper: format tag is required") {
  Blobs data = make_blobs(20, 13);
  Rng rng(1);
  ClassifierModel model =
      fit_classifier(ClassifierKind::random_forest, data.X, data.y, 2, {}, rng);
  json j = classifier_to_json(model);
  CHECK(j.at("format") == "perfband-model/1");
  ClassifierModel back = classifier_from_json(reparse(j));
  CHECK(back == model);

  json broken = j;
  broken["format"] = "perfband-model/0";
  CHECK_THROWS(classifier_from_json(broken));
  json untagged = j;
  untagged.erase("format");
  CHECK_THROWS(classifier_from_json(untagged));
}

TEST_CASE("isotonic/pca/kde/knn json: round-trip equality") {
  IsotonicMap iso = fit_isotonic({0, 1, 2, 3, 4}, {0.3, 0.1, 0.8, 0.75, 1.2});
  CHECK(isotonic_from_json(reparse(isotonic_to_json(iso))) == iso);

  Blobs data = make_blobs(25, 17);
  PcaModel pca = PcaModel::fit(data.X, 2);
  CHECK(pca_from_json(reparse(pca_to_json(pca))) == pca);

  ClassKde kde = ClassKde::fit(data.X, data.y, 2, 0.2);
  CHECK(kde_from_json(reparse(kde_to_json(kde))) == kde);

  KnnOutlierScorer knn = KnnOutlierScorer::fit(data.X, 10);
  CHECK(knn_from_json(reparse(knn_to_json(knn))) == knn);
}

TEST_CASE("encoder json: round-trip preserves the transform") {
  tabular::Dataset data;
  data.id = "toy";
  data.label_name = "y";
  data.label_names = {"p", "q"};
  data.columns = {{"num", tabular::ColumnKind::numeric, {}},
                  {"cat", tabular::ColumnKind::categorical, {"a", "b", "c"}}};
  data.values = Matrix(4, 2);
  for (int i = 0; i < 4; ++i) {
    data.values.at(i, 0) = i * 1.5;
    data.values.at(i, 1) = i % 3;
  }
  data.labels = {0, 1, 0, 1};

  for (auto mode :
       {tabular::EncodeMode::tree, tabular::EncodeMode::linear, tabular::EncodeMode::distance}) {
    tabular::Encoder enc = tabular::Encoder::fit(data, {0, 1, 2, 3}, mode);
    tabular::Encoder back = encoder_from_json(reparse(encoder_to_json(enc)));
    CHECK(back == enc);
    CHECK(back.transform(data, {0, 1, 2, 3}) == enc.transform(data, {0, 1, 2, 3}));
  }
}
