#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "perfband/common/rng.hpp"
#include "perfband/common/stats.hpp"
#include "perfband/predict/predictor.hpp"
#include "perfband/predict/serialize.hpp"
#include "perfband/predict/transform.hpp"
#include "perfband/tabular/split.hpp"

using namespace perfband;
using namespace perfband::predict;
using namespace perfband::tabular;
using json = nlohmann::json;

namespace {

Dataset make_blob_dataset(int n, double sep, double sigma, std::uint64_t seed) {
  Rng rng(seed);
  Dataset data;
  data.id = "blobs";
  data.label_name = "y";
  data.label_names = {"neg", "pos"};
  data.columns = {{"x1", ColumnKind::numeric, {}}, {"x2", ColumnKind::numeric, {}}};
  data.values = Matrix(static_cast<std::size_t>(n), 2);
  for (int i = 0; i < n; ++i) {
    int cls = i % 2;
    double cx = cls == 0 ? -sep : sep;
    data.values.at(i, 0) = cx + sigma * rng.normal();
    data.values.at(i, 1) = cx + sigma * rng.normal();
    data.labels.push_back(cls);
  }
  return data;
}

// One fitted pipeline on well-separated blobs, shared across the end-to-end
// predictor cases (the transform's proxy HPO dominates the fit cost).
struct Pipeline {
  Dataset data;
  SplitTriple split;
  TabularClassifier base;
  MetaFeatureTransform transform;
};

const Pipeline& easy_pipeline() {
  static Pipeline p = [] {
    Pipeline out;
    // Overlapping blobs: the base model misclassifies a handful of points,
    // so the correct/incorrect relabeling is non-degenerate.
    out.data = make_blob_dataset(300, 1.0, 0.9, 404);
    out.split = random_split(out.data.n(), 0.4, 0.3, 0.3, 9);
    Rng base_rng(17);
    out.base = fit_tabular_classifier(learn::ClassifierKind::random_forest, out.data,
                                      out.split.train, {}, base_rng);
    Rng t_rng(23);
    out.transform =
        fit_meta_transform(out.data, out.split.train, out.split.test, out.base, t_rng);
    return out;
  }();
  return p;
}

}  // namespace

TEST_CASE("confidence stats: two-class vector arithmetic") {
  std::vector<double> proba{0.8, 0.2};
  CHECK(top_confidence(proba) == doctest::Approx(0.8));
  CHECK(top_minus_second(proba) == doctest::Approx(0.6));
  CHECK(entropy_nats(proba) == doctest::Approx(0.5004024235381878).epsilon(1e-12));
}

TEST_CASE("confidence stats: uniform vector has maximal entropy") {
  for (int k : {2, 3, 7}) {
    std::vector<double> proba(static_cast<std::size_t>(k), 1.0 / k);
    CHECK(entropy_nats(proba) == doctest::Approx(std::log(double(k))).epsilon(1e-12));
    CHECK(top_minus_second(proba) == doctest::Approx(0.0));
  }
}

TEST_CASE("meta features: fixed 12-column layout with named columns") {
  const Pipeline& p = easy_pipeline();
  Matrix feats = meta_features(p.transform, p.base, p.data, p.split.prod);
  CHECK(feats.cols == 12);
  CHECK(meta_feature_names().size() == 12);
  for (std::size_t r = 0; r < feats.rows; ++r) {
    CHECK(feats.at(r, 0) >= 0.5);  // binary top confidence
    CHECK(feats.at(r, 0) <= 1.0);
    CHECK(feats.at(r, 2) >= 0.0);  // entropy
    CHECK(feats.at(r, 3) >= 0.0);  // class frequency
    CHECK(feats.at(r, 3) <= 1.0);
    CHECK(feats.at(r, 10) >= 0.0);  // outlier distance
  }
}

TEST_CASE("meta features: duplicated train point has outlier score 0") {
  Dataset data = make_blob_dataset(80, 1.5, 0.5, 31);
  // Rows 0..10 become exact copies of row 0, leaving 10 duplicates in train.
  for (int i = 1; i <= 10; ++i) {
    data.values.at(i, 0) = data.values.at(0, 0);
    data.values.at(i, 1) = data.values.at(0, 1);
    data.labels[static_cast<std::size_t>(i)] = data.labels[0];
  }
  std::vector<int> train_rows, test_rows;
  for (int i = 0; i < 60; ++i) train_rows.push_back(i);
  for (int i = 60; i < 80; ++i) test_rows.push_back(i);
  Rng base_rng(5);
  TabularClassifier base = fit_tabular_classifier(learn::ClassifierKind::random_forest, data,
                                                  train_rows, {}, base_rng);
  Rng t_rng(7);
  MetaFeatureTransform transform = fit_meta_transform(data, train_rows, test_rows, base, t_rng);
  Matrix feats = meta_features(transform, base, data, {0});
  CHECK(feats.at(0, 10) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("confidence bins: single-bin construction predicts its accuracy") {
  std::vector<double> conf(10, 0.95);
  std::vector<int> correct{1, 1, 1, 1, 1, 1, 1, 1, 1, 0};
  ConfidenceBins bins = build_confidence_bins(conf, correct);
  CHECK(bins.count[9] == 10);
  CHECK(bins.predict(0.97) == doctest::Approx(0.9));
  // Any other query falls back to the only nonempty bin.
  CHECK(bins.predict(0.05) == doctest::Approx(0.9));
}

TEST_CASE("confidence bins: empty-bin query uses the nearest nonempty bin") {
  std::vector<double> conf{0.15, 0.15, 0.75, 0.75, 0.75};
  std::vector<int> correct{0, 1, 1, 1, 0};
  ConfidenceBins bins = build_confidence_bins(conf, correct);
  CHECK(bins.predict(0.25) == doctest::Approx(0.5));        // nearest is bin 1
  CHECK(bins.predict(0.65) == doctest::Approx(2.0 / 3.0));  // nearest is bin 7
  // Bin 4 is three bins from both nonempty bins; the tie goes to the lower.
  CHECK(bins.lookup(0.45) == 1);
  CHECK(bins.predict(0.45) == doctest::Approx(0.5));
}

TEST_CASE("confidence bins: bernoulli standard error values") {
  ConfidenceBins bins;
  bins.accuracy.assign(10, 0.0);
  bins.count.assign(10, 0);
  bins.accuracy[5] = 0.5;
  bins.count[5] = 25;
  bins.accuracy[9] = 1.0;
  bins.count[9] = 50;
  bins.accuracy[8] = 0.9;
  bins.count[8] = 100;
  CHECK(bins.uncertainty(0.55) == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(bins.uncertainty(0.95) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(bins.uncertainty(0.85) == doctest::Approx(0.03).epsilon(1e-12));
}

TEST_CASE("confidence bins: calibrated synthetic scores converge to bin centers") {
  Rng rng(209);
  std::vector<double> conf;
  std::vector<int> correct;
  for (int i = 0; i < 4000; ++i) {
    double c = rng.uniform();
    conf.push_back(c);
    correct.push_back(rng.bernoulli(c) ? 1 : 0);
  }
  ConfidenceBins bins = build_confidence_bins(conf, correct);
  for (int k = 0; k < 10; ++k) {
    REQUIRE(bins.count[static_cast<std::size_t>(k)] > 0);
    double center = 0.1 * k + 0.05;
    CHECK(std::abs(bins.accuracy[static_cast<std::size_t>(k)] - center) < 0.05);
  }
}

TEST_CASE("confidence bins: simulated prediction lands within 2 accuracy points") {
  Rng rng(211);
  std::vector<double> test_conf;
  std::vector<int> test_correct;
  for (int i = 0; i < 3000; ++i) {
    double c = 0.5 + 0.5 * rng.uniform();
    test_conf.push_back(c);
    test_correct.push_back(rng.bernoulli(c) ? 1 : 0);
  }
  ConfidenceBins bins = build_confidence_bins(test_conf, test_correct);

  double predicted = 0.0, truth = 0.0;
  const int n_prod = 3000;
  for (int i = 0; i < n_prod; ++i) {
    double c = 0.5 + 0.5 * rng.uniform();
    predicted += bins.predict(c);
    truth += rng.bernoulli(c) ? 1.0 : 0.0;
  }
  predicted = 100.0 * predicted / n_prod;
  truth = 100.0 * truth / n_prod;
  CHECK(std::abs(predicted - truth) < 2.0);
}

TEST_CASE("isotonic targets: the T_ir formula") {
  std::vector<int> correct(98, 1);
  correct.push_back(0);
  correct.push_back(0);
  auto targets = isotonic_targets(correct);
  CHECK(targets[0] == doctest::Approx(0.99));      // (98+1)/(98+2)
  CHECK(targets[98] == doctest::Approx(0.25));     // 1/(2+2)
}

TEST_CASE("predictor: confidence kind end to end") {
  const Pipeline& p = easy_pipeline();
  Rng rng(41);
  PerformancePredictor predictor = train_predictor(PredictorKind::confidence, p.data,
                                                   p.split.test, p.base, p.transform, rng);
  Rng draw(1);
  PerformancePrediction pred =
      predict_performance(predictor, p.base, p.transform, p.data, p.split.prod, draw);
  CHECK(pred.predicted_accuracy ==
        doctest::Approx(100.0 * mean(pred.confidences)).epsilon(1e-9));
  CHECK(pred.intrinsic_width.has_value());
  CHECK(*pred.intrinsic_width >= 0.0);

  // The prediction should track the realized production accuracy.
  double truth = 0.0;
  for (int r : p.split.prod)
    truth += p.base.predict(p.data, {r})[0] == p.data.labels[static_cast<std::size_t>(r)];
  truth = 100.0 * truth / static_cast<double>(p.split.prod.size());
  CHECK(std::abs(pred.predicted_accuracy - truth) <= 15.0);
}

TEST_CASE("predictor: meta_model tracks accuracy on overlapping blobs") {
  const Pipeline& p = easy_pipeline();
  Rng rng(43);
  PerformancePredictor predictor = train_predictor(PredictorKind::meta_model, p.data,
                                                   p.split.test, p.base, p.transform, rng);
  Rng draw(1);
  PerformancePrediction pred =
      predict_performance(predictor, p.base, p.transform, p.data, p.split.prod, draw);
  CHECK(predictor.members.size() == 2);
  CHECK_FALSE(predictor.constant_fallback);
  double truth = 0.0;
  for (int r : p.split.prod)
    truth += p.base.predict(p.data, {r})[0] == p.data.labels[static_cast<std::size_t>(r)];
  truth = 100.0 * truth / static_cast<double>(p.split.prod.size());
  CHECK(std::abs(pred.predicted_accuracy - truth) <= 15.0);
  CHECK_FALSE(pred.intrinsic_width.has_value());
  // Ensemble output is the unweighted mean of the member confidences.
  for (std::size_t r = 0; r < pred.member_confidences.rows; ++r)
    CHECK(pred.raw_confidences[r] ==
          doctest::Approx(mean(pred.member_confidences.row(r))).epsilon(1e-12));
  for (double c : pred.confidences) {
    CHECK(c >= 0.0);
    CHECK(c <= 1.0);
  }
}

TEST_CASE("predictor: crossval trains ten members and exposes their spread") {
  const Pipeline& p = easy_pipeline();
  Rng rng(47);
  PerformancePredictor predictor = train_predictor(PredictorKind::crossval, p.data,
                                                   p.split.test, p.base, p.transform, rng);
  CHECK(predictor.members.size() == 10);
  Rng draw(1);
  PerformancePrediction pred =
      predict_performance(predictor, p.base, p.transform, p.data, p.split.prod, draw);
  REQUIRE(pred.intrinsic_width.has_value());

  // Recomputation oracle: the width is the mean per-point member stdev.
  double expect = 0.0;
  for (std::size_t r = 0; r < pred.member_confidences.rows; ++r)
    expect += stdev(pred.member_confidences.row(r), 0);
  expect /= static_cast<double>(pred.member_confidences.rows);
  CHECK(*pred.intrinsic_width == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("predictor: dropout draws vary but stay calibrated") {
  const Pipeline& p = easy_pipeline();
  Rng rng(53);
  PerformancePredictor predictor = train_predictor(PredictorKind::dropout, p.data, p.split.test,
                                                   p.base, p.transform, rng);
  CHECK(predictor.dropout_model.params.dropout_rate == 0.25);
  Rng draw(7);
  PerformancePrediction pred =
      predict_performance(predictor, p.base, p.transform, p.data, p.split.prod, draw);
  CHECK(pred.member_confidences.cols == 10);
  REQUIRE(pred.intrinsic_width.has_value());
  CHECK(*pred.intrinsic_width >= 0.0);
  for (std::size_t r = 0; r < pred.member_confidences.rows; ++r)
    for (double c : pred.member_confidences.row(r)) {
      CHECK(c >= 0.0);
      CHECK(c <= 1.0);
    }
  // Same draw seed reproduces the stochastic width exactly.
  Rng draw2(7);
  PerformancePrediction again =
      predict_performance(predictor, p.base, p.transform, p.data, p.split.prod, draw2);
  CHECK(*again.intrinsic_width == *pred.intrinsic_width);
}

TEST_CASE("predictor: calibration map is monotone and bounded on a 1000-point sweep") {
  const Pipeline& p = easy_pipeline();
  Rng rng(43);
  PerformancePredictor predictor = train_predictor(PredictorKind::meta_model, p.data,
                                                   p.split.test, p.base, p.transform, rng);
  double prev = -1.0;
  for (int i = 0; i < 1000; ++i) {
    double raw = i / 999.0;
    double value = predictor.calibration(raw);
    CHECK(value >= prev - 1e-12);
    CHECK(value >= 0.0);
    CHECK(value <= 1.0);
    prev = value;
  }
}

TEST_CASE("predictor: identical members produce zero intrinsic width") {
  const Pipeline& p = easy_pipeline();
  Rng rng(47);
  PerformancePredictor predictor = train_predictor(PredictorKind::crossval, p.data,
                                                   p.split.test, p.base, p.transform, rng);
  PerformancePredictor cloned = predictor;
  cloned.members.assign(10, predictor.members[0]);
  Rng draw(1);
  PerformancePrediction pred =
      predict_performance(cloned, p.base, p.transform, p.data, p.split.prod, draw);
  CHECK(*pred.intrinsic_width == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("predictor: degenerate all-correct test labels fall back to the T_ir constant") {
  // sep=4, sigma=0.2: the base model will not miss a single test point.
  Dataset data = make_blob_dataset(200, 4.0, 0.2, 61);
  SplitTriple split = random_split(data.n(), 0.4, 0.3, 0.3, 3);
  Rng base_rng(67);
  TabularClassifier base = fit_tabular_classifier(learn::ClassifierKind::random_forest, data,
                                                  split.train, {}, base_rng);
  Rng t_rng(71);
  MetaFeatureTransform transform =
      fit_meta_transform(data, split.train, split.test, base, t_rng);

  for (auto kind : {PredictorKind::meta_model, PredictorKind::crossval, PredictorKind::dropout}) {
    Rng rng(73);
    PerformancePredictor predictor =
        train_predictor(kind, data, split.test, base, transform, rng);
    REQUIRE(predictor.constant_fallback);
    double n = static_cast<double>(split.test.size());
    CHECK(predictor.constant_confidence == doctest::Approx((n + 1.0) / (n + 2.0)));
    Rng draw(1);
    PerformancePrediction pred =
        predict_performance(predictor, base, transform, data, split.prod, draw);
    CHECK(pred.predicted_accuracy ==
          doctest::Approx(100.0 * predictor.constant_confidence).epsilon(1e-9));
    if (kind == PredictorKind::meta_model) {
      CHECK_FALSE(pred.intrinsic_width.has_value());
    } else {
      CHECK(*pred.intrinsic_width == 0.0);
    }
  }
}

TEST_CASE("predictor serialization: transform and predictors reload bit-exactly") {
  const Pipeline& p = easy_pipeline();
  json t = io::transform_to_json(p.transform);
  MetaFeatureTransform transform_back = io::transform_from_json(json::parse(t.dump()));
  CHECK(transform_back == p.transform);

  json b = io::tabular_classifier_to_json(p.base);
  TabularClassifier base_back = io::tabular_classifier_from_json(json::parse(b.dump()));
  CHECK(base_back == p.base);

  for (auto kind : {PredictorKind::confidence, PredictorKind::meta_model,
                    PredictorKind::crossval, PredictorKind::dropout}) {
    Rng rng(83);
    PerformancePredictor predictor =
        train_predictor(kind, p.data, p.split.test, p.base, p.transform, rng);
    json j = io::predictor_to_json(predictor);
    PerformancePredictor back = io::predictor_from_json(json::parse(j.dump()));
    CHECK(back == predictor);

    Rng draw_a(11), draw_b(11);
    PerformancePrediction pa =
        predict_performance(predictor, p.base, p.transform, p.data, p.split.prod, draw_a);
    PerformancePrediction pb =
        predict_performance(back, p.base, p.transform, p.data, p.split.prod, draw_b);
    CHECK(pa.confidences == pb.confidences);
    CHECK(pa.predicted_accuracy == pb.predicted_accuracy);
  }
}
