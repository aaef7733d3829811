#include "perfband/predict/predictor.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "perfband/common/log.hpp"
#include "perfband/common/stats.hpp"
#include "perfband/learn/hpo.hpp"
#include "perfband/tabular/split.hpp"

namespace perfband::predict {

namespace {

constexpr int kConfidenceBinCount = 10;

std::vector<int> correctness(const tabular::Dataset& data, const std::vector<int>& rows,
                             const tabular::TabularClassifier& base) {
  std::vector<int> pred = base.predict(data, rows);
  std::vector<int> correct(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    correct[i] = pred[i] == data.labels[static_cast<std::size_t>(rows[i])] ? 1 : 0;
  return correct;
}

std::vector<double> top_confidences(const Matrix& proba) {
  std::vector<double> out(proba.rows);
  for (std::size_t i = 0; i < proba.rows; ++i) out[i] = top_confidence(proba.row(i));
  return out;
}

// Wraps clamped regression outputs as binary probabilities so the shared
// log-loss HPO machinery can score the dropout regressor.
Matrix regression_as_proba(const std::vector<double>& pred) {
  Matrix proba(pred.size(), 2);
  for (std::size_t i = 0; i < pred.size(); ++i) {
    double p = std::clamp(pred[i], 0.0, 1.0);
    proba.at(i, 0) = 1.0 - p;
    proba.at(i, 1) = p;
  }
  return proba;
}

learn::GbtParams dropout_gbt_params(const learn::ParamSet& params) {
  learn::GbtParams out = learn::gbt_params_from(params);
  out.loss = learn::GbtLoss::squared;
  out.dropout_rate = kDropoutRate;
  out.early_stopping_patience = kDropoutPatience;
  out.validation_fraction = 0.2;
  return out;
}

std::vector<double> to_double(const std::vector<int>& v) {
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = static_cast<double>(v[i]);
  return out;
}

double tir_rate(const std::vector<int>& correct) {
  double n = static_cast<double>(correct.size());
  double pos = 0.0;
  for (int c : correct) pos += c;
  if (pos == n) return (pos + 1.0) / (pos + 2.0);
  return 1.0 / (n - pos + 2.0);
}

}  // namespace

std::string to_string(PredictorKind kind) {
  switch (kind) {
    case PredictorKind::confidence: return "confidence";
    case PredictorKind::meta_model: return "meta_model";
    case PredictorKind::crossval: return "crossval";
    case PredictorKind::dropout: return "dropout";
  }
  throw std::logic_error("to_string: unknown predictor kind");
}

PredictorKind predictor_kind_from(const std::string& name) {
  if (name == "confidence") return PredictorKind::confidence;
  if (name == "meta_model") return PredictorKind::meta_model;
  if (name == "crossval") return PredictorKind::crossval;
  if (name == "dropout") return PredictorKind::dropout;
  throw std::invalid_argument("unknown predictor kind '" + name + "'");
}

int ConfidenceBins::lookup(double confidence) const {
  int bin = static_cast<int>(confidence * kConfidenceBinCount);
  bin = std::clamp(bin, 0, kConfidenceBinCount - 1);
  if (count[static_cast<std::size_t>(bin)] > 0) return bin;
  int best = -1;
  for (int k = 0; k < kConfidenceBinCount; ++k) {
    if (count[static_cast<std::size_t>(k)] == 0) continue;
    if (best < 0 || std::abs(k - bin) < std::abs(best - bin)) best = k;
  }
  if (best < 0) throw std::logic_error("ConfidenceBins: all bins empty");
  return best;
}

double ConfidenceBins::predict(double confidence) const {
  return accuracy[static_cast<std::size_t>(lookup(confidence))];
}

double ConfidenceBins::uncertainty(double confidence) const {
  std::size_t k = static_cast<std::size_t>(lookup(confidence));
  double a = accuracy[k];
  return std::sqrt(a * (1.0 - a) / static_cast<double>(count[k]));
}

ConfidenceBins build_confidence_bins(const std::vector<double>& confidences,
                                     const std::vector<int>& correct) {
  if (confidences.empty() || confidences.size() != correct.size())
    throw std::invalid_argument("build_confidence_bins: empty or mismatched inputs");
  ConfidenceBins bins;
  bins.accuracy.assign(kConfidenceBinCount, 0.0);
  bins.count.assign(kConfidenceBinCount, 0);
  for (std::size_t i = 0; i < confidences.size(); ++i) {
    int bin = std::clamp(static_cast<int>(confidences[i] * kConfidenceBinCount), 0,
                         kConfidenceBinCount - 1);
    bins.accuracy[static_cast<std::size_t>(bin)] += correct[i];
    bins.count[static_cast<std::size_t>(bin)] += 1;
  }
  for (int k = 0; k < kConfidenceBinCount; ++k) {
    if (bins.count[static_cast<std::size_t>(k)] > 0)
      bins.accuracy[static_cast<std::size_t>(k)] /=
          static_cast<double>(bins.count[static_cast<std::size_t>(k)]);
  }
  return bins;
}

MetaScaler MetaScaler::fit(const Matrix& X) {
  MetaScaler out;
  out.mean.assign(X.cols, 0.0);
  out.std.assign(X.cols, 0.0);
  for (std::size_t c = 0; c < X.cols; ++c) {
    std::vector<double> col(X.rows);
    for (std::size_t r = 0; r < X.rows; ++r) col[r] = X.at(r, c);
    out.mean[c] = perfband::mean(col);
    out.std[c] = perfband::stdev(col, 0);
  }
  return out;
}

Matrix MetaScaler::apply(const Matrix& X) const {
  Matrix out = X;
  for (std::size_t r = 0; r < X.rows; ++r) {
    for (std::size_t c = 0; c < X.cols; ++c) {
      out.at(r, c) = std[c] > 0.0 ? (X.at(r, c) - mean[c]) / std[c] : 0.0;
    }
  }
  return out;
}

std::vector<double> isotonic_targets(const std::vector<int>& correct) {
  double pos = 0.0;
  for (int c : correct) pos += c;
  double neg = static_cast<double>(correct.size()) - pos;
  std::vector<double> targets(correct.size());
  for (std::size_t i = 0; i < correct.size(); ++i)
    targets[i] = correct[i] ? (pos + 1.0) / (pos + 2.0) : 1.0 / (neg + 2.0);
  return targets;
}

namespace {

// Ensemble member confidences (probability the base prediction is correct),
// one column per member, on already-transformed meta features.
Matrix member_matrix(const PerformancePredictor& predictor, const Matrix& meta) {
  Matrix out(meta.rows, predictor.members.size());
  for (std::size_t m = 0; m < predictor.members.size(); ++m) {
    const learn::ClassifierModel& member = predictor.members[m];
    Matrix input = member.kind == learn::ClassifierKind::logistic
                       ? predictor.scaler.apply(meta)
                       : meta;
    Matrix proba = member.predict_proba(input);
    for (std::size_t r = 0; r < meta.rows; ++r) out.at(r, m) = proba.at(r, 1);
  }
  return out;
}

void fit_calibration(PerformancePredictor& predictor, const std::vector<double>& raw,
                     const std::vector<int>& correct) {
  if (raw.size() < 2) {
    predictor.calibration.identity = true;
    return;
  }
  predictor.calibration = learn::fit_isotonic(raw, isotonic_targets(correct));
}

void train_meta_members(PerformancePredictor& predictor, const Matrix& meta_train,
                        const std::vector<int>& y_train, Rng& rng) {
  using learn::ClassifierKind;
  Rng gbm_rng = rng.child(1);
  learn::HpoFitFn gbm_fit = [](const learn::ParamSet& params, const Matrix& X,
                               const std::vector<int>& y, const Matrix& X_val, Rng& fit_rng) {
    return learn::fit_classifier(ClassifierKind::gbt, X, y, 2, params, fit_rng)
        .predict_proba(X_val);
  };
  learn::HpoResult gbm_best = learn::random_search_hpo(
      learn::gbm_meta_space(), gbm_fit, meta_train, y_train, kMetaHpoIters, kMetaHpoFolds,
      gbm_rng);
  Rng gbm_final = rng.child(2);
  predictor.members.push_back(
      learn::fit_classifier(ClassifierKind::gbt, meta_train, y_train, 2, gbm_best.best,
                            gbm_final));

  Matrix scaled = predictor.scaler.apply(meta_train);
  Rng logit_rng = rng.child(3);
  learn::HpoFitFn logit_fit = [](const learn::ParamSet& params, const Matrix& X,
                                 const std::vector<int>& y, const Matrix& X_val, Rng& fit_rng) {
    return learn::fit_classifier(ClassifierKind::logistic, X, y, 2, params, fit_rng)
        .predict_proba(X_val);
  };
  learn::HpoResult logit_best = learn::random_search_hpo(
      learn::logistic_meta_space(), logit_fit, scaled, y_train, kMetaHpoIters, kMetaHpoFolds,
      logit_rng);
  Rng logit_final = rng.child(4);
  predictor.members.push_back(
      learn::fit_classifier(ClassifierKind::logistic, scaled, y_train, 2, logit_best.best,
                            logit_final));
}

void train_crossval_members(PerformancePredictor& predictor, const Matrix& meta_train,
                            const std::vector<int>& y_train, Rng& rng) {
  using learn::ClassifierKind;
  Rng hpo_rng = rng.child(1);
  learn::HpoFitFn rf_fit = [](const learn::ParamSet& params, const Matrix& X,
                              const std::vector<int>& y, const Matrix& X_val, Rng& fit_rng) {
    return learn::fit_classifier(ClassifierKind::random_forest, X, y, 2, params, fit_rng)
        .predict_proba(X_val);
  };
  learn::HpoResult best = learn::random_search_hpo(learn::rf_meta_space(), rf_fit, meta_train,
                                                   y_train, kMetaHpoIters, kMetaHpoFolds,
                                                   hpo_rng);

  int n_folds = std::min<int>(kCrossvalMembers, static_cast<int>(y_train.size()));
  Rng fold_rng = rng.child(2);
  auto folds = learn::stratified_folds(y_train, n_folds, fold_rng);
  std::vector<char> in_fold(y_train.size());
  for (std::size_t f = 0; f < folds.size(); ++f) {
    std::fill(in_fold.begin(), in_fold.end(), 0);
    for (int r : folds[f]) in_fold[static_cast<std::size_t>(r)] = 1;
    std::vector<int> rows;
    std::vector<int> y;
    for (std::size_t i = 0; i < y_train.size(); ++i) {
      if (!in_fold[i]) {
        rows.push_back(static_cast<int>(i));
        y.push_back(y_train[i]);
      }
    }
    if (y.empty() || std::all_of(y.begin(), y.end(), [&](int v) { return v == y[0]; })) {
      log_warn("crossval member " + std::to_string(f) + ": single-class fold complement, skipped");
      continue;
    }
    Rng member_rng = rng.child(10 + static_cast<std::uint64_t>(f));
    predictor.members.push_back(learn::fit_classifier(
        ClassifierKind::random_forest, meta_train.select_rows(rows), y, 2, best.best,
        member_rng));
  }
}

void train_dropout_model(PerformancePredictor& predictor, const Matrix& meta_train,
                         const std::vector<int>& y_train, Rng& rng) {
  Rng hpo_rng = rng.child(1);
  learn::HpoFitFn dart_fit = [](const learn::ParamSet& params, const Matrix& X,
                                const std::vector<int>& y, const Matrix& X_val, Rng& fit_rng) {
    learn::GbtModel model;
    model.params = dropout_gbt_params(params);
    model.fit(X, to_double(y), fit_rng.child(0).seed());
    return regression_as_proba(model.predict(X_val));
  };
  learn::HpoResult best = learn::random_search_hpo(learn::dropout_meta_space(), dart_fit,
                                                   meta_train, y_train, kMetaHpoIters,
                                                   kMetaHpoFolds, hpo_rng);
  predictor.dropout_model.params = dropout_gbt_params(best.best);
  Rng final_rng = rng.child(2);
  predictor.dropout_model.fit(meta_train, to_double(y_train), final_rng.child(0).seed());
}

}  // namespace

PerformancePredictor train_predictor(PredictorKind kind, const tabular::Dataset& data,
                                     const std::vector<int>& test_rows,
                                     const tabular::TabularClassifier& base,
                                     const MetaFeatureTransform& transform, Rng& rng) {
  if (test_rows.empty()) throw std::invalid_argument("train_predictor: empty test rows");

  PerformancePredictor predictor;
  predictor.kind = kind;
  std::vector<int> correct = correctness(data, test_rows, base);

  if (kind == PredictorKind::confidence) {
    predictor.bins =
        build_confidence_bins(top_confidences(base.predict_proba(data, test_rows)), correct);
    return predictor;
  }

  Matrix meta = meta_features(transform, base, data, test_rows);

  // Hold out a calibration slice; the members never see it.
  std::vector<int> local(test_rows.size());
  for (std::size_t i = 0; i < local.size(); ++i) local[i] = static_cast<int>(i);
  auto [train_local, calib_local] =
      tabular::split_rows(local, 1.0 - kCalibrationFraction, rng.child(0xCA).seed());

  std::vector<int> y_train, y_calib;
  for (int i : train_local) y_train.push_back(correct[static_cast<std::size_t>(i)]);
  for (int i : calib_local) y_calib.push_back(correct[static_cast<std::size_t>(i)]);

  if (y_train.empty() ||
      std::all_of(y_train.begin(), y_train.end(), [&](int v) { return v == y_train[0]; })) {
    predictor.constant_fallback = true;
    predictor.constant_confidence = tir_rate(correct);
    predictor.calibration.identity = true;
    log_warn("train_predictor: degenerate correct/incorrect labels; constant fallback " +
             std::to_string(predictor.constant_confidence));
    return predictor;
  }

  Matrix meta_train = meta.select_rows(train_local);
  predictor.scaler = MetaScaler::fit(meta_train);

  Rng member_rng = rng.child(0x3E);
  switch (kind) {
    case PredictorKind::meta_model: train_meta_members(predictor, meta_train, y_train, member_rng); break;
    case PredictorKind::crossval: train_crossval_members(predictor, meta_train, y_train, member_rng); break;
    case PredictorKind::dropout: train_dropout_model(predictor, meta_train, y_train, member_rng); break;
    case PredictorKind::confidence: break;
  }

  if (kind == PredictorKind::crossval && predictor.members.empty()) {
    predictor.constant_fallback = true;
    predictor.constant_confidence = tir_rate(correct);
    predictor.calibration.identity = true;
    log_warn("train_predictor: no trainable crossval members; constant fallback");
    return predictor;
  }

  // Raw ensemble confidences on the calibration slice.
  Matrix meta_calib = meta.select_rows(calib_local);
  std::vector<double> raw(calib_local.size(), 0.0);
  if (kind == PredictorKind::dropout) {
    raw = predictor.dropout_model.predict(meta_calib);
  } else {
    Matrix members = member_matrix(predictor, meta_calib);
    for (std::size_t r = 0; r < members.rows; ++r) raw[r] = mean(members.row(r));
  }
  fit_calibration(predictor, raw, y_calib);
  return predictor;
}

PerformancePrediction predict_performance(const PerformancePredictor& predictor,
                                          const tabular::TabularClassifier& base,
                                          const MetaFeatureTransform& transform,
                                          const tabular::Dataset& data,
                                          const std::vector<int>& rows, Rng& draw_rng) {
  if (rows.empty()) throw std::invalid_argument("predict_performance: empty rows");
  PerformancePrediction out;

  if (predictor.kind == PredictorKind::confidence) {
    std::vector<double> conf = top_confidences(base.predict_proba(data, rows));
    out.confidences.resize(conf.size());
    double width = 0.0;
    for (std::size_t i = 0; i < conf.size(); ++i) {
      out.confidences[i] = predictor.bins.predict(conf[i]);
      width += predictor.bins.uncertainty(conf[i]);
    }
    out.raw_confidences = out.confidences;
    out.intrinsic_width = width / static_cast<double>(conf.size());
    out.predicted_accuracy = 100.0 * mean(out.confidences);
    return out;
  }

  if (predictor.constant_fallback) {
    out.confidences.assign(rows.size(), predictor.constant_confidence);
    out.raw_confidences = out.confidences;
    if (predictor.kind != PredictorKind::meta_model) out.intrinsic_width = 0.0;
    out.predicted_accuracy = 100.0 * predictor.constant_confidence;
    return out;
  }

  Matrix meta = meta_features(transform, base, data, rows);
  auto calibrated = [&](double raw) {
    return std::clamp(predictor.calibration(raw), 0.0, 1.0);
  };

  if (predictor.kind == PredictorKind::dropout) {
    out.raw_confidences = predictor.dropout_model.predict(meta);
    out.member_confidences = Matrix(rows.size(), kDropoutDraws);
    for (int d = 0; d < kDropoutDraws; ++d) {
      Rng rng = draw_rng.child(static_cast<std::uint64_t>(d));
      std::vector<double> draw = predictor.dropout_model.predict_stochastic(meta, rng);
      for (std::size_t r = 0; r < rows.size(); ++r)
        out.member_confidences.at(r, d) = calibrated(draw[r]);
    }
  } else {
    out.member_confidences = member_matrix(predictor, meta);
    out.raw_confidences.resize(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r)
      out.raw_confidences[r] = mean(out.member_confidences.row(r));
  }

  out.confidences.resize(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r)
    out.confidences[r] = calibrated(out.raw_confidences[r]);

  if (predictor.kind != PredictorKind::meta_model) {
    double width = 0.0;
    for (std::size_t r = 0; r < rows.size(); ++r)
      width += stdev(out.member_confidences.row(r), 0);
    out.intrinsic_width = width / static_cast<double>(rows.size());
  }
  out.predicted_accuracy = 100.0 * mean(out.confidences);
  return out;
}

}  // namespace perfband::predict
