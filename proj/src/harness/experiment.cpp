#include "perfband/harness/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "perfband/common/log.hpp"
#include "perfband/common/stats.hpp"

namespace perfband::harness {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

double pair_cost(double delta, double width, double alpha) {
  return alpha * std::max(delta - width, 0.0) + (1.0 - alpha) * std::max(width - delta, 0.0);
}

// Everything the evaluation needs about one predictor kind over a set of
// scenarios, in matrix/vector form.
struct KindSlice {
  std::vector<std::string> ids;
  std::vector<std::string> dataset_ids;
  std::vector<double> deltas;
  std::vector<double> predicted;
  std::vector<double> true_prod;
  std::vector<double> se;
  std::vector<double> bs;
  std::vector<double> intrinsic;
  bool has_intrinsic = true;
  Matrix features;
};

KindSlice slice_records(const std::vector<const ScenarioRecord*>& records,
                        const std::string& kind, std::size_t n_features) {
  KindSlice slice;
  slice.features = Matrix(records.size(), n_features);
  for (std::size_t i = 0; i < records.size(); ++i) {
    const ScenarioRecord& r = *records[i];
    auto it = r.kinds.find(kind);
    if (it == r.kinds.end()) {
      throw std::runtime_error("scenario " + r.id + " lacks predictor kind " + kind);
    }
    const KindRecord& kr = it->second;
    if (kr.features.size() != n_features) {
      throw std::runtime_error("scenario " + r.id + " has a feature vector of length " +
                               std::to_string(kr.features.size()));
    }
    slice.ids.push_back(r.id);
    slice.dataset_ids.push_back(r.dataset_id);
    slice.deltas.push_back(kr.delta);
    slice.predicted.push_back(kr.predicted_accuracy);
    slice.true_prod.push_back(r.true_prod_accuracy);
    slice.se.push_back(kr.se_width);
    slice.bs.push_back(kr.bs_width);
    if (kr.intrinsic_width) {
      slice.intrinsic.push_back(*kr.intrinsic_width);
    } else {
      slice.has_intrinsic = false;
      slice.intrinsic.push_back(0.0);
    }
    for (std::size_t c = 0; c < n_features; ++c) slice.features.at(i, c) = kr.features[c];
  }
  return slice;
}

std::vector<const ScenarioRecord*> records_for(const ScenarioLibrary& library,
                                               const std::string& dataset, bool invert) {
  std::vector<const ScenarioRecord*> out;
  for (const auto& r : library.records) {
    if ((r.dataset_id == dataset) != invert) out.push_back(&r);
  }
  return out;
}

// Percentile bootstrap bounds for the mean of `values`.
std::pair<double, double> bootstrap_mean_ci(const std::vector<double>& values, int n_resamples,
                                            double level, Rng rng) {
  double m = mean(values);
  if (values.size() < 2) return {m, m};
  std::vector<double> means;
  means.reserve(static_cast<std::size_t>(n_resamples));
  for (int b = 0; b < n_resamples; ++b) {
    double sum = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
      sum += values[rng.uniform_index(values.size())];
    }
    means.push_back(sum / static_cast<double>(values.size()));
  }
  double lo = quantile(means, (1.0 - level) / 2.0);
  double hi = quantile(std::move(means), (1.0 + level) / 2.0);
  return {lo, hi};
}

Matrix select_columns(const Matrix& X, const std::vector<int>& cols) {
  Matrix out(X.rows, cols.size());
  for (std::size_t i = 0; i < X.rows; ++i) {
    for (std::size_t j = 0; j < cols.size(); ++j) {
      out.at(i, j) = X.at(i, static_cast<std::size_t>(cols[j]));
    }
  }
  return out;
}

struct MethodSpec {
  std::string name;      // cell label
  std::string baseline;  // se, bs, c, i (empty for um)
  std::string calibration;
};

std::vector<MethodSpec> method_specs(const ExperimentConfig& config, bool has_intrinsic) {
  std::vector<MethodSpec> specs{{"um", "", "tl"}};
  std::vector<std::string> baselines{"se", "bs", "c"};
  if (has_intrinsic) baselines.push_back("i");
  for (const std::string& b : baselines) {
    for (const std::string& c : config.calibrations) {
      specs.push_back({b + "_" + c, b, c});
    }
  }
  return specs;
}

const std::vector<double>& baseline_widths(const KindSlice& slice, const std::string& baseline,
                                           const std::vector<double>& ones) {
  if (baseline == "se") return slice.se;
  if (baseline == "bs") return slice.bs;
  if (baseline == "i") return slice.intrinsic;
  if (baseline == "c") return ones;
  throw std::logic_error("unknown baseline " + baseline);
}

json cost_cell_to_json(const CostCell& cell) {
  return json{{"predictor", cell.predictor}, {"method", cell.method},
              {"alpha", cell.alpha},         {"mean_cost", cell.mean_cost},
              {"ci_lo", cell.ci_lo},         {"ci_hi", cell.ci_hi},
              {"n", cell.costs.size()},      {"scenario_ids", cell.scenario_ids},
              {"deltas", cell.deltas},       {"widths", cell.widths},
              {"costs", cell.costs}};
}

CostCell cost_cell_from_json(const json& j) {
  CostCell cell;
  cell.predictor = j.at("predictor").get<std::string>();
  cell.method = j.at("method").get<std::string>();
  cell.alpha = j.at("alpha").get<double>();
  cell.mean_cost = j.at("mean_cost").get<double>();
  cell.ci_lo = j.at("ci_lo").get<double>();
  cell.ci_hi = j.at("ci_hi").get<double>();
  cell.scenario_ids = j.at("scenario_ids").get<std::vector<std::string>>();
  cell.deltas = j.at("deltas").get<std::vector<double>>();
  cell.widths = j.at("widths").get<std::vector<double>>();
  cell.costs = j.at("costs").get<std::vector<double>>();
  return cell;
}

json plot_row_to_json(const ScenarioPlotRow& row) {
  return json{{"scenario_id", row.scenario_id},
              {"dataset_id", row.dataset_id},
              {"predictor", row.predictor},
              {"alpha", row.alpha},
              {"true_prod_accuracy", row.true_prod_accuracy},
              {"predicted_prod_accuracy", row.predicted_prod_accuracy},
              {"delta", row.delta},
              {"raw_width", row.raw_width},
              {"calibrated_width", row.calibrated_width},
              {"lower", row.lower},
              {"upper", row.upper}};
}

ScenarioPlotRow plot_row_from_json(const json& j) {
  ScenarioPlotRow row;
  row.scenario_id = j.at("scenario_id").get<std::string>();
  row.dataset_id = j.at("dataset_id").get<std::string>();
  row.predictor = j.at("predictor").get<std::string>();
  row.alpha = j.at("alpha").get<double>();
  row.true_prod_accuracy = j.at("true_prod_accuracy").get<double>();
  row.predicted_prod_accuracy = j.at("predicted_prod_accuracy").get<double>();
  row.delta = j.at("delta").get<double>();
  row.raw_width = j.at("raw_width").get<double>();
  row.calibrated_width = j.at("calibrated_width").get<double>();
  row.lower = j.at("lower").get<double>();
  row.upper = j.at("upper").get<double>();
  return row;
}

json ablation_cell_to_json(const AblationCell& cell) {
  return json{{"source", cell.source},
              {"group", cell.group},
              {"n_features", cell.n_features},
              {"mean_cost", cell.mean_cost},
              {"normalized", cell.normalized}};
}

AblationCell ablation_cell_from_json(const json& j) {
  AblationCell cell;
  cell.source = j.at("source").get<std::string>();
  cell.group = j.at("group").get<std::string>();
  cell.n_features = j.at("n_features").get<int>();
  cell.mean_cost = j.at("mean_cost").get<double>();
  cell.normalized = j.at("normalized").get<double>();
  return cell;
}

void check_libraries(const ExperimentConfig& config, const ScenarioLibrary& train,
                     const ScenarioLibrary& eval) {
  std::vector<std::string> schema = features::um_feature_names();
  if (train.feature_names != schema || eval.feature_names != schema) {
    throw std::runtime_error("library feature schema does not match this build");
  }
  if (train.dataset_ids.size() < 2) {
    throw std::runtime_error("leave-one-out needs scenarios from at least 2 datasets");
  }
  if (eval.records.empty()) throw std::runtime_error("evaluation library is empty");
  (void)config;
}

// Pooled per-scenario UM costs for one feature subset at one alpha,
// leave-one-out over the evaluation datasets.
std::vector<double> loo_um_costs(const ScenarioLibrary& train, const ScenarioLibrary& eval,
                                 const std::string& kind, double alpha,
                                 const std::vector<int>& feature_cols, Rng root) {
  std::vector<std::string> names;
  names.reserve(feature_cols.size());
  for (int c : feature_cols) names.push_back(train.feature_names[static_cast<std::size_t>(c)]);

  std::vector<double> costs;
  for (std::size_t t = 0; t < eval.dataset_ids.size(); ++t) {
    const std::string& target = eval.dataset_ids[t];
    KindSlice ext = slice_records(records_for(train, target, true), kind,
                                  train.feature_names.size());
    if (ext.ids.empty()) {
      throw std::runtime_error("target dataset '" + target + "' has no external scenarios");
    }
    KindSlice tgt = slice_records(records_for(eval, target, false), kind,
                                  eval.feature_names.size());
    Matrix ext_features = select_columns(ext.features, feature_cols);
    Matrix tgt_features = select_columns(tgt.features, feature_cols);
    Rng pipeline_rng = root.child(t + 1);
    uncertainty::UmPipeline pipeline = uncertainty::build_um_pipeline(
        ext_features, ext.deltas, names, kind, alpha, pipeline_rng);
    std::vector<double> widths = pipeline.model.predict_widths(tgt_features);
    for (std::size_t i = 0; i < widths.size(); ++i) {
      costs.push_back(pair_cost(tgt.deltas[i], pipeline.scale * widths[i], alpha));
    }
  }
  return costs;
}

}  // namespace

std::vector<int> ablation_feature_indices(const std::vector<features::UmFeatureInfo>& schema,
                                          const std::string& source, const std::string& group) {
  std::vector<int> indices;
  for (std::size_t i = 0; i < schema.size(); ++i) {
    if (source != "all" && schema[i].type != source) continue;
    if (group != "all" && schema[i].group != group) continue;
    indices.push_back(static_cast<int>(i));
  }
  return indices;
}

ReportBundle run_loo_experiment(const ExperimentConfig& config, const ScenarioLibrary& train,
                                const ScenarioLibrary& eval) {
  validate_config(config);
  check_libraries(config, train, eval);

  ReportBundle bundle;
  bundle.config = config_to_json(config);
  bundle.config_hash = config_hash(config);
  bundle.train_library = train.root;
  bundle.eval_library = eval.root;

  Rng eval_root = Rng(config.master_seed).child(2);

  std::vector<int> all_columns(train.feature_names.size());
  for (std::size_t i = 0; i < all_columns.size(); ++i) all_columns[i] = static_cast<int>(i);

  for (std::size_t k = 0; k < config.predictor_kinds.size(); ++k) {
    const std::string kind = predict::to_string(config.predictor_kinds[k]);

    // per-target slices, reused for every alpha
    struct TargetData {
      KindSlice ext;
      KindSlice tgt;
    };
    std::vector<TargetData> targets;
    for (const std::string& target : eval.dataset_ids) {
      TargetData td;
      td.ext = slice_records(records_for(train, target, true), kind, train.feature_names.size());
      if (td.ext.ids.empty()) {
        throw std::runtime_error("target dataset '" + target + "' has no external scenarios");
      }
      td.tgt = slice_records(records_for(eval, target, false), kind, eval.feature_names.size());
      targets.push_back(std::move(td));
    }
    bool has_intrinsic = true;
    for (const TargetData& td : targets) {
      has_intrinsic = has_intrinsic && td.ext.has_intrinsic && td.tgt.has_intrinsic;
    }

    std::vector<MethodSpec> specs = method_specs(config, has_intrinsic);
    std::vector<CostCell> cells(specs.size() * config.alphas.size());
    for (std::size_t m = 0; m < specs.size(); ++m) {
      for (std::size_t a = 0; a < config.alphas.size(); ++a) {
        CostCell& cell = cells[m * config.alphas.size() + a];
        cell.predictor = kind;
        cell.method = specs[m].name;
        cell.alpha = config.alphas[a];
      }
    }

    for (std::size_t t = 0; t < targets.size(); ++t) {
      const KindSlice& ext = targets[t].ext;
      const KindSlice& tgt = targets[t].tgt;
      std::vector<double> ones_tgt(tgt.ids.size(), 1.0);
      std::vector<double> ones_ext(ext.ids.size(), 1.0);

      for (std::size_t a = 0; a < config.alphas.size(); ++a) {
        double alpha = config.alphas[a];

        Rng pipeline_rng = eval_root.child(k + 1).child(t + 1).child(a + 1);
        uncertainty::UmPipeline pipeline = uncertainty::build_um_pipeline(
            ext.features, ext.deltas, train.feature_names, kind, alpha, pipeline_rng);
        std::vector<double> um_raw = pipeline.model.predict_widths(tgt.features);

        for (std::size_t m = 0; m < specs.size(); ++m) {
          const MethodSpec& spec = specs[m];
          CostCell& cell = cells[m * config.alphas.size() + a];
          for (std::size_t i = 0; i < tgt.ids.size(); ++i) {
            double width = 0.0;
            if (spec.baseline.empty()) {
              width = pipeline.scale * um_raw[i];
            } else {
              const std::vector<double>& raw = baseline_widths(tgt, spec.baseline, ones_tgt);
              if (spec.calibration == "z") {
                width = uncertainty::z_scale(alpha) * raw[i];
              } else {
                const std::vector<double>& ext_raw =
                    baseline_widths(ext, spec.baseline, ones_ext);
                double scale = uncertainty::tl_calibrate(ext_raw, ext.deltas, alpha);
                width = scale * raw[i];
              }
            }
            cell.scenario_ids.push_back(tgt.ids[i]);
            cell.deltas.push_back(tgt.deltas[i]);
            cell.widths.push_back(width);
            cell.costs.push_back(pair_cost(tgt.deltas[i], width, alpha));
          }
        }

        for (std::size_t i = 0; i < tgt.ids.size(); ++i) {
          ScenarioPlotRow row;
          row.scenario_id = tgt.ids[i];
          row.dataset_id = tgt.dataset_ids[i];
          row.predictor = kind;
          row.alpha = alpha;
          row.true_prod_accuracy = tgt.true_prod[i];
          row.predicted_prod_accuracy = tgt.predicted[i];
          row.delta = tgt.deltas[i];
          row.raw_width = um_raw[i];
          row.calibrated_width = pipeline.scale * um_raw[i];
          row.lower = row.predicted_prod_accuracy - row.calibrated_width;
          row.upper = row.predicted_prod_accuracy + row.calibrated_width;
          bundle.scenarios.push_back(std::move(row));
        }
      }
    }

    Rng ci_root = Rng(config.master_seed).child(4).child(k + 1);
    for (std::size_t c = 0; c < cells.size(); ++c) {
      CostCell& cell = cells[c];
      cell.mean_cost = mean(cell.costs);
      auto [lo, hi] =
          bootstrap_mean_ci(cell.costs, kCostCiResamples, kCostCiLevel, ci_root.child(c + 1));
      cell.ci_lo = lo;
      cell.ci_hi = hi;
      bundle.costs.push_back(std::move(cell));
    }
  }
  return bundle;
}

std::vector<AblationCell> run_ablation(const ExperimentConfig& config,
                                       const ScenarioLibrary& train, const ScenarioLibrary& eval) {
  validate_config(config);
  check_libraries(config, train, eval);

  const std::vector<features::UmFeatureInfo>& schema = features::um_feature_schema();
  const std::string kind = predict::to_string(config.ablation_kind);
  const double alpha = config.ablation_alpha;
  Rng abl_root = Rng(config.master_seed).child(3);

  const std::vector<std::string> sources{"distance", "internal", "prediction", "noise", "all"};
  const std::vector<std::string> groups{"base", "perf_pred", "proxy", "drift", "all"};

  std::vector<int> all_columns = ablation_feature_indices(schema, "all", "all");
  double all_mean =
      mean(loo_um_costs(train, eval, kind, alpha, all_columns, abl_root.child(1)));

  std::vector<AblationCell> grid;
  std::size_t cell_index = 1;
  for (const std::string& source : sources) {
    for (const std::string& group : groups) {
      ++cell_index;
      std::vector<int> columns = ablation_feature_indices(schema, source, group);
      if (columns.empty()) continue;  // undefined cell, omitted from the grid
      AblationCell cell;
      cell.source = source;
      cell.group = group;
      cell.n_features = static_cast<int>(columns.size());
      cell.mean_cost =
          (source == "all" && group == "all")
              ? all_mean
              : mean(loo_um_costs(train, eval, kind, alpha, columns, abl_root.child(cell_index)));
      cell.normalized = cell.mean_cost / all_mean;
      grid.push_back(std::move(cell));
    }
  }
  return grid;
}

void emit_report(const ReportBundle& bundle, const std::string& out_dir,
                 const std::vector<std::string>& formats) {
  fs::path dir(out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create report directory " + out_dir);

  for (const CostCell& cell : bundle.costs) {
    double recomputed = mean(cell.costs);
    if (std::abs(recomputed - cell.mean_cost) > 1e-9) {
      throw std::logic_error("report mean for " + cell.predictor + "/" + cell.method +
                             " does not match its per-scenario costs");
    }
  }

  bool want_json = false;
  bool want_csv = false;
  for (const std::string& f : formats) {
    if (f == "json") want_json = true;
    else if (f == "csv") want_csv = true;
    else throw std::invalid_argument("unknown report format '" + f + "'");
  }

  if (want_json) {
    json costs = json::array();
    for (const CostCell& cell : bundle.costs) costs.push_back(cost_cell_to_json(cell));
    json scenarios = json::array();
    for (const ScenarioPlotRow& row : bundle.scenarios) scenarios.push_back(plot_row_to_json(row));
    json ablation = json::array();
    for (const AblationCell& cell : bundle.ablation) ablation.push_back(ablation_cell_to_json(cell));
    json j{{"format", kReportFormat},
           {"config", bundle.config},
           {"config_hash", bundle.config_hash},
           {"train_library", bundle.train_library},
           {"eval_library", bundle.eval_library},
           {"costs", costs},
           {"scenarios", scenarios},
           {"ablation", ablation}};
    std::ofstream out(dir / "report.json");
    if (!out) throw std::runtime_error("cannot write report.json in " + out_dir);
    out << j.dump(2) << "\n";
  }

  if (want_csv) {
    std::ostringstream costs_csv;
    costs_csv << "predictor,method,alpha,mean_cost,ci_lo,ci_hi,n\n";
    for (const CostCell& cell : bundle.costs) {
      costs_csv << cell.predictor << "," << cell.method << "," << format_double(cell.alpha) << ","
                << format_double(cell.mean_cost) << "," << format_double(cell.ci_lo) << ","
                << format_double(cell.ci_hi) << "," << cell.costs.size() << "\n";
    }
    std::ofstream costs_out(dir / "costs.csv");
    if (!costs_out) throw std::runtime_error("cannot write costs.csv in " + out_dir);
    costs_out << costs_csv.str();

    std::ostringstream scen_csv;
    scen_csv << "scenario_id,dataset_id,predictor,alpha,true_prod_accuracy,"
                "predicted_prod_accuracy,delta,raw_width,calibrated_width,lower,upper\n";
    for (const ScenarioPlotRow& row : bundle.scenarios) {
      scen_csv << row.scenario_id << "," << row.dataset_id << "," << row.predictor << ","
               << format_double(row.alpha) << "," << format_double(row.true_prod_accuracy) << ","
               << format_double(row.predicted_prod_accuracy) << "," << format_double(row.delta)
               << "," << format_double(row.raw_width) << "," << format_double(row.calibrated_width)
               << "," << format_double(row.lower) << "," << format_double(row.upper) << "\n";
    }
    std::ofstream scen_out(dir / "scenarios.csv");
    if (!scen_out) throw std::runtime_error("cannot write scenarios.csv in " + out_dir);
    scen_out << scen_csv.str();

    if (!bundle.ablation.empty()) {
      std::ostringstream abl_csv;
      abl_csv << "source,group,n_features,mean_cost,normalized\n";
      for (const AblationCell& cell : bundle.ablation) {
        abl_csv << cell.source << "," << cell.group << "," << cell.n_features << ","
                << format_double(cell.mean_cost) << "," << format_double(cell.normalized) << "\n";
      }
      std::ofstream abl_out(dir / "ablation.csv");
      if (!abl_out) throw std::runtime_error("cannot write ablation.csv in " + out_dir);
      abl_out << abl_csv.str();
    }
  }
}

ReportBundle load_report(const std::string& json_path) {
  std::ifstream in(json_path);
  if (!in) throw std::runtime_error("cannot read " + json_path);
  json j = json::parse(in);
  if (j.value("format", "") != kReportFormat) {
    throw std::runtime_error("unexpected report format in " + json_path);
  }
  ReportBundle bundle;
  bundle.config = j.at("config");
  bundle.config_hash = j.at("config_hash").get<std::string>();
  bundle.train_library = j.at("train_library").get<std::string>();
  bundle.eval_library = j.at("eval_library").get<std::string>();
  for (const auto& c : j.at("costs")) bundle.costs.push_back(cost_cell_from_json(c));
  for (const auto& s : j.at("scenarios")) bundle.scenarios.push_back(plot_row_from_json(s));
  for (const auto& a : j.at("ablation")) bundle.ablation.push_back(ablation_cell_from_json(a));
  return bundle;
}

}  // namespace perfband::harness
