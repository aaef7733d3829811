#include "perfband/harness/library.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

#include "perfband/common/log.hpp"
#include "perfband/common/parallel.hpp"
#include "perfband/common/stats.hpp"
#include "perfband/predict/serialize.hpp"
#include "perfband/tabular/bootstrap.hpp"

namespace perfband::harness {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

std::string read_text(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

json read_json(const fs::path& path) { return json::parse(read_text(path)); }

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

// One scheduled scenario; the split configuration is fully resolved so the
// builder is a pure function of (dataset, plan).
struct ScenarioPlan {
  std::string id;
  std::size_t dataset_index = 0;
  learn::ClassifierKind base_kind = learn::ClassifierKind::random_forest;
  std::uint64_t seed = 0;
  bool nn = false;
  sim::LinearSkewConfig skew;
  sim::NearestNeighborsConfig nnc;
  int seed_index = 0;
  std::string feature_name;  // linear skew only
};

struct BuiltScenario {
  ScenarioRecord record;
  tabular::SplitTriple split;
  tabular::TabularClassifier base;
  predict::MetaFeatureTransform transform;
  std::map<std::string, predict::PerformancePredictor> predictors;
  bool failed = false;
  std::string failure_reason;
};

BuiltScenario build_plan(const ExperimentConfig& config, const tabular::Dataset& data,
                         const ScenarioPlan& plan) {
  BuiltScenario out;
  out.record.id = plan.id;
  out.record.dataset_id = data.id;
  out.record.generator = plan.nn ? "nearest_neighbors" : "linear_skew";
  out.record.base_kind = learn::to_string(plan.base_kind);
  try {
    Rng rng(plan.seed);
    if (plan.nn) {
      sim::NearestNeighborsConfig nnc = plan.nnc;
      nnc.seed = rng.child(1).seed();
      out.split = sim::nearest_neighbors_drift(data, nnc);
      out.record.provenance = {{"generator", "nearest_neighbors"}, {"p_set", nnc.p_set},
                               {"p_near", nnc.p_near},             {"p_down", nnc.p_down},
                               {"seed_index", plan.seed_index},    {"p_train", nnc.p_train},
                               {"p_test", nnc.p_test},             {"p_prod", nnc.p_prod}};
    } else {
      sim::LinearSkewConfig skew = plan.skew;
      skew.seed = rng.child(1).seed();
      out.split = sim::linear_skew(data, skew);
      out.record.provenance = {{"generator", "linear_skew"},
                               {"feature", skew.feature},
                               {"feature_name", plan.feature_name},
                               {"threshold", skew.threshold},
                               {"ratio", skew.ratio},
                               {"minibatch", skew.minibatch},
                               {"seed_index", plan.seed_index},
                               {"p_train", skew.p_train},
                               {"p_test", skew.p_test},
                               {"p_prod", skew.p_prod}};
    }

    Rng base_rng = rng.child(2);
    out.base = tabular::fit_tabular_classifier(plan.base_kind, data, out.split.train, {}, base_rng);
    Rng transform_rng = rng.child(3);
    out.transform = predict::fit_meta_transform(data, out.split.train, out.split.test, out.base,
                                                transform_rng);
    Rng drift_rng = rng.child(4);
    features::DriftModelSet drift = features::train_drift_models(
        data, out.split.test, out.split.prod, out.base, out.transform, drift_rng);

    out.record.true_test_accuracy =
        100.0 * tabular::classifier_accuracy(out.base, data, out.split.test);
    out.record.true_prod_accuracy =
        100.0 * tabular::classifier_accuracy(out.base, data, out.split.prod);

    for (predict::PredictorKind kind : config.predictor_kinds) {
      int kv = static_cast<int>(kind) * 4;
      Rng predictor_rng = rng.child(10 + kv);
      predict::PerformancePredictor predictor = predict::train_predictor(
          kind, data, out.split.test, out.base, out.transform, predictor_rng);
      Rng draw_rng = rng.child(11 + kv);
      predict::PerformancePrediction prediction = predict::predict_performance(
          predictor, out.base, out.transform, data, out.split.prod, draw_rng);
      Rng feature_rng = rng.child(12 + kv);
      KindRecord kr;
      kr.features =
          features::extract_um_features(data, out.split.test, out.split.prod, out.base,
                                        out.transform, predictor, prediction, drift, feature_rng);
      kr.predicted_accuracy = prediction.predicted_accuracy;
      kr.delta = std::abs(out.record.true_prod_accuracy - kr.predicted_accuracy);
      const auto& conf = prediction.confidences;
      kr.se_width = conf.size() > 1
                        ? 100.0 * stdev(conf, 1) / std::sqrt(static_cast<double>(conf.size()))
                        : 0.0;
      kr.bs_width = 100.0 * tabular::bootstrap_interval_width(
                                conf, features::kNoiseResamples, features::kNoiseLevel,
                                rng.child(13 + kv).seed());
      if (prediction.intrinsic_width) kr.intrinsic_width = 100.0 * *prediction.intrinsic_width;
      out.record.kinds[predict::to_string(kind)] = std::move(kr);
      out.predictors[predict::to_string(kind)] = std::move(predictor);
    }
  } catch (const std::exception& e) {
    out.failed = true;
    out.failure_reason = e.what();
  }
  return out;
}

json kind_record_to_json(const KindRecord& kr) {
  json j{{"predicted_accuracy", kr.predicted_accuracy},
         {"delta", kr.delta},
         {"se_width", kr.se_width},
         {"bs_width", kr.bs_width}};
  j["intrinsic_width"] = kr.intrinsic_width ? json(*kr.intrinsic_width) : json(nullptr);
  return j;
}

KindRecord kind_record_from_json(const json& j) {
  KindRecord kr;
  kr.predicted_accuracy = j.at("predicted_accuracy").get<double>();
  kr.delta = j.at("delta").get<double>();
  kr.se_width = j.at("se_width").get<double>();
  kr.bs_width = j.at("bs_width").get<double>();
  if (!j.at("intrinsic_width").is_null()) kr.intrinsic_width = j.at("intrinsic_width").get<double>();
  return kr;
}

json meta_to_json(const ScenarioRecord& record) {
  json kinds = json::object();
  for (const auto& [kind, kr] : record.kinds) kinds[kind] = kind_record_to_json(kr);
  return json{{"format", kScenarioFormat},
              {"id", record.id},
              {"dataset_id", record.dataset_id},
              {"generator", record.generator},
              {"base_kind", record.base_kind},
              {"provenance", record.provenance},
              {"true_test_accuracy", record.true_test_accuracy},
              {"true_prod_accuracy", record.true_prod_accuracy},
              {"kinds", kinds}};
}

ScenarioRecord meta_from_json(const json& j) {
  if (j.value("format", "") != kScenarioFormat) {
    throw std::runtime_error("unexpected scenario format: " + j.value("format", "<missing>"));
  }
  ScenarioRecord record;
  record.id = j.at("id").get<std::string>();
  record.dataset_id = j.at("dataset_id").get<std::string>();
  record.generator = j.at("generator").get<std::string>();
  record.base_kind = j.at("base_kind").get<std::string>();
  record.provenance = j.at("provenance");
  record.true_test_accuracy = j.at("true_test_accuracy").get<double>();
  record.true_prod_accuracy = j.at("true_prod_accuracy").get<double>();
  for (const auto& [kind, kj] : j.at("kinds").items()) {
    record.kinds[kind] = kind_record_from_json(kj);
  }
  return record;
}

}  // namespace

void validate_config(const ExperimentConfig& config) {
  if (config.datasets.size() < 2) {
    throw std::invalid_argument("config: leave-one-out needs at least 2 datasets");
  }
  if (config.generator != "linear_skew" && config.generator != "nearest_neighbors") {
    throw std::invalid_argument("config: unknown generator '" + config.generator + "'");
  }
  for (int r : config.ratios) {
    if (r < 0 || r > 100) throw std::invalid_argument("config: ratios must lie in [0, 100]");
  }
  for (double a : config.alphas) {
    if (a <= 0.0 || a >= 1.0) throw std::invalid_argument("config: alphas must lie in (0, 1)");
  }
  if (config.ablation_alpha <= 0.0 || config.ablation_alpha >= 1.0) {
    throw std::invalid_argument("config: ablation_alpha must lie in (0, 1)");
  }
  if (config.seeds < 1 || config.features_per_dataset < 1 || config.nn_scenarios < 1) {
    throw std::invalid_argument("config: counts must be positive");
  }
  if (std::abs(config.p_train + config.p_test + config.p_prod - 1.0) > 1e-9) {
    throw std::invalid_argument("config: split fractions must sum to 1");
  }
  if (config.nn_p_down_lo > config.nn_p_down_hi || config.nn_p_down_lo < 0.0 ||
      config.nn_p_down_hi > 1.0) {
    throw std::invalid_argument("config: nn_p_down range must satisfy 0 <= lo <= hi <= 1");
  }
  if (config.base_kinds.empty() || config.predictor_kinds.empty() || config.alphas.empty()) {
    throw std::invalid_argument("config: base kinds, predictor kinds, and alphas must be nonempty");
  }
  for (const std::string& c : config.calibrations) {
    if (c != "z" && c != "tl") throw std::invalid_argument("config: unknown calibration '" + c + "'");
  }
}

ExperimentConfig config_from_json(const json& j) {
  ExperimentConfig config;
  if (j.contains("datasets")) {
    config.datasets.clear();
    for (const auto& d : j.at("datasets")) {
      config.datasets.push_back({d.at("csv").get<std::string>(), d.at("schema").get<std::string>()});
    }
  }
  config.generator = j.value("generator", config.generator);
  if (j.contains("ratios")) config.ratios = j.at("ratios").get<std::vector<int>>();
  config.seeds = j.value("seeds", config.seeds);
  config.features_per_dataset = j.value("features_per_dataset", config.features_per_dataset);
  config.minibatch = j.value("minibatch", config.minibatch);
  config.nn_scenarios = j.value("nn_scenarios", config.nn_scenarios);
  config.nn_p_set = j.value("nn_p_set", config.nn_p_set);
  config.nn_p_near = j.value("nn_p_near", config.nn_p_near);
  config.nn_p_down_lo = j.value("nn_p_down_lo", config.nn_p_down_lo);
  config.nn_p_down_hi = j.value("nn_p_down_hi", config.nn_p_down_hi);
  config.p_train = j.value("p_train", config.p_train);
  config.p_test = j.value("p_test", config.p_test);
  config.p_prod = j.value("p_prod", config.p_prod);
  if (j.contains("base_kinds")) {
    config.base_kinds.clear();
    for (const auto& k : j.at("base_kinds")) {
      config.base_kinds.push_back(learn::classifier_kind_from(k.get<std::string>()));
    }
  }
  if (j.contains("predictor_kinds")) {
    config.predictor_kinds.clear();
    for (const auto& k : j.at("predictor_kinds")) {
      config.predictor_kinds.push_back(predict::predictor_kind_from(k.get<std::string>()));
    }
  }
  if (j.contains("alphas")) config.alphas = j.at("alphas").get<std::vector<double>>();
  if (j.contains("calibrations")) {
    config.calibrations = j.at("calibrations").get<std::vector<std::string>>();
  }
  config.ablation_alpha = j.value("ablation_alpha", config.ablation_alpha);
  if (j.contains("ablation_kind")) {
    config.ablation_kind = predict::predictor_kind_from(j.at("ablation_kind").get<std::string>());
  }
  config.out_dir = j.value("out_dir", config.out_dir);
  config.master_seed = j.value("master_seed", config.master_seed);
  config.jobs = j.value("jobs", config.jobs);
  return config;
}

json config_to_json(const ExperimentConfig& config) {
  json datasets = json::array();
  for (const auto& d : config.datasets) datasets.push_back({{"csv", d.csv}, {"schema", d.schema}});
  json base_kinds = json::array();
  for (auto k : config.base_kinds) base_kinds.push_back(learn::to_string(k));
  json predictor_kinds = json::array();
  for (auto k : config.predictor_kinds) predictor_kinds.push_back(predict::to_string(k));
  return json{{"datasets", datasets},
              {"generator", config.generator},
              {"ratios", config.ratios},
              {"seeds", config.seeds},
              {"features_per_dataset", config.features_per_dataset},
              {"minibatch", config.minibatch},
              {"nn_scenarios", config.nn_scenarios},
              {"nn_p_set", config.nn_p_set},
              {"nn_p_near", config.nn_p_near},
              {"nn_p_down_lo", config.nn_p_down_lo},
              {"nn_p_down_hi", config.nn_p_down_hi},
              {"p_train", config.p_train},
              {"p_test", config.p_test},
              {"p_prod", config.p_prod},
              {"base_kinds", base_kinds},
              {"predictor_kinds", predictor_kinds},
              {"alphas", config.alphas},
              {"calibrations", config.calibrations},
              {"ablation_alpha", config.ablation_alpha},
              {"ablation_kind", predict::to_string(config.ablation_kind)},
              {"out_dir", config.out_dir},
              {"master_seed", config.master_seed},
              {"jobs", config.jobs}};
}

ExperimentConfig load_config(const std::string& path) {
  ExperimentConfig config = config_from_json(read_json(path));
  validate_config(config);
  return config;
}

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string config_hash(const ExperimentConfig& config) {
  std::string dump = config_to_json(config).dump();
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : dump) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::vector<int> select_skew_features(const tabular::Dataset& data, int count, int minibatch,
                                      std::uint64_t seed) {
  std::vector<int> all(data.n());
  std::iota(all.begin(), all.end(), 0);
  Rng rng(seed);
  tabular::TabularClassifier ranker =
      tabular::fit_tabular_classifier(learn::ClassifierKind::random_forest, data, all, {}, rng);
  std::vector<double> importance = ranker.model.forest.feature_importances();

  // tree encoding maps each original column to one encoded column
  std::vector<int> order(data.dim());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return importance[a] > importance[b]; });

  std::vector<int> chosen;
  for (int c : order) {
    if (static_cast<int>(chosen.size()) == count) break;
    if (data.columns[c].kind != tabular::ColumnKind::numeric) continue;
    double threshold;
    try {
      threshold = sim::median_threshold(data, c);
    } catch (const std::exception&) {
      continue;
    }
    std::size_t below = 0;
    for (std::size_t r = 0; r < data.n(); ++r) {
      double v = data.values.at(r, c);
      if (!std::isnan(v) && v <= threshold) ++below;
    }
    std::size_t above = data.n() - below;
    if (below > static_cast<std::size_t>(minibatch) && above > static_cast<std::size_t>(minibatch)) {
      chosen.push_back(c);
    }
  }
  if (static_cast<int>(chosen.size()) < count) {
    throw std::runtime_error("dataset '" + data.id + "' has only " +
                             std::to_string(chosen.size()) + " features amenable to linear skew");
  }
  return chosen;
}

ScenarioLibrary generate_library(const ExperimentConfig& config) {
  validate_config(config);

  std::vector<tabular::Dataset> datasets;
  datasets.reserve(config.datasets.size());
  for (const auto& ref : config.datasets) {
    try {
      tabular::DatasetSchema schema = tabular::load_schema(ref.schema);
      datasets.push_back(tabular::load_dataset(ref.csv, schema));
    } catch (const std::exception& e) {
      throw std::runtime_error("generate_library: failed to load dataset '" + ref.csv +
                               "': " + e.what());
    }
  }
  std::set<std::string> seen_ids;
  for (const auto& data : datasets) {
    if (!seen_ids.insert(data.id).second) {
      throw std::runtime_error("generate_library: duplicate dataset id '" + data.id + "'");
    }
  }

  Rng gen_root(config.master_seed);
  std::vector<ScenarioPlan> plans;
  for (std::size_t d = 0; d < datasets.size(); ++d) {
    const tabular::Dataset& data = datasets[d];
    if (config.generator == "linear_skew") {
      std::vector<int> features = select_skew_features(
          data, config.features_per_dataset, config.minibatch, gen_root.child(1000 + d).seed());
      for (int feature : features) {
        double threshold = sim::median_threshold(data, feature);
        for (int ratio : config.ratios) {
          for (int s = 0; s < config.seeds; ++s) {
            for (learn::ClassifierKind base : config.base_kinds) {
              ScenarioPlan plan;
              plan.id = data.id + "-ls-f" + std::to_string(feature) + "-r" +
                        std::to_string(ratio) + "-s" + std::to_string(s) + "-" +
                        learn::to_string(base);
              plan.dataset_index = d;
              plan.base_kind = base;
              plan.nn = false;
              plan.skew.feature = feature;
              plan.skew.threshold = threshold;
              plan.skew.ratio = ratio;
              plan.skew.minibatch = config.minibatch;
              plan.skew.p_train = config.p_train;
              plan.skew.p_test = config.p_test;
              plan.skew.p_prod = config.p_prod;
              plan.seed_index = s;
              plan.feature_name = data.columns[feature].name;
              plans.push_back(std::move(plan));
            }
          }
        }
      }
    } else {
      for (int s = 0; s < config.nn_scenarios; ++s) {
        for (learn::ClassifierKind base : config.base_kinds) {
          ScenarioPlan plan;
          plan.id = data.id + "-nn-s" + std::to_string(s) + "-" + learn::to_string(base);
          plan.dataset_index = d;
          plan.base_kind = base;
          plan.nn = true;
          plan.nnc.p_set = config.nn_p_set;
          plan.nnc.p_near = config.nn_p_near;
          plan.nnc.p_train = config.p_train;
          plan.nnc.p_test = config.p_test;
          plan.nnc.p_prod = config.p_prod;
          plan.seed_index = s;
          plans.push_back(std::move(plan));
        }
      }
    }
  }
  for (std::size_t i = 0; i < plans.size(); ++i) {
    plans[i].seed = gen_root.child(i + 1).seed();
    if (plans[i].nn) {
      Rng down(gen_root.child(500000 + i).seed());
      plans[i].nnc.p_down =
          config.nn_p_down_lo + (config.nn_p_down_hi - config.nn_p_down_lo) * down.uniform();
    }
  }

  std::vector<BuiltScenario> built(plans.size());
  parallel_for(plans.size(), config.jobs, [&](std::size_t i) {
    built[i] = build_plan(config, datasets[plans[i].dataset_index], plans[i]);
  });

  fs::path lib_dir = fs::path(config.out_dir) / "library";
  fs::create_directories(lib_dir);

  ScenarioLibrary library;
  library.root = lib_dir.string();
  library.feature_names = features::um_feature_names();

  std::ostringstream features_csv;
  features_csv << "# " << features::kUmSchemaVersion << "\n";
  features_csv << "scenario_id,predictor_kind";
  for (const std::string& name : library.feature_names) features_csv << "," << name;
  features_csv << "\n";

  json manifest_ids = json::array();
  json failures = json::array();
  std::set<std::string> kept_datasets;
  for (std::size_t i = 0; i < built.size(); ++i) {
    BuiltScenario& b = built[i];
    if (b.failed) {
      log_warn("scenario " + plans[i].id + " failed: " + b.failure_reason);
      failures.push_back({{"id", plans[i].id}, {"reason", b.failure_reason}});
      continue;
    }
    fs::path dir = lib_dir / ("scenario_" + b.record.id);
    fs::create_directories(dir);
    write_json(dir / "meta.json", meta_to_json(b.record));
    write_json(dir / "splits.json", json{{"train", b.split.train},
                                         {"test", b.split.test},
                                         {"prod", b.split.prod}});
    write_json(dir / "base_model.json", predict::io::tabular_classifier_to_json(b.base));
    write_json(dir / "transform.json", predict::io::transform_to_json(b.transform));
    for (const auto& [kind, predictor] : b.predictors) {
      write_json(dir / ("predictor_" + kind + ".json"), predict::io::predictor_to_json(predictor));
    }
    for (predict::PredictorKind kind : config.predictor_kinds) {
      const std::string token = predict::to_string(kind);
      features_csv << b.record.id << "," << token;
      for (double v : b.record.kinds.at(token).features) features_csv << "," << format_double(v);
      features_csv << "\n";
    }
    manifest_ids.push_back(b.record.id);
    if (kept_datasets.insert(b.record.dataset_id).second) {
      library.dataset_ids.push_back(b.record.dataset_id);
    }
    library.records.push_back(std::move(b.record));
  }

  write_text(lib_dir / "features.csv", features_csv.str());

  json schema_features = json::array();
  for (const auto& info : features::um_feature_schema()) {
    schema_features.push_back({{"name", info.name}, {"group", info.group}, {"type", info.type}});
  }
  write_json(lib_dir / "schema.json",
             json{{"format", features::kUmSchemaVersion}, {"features", schema_features}});
  write_json(lib_dir / "manifest.json", json{{"format", kLibraryFormat},
                                             {"config", config_to_json(config)},
                                             {"scenarios", manifest_ids},
                                             {"failures", failures}});
  log_info("library: " + std::to_string(library.records.size()) + " scenarios (" +
           std::to_string(failures.size()) + " failed) at " + library.root);
  return library;
}

ScenarioLibrary load_library(const std::string& dir) {
  fs::path lib_dir(dir);
  json manifest = read_json(lib_dir / "manifest.json");
  if (manifest.value("format", "") != kLibraryFormat) {
    throw std::runtime_error("unexpected library format in " + dir);
  }
  json schema = read_json(lib_dir / "schema.json");
  if (schema.value("format", "") != std::string(features::kUmSchemaVersion)) {
    throw std::runtime_error("unexpected feature schema in " + dir);
  }

  ScenarioLibrary library;
  library.root = lib_dir.string();
  for (const auto& f : schema.at("features")) {
    library.feature_names.push_back(f.at("name").get<std::string>());
  }

  // (scenario id, kind) -> feature row
  std::map<std::pair<std::string, std::string>, std::vector<double>> feature_rows;
  {
    std::ifstream in(lib_dir / "features.csv");
    if (!in) throw std::runtime_error("cannot read " + (lib_dir / "features.csv").string());
    std::string line;
    std::getline(in, line);
    if (line != "# " + std::string(features::kUmSchemaVersion)) {
      throw std::runtime_error("features.csv carries an unexpected schema header: " + line);
    }
    std::getline(in, line);  // column header
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      std::vector<std::string> cells = split_csv_line(line);
      if (cells.size() != 2 + library.feature_names.size()) {
        throw std::runtime_error("features.csv row has " + std::to_string(cells.size()) +
                                 " cells, expected " +
                                 std::to_string(2 + library.feature_names.size()));
      }
      std::vector<double> values;
      values.reserve(library.feature_names.size());
      for (std::size_t i = 2; i < cells.size(); ++i) values.push_back(std::strtod(cells[i].c_str(), nullptr));
      feature_rows[{cells[0], cells[1]}] = std::move(values);
    }
  }

  std::set<std::string> seen_datasets;
  for (const auto& id : manifest.at("scenarios")) {
    fs::path sdir = lib_dir / ("scenario_" + id.get<std::string>());
    ScenarioRecord record = meta_from_json(read_json(sdir / "meta.json"));
    for (auto& [kind, kr] : record.kinds) {
      auto it = feature_rows.find({record.id, kind});
      if (it == feature_rows.end()) {
        throw std::runtime_error("features.csv is missing scenario " + record.id + " kind " + kind);
      }
      kr.features = it->second;
    }
    if (seen_datasets.insert(record.dataset_id).second) {
      library.dataset_ids.push_back(record.dataset_id);
    }
    library.records.push_back(std::move(record));
  }
  return library;
}

StoredScenario load_scenario(const std::string& scenario_dir) {
  fs::path dir(scenario_dir);
  StoredScenario stored;
  stored.record = meta_from_json(read_json(dir / "meta.json"));
  json splits = read_json(dir / "splits.json");
  stored.split.train = splits.at("train").get<std::vector<int>>();
  stored.split.test = splits.at("test").get<std::vector<int>>();
  stored.split.prod = splits.at("prod").get<std::vector<int>>();
  stored.base = predict::io::tabular_classifier_from_json(read_json(dir / "base_model.json"));
  stored.transform = predict::io::transform_from_json(read_json(dir / "transform.json"));
  for (const auto& [kind, kr] : stored.record.kinds) {
    stored.predictors[kind] =
        predict::io::predictor_from_json(read_json(dir / ("predictor_" + kind + ".json")));
  }
  return stored;
}

}  // namespace perfband::harness
