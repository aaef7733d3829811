#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "perfband/common/rng.hpp"
#include "perfband/common/stats.hpp"
#include "perfband/harness/experiment.hpp"
#include "perfband/harness/library.hpp"
#include "perfband/tabular/bootstrap.hpp"
#include "perfband/uncertainty/uncertainty.hpp"

using namespace perfband;
using namespace perfband::harness;

namespace fs = std::filesystem;

namespace {

tabular::Dataset make_blob_dataset(const std::string& id, int n, std::uint64_t seed) {
  Rng rng(seed);
  tabular::Dataset data;
  data.id = id;
  data.label_name = "y";
  data.label_names = {"neg", "pos"};
  data.columns = {{"x1", tabular::ColumnKind::numeric, {}},
                  {"x2", tabular::ColumnKind::numeric, {}}};
  data.values = Matrix(static_cast<std::size_t>(n), 2);
  for (int i = 0; i < n; ++i) {
    int cls = i % 2;
    double cx = cls == 0 ? -1.2 : 1.2;
    data.values.at(i, 0) = cx + rng.normal();
    data.values.at(i, 1) = cx + rng.normal();
    data.labels.push_back(cls);
  }
  return data;
}

// Columns with known selection outcomes: "signal" separates the labels,
// "noise" carries nothing, "flat" is constant (one empty skew bucket), and
// "color" is categorical.
tabular::Dataset make_ranked_dataset(int n, std::uint64_t seed) {
  Rng rng(seed);
  tabular::Dataset data;
  data.id = "ranked";
  data.label_name = "y";
  data.label_names = {"a", "b"};
  data.columns = {{"noise", tabular::ColumnKind::numeric, {}},
                  {"signal", tabular::ColumnKind::numeric, {}},
                  {"flat", tabular::ColumnKind::numeric, {}},
                  {"color", tabular::ColumnKind::categorical, {"u", "v"}}};
  data.values = Matrix(static_cast<std::size_t>(n), 4);
  for (int i = 0; i < n; ++i) {
    int cls = i % 2;
    data.values.at(i, 0) = rng.uniform();
    data.values.at(i, 1) = 4.0 * cls + 0.2 * rng.normal();
    data.values.at(i, 2) = 0.0;
    data.values.at(i, 3) = rng.bernoulli(0.5) ? 1.0 : 0.0;
    data.labels.push_back(cls);
  }
  return data;
}

fs::path write_temp(const std::string& name, const std::string& content) {
  fs::path path = fs::temp_directory_path() / name;
  std::ofstream out(path);
  out << content;
  return path;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path);
  REQUIRE(bool(in));
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// Writes the dataset plus a minimal schema and returns the config reference.
DatasetRef stage_dataset(const fs::path& dir, const tabular::Dataset& data) {
  fs::path csv = dir / (data.id + ".csv");
  fs::path schema = dir / (data.id + ".schema.json");
  tabular::write_dataset_csv(data, csv.string());
  std::ofstream out(schema);
  out << "{\"id\": \"" << data.id << "\", \"label\": \"" << data.label_name << "\"}\n";
  return {csv.string(), schema.string()};
}

// Scenario records with a planted width signal: delta tracks feature 0, so a
// working uncertainty model is learnable from fabricated data alone.
ScenarioLibrary make_synthetic_library(const std::vector<std::string>& dataset_ids,
                                       int per_dataset, const std::vector<std::string>& kinds,
                                       std::uint64_t seed) {
  ScenarioLibrary lib;
  lib.root = "memory";
  lib.feature_names = features::um_feature_names();
  lib.dataset_ids = dataset_ids;
  Rng rng(seed);
  for (const std::string& ds : dataset_ids) {
    for (int i = 0; i < per_dataset; ++i) {
      ScenarioRecord record;
      record.id = ds + "-s" + std::to_string(i);
      record.dataset_id = ds;
      record.generator = "linear_skew";
      record.base_kind = "logistic";
      record.provenance = nlohmann::json{{"generator", "linear_skew"}};
      record.true_test_accuracy = 55.0 + 40.0 * rng.uniform();
      record.true_prod_accuracy = 50.0 + 40.0 * rng.uniform();
      for (const std::string& kind : kinds) {
        KindRecord kr;
        kr.features.resize(lib.feature_names.size());
        for (double& v : kr.features) v = rng.uniform();
        kr.delta = 8.0 * kr.features[0] + 0.5 * rng.uniform();
        kr.predicted_accuracy = record.true_prod_accuracy +
                                (rng.bernoulli(0.5) ? kr.delta : -kr.delta);
        kr.se_width = 0.5 + rng.uniform();
        kr.bs_width = 0.5 + rng.uniform();
        if (kind != "meta_model") kr.intrinsic_width = 0.3 + rng.uniform();
        record.kinds[kind] = std::move(kr);
      }
      lib.records.push_back(std::move(record));
    }
  }
  return lib;
}

double pair_cost(double delta, double width, double alpha) {
  return alpha * std::max(delta - width, 0.0) + (1.0 - alpha) * std::max(width - delta, 0.0);
}

ExperimentConfig dummy_config() {
  ExperimentConfig config;
  config.datasets = {{"a.csv", "a.schema.json"}, {"b.csv", "b.schema.json"}};
  return config;
}

}  // namespace

TEST_CASE("experiment config: defaults survive a JSON round trip") {
  ExperimentConfig config = dummy_config();
  config.generator = "nearest_neighbors";
  config.alphas = {0.7, 0.9};
  config.master_seed = 42;
  config.base_kinds = {learn::ClassifierKind::logistic};
  config.predictor_kinds = {predict::PredictorKind::dropout};
  config.ablation_kind = predict::PredictorKind::crossval;

  ExperimentConfig back = config_from_json(config_to_json(config));
  CHECK(config_to_json(back) == config_to_json(config));
  CHECK(config_hash(back) == config_hash(config));

  ExperimentConfig fresh = config_from_json(nlohmann::json::object());
  CHECK(fresh.generator == "linear_skew");
  CHECK(fresh.ratios.size() == 15);
  CHECK(fresh.seeds == 5);
  CHECK(fresh.features_per_dataset == 2);
  CHECK(fresh.nn_scenarios == 300);
  CHECK(fresh.alphas.size() == 10);
  CHECK(fresh.calibrations == std::vector<std::string>{"z", "tl"});
  CHECK(fresh.base_kinds.size() == 2);
  CHECK(fresh.predictor_kinds.size() == 4);
  CHECK(fresh.ablation_alpha == 0.9);
  CHECK(fresh.p_train == 0.4);
  CHECK(fresh.p_test == 0.2);
  CHECK(fresh.p_prod == 0.4);
}

TEST_CASE("experiment config: load_config reads overrides from disk") {
  fs::path path = write_temp("pb_config.json", R"({
    "datasets": [
      {"csv": "one.csv", "schema": "one.json"},
      {"csv": "two.csv", "schema": "two.json"}
    ],
    "ratios": [0, 50, 100],
    "seeds": 2,
    "alphas": [0.8],
    "base_kinds": ["logistic"],
    "predictor_kinds": ["confidence"],
    "master_seed": 9,
    "out_dir": "scratch"
  })");
  ExperimentConfig config = load_config(path.string());
  CHECK(config.datasets.size() == 2);
  CHECK(config.datasets[0].csv == "one.csv");
  CHECK(config.ratios == std::vector<int>{0, 50, 100});
  CHECK(config.seeds == 2);
  CHECK(config.alphas == std::vector<double>{0.8});
  CHECK(config.base_kinds == std::vector<learn::ClassifierKind>{learn::ClassifierKind::logistic});
  CHECK(config.master_seed == 9);
  CHECK(config.out_dir == "scratch");
}

TEST_CASE("experiment config: validation rejects bad settings") {
  ExperimentConfig base = dummy_config();
  CHECK_NOTHROW(validate_config(base));

  ExperimentConfig c = base;
  c.datasets.pop_back();
  CHECK_THROWS_AS(validate_config(c), std::invalid_argument);

  c = base;
  c.generator = "teleport";
  CHECK_THROWS_AS(validate_config(c), std::invalid_argument);

  c = base;
  c.ratios = {50, 101};
  CHECK_THROWS_AS(validate_config(c), std::invalid_argument);

  c = base;
  c.alphas = {0.5, 1.0};
  CHECK_THROWS_AS(validate_config(c), std::invalid_argument);

  c = base;
  c.ablation_alpha = 0.0;
  CHECK_THROWS_AS(validate_config(c), std::invalid_argument);

  c = base;
  c.seeds = 0;
  CHECK_THROWS_AS(validate_config(c), std::invalid_argument);

  c = base;
  c.p_train = 0.5;  // fractions no longer sum to 1
  CHECK_THROWS_AS(validate_config(c), std::invalid_argument);

  c = base;
  c.nn_p_down_lo = 0.8;
  c.nn_p_down_hi = 0.6;
  CHECK_THROWS_AS(validate_config(c), std::invalid_argument);

  c = base;
  c.predictor_kinds.clear();
  CHECK_THROWS_AS(validate_config(c), std::invalid_argument);

  c = base;
  c.calibrations = {"z", "quantile"};
  CHECK_THROWS_AS(validate_config(c), std::invalid_argument);
}

TEST_CASE("config_hash: stable across calls and sensitive to changes") {
  ExperimentConfig config = dummy_config();
  std::string h = config_hash(config);
  CHECK(h.size() == 16);
  CHECK(config_hash(config) == h);

  ExperimentConfig other = config;
  other.master_seed = 1;
  CHECK(config_hash(other) != h);
}

TEST_CASE("format_double: shortest decimal forms that round trip") {
  CHECK(format_double(1.0) == "1");
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(-2.5) == "-2.5");
  for (double v : {1.0 / 3.0, 3.141592653589793, 1e-12, 6.02e23, 100.0, 0.0}) {
    CHECK(std::strtod(format_double(v).c_str(), nullptr) == v);
  }
}

TEST_CASE("select_skew_features: importance order with amenability filter") {
  tabular::Dataset data = make_ranked_dataset(120, 31);

  std::vector<int> chosen = select_skew_features(data, 2, 20, 5);
  REQUIRE(chosen.size() == 2);
  CHECK(chosen[0] == 1);  // signal column dominates the importance ranking
  CHECK(chosen[1] == 0);  // noise column is the only other amenable one

  // constant and categorical columns are never amenable
  CHECK_THROWS_AS(select_skew_features(data, 3, 20, 5), std::runtime_error);
}

TEST_CASE("generate_library: counts, determinism, and full reload") {
  fs::path stage = fs::temp_directory_path() / "pb_harness_stage";
  fs::remove_all(stage);
  fs::create_directories(stage);

  tabular::Dataset blobs_a = make_blob_dataset("blobs_a", 160, 11);
  tabular::Dataset blobs_b = make_blob_dataset("blobs_b", 160, 22);

  ExperimentConfig config;
  config.datasets = {stage_dataset(stage, blobs_a), stage_dataset(stage, blobs_b)};
  config.ratios = {0, 50, 100};
  config.seeds = 2;
  config.features_per_dataset = 1;
  config.minibatch = 10;
  config.base_kinds = {learn::ClassifierKind::logistic};
  config.predictor_kinds = {predict::PredictorKind::confidence};
  config.alphas = {0.8};
  config.out_dir = (stage / "run1").string();
  config.master_seed = 7;

  ScenarioLibrary lib = generate_library(config);

  // 1 feature x 3 ratios x 2 seeds x 1 base model per dataset
  REQUIRE(lib.records.size() == 12);
  CHECK(lib.dataset_ids == std::vector<std::string>{"blobs_a", "blobs_b"});
  CHECK(lib.feature_names == features::um_feature_names());
  CHECK(lib.root == (fs::path(config.out_dir) / "library").string());

  std::set<std::string> ids;
  std::map<int, int> ratio_counts;
  for (const ScenarioRecord& r : lib.records) {
    CHECK(ids.insert(r.id).second);
    CHECK(r.id.rfind(r.dataset_id + "-ls-f", 0) == 0);
    CHECK(r.generator == "linear_skew");
    CHECK(r.base_kind == "logistic");
    CHECK(r.true_test_accuracy >= 0.0);
    CHECK(r.true_test_accuracy <= 100.0);
    CHECK(r.true_prod_accuracy >= 0.0);
    CHECK(r.true_prod_accuracy <= 100.0);
    ratio_counts[r.provenance.at("ratio").get<int>()]++;
    REQUIRE(r.kinds.size() == 1);
    const KindRecord& kr = r.kinds.at("confidence");
    CHECK(kr.delta == std::abs(r.true_prod_accuracy - kr.predicted_accuracy));
    // zero when every prod confidence lands in the same recalibration bin
    CHECK(kr.se_width >= 0.0);
    CHECK(kr.bs_width >= 0.0);
    REQUIRE(kr.intrinsic_width.has_value());
    CHECK(*kr.intrinsic_width >= 0.0);
    REQUIRE(kr.features.size() == features::kUmFeatureCount);
    for (double v : kr.features) CHECK(std::isfinite(v));
  }
  for (int ratio : config.ratios) CHECK(ratio_counts[ratio] == 4);

  fs::path lib_dir(lib.root);
  CHECK(fs::exists(lib_dir / "manifest.json"));
  CHECK(fs::exists(lib_dir / "schema.json"));
  fs::path first_dir = lib_dir / ("scenario_" + lib.records[0].id);
  for (const char* name :
       {"meta.json", "splits.json", "base_model.json", "transform.json",
        "predictor_confidence.json"}) {
    CHECK(fs::exists(first_dir / name));
  }

  std::string features_csv = slurp(lib_dir / "features.csv");
  CHECK(static_cast<std::size_t>(std::count(features_csv.begin(), features_csv.end(), '\n')) ==
        2 + lib.records.size());
  CHECK(features_csv.rfind("# um-features/1\n", 0) == 0);

  // reload gives back exactly what was generated
  ScenarioLibrary loaded = load_library(lib.root);
  CHECK(loaded.records == lib.records);
  CHECK(loaded.feature_names == lib.feature_names);
  CHECK(loaded.dataset_ids == lib.dataset_ids);

  // a second run from the same master seed reproduces every byte that matters
  ExperimentConfig config2 = config;
  config2.out_dir = (stage / "run2").string();
  ScenarioLibrary lib2 = generate_library(config2);
  CHECK(lib2.records == lib.records);
  CHECK(slurp(fs::path(lib2.root) / "features.csv") == features_csv);
  CHECK(slurp(fs::path(lib2.root) / ("scenario_" + lib.records[0].id) / "meta.json") ==
        slurp(first_dir / "meta.json"));

  // full scenario reload: models, splits, and recomputable measurements
  StoredScenario stored = load_scenario(first_dir.string());
  ScenarioRecord want = lib.records[0];
  for (auto& [kind, kr] : want.kinds) kr.features.clear();
  CHECK(stored.record == want);

  tabular::Dataset data = tabular::load_dataset(
      config.datasets[0].csv, tabular::load_schema(config.datasets[0].schema));
  CHECK(100.0 * tabular::classifier_accuracy(stored.base, data, stored.split.test) ==
        lib.records[0].true_test_accuracy);
  CHECK(100.0 * tabular::classifier_accuracy(stored.base, data, stored.split.prod) ==
        lib.records[0].true_prod_accuracy);

  Rng draw_rng(0);  // confidence predictions take no stochastic draws
  predict::PerformancePrediction prediction =
      predict::predict_performance(stored.predictors.at("confidence"), stored.base,
                                   stored.transform, data, stored.split.prod, draw_rng);
  const KindRecord& kr0 = lib.records[0].kinds.at("confidence");
  CHECK(prediction.predicted_accuracy == kr0.predicted_accuracy);
  const auto& conf = prediction.confidences;
  CHECK(100.0 * stdev(conf, 1) / std::sqrt(static_cast<double>(conf.size())) == kr0.se_width);
  REQUIRE(prediction.intrinsic_width.has_value());
  CHECK(100.0 * *prediction.intrinsic_width == *kr0.intrinsic_width);

  // the bootstrap width replays from the documented seed chain: scenario i
  // draws its seed from child(i + 1) of the master, the bootstrap from
  // child(13) of that
  std::uint64_t plan_seed = Rng(config.master_seed).child(1).seed();
  double bs = 100.0 * tabular::bootstrap_interval_width(conf, features::kNoiseResamples,
                                                        features::kNoiseLevel,
                                                        Rng(plan_seed).child(13).seed());
  CHECK(bs == kr0.bs_width);
}

TEST_CASE("generate_library: dataset problems fail loudly") {
  fs::path stage = fs::temp_directory_path() / "pb_harness_bad";
  fs::remove_all(stage);
  fs::create_directories(stage);

  tabular::Dataset blobs = make_blob_dataset("blobs_ok", 120, 3);
  DatasetRef good = stage_dataset(stage, blobs);

  ExperimentConfig config;
  config.base_kinds = {learn::ClassifierKind::logistic};
  config.predictor_kinds = {predict::PredictorKind::confidence};
  config.ratios = {50};
  config.seeds = 1;
  config.features_per_dataset = 1;
  config.minibatch = 10;
  config.out_dir = (stage / "out").string();

  config.datasets = {{(stage / "missing.csv").string(), good.schema}, good};
  try {
    generate_library(config);
    FAIL("expected a load failure");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find("missing.csv") != std::string::npos);
  }

  config.datasets = {good, good};
  try {
    generate_library(config);
    FAIL("expected a duplicate id failure");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find("duplicate dataset id") != std::string::npos);
  }

  // a dataset with no numeric skew candidates cannot be planned
  tabular::Dataset cats;
  cats.id = "cats";
  cats.label_name = "y";
  cats.label_names = {"a", "b"};
  cats.columns = {{"c1", tabular::ColumnKind::categorical, {"u", "v"}},
                  {"c2", tabular::ColumnKind::categorical, {"u", "v"}}};
  cats.values = Matrix(60, 2);
  Rng rng(4);
  for (int i = 0; i < 60; ++i) {
    cats.values.at(i, 0) = rng.bernoulli(0.5) ? 1.0 : 0.0;
    cats.values.at(i, 1) = rng.bernoulli(0.5) ? 1.0 : 0.0;
    cats.labels.push_back(i % 2);
  }
  fs::path cats_csv = stage / "cats.csv";
  tabular::write_dataset_csv(cats, cats_csv.string());
  std::ofstream schema_out(stage / "cats.schema.json");
  schema_out << R"({"id": "cats", "label": "y",
                    "columns": {"c1": "categorical", "c2": "categorical"}})";
  schema_out.close();
  config.datasets = {{cats_csv.string(), (stage / "cats.schema.json").string()}, good};
  try {
    generate_library(config);
    FAIL("expected an amenability failure");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find("amenable") != std::string::npos);
  }
}

TEST_CASE("ablation_feature_indices: intersections match the feature schema") {
  const std::vector<features::UmFeatureInfo>& schema = features::um_feature_schema();

  auto count = [&](const std::string& source, const std::string& group) {
    return ablation_feature_indices(schema, source, group).size();
  };

  CHECK(count("all", "all") == 76);
  CHECK(count("all", "base") == 14);
  CHECK(count("all", "perf_pred") == 25);
  CHECK(count("all", "proxy") == 22);
  CHECK(count("all", "drift") == 12);
  CHECK(count("all", "other") == 3);

  CHECK(count("distance", "all") == 45);
  CHECK(count("internal", "all") == 22);
  CHECK(count("prediction", "all") == 7);
  CHECK(count("noise", "all") == 2);

  CHECK(count("distance", "base") == 12);
  CHECK(count("distance", "proxy") == 21);
  CHECK(count("distance", "drift") == 9);
  CHECK(count("internal", "perf_pred") == 21);
  CHECK(count("internal", "proxy") == 1);
  CHECK(count("noise", "base") == 1);
  CHECK(count("noise", "perf_pred") == 1);
  CHECK(count("prediction", "base") == 1);
  CHECK(count("prediction", "perf_pred") == 3);
  CHECK(count("prediction", "drift") == 3);

  // cells whose intersection is empty are undefined
  CHECK(count("distance", "perf_pred") == 0);
  CHECK(count("internal", "base") == 0);
  CHECK(count("internal", "drift") == 0);
  CHECK(count("noise", "proxy") == 0);
  CHECK(count("noise", "drift") == 0);
  CHECK(count("prediction", "proxy") == 0);

  // each feature has exactly one type, so type counts partition every group
  for (const char* group : {"base", "perf_pred", "proxy", "drift", "other", "all"}) {
    std::size_t total = 0;
    for (const char* source : {"distance", "internal", "prediction", "noise"}) {
      total += count(source, group);
    }
    CHECK(total == count("all", group));
  }

  std::vector<int> indices = ablation_feature_indices(schema, "distance", "base");
  CHECK(std::is_sorted(indices.begin(), indices.end()));
  for (int i : indices) {
    CHECK(i >= 0);
    CHECK(i < static_cast<int>(schema.size()));
  }
}

TEST_CASE("run_loo_experiment: cell grid, baselines, and training hygiene") {
  const std::vector<std::string> datasets{"ds0", "ds1", "ds2"};
  const int per = 40;
  ScenarioLibrary lib = make_synthetic_library(datasets, per, {"confidence", "meta_model"}, 99);

  ExperimentConfig config = dummy_config();
  config.predictor_kinds = {predict::PredictorKind::confidence,
                            predict::PredictorKind::meta_model};
  config.alphas = {0.8};
  config.master_seed = 13;

  ReportBundle bundle = run_loo_experiment(config, lib, lib);

  CHECK(bundle.config == config_to_json(config));
  CHECK(bundle.config_hash == config_hash(config));
  CHECK(bundle.train_library == lib.root);
  CHECK(bundle.ablation.empty());

  // method grid: intrinsic baselines exist only where the predictor reports
  // an intrinsic width
  std::vector<std::pair<std::string, std::string>> expected;
  for (const char* m : {"um", "se_z", "se_tl", "bs_z", "bs_tl", "c_z", "c_tl", "i_z", "i_tl"}) {
    expected.push_back({"confidence", m});
  }
  for (const char* m : {"um", "se_z", "se_tl", "bs_z", "bs_tl", "c_z", "c_tl"}) {
    expected.push_back({"meta_model", m});
  }
  REQUIRE(bundle.costs.size() == expected.size());
  for (std::size_t i = 0; i < expected.size(); ++i) {
    CHECK(bundle.costs[i].predictor == expected[i].first);
    CHECK(bundle.costs[i].method == expected[i].second);
    CHECK(bundle.costs[i].alpha == 0.8);
  }

  std::vector<std::string> all_ids;
  for (const ScenarioRecord& r : lib.records) all_ids.push_back(r.id);

  std::map<std::string, const ScenarioRecord*> by_id;
  for (const ScenarioRecord& r : lib.records) by_id[r.id] = &r;

  const double z = uncertainty::z_scale(0.8);
  for (const CostCell& cell : bundle.costs) {
    // every cell pools each evaluation scenario exactly once, target-major
    CHECK(cell.scenario_ids == all_ids);
    REQUIRE(cell.deltas.size() == all_ids.size());
    REQUIRE(cell.widths.size() == all_ids.size());
    REQUIRE(cell.costs.size() == all_ids.size());
    CHECK(cell.mean_cost == doctest::Approx(mean(cell.costs)).epsilon(1e-12));
    CHECK(cell.ci_lo <= cell.mean_cost);
    CHECK(cell.ci_hi >= cell.mean_cost);
    for (std::size_t i = 0; i < cell.costs.size(); ++i) {
      const KindRecord& kr = by_id.at(cell.scenario_ids[i])->kinds.at(cell.predictor);
      CHECK(cell.deltas[i] == kr.delta);
      CHECK(cell.costs[i] == pair_cost(cell.deltas[i], cell.widths[i], cell.alpha));
      if (cell.method == "se_z") CHECK(cell.widths[i] == z * kr.se_width);
      if (cell.method == "bs_z") CHECK(cell.widths[i] == z * kr.bs_width);
      if (cell.method == "c_z") CHECK(cell.widths[i] == z);
      if (cell.method == "i_z") CHECK(cell.widths[i] == z * *kr.intrinsic_width);
    }
  }

  // replay target ds0 for the confidence predictor: external scenarios are
  // exactly the other datasets' records, in library order
  std::vector<const ScenarioRecord*> ext;
  for (const ScenarioRecord& r : lib.records) {
    if (r.dataset_id != "ds0") ext.push_back(&r);
  }
  REQUIRE(ext.size() == 2 * per);
  Matrix ext_features(ext.size(), lib.feature_names.size());
  std::vector<double> ext_deltas, ext_se;
  for (std::size_t i = 0; i < ext.size(); ++i) {
    const KindRecord& kr = ext[i]->kinds.at("confidence");
    for (std::size_t c = 0; c < kr.features.size(); ++c) ext_features.at(i, c) = kr.features[c];
    ext_deltas.push_back(kr.delta);
    ext_se.push_back(kr.se_width);
  }
  Matrix tgt_features(per, lib.feature_names.size());
  for (int i = 0; i < per; ++i) {
    const KindRecord& kr = lib.records[static_cast<std::size_t>(i)].kinds.at("confidence");
    for (std::size_t c = 0; c < kr.features.size(); ++c) tgt_features.at(i, c) = kr.features[c];
  }

  Rng pipeline_rng = Rng(config.master_seed).child(2).child(1).child(1).child(1);
  uncertainty::UmPipeline pipeline = uncertainty::build_um_pipeline(
      ext_features, ext_deltas, lib.feature_names, "confidence", 0.8, pipeline_rng);
  std::vector<double> um_widths = pipeline.model.predict_widths(tgt_features);

  const CostCell& um_cell = bundle.costs[0];
  REQUIRE(um_cell.method == "um");
  for (int i = 0; i < per; ++i) {
    CHECK(um_cell.widths[static_cast<std::size_t>(i)] ==
          pipeline.scale * um_widths[static_cast<std::size_t>(i)]);
  }

  double se_scale = uncertainty::tl_calibrate(ext_se, ext_deltas, 0.8);
  const CostCell& se_tl_cell = bundle.costs[2];
  REQUIRE(se_tl_cell.method == "se_tl");
  for (int i = 0; i < per; ++i) {
    const KindRecord& kr = lib.records[static_cast<std::size_t>(i)].kinds.at("confidence");
    CHECK(se_tl_cell.widths[static_cast<std::size_t>(i)] == se_scale * kr.se_width);
  }

  // plot rows mirror the um cells row for row
  REQUIRE(bundle.scenarios.size() == 2 * all_ids.size());
  for (std::size_t i = 0; i < all_ids.size(); ++i) {
    const ScenarioPlotRow& row = bundle.scenarios[i];
    CHECK(row.predictor == "confidence");
    CHECK(row.scenario_id == um_cell.scenario_ids[i]);
    CHECK(row.alpha == 0.8);
    CHECK(row.calibrated_width == um_cell.widths[i]);
    CHECK(row.delta == um_cell.deltas[i]);
    CHECK(row.lower == row.predicted_prod_accuracy - row.calibrated_width);
    CHECK(row.upper == row.predicted_prod_accuracy + row.calibrated_width);
    CHECK(row.raw_width >= 0.0);
    const ScenarioRecord& r = *by_id.at(row.scenario_id);
    CHECK(row.dataset_id == r.dataset_id);
    CHECK(row.true_prod_accuracy == r.true_prod_accuracy);
    CHECK(row.predicted_prod_accuracy == r.kinds.at("confidence").predicted_accuracy);
  }

  // a second run is bit for bit identical
  ReportBundle again = run_loo_experiment(config, lib, lib);
  CHECK(again == bundle);
}

TEST_CASE("run_loo_experiment: rejects unusable inputs") {
  ExperimentConfig config = dummy_config();
  config.predictor_kinds = {predict::PredictorKind::confidence};
  config.alphas = {0.8};

  ScenarioLibrary solo = make_synthetic_library({"only"}, 70, {"confidence"}, 1);
  CHECK_THROWS_AS(run_loo_experiment(config, solo, solo), std::runtime_error);

  ScenarioLibrary lib = make_synthetic_library({"ds0", "ds1"}, 64, {"confidence"}, 2);
  ScenarioLibrary renamed = lib;
  renamed.feature_names[0] = "bogus";
  CHECK_THROWS_AS(run_loo_experiment(config, renamed, renamed), std::runtime_error);

  ExperimentConfig wrong_kind = config;
  wrong_kind.predictor_kinds = {predict::PredictorKind::crossval};
  CHECK_THROWS_AS(run_loo_experiment(wrong_kind, lib, lib), std::runtime_error);
}

TEST_CASE("run_ablation: defined cells only, normalized to the full model") {
  ScenarioLibrary lib = make_synthetic_library({"ds0", "ds1"}, 63, {"confidence"}, 55);

  ExperimentConfig config = dummy_config();
  config.predictor_kinds = {predict::PredictorKind::confidence};
  config.alphas = {0.9};
  config.ablation_alpha = 0.9;
  config.ablation_kind = predict::PredictorKind::confidence;
  config.master_seed = 21;

  std::vector<AblationCell> grid = run_ablation(config, lib, lib);

  // 25 source x group combinations minus the 6 empty intersections
  REQUIRE(grid.size() == 19);
  CHECK(grid.front().source == "distance");
  CHECK(grid.front().group == "base");
  CHECK(grid.back().source == "all");
  CHECK(grid.back().group == "all");
  CHECK(grid.back().normalized == 1.0);
  CHECK(grid.back().n_features == 76);

  const std::vector<features::UmFeatureInfo>& schema = features::um_feature_schema();
  std::set<std::pair<std::string, std::string>> seen;
  for (const AblationCell& cell : grid) {
    seen.insert({cell.source, cell.group});
    CHECK(cell.n_features ==
          static_cast<int>(ablation_feature_indices(schema, cell.source, cell.group).size()));
    CHECK(cell.n_features > 0);
    CHECK(cell.mean_cost > 0.0);
    CHECK(cell.normalized > 0.0);
    CHECK(cell.normalized == cell.mean_cost / grid.back().mean_cost);
  }
  for (const auto& undefined :
       std::vector<std::pair<std::string, std::string>>{{"distance", "perf_pred"},
                                                        {"internal", "base"},
                                                        {"internal", "drift"},
                                                        {"noise", "proxy"},
                                                        {"noise", "drift"},
                                                        {"prediction", "proxy"}}) {
    CHECK(seen.count(undefined) == 0);
  }
}

TEST_CASE("emit_report and load_report: round trip with recompute guard") {
  fs::path out = fs::temp_directory_path() / "pb_harness_report";
  fs::remove_all(out);

  ReportBundle bundle;
  bundle.config = config_to_json(dummy_config());
  bundle.config_hash = config_hash(dummy_config());
  bundle.train_library = "train/library";
  bundle.eval_library = "eval/library";

  CostCell cell;
  cell.predictor = "confidence";
  cell.method = "um";
  cell.alpha = 0.8;
  cell.scenario_ids = {"a-s0", "a-s1", "b-s0"};
  cell.deltas = {1.0, 2.0, 3.0};
  cell.widths = {1.5, 1.5, 1.5};
  cell.costs = {0.1, 0.4, 1.2};
  cell.mean_cost = (0.1 + 0.4 + 1.2) / 3.0;
  cell.ci_lo = 0.1;
  cell.ci_hi = 1.2;
  bundle.costs.push_back(cell);
  cell.method = "se_z";
  bundle.costs.push_back(cell);

  ScenarioPlotRow row;
  row.scenario_id = "a-s0";
  row.dataset_id = "a";
  row.predictor = "confidence";
  row.alpha = 0.8;
  row.true_prod_accuracy = 81.0;
  row.predicted_prod_accuracy = 80.0;
  row.delta = 1.0;
  row.raw_width = 0.75;
  row.calibrated_width = 1.5;
  row.lower = 78.5;
  row.upper = 81.5;
  bundle.scenarios.push_back(row);

  AblationCell abl;
  abl.source = "all";
  abl.group = "all";
  abl.n_features = 76;
  abl.mean_cost = 0.9;
  abl.normalized = 1.0;
  bundle.ablation.push_back(abl);

  emit_report(bundle, out.string());
  for (const char* name : {"report.json", "costs.csv", "scenarios.csv", "ablation.csv"}) {
    CHECK(fs::exists(out / name));
  }

  ReportBundle loaded = load_report((out / "report.json").string());
  CHECK(loaded == bundle);

  std::string costs_csv = slurp(out / "costs.csv");
  CHECK(static_cast<std::size_t>(std::count(costs_csv.begin(), costs_csv.end(), '\n')) ==
        1 + bundle.costs.size());
  CHECK(costs_csv.rfind("predictor,method,alpha,mean_cost,ci_lo,ci_hi,n\n", 0) == 0);
  std::string scen_csv = slurp(out / "scenarios.csv");
  CHECK(static_cast<std::size_t>(std::count(scen_csv.begin(), scen_csv.end(), '\n')) ==
        1 + bundle.scenarios.size());

  // emission is byte deterministic
  fs::path out2 = fs::temp_directory_path() / "pb_harness_report2";
  fs::remove_all(out2);
  emit_report(bundle, out2.string());
  CHECK(slurp(out2 / "costs.csv") == costs_csv);
  CHECK(slurp(out2 / "report.json") == slurp(out / "report.json"));

  // json-only emission writes no csv
  fs::path out3 = fs::temp_directory_path() / "pb_harness_report3";
  fs::remove_all(out3);
  emit_report(bundle, out3.string(), {"json"});
  CHECK(fs::exists(out3 / "report.json"));
  CHECK(!fs::exists(out3 / "costs.csv"));

  // a mean that disagrees with its per-scenario costs is refused
  ReportBundle tampered = bundle;
  tampered.costs[0].mean_cost += 0.5;
  CHECK_THROWS_AS(emit_report(tampered, (out3 / "x").string()), std::logic_error);

  CHECK_THROWS_AS(emit_report(bundle, (out3 / "y").string(), {"yaml"}), std::invalid_argument);
}
