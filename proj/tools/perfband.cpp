#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "perfband/common/log.hpp"
#include "perfband/harness/experiment.hpp"
#include "perfband/harness/library.hpp"
#include "perfband/uncertainty/uncertainty.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace perfband;
using namespace perfband::harness;

namespace {

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<int> jobs;
};

void add_override_flags(CLI::App* cmd, Overrides& ov) {
  cmd->add_option("--seed", ov.seed, "Master seed (overrides the config)");
  cmd->add_option("--out", ov.out, "Output directory (overrides the config)");
  cmd->add_option("--jobs", ov.jobs, "Worker count (overrides the config)");
}

ExperimentConfig load_with_overrides(const std::string& path, const Overrides& ov) {
  ExperimentConfig config = load_config(path);
  if (ov.seed) config.master_seed = *ov.seed;
  if (ov.out) config.out_dir = *ov.out;
  if (ov.jobs) config.jobs = *ov.jobs;
  validate_config(config);
  return config;
}

void write_json_file(const fs::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(2) << "\n";
}

// Feature matrix and delta targets for one predictor kind over a record subset.
struct KindData {
  Matrix features;
  std::vector<double> deltas;
};

KindData gather_kind(const ScenarioLibrary& lib, const std::string& target, bool external,
                     const std::string& kind) {
  std::vector<const ScenarioRecord*> records;
  for (const ScenarioRecord& r : lib.records) {
    if ((r.dataset_id != target) == external) records.push_back(&r);
  }
  KindData data;
  data.features = Matrix(records.size(), lib.feature_names.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    const KindRecord& kr = records[i]->kinds.at(kind);
    for (std::size_t c = 0; c < kr.features.size(); ++c) data.features.at(i, c) = kr.features[c];
    data.deltas.push_back(kr.delta);
  }
  return data;
}

int cmd_simulate(const std::string& config_path, const Overrides& ov) {
  ExperimentConfig config = load_with_overrides(config_path, ov);
  ScenarioLibrary lib = generate_library(config);
  std::cout << json{{"library", lib.root},
                    {"scenarios", lib.records.size()},
                    {"datasets", lib.dataset_ids},
                    {"config_hash", config_hash(config)}}
                   .dump()
            << "\n";
  return 0;
}

int cmd_train_um(const std::string& config_path, const Overrides& ov,
                 std::string library_dir) {
  ExperimentConfig config = load_with_overrides(config_path, ov);
  if (library_dir.empty()) library_dir = (fs::path(config.out_dir) / "library").string();
  ScenarioLibrary lib = load_library(library_dir);
  if (lib.dataset_ids.size() < 2) {
    throw std::runtime_error("leave-one-out needs scenarios from at least 2 datasets");
  }

  fs::path models_dir = fs::path(config.out_dir) / "models";
  int written = 0;
  Rng eval_root = Rng(config.master_seed).child(2);
  for (std::size_t k = 0; k < config.predictor_kinds.size(); ++k) {
    const std::string kind = predict::to_string(config.predictor_kinds[k]);
    for (std::size_t t = 0; t < lib.dataset_ids.size(); ++t) {
      const std::string& target = lib.dataset_ids[t];
      KindData ext = gather_kind(lib, target, true, kind);
      for (std::size_t a = 0; a < config.alphas.size(); ++a) {
        double alpha = config.alphas[a];
        Rng pipeline_rng = eval_root.child(k + 1).child(t + 1).child(a + 1);
        uncertainty::UmPipeline pipeline = uncertainty::build_um_pipeline(
            ext.features, ext.deltas, lib.feature_names, kind, alpha, pipeline_rng);
        fs::path dir = models_dir / kind / target / ("alpha_" + format_double(alpha));
        fs::create_directories(dir);
        write_json_file(dir / "um.json", uncertainty::io::um_to_json(pipeline.model));
        write_json_file(dir / "calibration.json",
                        json{{"format", "perfband-calibration/1"},
                             {"scale", pipeline.scale},
                             {"alpha", alpha},
                             {"predictor_kind", kind},
                             {"target", target},
                             {"train_index", pipeline.train_index},
                             {"calib_index", pipeline.calib_index}});
        ++written;
      }
    }
  }
  std::cout << json{{"models", written}, {"dir", models_dir.string()}}.dump() << "\n";
  return 0;
}

int cmd_evaluate(const std::string& config_path, const Overrides& ov, std::string train_dir,
                 std::string eval_dir) {
  ExperimentConfig config = load_with_overrides(config_path, ov);
  if (train_dir.empty()) train_dir = (fs::path(config.out_dir) / "library").string();
  if (eval_dir.empty()) eval_dir = train_dir;
  ScenarioLibrary train = load_library(train_dir);
  ScenarioLibrary eval = train_dir == eval_dir ? train : load_library(eval_dir);

  ReportBundle bundle = run_loo_experiment(config, train, eval);
  fs::path report_dir = fs::path(config.out_dir) / "report";
  emit_report(bundle, report_dir.string());
  std::cout << json{{"report", (report_dir / "report.json").string()},
                    {"cells", bundle.costs.size()},
                    {"scenarios", bundle.scenarios.size()}}
                   .dump()
            << "\n";
  return 0;
}

int cmd_ablate(const std::string& config_path, const Overrides& ov, std::string train_dir,
               std::string eval_dir) {
  ExperimentConfig config = load_with_overrides(config_path, ov);
  if (train_dir.empty()) train_dir = (fs::path(config.out_dir) / "library").string();
  if (eval_dir.empty()) eval_dir = train_dir;
  ScenarioLibrary train = load_library(train_dir);
  ScenarioLibrary eval = train_dir == eval_dir ? train : load_library(eval_dir);

  ReportBundle bundle;
  bundle.config = config_to_json(config);
  bundle.config_hash = config_hash(config);
  bundle.train_library = train.root;
  bundle.eval_library = eval.root;
  bundle.ablation = run_ablation(config, train, eval);

  fs::path report_dir = fs::path(config.out_dir) / "ablation";
  emit_report(bundle, report_dir.string());
  std::cout << json{{"report", (report_dir / "report.json").string()},
                    {"cells", bundle.ablation.size()}}
                   .dump()
            << "\n";
  return 0;
}

int cmd_report(const std::string& report_path, const std::string& out_dir,
               std::vector<std::string> formats) {
  if (formats.empty()) formats = {"json", "csv"};
  ReportBundle bundle = load_report(report_path);
  emit_report(bundle, out_dir, formats);
  std::cout << json{{"out", out_dir}, {"formats", formats}}.dump() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Accuracy prediction with calibrated uncertainty bands"};
  app.require_subcommand(1);

  std::string config_path, report_path;
  std::string library_dir, train_dir, eval_dir, report_out;
  std::vector<std::string> formats;
  Overrides ov;

  CLI::App* simulate = app.add_subcommand("simulate", "Generate the drift scenario library");
  simulate->add_option("config", config_path, "Experiment config JSON")->required();
  add_override_flags(simulate, ov);

  CLI::App* train_um = app.add_subcommand("train-um", "Train and save leave-one-out UMs");
  train_um->add_option("config", config_path, "Experiment config JSON")->required();
  train_um->add_option("--library", library_dir, "Scenario library directory");
  add_override_flags(train_um, ov);

  CLI::App* evaluate = app.add_subcommand("evaluate", "Leave-one-out cost evaluation");
  evaluate->add_option("config", config_path, "Experiment config JSON")->required();
  evaluate->add_option("--train-library", train_dir, "Library UMs train on");
  evaluate->add_option("--eval-library", eval_dir, "Library UMs are scored on");
  add_override_flags(evaluate, ov);

  CLI::App* ablate = app.add_subcommand("ablate", "Feature-group ablation grid");
  ablate->add_option("config", config_path, "Experiment config JSON")->required();
  ablate->add_option("--train-library", train_dir, "Library UMs train on");
  ablate->add_option("--eval-library", eval_dir, "Library UMs are scored on");
  add_override_flags(ablate, ov);

  CLI::App* report = app.add_subcommand("report", "Re-emit an existing report");
  report->add_option("report", report_path, "Path to report.json")->required();
  report->add_option("--out", report_out, "Output directory")->required();
  report->add_option("--format", formats, "Output formats (json, csv)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() != 0) {
      std::cerr << json{{"error", e.what()}, {"code", e.get_name()}}.dump() << "\n";
    }
    return app.exit(e);
  }

  const std::string name = app.get_subcommands().front()->get_name();
  try {
    if (simulate->parsed()) return cmd_simulate(config_path, ov);
    if (train_um->parsed()) return cmd_train_um(config_path, ov, library_dir);
    if (evaluate->parsed()) return cmd_evaluate(config_path, ov, train_dir, eval_dir);
    if (ablate->parsed()) return cmd_ablate(config_path, ov, train_dir, eval_dir);
    if (report->parsed()) return cmd_report(report_path, report_out, formats);
  } catch (const std::exception& e) {
    std::cerr << json{{"error", e.what()}, {"command", name}}.dump() << "\n";
    return 1;
  }
  return 0;
}
