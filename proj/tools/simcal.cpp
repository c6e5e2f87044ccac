// simcal: run calibration campaigns and report on their results.

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "simcal/analysis.hpp"
#include "simcal/runner.hpp"
#include "simcal/scenes.hpp"

namespace fs = std::filesystem;
using namespace simcal;

namespace {

int cmd_run(const fs::path& manifest_path, std::optional<unsigned> workers, bool resume, bool quiet) {
  RunManifest m = load_manifest(manifest_path);
  if (workers) m.workers = *workers;
  CampaignOptions opts;
  opts.resume = resume;
  if (!quiet) {
    opts.on_cell = [](const CellResult& c) {
      std::cerr << (c.resumed ? "skip " : "done ") << c.key.dir_name() << "  baseline "
                << detail::format_double(c.baseline_fitness) << "  best " << detail::format_double(c.best_fitness)
                << "  " << to_string(c.reason) << " @" << c.generations << '\n';
    };
  }
  const auto summary = run_campaign(m, opts);
  std::cerr << summary.executed << " cell(s) run, " << summary.skipped << " skipped; results in "
            << m.output_dir.string() << '\n';
  return 0;
}

int cmd_baseline(const fs::path& manifest_path) {
  const RunManifest m = load_manifest(manifest_path);
  const auto rows = run_baselines(m);
  std::cout << "group,experiment,backend,baseline_fitness\n";
  for (const auto& r : rows)
    std::cout << to_string(r.group) << ',' << r.experiment_id << ',' << r.backend << ','
              << detail::format_double(r.fitness) << '\n';
  return 0;
}

/// Writes ground truth for tasks 1..10 by simulating the built-in scenes
/// with `backend`'s generic settings overridden by an assignment file.
int cmd_synth(const std::string& backend_name, const fs::path& out_dir, const std::optional<fs::path>& params_path) {
  const BackendRegistry backends = BackendRegistry::with_reference_engines();
  const Backend& backend = backends.get(backend_name);
  NamedAssignment overrides;
  if (params_path) {
    std::ifstream in(*params_path);
    if (!in) throw ConfigError("cannot open " + params_path->string());
    overrides = assignment_from_json(json::parse(in));
  }
  for (int task = 1; task <= 10; ++task) {
    const SceneSpec scene = builtin_scene(task);
    const PhysicsParams p = apply_assignment(backend.generic_params(scene), overrides, scene, /*ignore_unknown=*/true);
    const auto dir = out_dir / (std::string("task_") + (task < 10 ? "0" : "") + std::to_string(task));
    store_ground_truth(dir, synthesize_ground_truth(task, backend, scene, p));
    std::cerr << "wrote " << dir.string() << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulator parameter calibration by differential evolution"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Run (or resume) every cell of a campaign manifest");
  std::string manifest;
  std::optional<unsigned> workers;
  bool resume = false, quiet = false;
  run->add_option("--manifest", manifest, "Campaign manifest (JSON)")->required()->check(CLI::ExistingFile);
  run->add_option("--workers", workers, "Concurrent cells (overrides the manifest)")->check(CLI::PositiveNumber);
  run->add_flag("--resume", resume, "Skip cells that already completed");
  run->add_flag("-q,--quiet", quiet, "No per-cell progress");

  auto* baseline = app.add_subcommand("baseline", "Fitness of each backend's generic settings");
  baseline->add_option("--manifest", manifest, "Campaign manifest (JSON)")->required()->check(CLI::ExistingFile);

  auto* synth = app.add_subcommand("synth", "Write synthetic ground truth for the built-in tasks");
  std::string synth_backend = "engine-a";
  std::string synth_out;
  std::optional<std::string> synth_params;
  synth->add_option("--backend", synth_backend, "Reference engine")->capture_default_str();
  synth->add_option("--out", synth_out, "Output directory")->required();
  synth->add_option("--params", synth_params, "JSON object of parameter overrides")->check(CLI::ExistingFile);

  auto* report = app.add_subcommand("report", "CSV reports over a finished campaign");
  report->require_subcommand(1);
  std::string campaign, backend, group_name = "Shared";
  int experiment = 0;

  auto* improvement = report->add_subcommand("improvement", "Best generic vs best tuned fitness per experiment");
  improvement->add_option("--campaign", campaign, "Campaign output directory")->required();
  std::optional<std::string> improvement_group;
  improvement->add_option("--group", improvement_group, "Restrict to one parameter group");

  auto* importance = report->add_subcommand("importance", "Spread of repeat-best parameter values");
  importance->add_option("--campaign", campaign, "Campaign output directory")->required();
  importance->add_option("--backend", backend, "Backend id")->required();
  importance->add_option("--experiment", experiment, "Experiment 1..11")->required()->check(CLI::Range(1, 11));
  importance->add_option("--group", group_name, "Parameter group")->capture_default_str();

  auto* convergence = report->add_subcommand("convergence", "Best fitness per generation averaged over repeats");
  convergence->add_option("--campaign", campaign, "Campaign output directory")->required();
  convergence->add_option("--experiment", experiment, "Experiment 1..11")->required()->check(CLI::Range(1, 11));
  convergence->add_option("--group", group_name, "Parameter group")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(manifest, workers, resume, quiet);
    if (*baseline) return cmd_baseline(manifest);
    if (*synth)
      return cmd_synth(synth_backend, synth_out,
                       synth_params ? std::optional<fs::path>(*synth_params) : std::nullopt);
    const auto cells = load_campaign(campaign);
    if (*improvement) {
      std::optional<ParameterGroup> g;
      if (improvement_group) g = parse_group(*improvement_group);
      write_improvement_csv(std::cout, improvement_reports(cells, g));
    } else if (*importance) {
      const auto r = parameter_importance(cells, parse_group(group_name), backend, experiment);
      if (r.insufficient_data) {
        std::cerr << "insufficient data: " << r.repeats << " completed repeat(s), need at least 2\n";
        return 3;
      }
      write_importance_csv(std::cout, r);
    } else if (*convergence) {
      write_convergence_csv(std::cout, export_convergence(cells, experiment, parse_group(group_name)));
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
