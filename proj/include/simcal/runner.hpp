#ifndef SIMCAL_RUNNER_HPP
#define SIMCAL_RUNNER_HPP

// Experiment definitions, candidate evaluation and the resumable campaign
// driver. A campaign is the product (group x experiment x backend x repeat);
// every cell persists into its own directory
//
//   <output_dir>/g{group}_e{experiment}_b{backend}_r{repeat}/
//       generations.jsonl   one GenerationRecord per line
//       best.json           final best vector, fitness, termination reason
//
// best.json is written last (via rename) and marks the cell complete.

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "simcal/dataset_io.hpp"
#include "simcal/error.hpp"
#include "simcal/external_backend.hpp"
#include "simcal/fitness.hpp"
#include "simcal/optimizer.hpp"
#include "simcal/parallel.hpp"
#include "simcal/param_space.hpp"
#include "simcal/rng.hpp"
#include "simcal/scenes.hpp"
#include "simcal/serialization.hpp"
#include "simcal/simkit.hpp"

namespace simcal {

inline constexpr int kCombinedExperiment = 11;

struct TaskSetup {
  int task_id = 0;
  SceneSpec scene;
  GroundTruthRecord ground_truth;
};

struct ExperimentSpec {
  int experiment_id = 0;
  ParameterGroup parameter_group = ParameterGroup::Shared;
  std::vector<TaskSetup> tasks;

  std::vector<int> task_ids() const {
    std::vector<int> out;
    for (const auto& t : tasks) out.push_back(t.task_id);
    return out;
  }

  /// Experiments 1..10 hold their own task; 11 holds tasks 1..10.
  void validate() const {
    const std::string ctx = "experiment " + std::to_string(experiment_id);
    if (experiment_id < 1 || experiment_id > kCombinedExperiment) throw ConfigError(ctx + ": id must be in 1..11");
    std::vector<int> ids = task_ids();
    std::sort(ids.begin(), ids.end());
    if (experiment_id == kCombinedExperiment) {
      std::vector<int> all(10);
      for (int i = 0; i < 10; ++i) all[i] = i + 1;
      if (ids != all) throw ConfigError(ctx + ": must contain exactly tasks 1..10");
    } else if (ids != std::vector<int>{experiment_id}) {
      throw ConfigError(ctx + ": must contain exactly task " + std::to_string(experiment_id));
    }
    for (const auto& t : tasks) {
      if (t.ground_truth.task_id != t.task_id) throw ConfigError(ctx + ": ground truth belongs to another task");
      if (GroundTruthRecord::task_has_object(t.task_id) != t.scene.object.has_value())
        throw ConfigError(ctx + ": task " + std::to_string(t.task_id) +
                          (t.scene.object ? " must not have an object" : " needs exactly one object"));
      t.ground_truth.validate();
      t.scene.validate();
    }
  }

  /// Union of the bodies of every task scene, first occurrence wins.
  std::vector<BodySpec> bodies() const {
    std::vector<BodySpec> out;
    std::set<std::string> seen;
    for (const auto& t : tasks)
      for (auto& b : t.scene.bodies())
        if (seen.insert(b.id).second) out.push_back(std::move(b));
    return out;
  }

  std::vector<SceneSpec> scenes() const {
    std::vector<SceneSpec> out;
    for (const auto& t : tasks) out.push_back(t.scene);
    return out;
  }
};

enum class ClockMode { Wall, Evaluations };

struct RunManifest {
  std::vector<ExperimentSpec> experiments;
  std::vector<std::string> backends;
  int repeats = 1;
  DEConfig de_config;
  std::optional<ParameterRegistry> registry;  // nullopt: default composition per experiment
  std::filesystem::path output_dir;
  bool baseline_injection = true;
  ClockMode clock = ClockMode::Wall;
  double seconds_per_evaluation = 0.001;  // Evaluations clock only
  unsigned workers = 1;
  BackendRegistry backend_registry = BackendRegistry::with_reference_engines();

  void validate() const {
    if (repeats < 1) throw ConfigError("manifest: repeats must be >= 1");
    if (experiments.empty()) throw ConfigError("manifest: no experiments");
    if (backends.empty()) throw ConfigError("manifest: no backends");
    for (const auto& b : backends) backend_registry.get(b);
    for (const auto& e : experiments) e.validate();
  }
};

/// Registry tuned for `spec`: the manifest's explicit registry (Shared subset
/// for the Shared group), or the default composition over the scene bodies.
inline ParameterRegistry registry_for(const RunManifest& m, const ExperimentSpec& spec) {
  if (m.registry) return spec.parameter_group == ParameterGroup::Shared ? m.registry->shared_subset() : *m.registry;
  return default_registry(spec.parameter_group, spec.bodies(), kJoints);
}

// ---------------------------------------------------------------------------
// Evaluation

/// Fitness of one task: kinematic fitness for tasks without an object, kinematic
/// plus final object offset otherwise. Failed simulations score the penalty.
inline FitnessValue evaluate_task(const TaskSetup& task, const Backend& backend, const ParameterRegistry& registry,
                                  const ParameterVector& params, bool shared_registry, double penalty) {
  SimResult sim;
  try {
    sim = backend.simulate(task.scene, resolve_params(backend, task.scene, registry, params, shared_registry));
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception&) {
    return penalize_failure(FailureReason::Diverged, task.task_id, penalty);
  }
  if (sim.status == SimStatus::Diverged) return penalize_failure(FailureReason::Diverged, task.task_id, penalty);
  if (sim.status != SimStatus::Ok) return penalize_failure(FailureReason::NonFiniteState, task.task_id, penalty);
  const auto& ref = task.ground_truth.wrist;
  const auto aligned = align_to_reference(sim.wrist, ref);
  if (!task.ground_truth.object_final_pose) return kinematic_fitness(aligned, ref, task.task_id);
  if (!sim.object_final) throw ConfigError("backend returned no object pose for object task " +
                                           std::to_string(task.task_id));
  const FitnessValue f = object_fitness(aligned, ref, *sim.object_final,
                                        task.ground_truth.object_final_pose->position(), task.task_id);
  return std::isfinite(f.value) ? f : penalize_failure(FailureReason::NonFiniteState, task.task_id, penalty);
}

/// Experiment fitness: the single task's fitness, or for experiment 11 the
/// sum over tasks 1..10.
inline FitnessValue evaluate_candidate(const ExperimentSpec& spec, const Backend& backend,
                                       const ParameterRegistry& registry, const ParameterVector& params,
                                       double penalty = kDefaultPenalty) {
  registry.require_aligned(params);
  const bool multi = spec.tasks.size() > 1;
  std::vector<FitnessValue> parts;
  parts.reserve(spec.tasks.size());
  for (const auto& t : spec.tasks) parts.push_back(evaluate_task(t, backend, registry, params, multi, penalty));
  if (spec.experiment_id == kCombinedExperiment) return combined_fitness(parts);
  if (parts.size() != 1) throw ContractError("evaluate_candidate: experiment must hold one task");
  return parts.front();
}

/// Fitness of the backend's out-of-the-box settings (no optimization).
inline FitnessValue baseline_fitness(const ExperimentSpec& spec, const Backend& backend,
                                     const ParameterRegistry& registry, const ParameterVector& generic_params,
                                     double penalty = kDefaultPenalty) {
  return evaluate_candidate(spec, backend, registry, generic_params, penalty);
}

inline ParameterVector generic_vector(const Backend& backend, const ExperimentSpec& spec,
                                      const ParameterRegistry& registry) {
  const auto scenes = spec.scenes();
  return generic_vector(backend, std::span<const SceneSpec>(scenes), registry);
}

/// Ground truth produced by simulating `scene` with known settings.
inline GroundTruthRecord synthesize_ground_truth(int task_id, const Backend& backend, const SceneSpec& scene,
                                                 const PhysicsParams& params) {
  const SimResult r = backend.simulate(scene, params);
  if (r.status != SimStatus::Ok) throw Error("synthesize_ground_truth: simulation failed");
  GroundTruthRecord rec;
  rec.task_id = task_id;
  rec.wrist = r.wrist;
  if (r.object_final) rec.object_final_pose = Pose(*r.object_final);
  rec.validate();
  return rec;
}

// ---------------------------------------------------------------------------
// Campaign cells

struct CellKey {
  ParameterGroup group = ParameterGroup::Shared;
  int experiment_id = 0;
  std::string backend;
  int repeat = 0;

  std::string dir_name() const {
    return "g" + std::string(to_string(group)) + "_e" + std::to_string(experiment_id) + "_b" + backend + "_r" +
           std::to_string(repeat);
  }

  friend bool operator==(const CellKey&, const CellKey&) = default;
  friend auto operator<=>(const CellKey&, const CellKey&) = default;
};

inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) h = (h ^ c) * 0x100000001b3ULL;
  return h;
}

/// Per-cell DE seed derived from the manifest seed.
inline std::uint64_t cell_seed(std::uint64_t manifest_seed, const CellKey& k) {
  return derive_seed({manifest_seed, static_cast<std::uint64_t>(k.group), static_cast<std::uint64_t>(k.experiment_id),
                      fnv1a(k.backend), static_cast<std::uint64_t>(k.repeat)});
}

/// Cells in schedule order: experiment entries, then backends, then repeats.
inline std::vector<std::pair<CellKey, const ExperimentSpec*>> schedule(const RunManifest& m) {
  std::vector<std::pair<CellKey, const ExperimentSpec*>> out;
  for (const auto& e : m.experiments)
    for (const auto& b : m.backends)
      for (int r = 0; r < m.repeats; ++r) out.push_back({CellKey{e.parameter_group, e.experiment_id, b, r}, &e});
  return out;
}

struct CellResult {
  CellKey key;
  std::uint64_t seed = 0;
  ParameterRegistry registry;
  ParameterVector best;
  double best_fitness = 0.0;
  double baseline_fitness = 0.0;
  Termination reason = Termination::Continue;
  int generations = 0;
  std::vector<GenerationRecord> history;
  bool resumed = false;  // loaded from disk instead of run
};

inline json best_file_json(const CellResult& c) {
  json params = json::array();
  for (std::size_t i = 0; i < c.registry.dimension(); ++i) {
    const auto& d = c.registry[i];
    params.push_back({{"name", d.name}, {"value", c.best[i]}, {"lower", d.lower}, {"upper", d.upper}});
  }
  return {{"group", std::string(to_string(c.key.group))},
          {"experiment", c.key.experiment_id},
          {"backend", c.key.backend},
          {"repeat", c.key.repeat},
          {"seed", c.seed},
          {"best_fitness", c.best_fitness},
          {"baseline_fitness", c.baseline_fitness},
          {"termination", std::string(to_string(c.reason))},
          {"generations", c.generations},
          {"best_vector", c.best.values},
          {"registry", to_json(c.registry)},
          {"parameters", params}};
}

/// Reads a completed cell. Throws ParseError when the files are incomplete.
inline CellResult load_cell(const std::filesystem::path& dir) {
  const auto best_path = dir / "best.json";
  std::ifstream in(best_path);
  if (!in) throw ParseError(best_path.string(), 0, "missing");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ParseError(best_path.string(), 0, e.what());
  }
  CellResult c;
  try {
    c.key.group = parse_group(j.at("group").get<std::string>());
    c.key.experiment_id = j.at("experiment").get<int>();
    c.key.backend = j.at("backend").get<std::string>();
    c.key.repeat = j.at("repeat").get<int>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.best_fitness = j.at("best_fitness").get<double>();
    c.baseline_fitness = j.at("baseline_fitness").get<double>();
    c.reason = parse_termination(j.at("termination").get<std::string>());
    c.generations = j.at("generations").get<int>();
    c.best.values = j.at("best_vector").get<std::vector<double>>();
    c.registry = registry_from_json(j.at("registry"));
  } catch (const std::exception& e) {
    throw ParseError(best_path.string(), 0, e.what());
  }

  const auto gen_path = dir / "generations.jsonl";
  std::ifstream gin(gen_path);
  if (!gin) throw ParseError(gen_path.string(), 0, "missing");
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(gin, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      c.history.push_back(generation_record_from_json(json::parse(line)));
    } catch (const std::exception& e) {
      throw ParseError(gen_path.string(), lineno, e.what());
    }
  }
  if (c.history.empty() || c.history.back().generation != c.generations)
    throw ParseError(gen_path.string(), lineno, "generation stream does not match best.json");
  c.resumed = true;
  return c;
}

namespace detail {

inline void write_atomically(const std::filesystem::path& path, const std::string& content) {
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp);
    out << content;
    out.flush();
    if (!out) throw Error("write failed: " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace detail

/// Runs one cell and persists it. `executor` parallelizes the batch of each
/// generation.
inline CellResult run_cell(const RunManifest& m, const CellKey& key, const ExperimentSpec& spec,
                           const BatchExecutor& executor = serial_executor()) {
  const Backend& backend = m.backend_registry.get(key.backend);
  CellResult c;
  c.key = key;
  c.seed = cell_seed(m.de_config.seed, key);
  c.registry = registry_for(m, spec);

  DEConfig config = m.de_config;
  config.seed = c.seed;
  const double penalty = config.penalty;

  const ParameterVector generic = generic_vector(backend, spec, c.registry);
  c.baseline_fitness = baseline_fitness(spec, backend, c.registry, generic, penalty).value;

  std::atomic<std::uint64_t> evaluations{0};
  Evaluator evaluator = [&](const ParameterVector& x, std::uint64_t) {
    ++evaluations;
    return evaluate_candidate(spec, backend, c.registry, x, penalty).value;
  };

  const auto dir = m.output_dir / key.dir_name();
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  std::ofstream stream(dir / "generations.jsonl", std::ios::binary | std::ios::trunc);
  if (!stream) throw Error("cannot write " + (dir / "generations.jsonl").string());

  RunOptions options;
  options.executor = executor;
  if (m.baseline_injection) options.injected.push_back(generic);
  if (m.clock == ClockMode::Evaluations) {
    const double spe = m.seconds_per_evaluation;
    options.clock = [&evaluations, spe] { return static_cast<double>(evaluations.load()) * spe; };
  }
  options.on_generation = [&](const GenerationRecord& g) {
    stream << to_json(g).dump() << '\n';
    stream.flush();
  };

  DEResult r = run(c.registry, evaluator, config, options);
  stream.close();
  if (!stream) throw Error("write failed: " + (dir / "generations.jsonl").string());

  c.best = r.best;
  c.best_fitness = r.best_fitness;
  c.reason = r.reason;
  c.generations = r.history.back().generation;
  c.history = std::move(r.history);
  detail::write_atomically(dir / "best.json", best_file_json(c).dump(2) + "\n");
  return c;
}

struct CampaignSummary {
  std::vector<CellResult> cells;  // schedule order
  std::size_t executed = 0;
  std::size_t skipped = 0;
};

struct CampaignOptions {
  bool resume = false;
  std::function<void(const CellResult&)> on_cell;  // called under a lock
};

inline void write_summary_csv(const std::filesystem::path& path, const std::vector<CellResult>& cells) {
  std::ostringstream out;
  out << "group,experiment,backend,repeat,baseline_fitness,best_fitness,termination,generations\n";
  for (const auto& c : cells)
    out << to_string(c.key.group) << ',' << c.key.experiment_id << ',' << c.key.backend << ',' << c.key.repeat << ','
        << detail::format_double(c.baseline_fitness) << ',' << detail::format_double(c.best_fitness) << ','
        << to_string(c.reason) << ',' << c.generations << '\n';
  detail::write_atomically(path, out.str());
}

/// Executes every (group, experiment, backend, repeat) cell. With `resume`,
/// cells whose best.json loads cleanly are skipped; anything else is redone.
/// Cells run concurrently on `manifest.workers` threads.
inline CampaignSummary run_campaign(const RunManifest& manifest, const CampaignOptions& options = {}) {
  manifest.validate();
  std::filesystem::create_directories(manifest.output_dir);
  const auto cells = schedule(manifest);

  CampaignSummary summary;
  summary.cells.resize(cells.size());
  std::vector<bool> ran(cells.size(), false);
  std::mutex mutex;
  thread_executor(manifest.workers)(cells.size(), [&](std::size_t i) {
    const auto& [key, spec] = cells[i];
    CellResult result;
    bool loaded = false;
    if (options.resume) {
      try {
        result = load_cell(manifest.output_dir / key.dir_name());
        loaded = result.key == key;
      } catch (const ParseError&) {
        loaded = false;
      }
    }
    if (!loaded) result = run_cell(manifest, key, *spec);
    std::lock_guard lock(mutex);
    ran[i] = !loaded;
    summary.cells[i] = std::move(result);
    if (options.on_cell) options.on_cell(summary.cells[i]);
  });
  for (bool r : ran) (r ? summary.executed : summary.skipped)++;
  write_summary_csv(manifest.output_dir / "summary.csv", summary.cells);
  return summary;
}

struct BaselineRow {
  ParameterGroup group;
  int experiment_id;
  std::string backend;
  double fitness;
};

/// Generic-settings fitness of every (experiment entry, backend).
inline std::vector<BaselineRow> run_baselines(const RunManifest& manifest) {
  manifest.validate();
  std::vector<BaselineRow> rows;
  for (const auto& e : manifest.experiments) {
    const auto registry = registry_for(manifest, e);
    for (const auto& b : manifest.backends) {
      const Backend& backend = manifest.backend_registry.get(b);
      const auto generic = generic_vector(backend, e, registry);
      rows.push_back({e.parameter_group, e.experiment_id, b,
                      baseline_fitness(e, backend, registry, generic, manifest.de_config.penalty).value});
    }
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Manifest file

namespace detail {

inline std::filesystem::path resolve_path(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_absolute() ? path : base / path;
}

inline std::string task_dir_name(int task_id) {
  return std::string("task_") + (task_id < 10 ? "0" : "") + std::to_string(task_id);
}

inline TaskSetup task_from_json(const json& j, const std::filesystem::path& base, const std::string& gt_root) {
  TaskSetup t;
  t.task_id = get_required<int>(j, "task_id", "task");
  if (!j.contains("scene") || (j.at("scene").is_string() && j.at("scene").get<std::string>() == "builtin"))
    t.scene = builtin_scene(t.task_id);
  else
    t.scene = scene_from_json(j.at("scene"));
  std::filesystem::path gt;
  if (j.contains("ground_truth")) gt = resolve_path(base, j.at("ground_truth").get<std::string>());
  else if (!gt_root.empty()) gt = resolve_path(base, gt_root) / task_dir_name(t.task_id);
  else throw ConfigError("task " + std::to_string(t.task_id) + ": no ground_truth path");
  t.ground_truth = load_ground_truth(gt, t.task_id);
  return t;
}

}  // namespace detail

/// Parses a manifest. Relative paths resolve against `base_dir`.
inline RunManifest manifest_from_json(const json& j, const std::filesystem::path& base_dir) {
  constexpr const char* ctx = "manifest";
  RunManifest m;
  m.output_dir = detail::resolve_path(base_dir, detail::get_required<std::string>(j, "output_dir", ctx));
  m.repeats = detail::get_required<int>(j, "repeats", ctx);
  m.backends = detail::get_required<std::vector<std::string>>(j, "backends", ctx);
  m.de_config = de_config_from_json(j.contains("de_config") ? j.at("de_config") : json::object());
  if (j.contains("registry") && !j.at("registry").is_string()) m.registry = registry_from_json(j.at("registry"));
  else if (j.contains("registry") && j.at("registry").get<std::string>() != "default")
    throw ConfigError("manifest: registry must be \"default\" or a list of descriptors");
  m.baseline_injection = detail::get_or(j, "baseline_injection", true);
  const auto clock = detail::get_or<std::string>(j, "clock", "wall");
  if (clock == "wall") m.clock = ClockMode::Wall;
  else if (clock == "evaluations") m.clock = ClockMode::Evaluations;
  else throw ConfigError("manifest: clock must be \"wall\" or \"evaluations\"");
  m.seconds_per_evaluation = detail::get_or(j, "seconds_per_evaluation", m.seconds_per_evaluation);
  m.workers = detail::get_or(j, "workers", 1u);

  if (j.contains("external_backends")) {
    for (const auto& e : j.at("external_backends"))
      m.backend_registry.add(std::make_shared<ExternalBackend>(
          detail::get_required<std::string>(e, "name", "external backend"),
          detail::get_required<std::vector<std::string>>(e, "command", "external backend")));
  }

  const auto gt_root = detail::get_or<std::string>(j, "ground_truth_root", "");
  for (const auto& ej : detail::get_required<json>(j, "experiments", ctx)) {
    ExperimentSpec e;
    e.experiment_id = detail::get_required<int>(ej, "experiment_id", "experiment");
    e.parameter_group = parse_group(detail::get_or<std::string>(ej, "parameter_group", "Shared"));
    if (ej.contains("tasks")) {
      for (const auto& tj : ej.at("tasks")) e.tasks.push_back(detail::task_from_json(tj, base_dir, gt_root));
    } else {
      std::vector<int> ids = detail::get_or<std::vector<int>>(ej, "task_ids", {});
      if (ids.empty()) {
        if (e.experiment_id == kCombinedExperiment)
          for (int t = 1; t <= 10; ++t) ids.push_back(t);
        else
          ids.push_back(e.experiment_id);
      }
      for (int id : ids) e.tasks.push_back(detail::task_from_json(json{{"task_id", id}}, base_dir, gt_root));
    }
    m.experiments.push_back(std::move(e));
  }
  m.validate();
  return m;
}

inline RunManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open manifest " + path.string());
  json j;
  try {
    j = json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::exception& e) {
    throw ConfigError("manifest " + path.string() + ": " + e.what());
  }
  return manifest_from_json(j, path.parent_path());
}

}  // namespace simcal

#endif  // SIMCAL_RUNNER_HPP
