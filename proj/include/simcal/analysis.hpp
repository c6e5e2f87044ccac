#ifndef SIMCAL_ANALYSIS_HPP
#define SIMCAL_ANALYSIS_HPP

// Post-campaign reports: improvement over generic settings, per-parameter
// spread across repeats, and averaged convergence curves.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "simcal/dataset_io.hpp"
#include "simcal/error.hpp"
#include "simcal/runner.hpp"

namespace simcal {

/// Every completed cell under `dir`, sorted by cell key. Directories without
/// a readable best.json are incomplete and skipped.
inline std::vector<CellResult> load_campaign(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw ConfigError("campaign directory not found: " + dir.string());
  std::vector<CellResult> cells;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_directory() || !std::filesystem::exists(entry.path() / "best.json")) continue;
    try {
      cells.push_back(load_cell(entry.path()));
    } catch (const ParseError&) {
    }
  }
  std::sort(cells.begin(), cells.end(), [](const CellResult& a, const CellResult& b) { return a.key < b.key; });
  return cells;
}

// ---------------------------------------------------------------------------
// Improvement

struct BackendFitness {
  std::string backend;
  double fitness = 0.0;
};

struct ImprovementReport {
  int experiment_id = 0;
  BackendFitness best_generic;
  BackendFitness best_tuned;
  std::optional<double> improvement;  // nullopt when the best generic fitness is 0
};

namespace detail {

inline BackendFitness table_min(const std::vector<BackendFitness>& table) {
  // Ties go to the lexicographically smaller backend so row order is irrelevant.
  return *std::min_element(table.begin(), table.end(), [](const BackendFitness& a, const BackendFitness& b) {
    return a.fitness != b.fitness ? a.fitness < b.fitness : a.backend < b.backend;
  });
}

}  // namespace detail

inline ImprovementReport compute_improvement(const std::vector<BackendFitness>& generic,
                                             const std::vector<BackendFitness>& tuned, int experiment_id) {
  if (generic.empty() || tuned.empty())
    throw ContractError("compute_improvement: empty fitness table for experiment " + std::to_string(experiment_id));
  ImprovementReport r;
  r.experiment_id = experiment_id;
  r.best_generic = detail::table_min(generic);
  r.best_tuned = detail::table_min(tuned);
  if (r.best_generic.fitness > 0.0)
    r.improvement = (r.best_generic.fitness - r.best_tuned.fitness) / r.best_generic.fitness;
  return r;
}

/// One report per experiment present in `cells`. The generic table holds each
/// backend's baseline, the tuned table each backend's best over repeats (and
/// groups, unless `group` is given).
inline std::vector<ImprovementReport> improvement_reports(const std::vector<CellResult>& cells,
                                                          std::optional<ParameterGroup> group = std::nullopt) {
  std::map<int, std::map<std::string, std::pair<double, double>>> per_exp;  // exp -> backend -> (generic, tuned)
  for (const auto& c : cells) {
    if (group && c.key.group != *group) continue;
    auto [it, fresh] = per_exp[c.key.experiment_id].try_emplace(c.key.backend, c.baseline_fitness, c.best_fitness);
    if (!fresh) {
      it->second.first = std::min(it->second.first, c.baseline_fitness);
      it->second.second = std::min(it->second.second, c.best_fitness);
    }
  }
  std::vector<ImprovementReport> out;
  for (const auto& [exp, backends] : per_exp) {
    std::vector<BackendFitness> generic, tuned;
    for (const auto& [b, f] : backends) {
      generic.push_back({b, f.first});
      tuned.push_back({b, f.second});
    }
    out.push_back(compute_improvement(generic, tuned, exp));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Parameter importance

struct ParameterImportance {
  std::string name;
  double median = 0, std = 0, q1 = 0, q3 = 0, min = 0, max = 0;
  double normalized_std = 0;  // std / (upper - lower)
};

struct ImportanceResult {
  bool insufficient_data = false;  // fewer than two completed repeats
  std::size_t repeats = 0;
  std::vector<ParameterImportance> ranked;  // ascending normalized_std
};

/// Linear-interpolation quantile (the common "type 7" definition).
inline double quantile(std::vector<double> xs, double p) {
  if (xs.empty()) throw ContractError("quantile of empty sample");
  std::sort(xs.begin(), xs.end());
  const double h = (static_cast<double>(xs.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, xs.size() - 1);
  return xs[lo] + (h - static_cast<double>(lo)) * (xs[hi] - xs[lo]);
}

/// Sample standard deviation (n - 1 denominator).
inline double sample_std(const std::vector<double>& xs) {
  if (xs.size() < 2) return 0.0;
  CompensatedSum s;
  for (double x : xs) s.add(x);
  const double mean = s.value() / static_cast<double>(xs.size());
  CompensatedSum ss;
  for (double x : xs) ss.add((x - mean) * (x - mean));
  return std::sqrt(ss.value() / static_cast<double>(xs.size() - 1));
}

/// Statistics of the repeat-best values of one registry.
inline ImportanceResult importance_from_vectors(const ParameterRegistry& registry,
                                                const std::vector<ParameterVector>& bests) {
  ImportanceResult r;
  r.repeats = bests.size();
  if (bests.size() < 2) {
    r.insufficient_data = true;
    return r;
  }
  for (const auto& b : bests) registry.require_aligned(b);
  for (std::size_t i = 0; i < registry.dimension(); ++i) {
    const auto& d = registry[i];
    std::vector<double> xs;
    for (const auto& b : bests) xs.push_back(b[i]);
    ParameterImportance p;
    p.name = d.name;
    p.median = quantile(xs, 0.5);
    p.q1 = quantile(xs, 0.25);
    p.q3 = quantile(xs, 0.75);
    p.min = *std::min_element(xs.begin(), xs.end());
    p.max = *std::max_element(xs.begin(), xs.end());
    p.std = sample_std(xs);
    p.normalized_std = p.std / (d.upper - d.lower);
    r.ranked.push_back(std::move(p));
  }
  std::stable_sort(r.ranked.begin(), r.ranked.end(), [](const ParameterImportance& a, const ParameterImportance& b) {
    return a.normalized_std < b.normalized_std;
  });
  return r;
}

inline ImportanceResult parameter_importance(const std::vector<CellResult>& cells, ParameterGroup group,
                                             const std::string& backend, int experiment_id) {
  std::vector<ParameterVector> bests;
  const ParameterRegistry* registry = nullptr;
  for (const auto& c : cells) {
    if (c.key.group != group || c.key.backend != backend || c.key.experiment_id != experiment_id) continue;
    if (registry && !(*registry == c.registry))
      throw ContractError("parameter_importance: repeats were tuned over different registries");
    registry = &c.registry;
    bests.push_back(c.best);
  }
  if (!registry) {
    ImportanceResult r;
    r.insufficient_data = true;
    return r;
  }
  return importance_from_vectors(*registry, bests);
}

// ---------------------------------------------------------------------------
// Convergence

struct ConvergenceRow {
  int generation = 0;
  std::string backend;
  double mean_best_fitness = 0.0;
};

/// Averages best-fitness columns. Shorter runs carry their final value
/// forward to the length of the longest.
inline std::vector<double> average_curves(const std::vector<std::vector<double>>& curves) {
  std::size_t len = 0;
  for (const auto& c : curves) {
    if (c.empty()) throw ContractError("average_curves: empty curve");
    len = std::max(len, c.size());
  }
  std::vector<double> out(len, 0.0);
  for (std::size_t g = 0; g < len; ++g) {
    CompensatedSum s;
    for (const auto& c : curves) s.add(g < c.size() ? c[g] : c.back());
    out[g] = s.value() / static_cast<double>(curves.size());
  }
  return out;
}

inline std::vector<ConvergenceRow> export_convergence(const std::vector<CellResult>& cells, int experiment_id,
                                                      ParameterGroup group = ParameterGroup::Shared) {
  std::map<std::string, std::vector<std::vector<double>>> per_backend;
  for (const auto& c : cells) {
    if (c.key.experiment_id != experiment_id || c.key.group != group) continue;
    std::vector<double> curve;
    for (const auto& g : c.history) curve.push_back(g.best_fitness);
    per_backend[c.key.backend].push_back(std::move(curve));
  }
  std::vector<ConvergenceRow> out;
  for (const auto& [backend, curves] : per_backend) {
    const auto avg = average_curves(curves);
    for (std::size_t g = 0; g < avg.size(); ++g) out.push_back({static_cast<int>(g), backend, avg[g]});
  }
  return out;
}

// ---------------------------------------------------------------------------
// CSV output

inline void write_improvement_csv(std::ostream& out, const std::vector<ImprovementReport>& reports) {
  out << "experiment,best_generic_backend,best_generic,best_tuned_backend,best_tuned,improvement\n";
  for (const auto& r : reports)
    out << r.experiment_id << ',' << r.best_generic.backend << ',' << detail::format_double(r.best_generic.fitness)
        << ',' << r.best_tuned.backend << ',' << detail::format_double(r.best_tuned.fitness) << ','
        << (r.improvement ? detail::format_double(*r.improvement) : std::string("undefined")) << '\n';
}

inline void write_importance_csv(std::ostream& out, const ImportanceResult& r) {
  out << "parameter,median,std,q1,q3,min,max,normalized_std\n";
  for (const auto& p : r.ranked)
    out << p.name << ',' << detail::format_double(p.median) << ',' << detail::format_double(p.std) << ','
        << detail::format_double(p.q1) << ',' << detail::format_double(p.q3) << ',' << detail::format_double(p.min)
        << ',' << detail::format_double(p.max) << ',' << detail::format_double(p.normalized_std) << '\n';
}

inline void write_convergence_csv(std::ostream& out, const std::vector<ConvergenceRow>& rows) {
  out << "generation,backend,mean_best_fitness\n";
  for (const auto& r : rows)
    out << r.generation << ',' << r.backend << ',' << detail::format_double(r.mean_best_fitness) << '\n';
}

}  // namespace simcal

#endif  // SIMCAL_ANALYSIS_HPP
