#ifndef SIMCAL_OPTIMIZER_HPP
#define SIMCAL_OPTIMIZER_HPP

// Differential evolution, DE/best/1/bin:
//   mutant_i = x_best + F * (x_r1 - x_r2),  r1 != r2, both != best, != i
//   child_i  = binomial crossover of (x_i, mutant_i) at rate CR
//   x_i      = child_i if f(child_i) < f(x_i)
// F is dithered: one uniform draw from [F_lo, F_hi] per generation. Children
// of a generation are evaluated as one order-independent batch and selection
// happens after the batch, so serial and threaded runs agree bit-for-bit.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "simcal/error.hpp"
#include "simcal/fitness.hpp"
#include "simcal/parallel.hpp"
#include "simcal/param_space.hpp"
#include "simcal/rng.hpp"

namespace simcal {

struct DEConfig {
  double crossover_rate = 0.7;
  double mutation_lo = 0.5;
  double mutation_hi = 1.0;
  double population_factor = 1.0;
  int max_generations = 1000;
  double wall_clock_budget = 168.0 * 3600.0;  // seconds
  double convergence_tol = 0.01;
  std::uint64_t seed = 0;
  double penalty = kDefaultPenalty;

  std::size_t population_size(std::size_t dimension) const {
    return static_cast<std::size_t>(std::ceil(population_factor * static_cast<double>(dimension) - 1e-9));
  }

  void validate(std::size_t dimension) const {
    if (!(crossover_rate > 0.0 && crossover_rate <= 1.0)) throw ConfigError("DE: CR must be in (0, 1]");
    if (!(mutation_lo > 0.0 && mutation_lo <= mutation_hi && mutation_hi <= 2.0))
      throw ConfigError("DE: need 0 < F_lo <= F_hi <= 2");
    if (!(population_factor > 0.0)) throw ConfigError("DE: population_factor must be positive");
    if (population_size(dimension) < 4)
      throw ConfigError("DE: population size " + std::to_string(population_size(dimension)) +
                        " < 4 (best1bin needs best, target and two distinct others)");
    if (max_generations < 0) throw ConfigError("DE: max_generations must be >= 0");
    if (!(wall_clock_budget >= 0.0)) throw ConfigError("DE: wall_clock_budget must be >= 0");
    if (!(convergence_tol >= 0.0)) throw ConfigError("DE: convergence_tol must be >= 0");
    if (!(penalty > 0.0)) throw ConfigError("DE: penalty must be positive");
  }
};

struct Population {
  std::vector<ParameterVector> members;
  std::vector<double> fitnesses;
  int generation = 0;
  std::size_t best_index = 0;

  std::size_t size() const { return members.size(); }
  double best_fitness() const { return fitnesses[best_index]; }
  const ParameterVector& best() const { return members[best_index]; }

  /// Lowest fitness, first index on ties.
  void update_best() {
    best_index = 0;
    for (std::size_t i = 1; i < fitnesses.size(); ++i)
      if (fitnesses[i] < fitnesses[best_index]) best_index = i;
  }
};

struct GenerationRecord {
  int generation = 0;
  double best_fitness = 0.0;
  double mean_fitness = 0.0;
  double std_fitness = 0.0;
  ParameterVector best_vector;
  double elapsed = 0.0;  // seconds

  friend bool operator==(const GenerationRecord&, const GenerationRecord&) = default;
};

enum class Termination { Continue, Converged, GenerationCap, TimeCap };

inline std::string_view to_string(Termination t) {
  switch (t) {
    case Termination::Continue: return "continue";
    case Termination::Converged: return "converged";
    case Termination::GenerationCap: return "generation-cap";
    case Termination::TimeCap: return "time-cap";
  }
  return "unknown";
}

inline Termination parse_termination(std::string_view s) {
  for (auto t : {Termination::Continue, Termination::Converged, Termination::GenerationCap, Termination::TimeCap})
    if (to_string(t) == s) return t;
  throw ConfigError("unknown termination reason '" + std::string(s) + "'");
}

/// Evaluator: (candidate, per-evaluation seed) -> fitness. Must be pure given
/// its arguments and safe to call concurrently.
using Evaluator = std::function<double(const ParameterVector&, std::uint64_t)>;

namespace detail {

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;
  std::size_t count = 0;
};

/// Population (ddof = 0) statistics, two-pass.
inline MeanStd mean_std(std::span<const double> xs) {
  MeanStd out;
  CompensatedSum sum;
  for (double x : xs) sum.add(x);
  out.count = xs.size();
  if (xs.empty()) return out;
  out.mean = sum.value() / static_cast<double>(xs.size());
  CompensatedSum sq;
  for (double x : xs) sq.add((x - out.mean) * (x - out.mean));
  out.std = std::sqrt(sq.value() / static_cast<double>(xs.size()));
  return out;
}

inline double safe_evaluate(const Evaluator& f, const ParameterVector& x, std::uint64_t seed, double penalty) {
  double v;
  try {
    v = f(x, seed);
  } catch (const std::exception&) {
    return penalty;
  }
  return std::isfinite(v) ? v : penalty;
}

enum : std::uint64_t { kStreamInit = 1, kStreamDither = 2, kStreamMember = 3, kStreamEval = 4 };

}  // namespace detail

/// Uniform random population (optionally seeded with `injected` members in
/// slots 0..k-1), evaluated as one batch.
inline Population initialize(const ParameterRegistry& registry, const DEConfig& config, const Evaluator& evaluator,
                             std::span<const ParameterVector> injected = {},
                             const BatchExecutor& executor = serial_executor()) {
  config.validate(registry.dimension());
  const std::size_t n = config.population_size(registry.dimension());
  if (injected.size() > n) throw ConfigError("more injected members than population slots");
  Rng rng(derive_seed({config.seed, detail::kStreamInit}));
  Population pop;
  pop.members.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    // Always draw so injected members do not shift the random stream.
    ParameterVector drawn = registry.sample_uniform(rng);
    if (i < injected.size()) {
      if (!registry.in_bounds(injected[i])) throw ConfigError("injected member is outside the parameter bounds");
      pop.members.push_back(injected[i]);
    } else {
      pop.members.push_back(std::move(drawn));
    }
  }
  pop.fitnesses.assign(n, 0.0);
  executor(n, [&](std::size_t i) {
    pop.fitnesses[i] = detail::safe_evaluate(
        evaluator, pop.members[i], derive_seed({config.seed, 0, i, detail::kStreamEval}), config.penalty);
  });
  pop.generation = 0;
  pop.update_best();
  return pop;
}

/// best + F * (r1 - r2), componentwise, without bound repair.
inline ParameterVector best1_difference(const ParameterVector& best, const ParameterVector& r1,
                                        const ParameterVector& r2, double F) {
  if (r1.size() != best.size() || r2.size() != best.size()) throw ContractError("mutate_best1: size mismatch");
  ParameterVector out = best;
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = best[k] + F * (r1[k] - r2[k]);
  return out;
}

/// DE/best/1 mutant, then out-of-bound components redrawn inside bounds.
inline ParameterVector mutate_best1(const ParameterRegistry& registry, const ParameterVector& best,
                                    const ParameterVector& r1, const ParameterVector& r2, double F, Rng& rng) {
  return clamp_or_resample(registry, best1_difference(best, r1, r2, F), rng);
}

/// Binomial crossover. Component k comes from the mutant when a uniform
/// draw is < CR; one uniformly chosen index always does.
inline ParameterVector crossover_binomial(const ParameterVector& parent, const ParameterVector& mutant, double CR,
                                          Rng& rng) {
  if (parent.size() != mutant.size()) throw ContractError("crossover_binomial: size mismatch");
  ParameterVector child = parent;
  if (child.size() == 0) return child;
  const std::size_t forced = rng.below(child.size());
  for (std::size_t k = 0; k < child.size(); ++k) {
    const bool take = rng.uniform() < CR;
    if (take || k == forced) child[k] = mutant[k];
  }
  return child;
}

enum class Selection { KeepParent, KeepChild };

/// Greedy minimization; ties keep the parent.
inline Selection select(double parent_fitness, double child_fitness) {
  return child_fitness < parent_fitness ? Selection::KeepChild : Selection::KeepParent;
}

/// Converged when the std of the non-penalty fitnesses is below
/// convergence_tol * |mean| (or exactly zero); otherwise the generation cap,
/// then the time cap.
inline Termination check_termination(const Population& pop, const DEConfig& config, double elapsed_seconds) {
  std::vector<double> valid;
  valid.reserve(pop.fitnesses.size());
  for (double f : pop.fitnesses)
    if (!is_penalty(f, config.penalty)) valid.push_back(f);
  if (!valid.empty()) {
    const auto s = detail::mean_std(valid);
    if (s.std == 0.0 || s.std < config.convergence_tol * std::abs(s.mean)) return Termination::Converged;
  }
  if (pop.generation >= config.max_generations) return Termination::GenerationCap;
  if (elapsed_seconds >= config.wall_clock_budget) return Termination::TimeCap;
  return Termination::Continue;
}

inline GenerationRecord make_record(const Population& pop, double elapsed) {
  const auto s = detail::mean_std(pop.fitnesses);
  return {pop.generation, pop.best_fitness(), s.mean, s.std, pop.best(), elapsed};
}

/// Picks r1 != r2, both distinct from `best` and `target`.
inline std::pair<std::size_t, std::size_t> pick_donors(std::size_t n, std::size_t best, std::size_t target, Rng& rng) {
  std::size_t r1, r2;
  do r1 = rng.below(n);
  while (r1 == best || r1 == target);
  do r2 = rng.below(n);
  while (r2 == best || r2 == target || r2 == r1);
  return {r1, r2};
}

/// One DE generation in place: build all children, evaluate them as a
/// batch, then select. Returns the F used.
inline double step_generation(Population& pop, const ParameterRegistry& registry, const DEConfig& config,
                              const Evaluator& evaluator, const BatchExecutor& executor = serial_executor()) {
  const int gen = pop.generation + 1;
  const auto g = static_cast<std::uint64_t>(gen);
  Rng dither(derive_seed({config.seed, g, detail::kStreamDither}));
  const double F = config.mutation_lo == config.mutation_hi ? config.mutation_lo
                                                            : dither.uniform(config.mutation_lo, config.mutation_hi);
  const std::size_t n = pop.size();
  const std::size_t best = pop.best_index;

  std::vector<ParameterVector> children(n);
  for (std::size_t i = 0; i < n; ++i) {
    Rng rng(derive_seed({config.seed, g, i, detail::kStreamMember}));
    const auto [r1, r2] = pick_donors(n, best, i, rng);
    const ParameterVector mutant = mutate_best1(registry, pop.members[best], pop.members[r1], pop.members[r2], F, rng);
    children[i] = crossover_binomial(pop.members[i], mutant, config.crossover_rate, rng);
  }

  std::vector<double> child_fitness(n);
  executor(n, [&](std::size_t i) {
    child_fitness[i] = detail::safe_evaluate(evaluator, children[i],
                                             derive_seed({config.seed, g, i, detail::kStreamEval}), config.penalty);
  });

  for (std::size_t i = 0; i < n; ++i) {
    if (select(pop.fitnesses[i], child_fitness[i]) == Selection::KeepChild) {
      pop.members[i] = std::move(children[i]);
      pop.fitnesses[i] = child_fitness[i];
    }
  }
  pop.generation = gen;
  pop.update_best();
  return F;
}

struct RunOptions {
  std::vector<ParameterVector> injected;  // e.g. the generic parameters
  BatchExecutor executor = serial_executor();
  /// Seconds since the run started. Defaults to a steady wall clock.
  std::function<double()> clock;
  /// Called after each GenerationRecord is produced (generation 0 included).
  std::function<void(const GenerationRecord&)> on_generation;
};

struct DEResult {
  ParameterVector best;
  double best_fitness = 0.0;
  std::vector<GenerationRecord> history;
  Termination reason = Termination::Continue;
  Population final_population;
};

/// Full optimization loop. Termination is checked after every generation.
inline DEResult run(const ParameterRegistry& registry, const Evaluator& evaluator, const DEConfig& config,
                    RunOptions options = {}) {
  config.validate(registry.dimension());
  if (!options.clock) {
    const auto start = std::chrono::steady_clock::now();
    options.clock = [start] {
      return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    };
  }
  DEResult result;
  auto emit = [&](const Population& p) {
    result.history.push_back(make_record(p, options.clock()));
    if (options.on_generation) options.on_generation(result.history.back());
  };

  Population pop = initialize(registry, config, evaluator, options.injected, options.executor);
  emit(pop);
  Termination reason = config.max_generations == 0 ? Termination::GenerationCap : Termination::Continue;
  while (reason == Termination::Continue) {
    step_generation(pop, registry, config, evaluator, options.executor);
    emit(pop);
    reason = check_termination(pop, config, result.history.back().elapsed);
  }
  result.best = pop.best();
  result.best_fitness = pop.best_fitness();
  result.reason = reason;
  result.final_population = std::move(pop);
  return result;
}

}  // namespace simcal

#endif  // SIMCAL_OPTIMIZER_HPP
