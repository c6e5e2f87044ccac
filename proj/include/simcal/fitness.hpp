#ifndef SIMCAL_FITNESS_HPP
#define SIMCAL_FITNESS_HPP

#include <array>
#include <cmath>
#include <span>
#include <string_view>

#include "simcal/error.hpp"
#include "simcal/trajectory.hpp"

namespace simcal {

/// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) comp_ += (sum_ - t) + x;
    else comp_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

/// Fitness in meters. task_id 0 marks an aggregate over several tasks.
struct FitnessValue {
  double value = 0.0;
  int task_id = 0;

  friend bool operator==(const FitnessValue&, const FitnessValue&) = default;
};

inline constexpr double kDefaultPenalty = 1e4;

enum class FailureReason { Diverged, NonFiniteState, Timeout };

inline std::string_view to_string(FailureReason r) {
  switch (r) {
    case FailureReason::Diverged: return "diverged";
    case FailureReason::NonFiniteState: return "non-finite";
    case FailureReason::Timeout: return "timeout";
  }
  return "unknown";
}

/// Sentinel for failed simulations; dominates every physical error.
inline FitnessValue penalize_failure(FailureReason, int task_id = 0, double penalty = kDefaultPenalty) {
  return {penalty, task_id};
}

/// Fitness values at or above this are treated as penalty sentinels.
inline bool is_penalty(double fitness, double penalty = kDefaultPenalty) {
  return !std::isfinite(fitness) || fitness >= penalty;
}

namespace detail {

inline void require_same_grid(const TimedTrajectory& sim, const TimedTrajectory& ref) {
  if (sim.size() != ref.size())
    throw ContractError("fitness: trajectories have " + std::to_string(sim.size()) + " and " +
                        std::to_string(ref.size()) + " points; resample onto a common grid first");
  for (std::size_t k = 0; k < sim.size(); ++k)
    if (std::abs(sim[k].t - ref[k].t) > 1e-9)
      throw ContractError("fitness: time grids differ at point " + std::to_string(k));
}

}  // namespace detail

/// Mean wrist position error over a shared time grid:
/// sum_k |W_ref(k) - W_sim(k)| / n_points.
inline FitnessValue kinematic_fitness(const TimedTrajectory& sim_wrist, const TimedTrajectory& ref_wrist,
                                      int task_id = 0) {
  detail::require_same_grid(sim_wrist, ref_wrist);
  CompensatedSum sum;
  for (std::size_t k = 0; k < sim_wrist.size(); ++k)
    sum.add(euclidean_distance(ref_wrist[k].pose.position(), sim_wrist[k].pose.position()));
  return {sum.value() / static_cast<double>(sim_wrist.size()), task_id};
}

/// Kinematic term plus the distance between final object positions.
inline FitnessValue object_fitness(const TimedTrajectory& sim_wrist, const TimedTrajectory& ref_wrist,
                                   const Vec3& sim_obj_final, const Vec3& ref_obj_final, int task_id = 0) {
  if (!all_finite(sim_obj_final) || !all_finite(ref_obj_final))
    throw ContractError("object_fitness: non-finite object position");
  const FitnessValue k = kinematic_fitness(sim_wrist, ref_wrist, task_id);
  return {k.value + euclidean_distance(ref_obj_final, sim_obj_final), task_id};
}

/// Sum of the ten per-task fitnesses of the combined experiment. Every task
/// 1..10 must appear exactly once.
inline FitnessValue combined_fitness(std::span<const FitnessValue> per_task) {
  std::array<bool, 11> seen{};
  for (const auto& f : per_task) {
    if (f.task_id < 1 || f.task_id > 10) throw ContractError("combined_fitness: task id out of 1..10");
    if (seen[f.task_id]) throw ContractError("combined_fitness: task " + std::to_string(f.task_id) + " repeated");
    seen[f.task_id] = true;
  }
  if (per_task.size() != 10) throw ContractError("combined_fitness: expected tasks 1..10");
  CompensatedSum sum;
  for (const auto& f : per_task) sum.add(f.value);
  return {sum.value(), 0};
}

/// Puts a simulated trajectory on the reference grid. Points past the end of
/// the simulation are scored against its last pose.
inline TimedTrajectory align_to_reference(const TimedTrajectory& sim, const TimedTrajectory& ref) {
  std::vector<TimedPose> out;
  out.reserve(ref.size());
  for (const auto& s : ref.samples()) {
    const double t = s.t - ref.start_time() + sim.start_time();
    out.push_back({s.t, sim.interpolate(t)});
  }
  return TimedTrajectory(sim.body_id(), std::move(out));
}

}  // namespace simcal

#endif  // SIMCAL_FITNESS_HPP
