#ifndef SIMCAL_TRAJECTORY_HPP
#define SIMCAL_TRAJECTORY_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "simcal/error.hpp"

namespace simcal {

using Vec3 = std::array<double, 3>;

inline Vec3 operator+(const Vec3& a, const Vec3& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }
inline Vec3 operator-(const Vec3& a, const Vec3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
inline Vec3 operator*(double s, const Vec3& a) { return {s * a[0], s * a[1], s * a[2]}; }
inline double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }

inline bool all_finite(const Vec3& a) {
  return std::isfinite(a[0]) && std::isfinite(a[1]) && std::isfinite(a[2]);
}

/// 3D Euclidean distance in meters.
inline double euclidean_distance(const Vec3& a, const Vec3& b) {
  // hypot avoids overflow for far-apart points; exact zero when a == b.
  return std::hypot(a[0] - b[0], a[1] - b[1], a[2] - b[2]);
}

/// Unit quaternion stored (x, y, z, w).
struct Quaternion {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  double w = 1.0;

  double norm() const { return std::sqrt(x * x + y * y + z * z + w * w); }
  friend bool operator==(const Quaternion&, const Quaternion&) = default;
};

inline constexpr double kQuaternionNormTolerance = 1e-6;

/// Spherical linear interpolation; falls back to normalized lerp for nearly
/// parallel inputs. Takes the short arc.
inline Quaternion slerp(const Quaternion& a, Quaternion b, double t) {
  double cos_theta = a.x * b.x + a.y * b.y + a.z * b.z + a.w * b.w;
  if (cos_theta < 0.0) {
    b = {-b.x, -b.y, -b.z, -b.w};
    cos_theta = -cos_theta;
  }
  double wa = 1.0 - t;
  double wb = t;
  if (cos_theta < 0.9995) {
    const double theta = std::acos(std::min(cos_theta, 1.0));
    const double s = std::sin(theta);
    wa = std::sin((1.0 - t) * theta) / s;
    wb = std::sin(t * theta) / s;
  }
  Quaternion q{wa * a.x + wb * b.x, wa * a.y + wb * b.y, wa * a.z + wb * b.z, wa * a.w + wb * b.w};
  const double n = q.norm();
  return {q.x / n, q.y / n, q.z / n, q.w / n};
}

/// Rigid-body pose. Construction validates finiteness and unit norm.
class Pose {
 public:
  Pose() = default;

  Pose(Vec3 position, Quaternion orientation = {}) : position_(position), orientation_(orientation) {
    if (!all_finite(position_)) throw ContractError("Pose: non-finite position");
    const double n = orientation_.norm();
    if (!std::isfinite(n) || std::abs(n - 1.0) > kQuaternionNormTolerance)
      throw ContractError("Pose: orientation is not a unit quaternion");
  }

  const Vec3& position() const { return position_; }
  const Quaternion& orientation() const { return orientation_; }

  friend bool operator==(const Pose&, const Pose&) = default;

 private:
  Vec3 position_{0.0, 0.0, 0.0};
  Quaternion orientation_{};
};

struct TimedPose {
  double t = 0.0;
  Pose pose;

  friend bool operator==(const TimedPose&, const TimedPose&) = default;
};

/// Time-stamped pose sequence of one tracked body. Non-empty, strictly
/// increasing timestamps.
class TimedTrajectory {
 public:
  TimedTrajectory(std::string body_id, std::vector<TimedPose> samples)
      : body_id_(std::move(body_id)), samples_(std::move(samples)) {
    if (samples_.empty()) throw ContractError("TimedTrajectory '" + body_id_ + "': no samples");
    for (std::size_t i = 0; i < samples_.size(); ++i) {
      if (!std::isfinite(samples_[i].t))
        throw ContractError("TimedTrajectory '" + body_id_ + "': non-finite timestamp");
      if (i > 0 && !(samples_[i].t > samples_[i - 1].t))
        throw ContractError("TimedTrajectory '" + body_id_ + "': timestamps not strictly increasing at sample " +
                            std::to_string(i));
    }
  }

  const std::string& body_id() const { return body_id_; }
  std::span<const TimedPose> samples() const { return samples_; }
  std::size_t size() const { return samples_.size(); }
  const TimedPose& operator[](std::size_t i) const { return samples_[i]; }
  const TimedPose& front() const { return samples_.front(); }
  const TimedPose& back() const { return samples_.back(); }
  double start_time() const { return samples_.front().t; }
  double end_time() const { return samples_.back().t; }
  double duration() const { return end_time() - start_time(); }

  /// Pose at time t: linear in position, slerp in orientation. Clamps to the
  /// end samples outside [start, end].
  Pose interpolate(double t) const {
    if (t <= samples_.front().t) return samples_.front().pose;
    if (t >= samples_.back().t) return samples_.back().pose;
    const auto it = std::upper_bound(samples_.begin(), samples_.end(), t,
                                     [](double v, const TimedPose& s) { return v < s.t; });
    const TimedPose& hi = *it;
    const TimedPose& lo = *(it - 1);
    if (t == lo.t) return lo.pose;
    const double alpha = (t - lo.t) / (hi.t - lo.t);
    const Vec3& a = lo.pose.position();
    const Vec3& b = hi.pose.position();
    return Pose({a[0] + alpha * (b[0] - a[0]), a[1] + alpha * (b[1] - a[1]), a[2] + alpha * (b[2] - a[2])},
                slerp(lo.pose.orientation(), hi.pose.orientation(), alpha));
  }

  friend bool operator==(const TimedTrajectory&, const TimedTrajectory&) = default;

 private:
  std::string body_id_;
  std::vector<TimedPose> samples_;
};

/// Uniform grid starting at `start`: start + k / rate for k = 0..count-1.
inline std::vector<double> uniform_grid(double start, double rate, std::size_t count) {
  std::vector<double> grid(count);
  for (std::size_t k = 0; k < count; ++k) grid[k] = start + static_cast<double>(k) / rate;
  return grid;
}

/// Number of grid points needed to cover `duration` at `rate`.
inline std::size_t grid_point_count(double duration, double rate) {
  // The slack absorbs rounding when the duration itself came from a grid.
  return static_cast<std::size_t>(std::floor(duration * rate + 1e-9)) + 1;
}

/// Samples `traj` at the given timestamps. A single-sample trajectory can
/// only be sampled onto a single point.
inline TimedTrajectory resample_to_grid(const TimedTrajectory& traj, std::span<const double> grid) {
  if (grid.empty()) throw ContractError("resample_to_grid: empty grid");
  if (traj.size() == 1 && grid.size() > 1)
    throw DegenerateInputError("resample: trajectory '" + traj.body_id() + "' has a single sample but " +
                               std::to_string(grid.size()) + " points were requested");
  std::vector<TimedPose> out;
  out.reserve(grid.size());
  for (double t : grid) out.push_back({t, traj.interpolate(t)});
  return TimedTrajectory(traj.body_id(), std::move(out));
}

/// Resamples onto start + k/rate, k = 0..floor(duration * rate).
inline TimedTrajectory resample(const TimedTrajectory& traj, double rate) {
  if (!(rate > 0.0) || !std::isfinite(rate)) throw ContractError("resample: rate must be positive");
  const auto grid = uniform_grid(traj.start_time(), rate, grid_point_count(traj.duration(), rate));
  return resample_to_grid(traj, grid);
}

/// Shifts every timestamp so the trajectory starts at t = 0.
inline TimedTrajectory rebase_time(const TimedTrajectory& traj) {
  std::vector<TimedPose> out(traj.samples().begin(), traj.samples().end());
  const double t0 = traj.start_time();
  for (auto& s : out) s.t -= t0;
  return TimedTrajectory(traj.body_id(), std::move(out));
}

inline constexpr double kFitnessRateHz = 20.0;

/// Real-world reference for one dataset task.
struct GroundTruthRecord {
  int task_id = 0;
  TimedTrajectory wrist{"wrist", {TimedPose{}}};
  std::optional<Pose> object_final_pose;
  int repeats = 1;

  static bool task_has_object(int task_id) { return task_id >= 3 && task_id <= 10; }

  /// Throws ContractError when the record breaks the task/object pairing.
  void validate() const {
    if (task_id < 1 || task_id > 10) throw ContractError("GroundTruthRecord: task_id must be in 1..10");
    if (repeats < 1) throw ContractError("GroundTruthRecord: repeats must be >= 1");
    if (task_has_object(task_id) != object_final_pose.has_value())
      throw ContractError("GroundTruthRecord: task " + std::to_string(task_id) +
                          (task_has_object(task_id) ? " requires" : " must not carry") + " an object pose");
  }

  friend bool operator==(const GroundTruthRecord&, const GroundTruthRecord&) = default;
};

/// Averages real-world repeats: wrist trajectories are rebased to t = 0,
/// resampled at `rate`, truncated to the shortest and averaged point-wise.
/// Object final positions are averaged; no object trajectory is formed.
inline GroundTruthRecord average_repeats(int task_id, std::span<const TimedTrajectory> wrists,
                                         std::span<const Pose> object_finals, double rate = kFitnessRateHz) {
  if (wrists.empty()) throw ContractError("average_repeats: no wrist trajectories");
  std::vector<TimedTrajectory> grids;
  grids.reserve(wrists.size());
  std::size_t n = static_cast<std::size_t>(-1);
  for (const auto& w : wrists) {
    grids.push_back(resample(rebase_time(w), rate));
    n = std::min(n, grids.back().size());
  }
  std::vector<TimedPose> mean(n);
  const double inv = 1.0 / static_cast<double>(grids.size());
  for (std::size_t k = 0; k < n; ++k) {
    Vec3 p{0, 0, 0};
    Quaternion ref = grids.front()[k].pose.orientation();
    Quaternion q{0, 0, 0, 0};
    for (const auto& g : grids) {
      p = p + inv * g[k].pose.position();
      Quaternion o = g[k].pose.orientation();
      if (o.x * ref.x + o.y * ref.y + o.z * ref.z + o.w * ref.w < 0.0) o = {-o.x, -o.y, -o.z, -o.w};
      q = {q.x + o.x, q.y + o.y, q.z + o.z, q.w + o.w};
    }
    const double qn = q.norm();
    mean[k] = {grids.front()[k].t, Pose(p, qn > 0 ? Quaternion{q.x / qn, q.y / qn, q.z / qn, q.w / qn} : ref)};
  }
  GroundTruthRecord rec;
  rec.task_id = task_id;
  rec.wrist = TimedTrajectory(wrists.front().body_id(), std::move(mean));
  rec.repeats = static_cast<int>(wrists.size());
  if (!object_finals.empty()) {
    Vec3 p{0, 0, 0};
    const double oinv = 1.0 / static_cast<double>(object_finals.size());
    for (const auto& o : object_finals) p = p + oinv * o.position();
    rec.object_final_pose = Pose(p, object_finals.front().orientation());
  }
  rec.validate();
  return rec;
}

}  // namespace simcal

#endif  // SIMCAL_TRAJECTORY_HPP
