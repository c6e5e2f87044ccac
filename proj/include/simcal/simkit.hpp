#ifndef SIMCAL_SIMKIT_HPP
#define SIMCAL_SIMKIT_HPP

// Simulator backends. Two deterministic reference engines model a 6-joint
// arm on a floor plane with at most one object:
//
//  * joints track the command script with a proportional controller
//    (gain 10/s), saturated at the max joint velocity and accelerated at most
//    by max_torque * kTorqueScale / effective inertia;
//  * the wrist is the end of the kinematic chain; a sphere of radius 0.03 m
//    around it pushes the object, transferring normal velocity according to
//    restitution and the gripper/object mass ratio;
//  * the object moves in the floor plane and is decelerated by Coulomb
//    friction (sliding shapes) or rolling resistance (round shapes) and by
//    multiplicative damping.
//
// engine-a integrates explicitly (positions from the old velocities),
// engine-b semi-implicitly with a stiffer contact impulse.

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "simcal/error.hpp"
#include "simcal/param_space.hpp"
#include "simcal/trajectory.hpp"

namespace simcal {

inline constexpr int kJoints = 6;
inline constexpr double kGravity = 9.81;
inline constexpr double kContactRadius = 0.03;
inline constexpr double kControlGain = 10.0;
inline constexpr double kTorqueScale = 0.1;
inline constexpr double kDegToRad = 3.14159265358979323846 / 180.0;

using Joints = std::array<double, kJoints>;

enum class ObjectShape { Cube, Cuboid, Cylinder, Cone };
enum class Material { Wood, Plastic };

inline std::string_view to_string(ObjectShape s) {
  switch (s) {
    case ObjectShape::Cube: return "cube";
    case ObjectShape::Cuboid: return "cuboid";
    case ObjectShape::Cylinder: return "cylinder";
    case ObjectShape::Cone: return "cone";
  }
  return "?";
}

inline ObjectShape parse_shape(std::string_view s) {
  for (auto v : {ObjectShape::Cube, ObjectShape::Cuboid, ObjectShape::Cylinder, ObjectShape::Cone})
    if (to_string(v) == s) return v;
  throw ConfigError("unknown object shape '" + std::string(s) + "'");
}

inline std::string_view to_string(Material m) { return m == Material::Wood ? "wood" : "plastic"; }

inline Material parse_material(std::string_view s) {
  if (s == "wood") return Material::Wood;
  if (s == "plastic") return Material::Plastic;
  throw ConfigError("unknown material '" + std::string(s) + "'");
}

struct ShapeGeometry {
  double radius;       // horizontal contact radius, m
  double half_height;  // resting height of the center, m
  bool rolls;          // rolling resistance instead of sliding friction
};

inline ShapeGeometry geometry(ObjectShape s) {
  switch (s) {
    case ObjectShape::Cube: return {0.025, 0.025, false};
    case ObjectShape::Cuboid: return {0.035, 0.025, false};
    case ObjectShape::Cylinder: return {0.03, 0.03, true};
    case ObjectShape::Cone: return {0.03, 0.03, true};
  }
  return {0.03, 0.03, false};
}

struct ObjectSpec {
  std::string id;
  ObjectShape shape = ObjectShape::Cube;
  Material material = Material::Wood;
  Pose initial;
  double nominal_mass = 0.1;  // kg
};

struct JointCommand {
  double t = 0.0;  // s
  Joints q{};      // rad
};

struct SceneSpec {
  Joints link_lengths{0.2755, 0.41, 0.2073, 0.0741, 0.0741, 0.16};
  Joints link_masses{1.0, 0.9, 0.6, 0.4, 0.3, 0.2};
  double gripper_mass = 0.7;
  Joints home{};
  std::vector<JointCommand> script;
  std::optional<ObjectSpec> object;
  double duration = 0.0;  // s

  void validate() const {
    for (int j = 0; j < kJoints; ++j) {
      if (!(link_lengths[j] >= 0.0) || !std::isfinite(link_lengths[j])) throw ConfigError("scene: bad link length");
      if (!(link_masses[j] > 0.0)) throw ConfigError("scene: link masses must be positive");
    }
    if (!(gripper_mass > 0.0)) throw ConfigError("scene: gripper mass must be positive");
    for (std::size_t i = 0; i < script.size(); ++i) {
      if (!std::isfinite(script[i].t) || script[i].t < 0.0) throw ConfigError("scene: bad command time");
      if (i > 0 && !(script[i].t > script[i - 1].t))
        throw ConfigError("scene: command script times must be strictly increasing");
    }
    if (!(duration >= 0.0) || !std::isfinite(duration)) throw ConfigError("scene: bad duration");
    if (object) {
      if (object->id.empty()) throw ConfigError("scene: object needs an id");
      if (!(object->nominal_mass > 0.0)) throw ConfigError("scene: object mass must be positive");
    }
  }

  /// Bodies in registry order: link1..link6, gripper, floor, object.
  std::vector<BodySpec> bodies() const {
    std::vector<BodySpec> out;
    for (int j = 0; j < kJoints; ++j)
      out.push_back({"link" + std::to_string(j + 1), BodyKind::Link, link_masses[j]});
    out.push_back({"gripper", BodyKind::Gripper, gripper_mass});
    out.push_back({"floor", BodyKind::Floor, 0.0});
    if (object) out.push_back({object->id, BodyKind::Object, object->nominal_mass});
    return out;
  }

  /// Joint target active at time t (latest command at or before t).
  const Joints& target_at(double t) const {
    const Joints* q = &home;
    for (const auto& c : script) {
      if (c.t <= t) q = &c.q;
      else break;
    }
    return *q;
  }
};

/// Wrist position for joint angles q. Axes: z, y, y, x, y, z; links 1 along
/// z and 2..6 along the local x axis.
inline Vec3 forward_kinematics(const Joints& lengths, const Joints& q) {
  using M = std::array<double, 9>;  // row-major
  auto mul = [](const M& a, const M& b) {
    M r{};
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) r[3 * i + j] = a[3 * i] * b[j] + a[3 * i + 1] * b[3 + j] + a[3 * i + 2] * b[6 + j];
    return r;
  };
  auto rz = [](double t) { const double c = std::cos(t), s = std::sin(t); return M{c, -s, 0, s, c, 0, 0, 0, 1}; };
  auto ry = [](double t) { const double c = std::cos(t), s = std::sin(t); return M{c, 0, s, 0, 1, 0, -s, 0, c}; };
  auto rx = [](double t) { const double c = std::cos(t), s = std::sin(t); return M{1, 0, 0, 0, c, -s, 0, s, c}; };
  M R{1, 0, 0, 0, 1, 0, 0, 0, 1};
  Vec3 p{0, 0, 0};
  auto advance_x = [&](double len) { p = p + Vec3{R[0] * len, R[3] * len, R[6] * len}; };
  R = mul(R, rz(q[0]));
  p = p + Vec3{R[2] * lengths[0], R[5] * lengths[0], R[8] * lengths[0]};
  R = mul(R, ry(q[1]));
  advance_x(lengths[1]);
  R = mul(R, ry(q[2]));
  advance_x(lengths[2]);
  R = mul(R, rx(q[3]));
  advance_x(lengths[3]);
  R = mul(R, ry(q[4]));
  advance_x(lengths[4]);
  R = mul(R, rz(q[5]));
  advance_x(lengths[5]);
  return p;
}

// ---------------------------------------------------------------------------
// Physical parameters resolved for one simulation

struct SurfaceParams {
  double lateral_friction = 0.5;
  double rolling_friction = 0.01;
  std::optional<double> sliding_friction;  // kinetic; falls back to lateral
  double restitution = 0.2;
  double linear_damping = 0.0;
  double angular_damping = 0.0;

  friend bool operator==(const SurfaceParams&, const SurfaceParams&) = default;
};

struct PhysicsParams {
  double time_step = 0.01;
  Joints link_mass{1.0, 0.9, 0.6, 0.4, 0.3, 0.2};
  double gripper_mass = 0.7;
  double object_mass = 0.1;
  Joints max_torque{};
  Joints max_velocity{};  // deg/s
  Joints joint_damping{};
  SurfaceParams gripper;
  SurfaceParams floor;
  SurfaceParams object;

  friend bool operator==(const PhysicsParams&, const PhysicsParams&) = default;
};

namespace detail {

/// Location of a named parameter inside PhysicsParams. Sliding friction is
/// optional (unset means "same as lateral"), hence the second pointer.
struct FieldRef {
  double* value = nullptr;
  std::optional<double>* optional = nullptr;
  double fallback = 0.0;
};

inline FieldRef find_field(PhysicsParams& p, std::string_view name, const SceneSpec& scene) {
  if (name == param_names::kTimeStep) return {&p.time_step};
  const auto dot = name.find('.');
  if (dot == std::string_view::npos) return {};
  const std::string_view kind = name.substr(0, dot);
  const std::string_view target = name.substr(dot + 1);

  int joint = -1;
  if (target.size() == 2 && target[0] == 'j' && target[1] >= '1' && target[1] <= '6') joint = target[1] - '1';
  if (joint >= 0) {
    if (kind == "max_joint_torque") return {&p.max_torque[joint]};
    if (kind == "max_joint_velocity") return {&p.max_velocity[joint]};
    if (kind == "joint_damping") return {&p.joint_damping[joint]};
    return {};
  }
  const bool is_object = scene.object && target == scene.object->id;
  if (kind == "mass") {
    if (target.size() == 5 && target.substr(0, 4) == "link" && target[4] >= '1' && target[4] <= '6')
      return {&p.link_mass[target[4] - '1']};
    if (target == "gripper") return {&p.gripper_mass};
    if (is_object) return {&p.object_mass};
    return {};
  }
  SurfaceParams* s = target == "gripper" ? &p.gripper : target == "floor" ? &p.floor : is_object ? &p.object : nullptr;
  if (!s) return {};
  if (kind == "lateral_friction") return {&s->lateral_friction};
  if (kind == "rolling_friction") return {&s->rolling_friction};
  if (kind == "sliding_friction") return {nullptr, &s->sliding_friction, s->lateral_friction};
  if (kind == "restitution") return {&s->restitution};
  if (kind == "linear_damping") return {&s->linear_damping};
  if (kind == "angular_damping") return {&s->angular_damping};
  return {};
}

}  // namespace detail

/// True when `name` addresses a field of this scene's physics.
inline bool knows_parameter(std::string_view name, const SceneSpec& scene) {
  PhysicsParams p;
  const auto ref = detail::find_field(p, name, scene);
  return ref.value || ref.optional;
}

/// Overrides the fields named by `assignment` on top of `base`. Names use
/// the param_names scheme with bodies link1..6, gripper, floor and the
/// scene's object id. Unknown names throw ConfigError unless
/// `ignore_unknown` (multi-task registries name other scenes' objects).
inline PhysicsParams apply_assignment(PhysicsParams p, const NamedAssignment& assignment, const SceneSpec& scene,
                                      bool ignore_unknown = false) {
  for (const auto& [name, value] : assignment) {
    const auto ref = detail::find_field(p, name, scene);
    if (ref.value) *ref.value = value;
    else if (ref.optional) *ref.optional = value;
    else if (!ignore_unknown) throw ConfigError("unknown simulator parameter '" + name + "'");
  }
  return p;
}

/// Value of a named parameter in `p`.
inline double lookup_parameter(PhysicsParams p, std::string_view name, const SceneSpec& scene) {
  const auto ref = detail::find_field(p, name, scene);
  if (ref.value) return *ref.value;
  if (ref.optional) return ref.optional->value_or(ref.fallback);
  throw ConfigError("unknown simulator parameter '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------
// Engine state and stepping

struct ObjectState {
  double x = 0.0, y = 0.0, z = 0.0;  // m
  double vx = 0.0, vy = 0.0;         // m/s

  friend bool operator==(const ObjectState&, const ObjectState&) = default;
};

struct EngineState {
  double t = 0.0;
  Joints q{};
  Joints qdot{};
  Vec3 wrist{0, 0, 0};
  std::optional<ObjectState> object;

  friend bool operator==(const EngineState&, const EngineState&) = default;
};

/// Scene constants needed by a step.
struct StepContext {
  Joints link_lengths{};
  Joints target{};
  std::optional<ShapeGeometry> shape;
};

enum class EngineKind { A, B };

namespace detail {

/// Conservative effective inertia about each joint: every distal mass at the
/// fully-extended distance.
inline Joints effective_inertia(const Joints& lengths, const PhysicsParams& p) {
  Joints inertia{};
  for (int j = 0; j < kJoints; ++j) {
    double sum = 0.0;
    double r = 0.0;
    for (int k = j; k < kJoints; ++k) {
      r += (k == 0 ? 0.0 : lengths[k]);
      sum += p.link_mass[k] * r * r;
    }
    sum += p.gripper_mass * r * r;
    inertia[j] = std::max(sum, 1e-3);
  }
  return inertia;
}

inline double combine_min(double a, double b) { return std::min(a, b); }

/// Deceleration (m/s^2) and damping rate (1/s) acting on a moving object.
inline std::pair<double, double> object_resistance(const PhysicsParams& p, const ShapeGeometry& shape) {
  double mu;
  double damping = p.object.linear_damping + p.floor.linear_damping;
  if (shape.rolls) {
    mu = combine_min(p.object.rolling_friction, p.floor.rolling_friction);
    damping += p.object.angular_damping + p.floor.angular_damping;
  } else {
    mu = combine_min(p.object.sliding_friction.value_or(p.object.lateral_friction),
                     p.floor.sliding_friction.value_or(p.floor.lateral_friction));
  }
  return {mu * kGravity, damping};
}

inline void advance_object(EngineKind kind, ObjectState& o, const PhysicsParams& p, const ShapeGeometry& shape,
                           double dt) {
  const auto [decel, damping] = object_resistance(p, shape);
  const double speed = std::hypot(o.vx, o.vy);
  double scale = 1.0;
  if (speed > 0.0) {
    const double after = std::max(0.0, speed - decel * dt);
    scale = after / speed * std::max(0.0, 1.0 - damping * dt);
  }
  if (kind == EngineKind::A) {
    o.x += o.vx * dt;
    o.y += o.vy * dt;
    o.vx *= scale;
    o.vy *= scale;
  } else {
    o.vx *= scale;
    o.vy *= scale;
    o.x += o.vx * dt;
    o.y += o.vy * dt;
  }
}

/// Pushes the object out of the wrist sphere and applies the normal impulse
/// and tangential drag.
inline void resolve_contact(EngineKind kind, ObjectState& o, const Vec3& wrist, const Vec3& wrist_velocity,
                            const PhysicsParams& p, const ShapeGeometry& shape) {
  const double reach = kContactRadius + shape.radius;
  const Vec3 d{o.x - wrist[0], o.y - wrist[1], o.z - wrist[2]};
  const double dist = norm(d);
  if (!(dist < reach)) return;
  const double horizontal = std::hypot(d[0], d[1]);
  if (horizontal < 1e-9 || std::abs(d[2]) >= reach) return;
  const double nx = d[0] / horizontal, ny = d[1] / horizontal;
  const double nz = dist > 0 ? std::abs(d[2]) / dist : 0.0;

  // Positional projection to the sphere surface.
  const double sep = std::sqrt(reach * reach - d[2] * d[2]);
  o.x = wrist[0] + nx * sep;
  o.y = wrist[1] + ny * sep;

  const double rvx = wrist_velocity[0] - o.vx, rvy = wrist_velocity[1] - o.vy;
  const double approach = (rvx * nx + rvy * ny) * (1.0 - 0.1 * p.gripper.linear_damping);
  if (approach <= 0.0) return;

  const double e = p.gripper.restitution * p.object.restitution;
  const double ratio = p.gripper_mass / (p.gripper_mass + p.object_mass);
  const double transfer = kind == EngineKind::A ? ratio : std::sqrt(ratio);
  const double floor_loss = 1.0 - 0.5 * (1.0 - p.floor.restitution) * nz;
  const double dv = (1.0 + e) * transfer * approach * floor_loss;
  o.vx += dv * nx;
  o.vy += dv * ny;

  // Tangential drag from gripper friction.
  const double tx = rvx - (rvx * nx + rvy * ny) * nx;
  const double ty = rvy - (rvx * nx + rvy * ny) * ny;
  const double mu_t = std::min(1.0, combine_min(p.gripper.lateral_friction, shape.rolls ? p.object.rolling_friction
                                                                                       : p.object.lateral_friction));
  const double drag = mu_t * ratio * (1.0 - p.gripper.angular_damping);
  o.vx += drag * tx;
  o.vy += drag * ty;
}

inline EngineState engine_step(EngineKind kind, const EngineState& s, const PhysicsParams& p, const StepContext& ctx,
                               double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ContractError("engine step: dt must be positive");
  const Joints inertia = effective_inertia(ctx.link_lengths, p);
  EngineState out = s;
  for (int j = 0; j < kJoints; ++j) {
    const double vmax = p.max_velocity[j] * kDegToRad;
    const double amax = p.max_torque[j] * kTorqueScale / inertia[j];
    const double v_des = std::clamp(kControlGain * (ctx.target[j] - s.q[j]), -vmax, vmax);
    const double accel = std::clamp((v_des - s.qdot[j]) / dt, -amax, amax);
    double v = (s.qdot[j] + accel * dt) * std::max(0.0, 1.0 - p.joint_damping[j] * dt);
    v = std::clamp(v, -vmax, vmax);
    out.qdot[j] = v;
    out.q[j] = s.q[j] + (kind == EngineKind::A ? s.qdot[j] : v) * dt;
  }
  out.wrist = forward_kinematics(ctx.link_lengths, out.q);
  out.t = s.t + dt;
  if (out.object && ctx.shape) {
    const Vec3 wrist_velocity = (1.0 / dt) * (out.wrist - s.wrist);
    if (kind == EngineKind::A) {
      advance_object(kind, *out.object, p, *ctx.shape, dt);
      resolve_contact(kind, *out.object, out.wrist, wrist_velocity, p, *ctx.shape);
    } else {
      resolve_contact(kind, *out.object, out.wrist, wrist_velocity, p, *ctx.shape);
      advance_object(kind, *out.object, p, *ctx.shape, dt);
    }
  }
  return out;
}

}  // namespace detail

/// Explicit-Euler step of the reference model.
inline EngineState reference_engine_a_step(const EngineState& s, const PhysicsParams& p, const StepContext& ctx,
                                           double dt) {
  return detail::engine_step(EngineKind::A, s, p, ctx, dt);
}

/// Semi-implicit step with the stiffer contact impulse.
inline EngineState reference_engine_b_step(const EngineState& s, const PhysicsParams& p, const StepContext& ctx,
                                           double dt) {
  return detail::engine_step(EngineKind::B, s, p, ctx, dt);
}

// ---------------------------------------------------------------------------
// Backends

enum class SimStatus { Ok, Diverged, NonFinite };

inline std::string_view to_string(SimStatus s) {
  switch (s) {
    case SimStatus::Ok: return "ok";
    case SimStatus::Diverged: return "diverged";
    case SimStatus::NonFinite: return "non-finite";
  }
  return "?";
}

inline SimStatus parse_status(std::string_view s) {
  for (auto v : {SimStatus::Ok, SimStatus::Diverged, SimStatus::NonFinite})
    if (to_string(v) == s) return v;
  throw ConfigError("unknown simulation status '" + std::string(s) + "'");
}

struct SimResult {
  TimedTrajectory wrist{"wrist", {TimedPose{}}};
  std::optional<Vec3> object_final;
  SimStatus status = SimStatus::Ok;

  friend bool operator==(const SimResult&, const SimResult&) = default;
};

class Backend {
 public:
  virtual ~Backend() = default;
  virtual std::string name() const = 0;
  /// Out-of-the-box settings of this engine for `scene`.
  virtual PhysicsParams generic_params(const SceneSpec& scene) const = 0;
  virtual SimResult simulate(const SceneSpec& scene, const PhysicsParams& params) const = 0;
};

inline constexpr double kDivergenceLimit = 1e3;  // m or m/s

class ReferenceEngine final : public Backend {
 public:
  explicit ReferenceEngine(EngineKind kind) : kind_(kind) {}

  std::string name() const override { return kind_ == EngineKind::A ? "engine-a" : "engine-b"; }

  PhysicsParams generic_params(const SceneSpec& scene) const override {
    PhysicsParams p;
    p.link_mass = scene.link_masses;
    p.gripper_mass = scene.gripper_mass;
    p.object_mass = scene.object ? scene.object->nominal_mass : 0.1;
    if (kind_ == EngineKind::A) {
      p.time_step = 0.0041;
      p.max_torque.fill(2000.0);
      p.max_velocity.fill(18.0);
      p.joint_damping.fill(0.1);
      p.gripper = {0.5, 0.01, std::nullopt, 0.3, 0.04, 0.04};
      p.floor = {1.0, 0.01, std::nullopt, 0.3, 0.0, 0.0};
      p.object = {0.5, 0.01, std::nullopt, 0.3, 0.04, 0.04};
    } else {
      p.time_step = 0.05;
      p.max_torque.fill(2500.0);
      p.max_velocity.fill(22.0);
      p.joint_damping.fill(0.05);
      p.gripper = {0.71, 0.02, std::nullopt, 0.2, 0.0, 0.0};
      p.floor = {0.71, 0.02, std::nullopt, 0.2, 0.0, 0.0};
      p.object = {0.71, 0.02, std::nullopt, 0.2, 0.0, 0.0};
    }
    return p;
  }

  SimResult simulate(const SceneSpec& scene, const PhysicsParams& params) const override {
    scene.validate();
    const double dt = params.time_step;
    if (!(dt > 0.0) || !std::isfinite(dt)) throw ContractError("simulate: time step must be positive");

    StepContext ctx;
    ctx.link_lengths = scene.link_lengths;
    EngineState state;
    state.q = scene.home;
    state.wrist = forward_kinematics(scene.link_lengths, state.q);
    if (scene.object) {
      ctx.shape = geometry(scene.object->shape);
      const Vec3& p0 = scene.object->initial.position();
      state.object = ObjectState{p0[0], p0[1], p0[2], 0.0, 0.0};
    }

    const auto grid = uniform_grid(0.0, kFitnessRateHz, grid_point_count(scene.duration, kFitnessRateHz));
    std::vector<TimedPose> samples;
    samples.reserve(grid.size());
    SimStatus status = SimStatus::Ok;
    std::size_t next = 0;
    for (long long n = 0; next < grid.size(); ++n) {
      // Zero-order hold: a grid point sees the latest completed step.
      const double step_end = static_cast<double>(n + 1) * dt;
      while (next < grid.size() && grid[next] < step_end - 1e-12) {
        samples.push_back({grid[next], Pose(state.wrist)});
        ++next;
      }
      if (next == grid.size()) break;
      ctx.target = scene.target_at(static_cast<double>(n) * dt);
      state = detail::engine_step(kind_, state, params, ctx, dt);
      status = check(state);
      if (status != SimStatus::Ok) break;
    }

    SimResult result;
    result.status = status;
    if (samples.empty()) samples.push_back({0.0, Pose(forward_kinematics(scene.link_lengths, scene.home))});
    result.wrist = TimedTrajectory("wrist", std::move(samples));
    if (state.object && status == SimStatus::Ok) result.object_final = Vec3{state.object->x, state.object->y, state.object->z};
    else if (scene.object && status == SimStatus::Ok) result.object_final = scene.object->initial.position();
    return result;
  }

 private:
  static SimStatus check(const EngineState& s) {
    auto finite = [](const Joints& a) { return std::all_of(a.begin(), a.end(), [](double v) { return std::isfinite(v); }); };
    if (!finite(s.q) || !finite(s.qdot) || !all_finite(s.wrist)) return SimStatus::NonFinite;
    if (s.object) {
      const auto& o = *s.object;
      if (!std::isfinite(o.x) || !std::isfinite(o.y) || !std::isfinite(o.vx) || !std::isfinite(o.vy))
        return SimStatus::NonFinite;
      if (std::abs(o.x) > kDivergenceLimit || std::abs(o.y) > kDivergenceLimit ||
          std::hypot(o.vx, o.vy) > kDivergenceLimit)
        return SimStatus::Diverged;
    }
    if (norm(s.wrist) > kDivergenceLimit) return SimStatus::Diverged;
    return SimStatus::Ok;
  }

  EngineKind kind_;
};

/// Named set of backends. Lookups of unregistered names throw RegistryError.
class BackendRegistry {
 public:
  static BackendRegistry with_reference_engines() {
    BackendRegistry r;
    r.add(std::make_shared<ReferenceEngine>(EngineKind::A));
    r.add(std::make_shared<ReferenceEngine>(EngineKind::B));
    return r;
  }

  void add(std::shared_ptr<const Backend> backend) {
    const std::string name = backend->name();
    if (!backends_.emplace(name, std::move(backend)).second)
      throw RegistryError("backend '" + name + "' registered twice");
  }

  const Backend& get(std::string_view name) const {
    auto it = backends_.find(std::string(name));
    if (it == backends_.end()) throw RegistryError("unknown backend '" + std::string(name) + "'");
    return *it->second;
  }

  bool contains(std::string_view name) const { return backends_.count(std::string(name)) > 0; }

  std::vector<std::string> names() const {
    std::vector<std::string> out;
    for (const auto& [k, v] : backends_) out.push_back(k);
    return out;
  }

 private:
  std::map<std::string, std::shared_ptr<const Backend>> backends_;
};

/// Generic settings overridden by the parameters in `values`.
inline PhysicsParams resolve_params(const Backend& backend, const SceneSpec& scene, const ParameterRegistry& registry,
                                    const ParameterVector& values, bool ignore_unknown = false) {
  return apply_assignment(backend.generic_params(scene), registry.decode(values), scene, ignore_unknown);
}

/// The backend's generic settings expressed as a vector over `registry`,
/// pulled inside the bounds where a default lies outside them. Each name is
/// looked up in the first scene that knows it.
inline ParameterVector generic_vector(const Backend& backend, std::span<const SceneSpec> scenes,
                                      const ParameterRegistry& registry) {
  ParameterVector v{std::vector<double>(registry.dimension())};
  for (std::size_t i = 0; i < registry.dimension(); ++i) {
    const auto& d = registry[i];
    const auto it = std::find_if(scenes.begin(), scenes.end(),
                                 [&](const SceneSpec& s) { return knows_parameter(d.name, s); });
    if (it == scenes.end()) throw ConfigError("no scene defines parameter '" + d.name + "'");
    v[i] = std::clamp(lookup_parameter(backend.generic_params(*it), d.name, *it), d.lower, d.upper);
  }
  return v;
}

inline ParameterVector generic_vector(const Backend& backend, const SceneSpec& scene,
                                      const ParameterRegistry& registry) {
  return generic_vector(backend, std::span<const SceneSpec>(&scene, 1), registry);
}

inline SimResult simulate(const BackendRegistry& backends, std::string_view backend, const SceneSpec& scene,
                          const ParameterRegistry& registry, const ParameterVector& values,
                          bool ignore_unknown = false) {
  const Backend& b = backends.get(backend);
  return b.simulate(scene, resolve_params(b, scene, registry, values, ignore_unknown));
}

}  // namespace simcal

#endif  // SIMCAL_SIMKIT_HPP
