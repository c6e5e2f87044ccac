#ifndef SIMCAL_PARAM_SPACE_HPP
#define SIMCAL_PARAM_SPACE_HPP

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "simcal/error.hpp"
#include "simcal/rng.hpp"

namespace simcal {

enum class ParameterGroup { Shared, Individual };

inline std::string_view to_string(ParameterGroup g) { return g == ParameterGroup::Shared ? "Shared" : "Individual"; }

inline ParameterGroup parse_group(std::string_view s) {
  if (s == "Shared") return ParameterGroup::Shared;
  if (s == "Individual") return ParameterGroup::Individual;
  throw ConfigError("unknown parameter group '" + std::string(s) + "'");
}

/// What a parameter acts on inside the simulator.
struct ParameterTarget {
  enum class Kind { EngineGlobal, PerJoint, PerBody };

  Kind kind = Kind::EngineGlobal;
  int joint = 0;        // 1-based, PerJoint only
  std::string body_id;  // PerBody only

  static ParameterTarget global() { return {}; }
  static ParameterTarget per_joint(int j) { return {Kind::PerJoint, j, {}}; }
  static ParameterTarget per_body(std::string id) { return {Kind::PerBody, 0, std::move(id)}; }

  /// "engine-global", "per-joint(3)" or "per-body(gripper)".
  std::string to_string() const {
    switch (kind) {
      case Kind::EngineGlobal: return "engine-global";
      case Kind::PerJoint: return "per-joint(" + std::to_string(joint) + ")";
      case Kind::PerBody: return "per-body(" + body_id + ")";
    }
    return {};
  }

  static ParameterTarget parse(std::string_view s) {
    if (s == "engine-global") return global();
    auto inner = [&](std::string_view prefix) -> std::optional<std::string> {
      if (s.size() > prefix.size() + 1 && s.substr(0, prefix.size()) == prefix && s.back() == ')')
        return std::string(s.substr(prefix.size(), s.size() - prefix.size() - 1));
      return std::nullopt;
    };
    if (auto j = inner("per-joint(")) {
      try {
        return per_joint(std::stoi(*j));
      } catch (const std::exception&) {
      }
    }
    if (auto b = inner("per-body(")) return per_body(*b);
    throw ConfigError("bad parameter target '" + std::string(s) + "'");
  }

  friend bool operator==(const ParameterTarget&, const ParameterTarget&) = default;
};

struct ParameterDescriptor {
  std::string name;
  ParameterGroup group = ParameterGroup::Shared;
  double lower = 0.0;
  double upper = 1.0;
  std::string unit;
  ParameterTarget target;

  double width() const { return upper - lower; }
  bool contains(double v) const { return v >= lower && v <= upper; }

  friend bool operator==(const ParameterDescriptor&, const ParameterDescriptor&) = default;
};

/// Concrete assignment aligned to a registry (values[i] <-> descriptors[i]).
struct ParameterVector {
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
  double& operator[](std::size_t i) { return values[i]; }
  double operator[](std::size_t i) const { return values[i]; }

  friend bool operator==(const ParameterVector&, const ParameterVector&) = default;
};

using NamedAssignment = std::map<std::string, double, std::less<>>;

/// Ordered, immutable set of tunables. Shared descriptors come first so the
/// vector layout of the Shared subset is stable across groups.
class ParameterRegistry {
 public:
  ParameterRegistry() = default;

  explicit ParameterRegistry(std::vector<ParameterDescriptor> descriptors) : descriptors_(std::move(descriptors)) {
    bool seen_individual = false;
    for (std::size_t i = 0; i < descriptors_.size(); ++i) {
      const auto& d = descriptors_[i];
      if (d.name.empty()) throw ConfigError("parameter with empty name");
      if (!(d.lower < d.upper) || !std::isfinite(d.lower) || !std::isfinite(d.upper))
        throw ConfigError("parameter '" + d.name + "': lower must be < upper");
      if (!index_.emplace(d.name, i).second) throw ConfigError("duplicate parameter '" + d.name + "'");
      if (d.group == ParameterGroup::Individual) seen_individual = true;
      else if (seen_individual)
        throw ConfigError("parameter '" + d.name + "': Shared descriptors must precede Individual ones");
    }
  }

  std::size_t dimension() const { return descriptors_.size(); }
  std::span<const ParameterDescriptor> descriptors() const { return descriptors_; }
  const ParameterDescriptor& operator[](std::size_t i) const { return descriptors_[i]; }

  std::optional<std::size_t> index_of(std::string_view name) const {
    auto it = index_.find(std::string(name));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  /// Only the Shared descriptors (a prefix of this registry).
  ParameterRegistry shared_subset() const {
    std::vector<ParameterDescriptor> out;
    for (const auto& d : descriptors_)
      if (d.group == ParameterGroup::Shared) out.push_back(d);
    return ParameterRegistry(std::move(out));
  }

  bool aligned(const ParameterVector& v) const { return v.size() == dimension(); }

  bool in_bounds(const ParameterVector& v) const {
    if (!aligned(v)) return false;
    for (std::size_t i = 0; i < v.size(); ++i)
      if (!descriptors_[i].contains(v[i])) return false;
    return true;
  }

  NamedAssignment decode(const ParameterVector& v) const {
    require_aligned(v);
    NamedAssignment out;
    for (std::size_t i = 0; i < v.size(); ++i) out.emplace(descriptors_[i].name, v[i]);
    return out;
  }

  /// Inverse of decode(); every registry name must be assigned.
  ParameterVector encode(const NamedAssignment& a) const {
    ParameterVector v{std::vector<double>(dimension())};
    for (std::size_t i = 0; i < dimension(); ++i) {
      auto it = a.find(descriptors_[i].name);
      if (it == a.end()) throw ConfigError("assignment lacks parameter '" + descriptors_[i].name + "'");
      v[i] = it->second;
    }
    if (a.size() != dimension()) throw ConfigError("assignment names parameters outside the registry");
    return v;
  }

  /// Uniform draw inside every descriptor's bounds.
  ParameterVector sample_uniform(Rng& rng) const {
    ParameterVector v{std::vector<double>(dimension())};
    for (std::size_t i = 0; i < dimension(); ++i) v[i] = draw(i, rng);
    return v;
  }

  double draw(std::size_t i, Rng& rng) const {
    const auto& d = descriptors_[i];
    return std::min(d.lower + d.width() * rng.uniform(), d.upper);
  }

  void require_aligned(const ParameterVector& v) const {
    if (!aligned(v))
      throw ContractError("parameter vector has " + std::to_string(v.size()) + " values, registry has " +
                          std::to_string(dimension()));
  }

  friend bool operator==(const ParameterRegistry& a, const ParameterRegistry& b) {
    return a.descriptors_ == b.descriptors_;
  }

 private:
  std::vector<ParameterDescriptor> descriptors_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Bound repair: out-of-bounds (or non-finite) components are redrawn
/// uniformly inside their bounds; in-bounds components are left untouched.
inline ParameterVector clamp_or_resample(const ParameterRegistry& registry, ParameterVector v, Rng& rng) {
  registry.require_aligned(v);
  for (std::size_t i = 0; i < v.size(); ++i)
    if (!(registry[i].contains(v[i]))) v[i] = registry.draw(i, rng);
  return v;
}

// ---------------------------------------------------------------------------
// Default compositions

enum class BodyKind { Link, Gripper, Floor, Object };

struct BodySpec {
  std::string id;
  BodyKind kind = BodyKind::Link;
  double nominal_mass = 0.0;  // kg; ignored for the floor
};

namespace bounds {
inline constexpr double kTimeStepLo = 0.001, kTimeStepHi = 0.05;
inline constexpr double kMassLoFactor = 0.7, kMassHiFactor = 1.3;
inline constexpr double kTorqueLo = 100.0, kTorqueHi = 9000.0;
inline constexpr double kVelocityLo = 10.0, kVelocityHi = 40.0;
inline constexpr double kFrictionLo = 0.0001, kFrictionHi = 1.25;
inline constexpr double kDampingLo = 0.0001, kDampingHi = 0.9;
inline constexpr double kRestitutionLo = 0.0001, kRestitutionHi = 0.9;
}  // namespace bounds

namespace param_names {
inline constexpr std::string_view kTimeStep = "time_step";
inline std::string mass(std::string_view body) { return "mass." + std::string(body); }
inline std::string max_torque(int j) { return "max_joint_torque.j" + std::to_string(j); }
inline std::string max_velocity(int j) { return "max_joint_velocity.j" + std::to_string(j); }
inline std::string joint_damping(int j) { return "joint_damping.j" + std::to_string(j); }
inline std::string lateral_friction(std::string_view body) { return "lateral_friction." + std::string(body); }
inline std::string rolling_friction(std::string_view body) { return "rolling_friction." + std::string(body); }
inline std::string sliding_friction(std::string_view body) { return "sliding_friction." + std::string(body); }
inline std::string restitution(std::string_view body) { return "restitution." + std::string(body); }
inline std::string linear_damping(std::string_view body) { return "linear_damping." + std::string(body); }
inline std::string angular_damping(std::string_view body) { return "angular_damping." + std::string(body); }
}  // namespace param_names

namespace detail {

inline bool is_contact_body(const BodySpec& b) { return b.kind != BodyKind::Link; }

inline std::vector<ParameterDescriptor> shared_descriptors(std::span<const BodySpec> bodies, int joints) {
  using namespace param_names;
  using T = ParameterTarget;
  const auto S = ParameterGroup::Shared;
  std::vector<ParameterDescriptor> out;
  out.push_back({std::string(kTimeStep), S, bounds::kTimeStepLo, bounds::kTimeStepHi, "s", T::global()});
  for (const auto& b : bodies) {
    if (b.kind == BodyKind::Floor) continue;
    if (!(b.nominal_mass > 0.0)) throw ConfigError("body '" + b.id + "' needs a positive nominal mass");
    out.push_back({mass(b.id), S, bounds::kMassLoFactor * b.nominal_mass, bounds::kMassHiFactor * b.nominal_mass,
                   "kg", T::per_body(b.id)});
  }
  for (int j = 1; j <= joints; ++j)
    out.push_back({max_torque(j), S, bounds::kTorqueLo, bounds::kTorqueHi, "engine-torque", T::per_joint(j)});
  for (int j = 1; j <= joints; ++j)
    out.push_back({max_velocity(j), S, bounds::kVelocityLo, bounds::kVelocityHi, "deg/s", T::per_joint(j)});
  for (const auto& b : bodies)
    if (is_contact_body(b))
      out.push_back({lateral_friction(b.id), S, bounds::kFrictionLo, bounds::kFrictionHi, "-", T::per_body(b.id)});
  return out;
}

}  // namespace detail

/// Shared group: time step; mass of every non-floor body in [0.7 M, 1.3 M];
/// per-joint max torque and max velocity; lateral friction of every contact
/// body (gripper, floor, objects). 6 links + gripper + one object gives 24.
inline ParameterRegistry default_shared_registry(std::span<const BodySpec> bodies, int joints) {
  if (joints < 1) throw ConfigError("default_shared_registry: need at least one joint");
  return ParameterRegistry(detail::shared_descriptors(bodies, joints));
}

/// Individual group: the Shared set plus per-joint damping and per contact
/// body rolling/sliding friction, restitution, linear and angular damping.
inline ParameterRegistry default_individual_registry(std::span<const BodySpec> bodies, int joints) {
  using namespace param_names;
  using T = ParameterTarget;
  if (joints < 1) throw ConfigError("default_individual_registry: need at least one joint");
  auto out = detail::shared_descriptors(bodies, joints);
  const auto I = ParameterGroup::Individual;
  for (int j = 1; j <= joints; ++j)
    out.push_back({joint_damping(j), I, bounds::kDampingLo, bounds::kDampingHi, "1/s", T::per_joint(j)});
  for (const auto& b : bodies) {
    if (!detail::is_contact_body(b)) continue;
    out.push_back({rolling_friction(b.id), I, bounds::kFrictionLo, bounds::kFrictionHi, "-", T::per_body(b.id)});
    out.push_back({sliding_friction(b.id), I, bounds::kFrictionLo, bounds::kFrictionHi, "-", T::per_body(b.id)});
    out.push_back({restitution(b.id), I, bounds::kRestitutionLo, bounds::kRestitutionHi, "-", T::per_body(b.id)});
    out.push_back({linear_damping(b.id), I, bounds::kDampingLo, bounds::kDampingHi, "1/s", T::per_body(b.id)});
    out.push_back({angular_damping(b.id), I, bounds::kDampingLo, bounds::kDampingHi, "1/s", T::per_body(b.id)});
  }
  return ParameterRegistry(std::move(out));
}

inline ParameterRegistry default_registry(ParameterGroup group, std::span<const BodySpec> bodies, int joints) {
  return group == ParameterGroup::Shared ? default_shared_registry(bodies, joints)
                                         : default_individual_registry(bodies, joints);
}

}  // namespace simcal

#endif  // SIMCAL_PARAM_SPACE_HPP
