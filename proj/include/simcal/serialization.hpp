#ifndef SIMCAL_SERIALIZATION_HPP
#define SIMCAL_SERIALIZATION_HPP

// JSON forms shared by the manifest, the persisted campaign files and the
// external-backend line protocol.

#include <nlohmann/json.hpp>
#include <string>

#include "simcal/error.hpp"
#include "simcal/fitness.hpp"
#include "simcal/optimizer.hpp"
#include "simcal/param_space.hpp"
#include "simcal/simkit.hpp"
#include "simcal/trajectory.hpp"

namespace simcal {

using json = nlohmann::json;

namespace detail {

template <class T>
T get_required(const json& j, const char* key, const char* context) {
  if (!j.is_object() || !j.contains(key))
    throw ConfigError(std::string(context) + ": missing field '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string(context) + ": field '" + key + "': " + e.what());
  }
}

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.is_object() || !j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("field '") + key + "': " + e.what());
  }
}

}  // namespace detail

// --- parameters ---------------------------------------------------------------

inline json to_json(const ParameterDescriptor& d) {
  return {{"name", d.name},   {"group", std::string(to_string(d.group))}, {"lower", d.lower}, {"upper", d.upper},
          {"unit", d.unit},   {"target", d.target.to_string()}};
}

inline ParameterDescriptor descriptor_from_json(const json& j) {
  constexpr const char* ctx = "parameter descriptor";
  ParameterDescriptor d;
  d.name = detail::get_required<std::string>(j, "name", ctx);
  d.group = parse_group(detail::get_required<std::string>(j, "group", ctx));
  d.lower = detail::get_required<double>(j, "lower", ctx);
  d.upper = detail::get_required<double>(j, "upper", ctx);
  d.unit = detail::get_or<std::string>(j, "unit", "");
  d.target = ParameterTarget::parse(detail::get_or<std::string>(j, "target", "engine-global"));
  return d;
}

inline json to_json(const ParameterRegistry& r) {
  json out = json::array();
  for (const auto& d : r.descriptors()) out.push_back(to_json(d));
  return out;
}

inline ParameterRegistry registry_from_json(const json& j) {
  if (!j.is_array()) throw ConfigError("registry must be a list of descriptors");
  std::vector<ParameterDescriptor> ds;
  for (const auto& e : j) ds.push_back(descriptor_from_json(e));
  return ParameterRegistry(std::move(ds));
}

// --- DE configuration ---------------------------------------------------------

inline json to_json(const DEConfig& c) {
  return {{"crossover_rate", c.crossover_rate},
          {"mutation_range", {c.mutation_lo, c.mutation_hi}},
          {"population_factor", c.population_factor},
          {"max_generations", c.max_generations},
          {"wall_clock_budget", c.wall_clock_budget},
          {"convergence_tol", c.convergence_tol},
          {"seed", c.seed},
          {"penalty", c.penalty}};
}

inline DEConfig de_config_from_json(const json& j) {
  DEConfig c;
  if (!j.is_object()) throw ConfigError("de_config must be an object");
  c.crossover_rate = detail::get_or(j, "crossover_rate", c.crossover_rate);
  if (j.contains("mutation_range")) {
    const auto& m = j.at("mutation_range");
    if (!m.is_array() || m.size() != 2) throw ConfigError("de_config.mutation_range must be [F_lo, F_hi]");
    c.mutation_lo = m[0].get<double>();
    c.mutation_hi = m[1].get<double>();
  }
  c.population_factor = detail::get_or(j, "population_factor", c.population_factor);
  c.max_generations = detail::get_or(j, "max_generations", c.max_generations);
  c.wall_clock_budget = detail::get_or(j, "wall_clock_budget", c.wall_clock_budget);
  c.convergence_tol = detail::get_or(j, "convergence_tol", c.convergence_tol);
  c.seed = detail::get_or<std::uint64_t>(j, "seed", c.seed);
  c.penalty = detail::get_or(j, "penalty", c.penalty);
  return c;
}

// --- poses and scenes ---------------------------------------------------------

inline json to_json(const Pose& p) {
  const auto& x = p.position();
  const auto& q = p.orientation();
  return {{"position", {x[0], x[1], x[2]}}, {"orientation", {q.x, q.y, q.z, q.w}}};
}

inline Pose pose_from_json(const json& j) {
  const auto pos = detail::get_required<std::array<double, 3>>(j, "position", "pose");
  const auto q = detail::get_or<std::array<double, 4>>(j, "orientation", {0, 0, 0, 1});
  return Pose(pos, Quaternion{q[0], q[1], q[2], q[3]});
}

inline json to_json(const SceneSpec& s) {
  json script = json::array();
  for (const auto& c : s.script) script.push_back({{"t", c.t}, {"q", c.q}});
  json out{{"link_lengths", s.link_lengths}, {"link_masses", s.link_masses}, {"gripper_mass", s.gripper_mass},
           {"home", s.home},                 {"script", script},               {"duration", s.duration}};
  if (s.object) {
    out["object"] = {{"id", s.object->id},
                     {"shape", std::string(to_string(s.object->shape))},
                     {"material", std::string(to_string(s.object->material))},
                     {"initial", to_json(s.object->initial)},
                     {"nominal_mass", s.object->nominal_mass}};
  } else {
    out["object"] = nullptr;
  }
  return out;
}

inline SceneSpec scene_from_json(const json& j) {
  constexpr const char* ctx = "scene";
  SceneSpec s;
  s.link_lengths = detail::get_or(j, "link_lengths", s.link_lengths);
  s.link_masses = detail::get_or(j, "link_masses", s.link_masses);
  s.gripper_mass = detail::get_or(j, "gripper_mass", s.gripper_mass);
  s.home = detail::get_or(j, "home", s.home);
  s.duration = detail::get_required<double>(j, "duration", ctx);
  if (j.contains("script")) {
    for (const auto& c : j.at("script"))
      s.script.push_back({detail::get_required<double>(c, "t", "script entry"),
                          detail::get_required<Joints>(c, "q", "script entry")});
  }
  if (j.contains("object") && !j.at("object").is_null()) {
    const auto& o = j.at("object");
    ObjectSpec obj;
    obj.id = detail::get_required<std::string>(o, "id", "object");
    obj.shape = parse_shape(detail::get_required<std::string>(o, "shape", "object"));
    obj.material = parse_material(detail::get_required<std::string>(o, "material", "object"));
    obj.initial = pose_from_json(o.at("initial"));
    obj.nominal_mass = detail::get_required<double>(o, "nominal_mass", "object");
    s.object = obj;
  }
  s.validate();
  return s;
}

// --- physics parameters as a flat name -> value map ----------------------------

/// Every tunable of `scene` (the full Individual composition) with its value
/// in `p`. Sliding friction is included only where it has been set.
inline NamedAssignment to_assignment(const PhysicsParams& p, const SceneSpec& scene) {
  NamedAssignment out;
  const auto bodies = scene.bodies();
  const auto registry = default_individual_registry(bodies, kJoints);
  for (const auto& d : registry.descriptors()) {
    if (d.name.rfind("sliding_friction.", 0) == 0) {
      const SurfaceParams& s = d.name == "sliding_friction.gripper" ? p.gripper
                               : d.name == "sliding_friction.floor" ? p.floor
                                                                    : p.object;
      if (!s.sliding_friction) continue;
    }
    out.emplace(d.name, lookup_parameter(p, d.name, scene));
  }
  return out;
}

inline json to_json(const NamedAssignment& a) {
  json out = json::object();
  for (const auto& [k, v] : a) out[k] = v;
  return out;
}

inline NamedAssignment assignment_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("parameter assignment must be an object");
  NamedAssignment out;
  for (const auto& [k, v] : j.items()) out.emplace(k, v.get<double>());
  return out;
}

// --- simulation results ----------------------------------------------------------

inline json to_json(const SimResult& r) {
  json wrist = json::array();
  for (const auto& s : r.wrist.samples()) {
    const auto& p = s.pose.position();
    const auto& q = s.pose.orientation();
    wrist.push_back({s.t, p[0], p[1], p[2], q.x, q.y, q.z, q.w});
  }
  json out{{"status", std::string(to_string(r.status))}, {"wrist", wrist}};
  if (r.object_final) out["object_final"] = *r.object_final;
  else out["object_final"] = nullptr;
  return out;
}

inline SimResult sim_result_from_json(const json& j) {
  SimResult r;
  r.status = parse_status(detail::get_required<std::string>(j, "status", "sim result"));
  std::vector<TimedPose> samples;
  for (const auto& row : j.at("wrist")) {
    const auto v = row.get<std::array<double, 8>>();
    samples.push_back({v[0], Pose({v[1], v[2], v[3]}, Quaternion{v[4], v[5], v[6], v[7]})});
  }
  r.wrist = TimedTrajectory("wrist", std::move(samples));
  if (j.contains("object_final") && !j.at("object_final").is_null())
    r.object_final = j.at("object_final").get<Vec3>();
  return r;
}

// --- optimizer records -------------------------------------------------------------

inline json to_json(const GenerationRecord& g) {
  return {{"generation", g.generation},     {"best_fitness", g.best_fitness}, {"mean_fitness", g.mean_fitness},
          {"std_fitness", g.std_fitness},   {"elapsed_s", g.elapsed},        {"best_vector", g.best_vector.values}};
}

inline GenerationRecord generation_record_from_json(const json& j) {
  constexpr const char* ctx = "generation record";
  GenerationRecord g;
  g.generation = detail::get_required<int>(j, "generation", ctx);
  g.best_fitness = detail::get_required<double>(j, "best_fitness", ctx);
  g.mean_fitness = detail::get_required<double>(j, "mean_fitness", ctx);
  g.std_fitness = detail::get_required<double>(j, "std_fitness", ctx);
  g.elapsed = detail::get_required<double>(j, "elapsed_s", ctx);
  g.best_vector.values = detail::get_required<std::vector<double>>(j, "best_vector", ctx);
  return g;
}

}  // namespace simcal

#endif  // SIMCAL_SERIALIZATION_HPP
