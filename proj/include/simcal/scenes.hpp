#ifndef SIMCAL_SCENES_HPP
#define SIMCAL_SCENES_HPP

// Built-in desk-scale scenes for the ten dataset tasks. Tasks 1-2 move the
// arm only; 3-10 push one object across the floor, sideways or outwards.

#include <string>

#include "simcal/error.hpp"
#include "simcal/simkit.hpp"

namespace simcal {

namespace waypoints {
// Joint configurations (rad) placing the wrist at the noted position (m).
inline constexpr Joints kHome{0.4, -1.3, 1.9, 0.5, 0.8, 0.4};                       // (0.32, 0.28, 0.33)
inline constexpr Joints kUpLeft{-0.242, -0.834, 1.302, -0.101, 1.126, -0.086};      // (0.50,-0.16, 0.22)
inline constexpr Joints kLowLeft{-0.249, -0.495, 1.256, -0.096, 0.999, -0.078};     // (0.50,-0.16, 0.05)
inline constexpr Joints kLowRight{0.257, -0.495, 1.253, 0.087, 1.003, 0.053};       // (0.50, 0.16, 0.05)
inline constexpr Joints kUpRight{0.247, -0.87, 1.296, 0.101, 1.14, 0.059};          // (0.50, 0.16, 0.24)
inline constexpr Joints kNearLow{-0.013, -0.52, 1.558, 0.018, 1.163, -0.002};       // (0.36, 0.00, 0.05)
inline constexpr Joints kFarLow{0.01, -0.42, 1.03, -0.022, 0.832, -0.019};          // (0.64, 0.00, 0.05)
inline constexpr Joints kNearUp{-0.016, -0.939, 1.61, 0.022, 1.347, -0.002};        // (0.36, 0.00, 0.22)
inline constexpr Joints kFarUp{0.009, -0.742, 1.117, -0.016, 0.969, -0.02};         // (0.62, 0.00, 0.22)
inline constexpr Joints kK1{-0.448, -1.154, 1.439, -0.206, 1.347, -0.165};
inline constexpr Joints kK2{0.296, -0.742, 1.184, 0.097, 1.025, 0.06};
inline constexpr Joints kK3{0.463, -1.168, 1.166, 0.205, 1.158, 0.135};
inline constexpr Joints kK4{-0.226, -1.023, 1.695, -0.08, 1.427, -0.073};
inline constexpr Joints kK5{-0.262, -0.846, 1.084, -0.116, 0.974, -0.094};
inline constexpr Joints kK6{0.261, -0.75, 1.483, 0.127, 1.214, 0.073};
}  // namespace waypoints

struct TaskInfo {
  ObjectShape shape;
  Material material;
  double mass;  // kg
  bool lateral;  // pushed sideways across the reach (true) or away from the base (false)
};

/// Object used by task 3..10.
inline TaskInfo task_info(int task_id) {
  switch (task_id) {
    case 3: return {ObjectShape::Cube, Material::Wood, 0.08, true};
    case 4: return {ObjectShape::Cube, Material::Plastic, 0.05, false};
    case 5: return {ObjectShape::Cylinder, Material::Wood, 0.09, true};
    case 6: return {ObjectShape::Cylinder, Material::Plastic, 0.06, true};
    case 7: return {ObjectShape::Cone, Material::Wood, 0.05, false};
    case 8: return {ObjectShape::Cone, Material::Plastic, 0.03, true};
    case 9: return {ObjectShape::Cuboid, Material::Plastic, 0.07, true};
    case 10: return {ObjectShape::Cuboid, Material::Wood, 0.11, false};
    default: throw ConfigError("task " + std::to_string(task_id) + " has no object");
  }
}

/// Scene of dataset task 1..10.
inline SceneSpec builtin_scene(int task_id) {
  using namespace waypoints;
  if (task_id < 1 || task_id > 10) throw ConfigError("builtin scene: task id must be in 1..10");
  SceneSpec s;
  s.home = kHome;
  if (task_id == 1) {
    s.script = {{0.5, kK1}, {2.5, kK2}, {4.5, kK3}, {6.5, kK4}};
    s.duration = 8.0;
    return s;
  }
  if (task_id == 2) {
    s.script = {{0.5, kK5}, {2.5, kK6}, {4.0, kK1}, {6.0, kK3}};
    s.duration = 8.0;
    return s;
  }
  const TaskInfo info = task_info(task_id);
  const ShapeGeometry g = geometry(info.shape);
  ObjectSpec obj;
  obj.id = std::string(to_string(info.material)) + "_" + std::string(to_string(info.shape));
  obj.shape = info.shape;
  obj.material = info.material;
  obj.nominal_mass = info.mass;
  if (info.lateral) {
    obj.initial = Pose({0.5, 0.0, g.half_height});
    s.script = {{0.3, kUpLeft}, {2.0, kLowLeft}, {3.5, kLowRight}, {5.5, kUpRight}};
  } else {
    obj.initial = Pose({0.44, 0.0, g.half_height});
    s.script = {{0.3, kNearUp}, {2.0, kNearLow}, {3.5, kFarLow}, {5.5, kFarUp}};
  }
  s.object = obj;
  s.duration = 7.0;
  return s;
}

}  // namespace simcal

#endif  // SIMCAL_SCENES_HPP
