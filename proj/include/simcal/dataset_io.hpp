#ifndef SIMCAL_DATASET_IO_HPP
#define SIMCAL_DATASET_IO_HPP

// Ground-truth CSV files: header `t,x,y,z,qx,qy,qz,qw`, one row per sample
// in time order. A task directory holds
//   wrist.csv             or  wrist_r1.csv, wrist_r2.csv, ...
//   object_final.csv      or  object_final_r1.csv, ...   (object tasks only)
// Multiple repeats are reduced with average_repeats().

#include <array>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "simcal/error.hpp"
#include "simcal/trajectory.hpp"

namespace simcal {

inline constexpr std::string_view kTrajectoryCsvHeader = "t,x,y,z,qx,qy,qz,qw";

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

/// Shortest decimal form that parses back to the identical double.
inline std::string format_double(double v) {
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

inline std::vector<TimedPose> parse_rows(std::istream& in, const std::string& source) {
  std::string line;
  std::size_t lineno = 0;
  if (!std::getline(in, line)) throw ParseError(source, 0, "empty file");
  ++lineno;
  if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF) line.erase(0, 3);  // UTF-8 BOM
  if (trim(line) != kTrajectoryCsvHeader)
    throw ParseError(source, lineno, "expected header '" + std::string(kTrajectoryCsvHeader) + "'");

  std::vector<TimedPose> rows;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string_view body = trim(line);
    if (body.empty()) continue;
    std::array<double, 8> v{};
    std::size_t col = 0;
    std::size_t pos = 0;
    while (true) {
      const std::size_t comma = body.find(',', pos);
      const std::string_view field = trim(body.substr(pos, comma == std::string_view::npos ? body.npos : comma - pos));
      if (col >= v.size()) throw ParseError(source, lineno, "too many columns");
      const auto res = std::from_chars(field.data(), field.data() + field.size(), v[col]);
      if (res.ec != std::errc() || res.ptr != field.data() + field.size() || field.empty())
        throw ParseError(source, lineno, "column " + std::to_string(col + 1) + ": not a number '" +
                                             std::string(field) + "'");
      if (!std::isfinite(v[col])) throw ParseError(source, lineno, "non-finite value");
      ++col;
      if (comma == std::string_view::npos) break;
      pos = comma + 1;
    }
    if (col != v.size())
      throw ParseError(source, lineno, "expected 8 columns, found " + std::to_string(col));
    if (!rows.empty() && !(v[0] > rows.back().t))
      throw ParseError(source, lineno, "timestamp " + format_double(v[0]) + " not after previous row");

    Quaternion q{v[4], v[5], v[6], v[7]};
    const double n = q.norm();
    if (!(n > 1e-9)) throw ParseError(source, lineno, "quaternion cannot be normalized");
    if (std::abs(n - 1.0) > kQuaternionNormTolerance) q = {q.x / n, q.y / n, q.z / n, q.w / n};
    rows.push_back({v[0], Pose({v[1], v[2], v[3]}, q)});
  }
  if (rows.empty()) throw ParseError(source, lineno, "no data rows");
  return rows;
}

}  // namespace detail

inline TimedTrajectory read_trajectory_csv(std::istream& in, const std::string& body_id,
                                           const std::string& source = "<stream>") {
  return TimedTrajectory(body_id, detail::parse_rows(in, source));
}

inline TimedTrajectory read_trajectory_csv(const std::filesystem::path& path, const std::string& body_id) {
  std::ifstream in(path);
  if (!in) throw ParseError(path.string(), 0, "cannot open file");
  return read_trajectory_csv(in, body_id, path.string());
}

inline void write_trajectory_csv(std::ostream& out, const TimedTrajectory& traj) {
  out << kTrajectoryCsvHeader << '\n';
  for (const auto& s : traj.samples()) {
    const Vec3& p = s.pose.position();
    const Quaternion& q = s.pose.orientation();
    out << detail::format_double(s.t) << ',' << detail::format_double(p[0]) << ','
        << detail::format_double(p[1]) << ',' << detail::format_double(p[2]) << ','
        << detail::format_double(q.x) << ',' << detail::format_double(q.y) << ','
        << detail::format_double(q.z) << ',' << detail::format_double(q.w) << '\n';
  }
}

inline void write_trajectory_csv(const std::filesystem::path& path, const TimedTrajectory& traj) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  write_trajectory_csv(out, traj);
  if (!out) throw Error("write failed: " + path.string());
}

/// Reads a single-row pose file (object final pose).
inline Pose read_pose_csv(const std::filesystem::path& path) {
  const auto traj = read_trajectory_csv(path, "object");
  if (traj.size() != 1) throw ParseError(path.string(), 0, "expected exactly one pose row");
  return traj.front().pose;
}

inline void write_pose_csv(const std::filesystem::path& path, const Pose& pose, double t = 0.0) {
  write_trajectory_csv(path, TimedTrajectory("object", {TimedPose{t, pose}}));
}

namespace detail {

inline std::vector<std::filesystem::path> repeat_files(const std::filesystem::path& dir, const std::string& stem) {
  std::vector<std::filesystem::path> out;
  if (std::filesystem::exists(dir / (stem + ".csv"))) out.push_back(dir / (stem + ".csv"));
  for (int r = 1;; ++r) {
    auto p = dir / (stem + "_r" + std::to_string(r) + ".csv");
    if (!std::filesystem::exists(p)) break;
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace detail

/// Loads one task directory. Several wrist repeats are averaged on the
/// 20 Hz grid; a single file is taken verbatim.
inline GroundTruthRecord load_ground_truth(const std::filesystem::path& dir, int task_id) {
  const auto wrist_files = detail::repeat_files(dir, "wrist");
  if (wrist_files.empty()) throw ParseError(dir.string(), 0, "no wrist.csv or wrist_r*.csv");
  const auto object_files = detail::repeat_files(dir, "object_final");

  std::vector<TimedTrajectory> wrists;
  for (const auto& f : wrist_files) wrists.push_back(read_trajectory_csv(f, "wrist"));
  std::vector<Pose> objects;
  for (const auto& f : object_files) objects.push_back(read_pose_csv(f));

  if (GroundTruthRecord::task_has_object(task_id) && objects.empty())
    throw ParseError(dir.string(), 0, "task " + std::to_string(task_id) + " needs object_final.csv");
  if (!GroundTruthRecord::task_has_object(task_id) && !objects.empty())
    throw ParseError(dir.string(), 0, "task " + std::to_string(task_id) + " is kinematic but has an object file");

  if (wrists.size() == 1 && objects.size() <= 1) {
    GroundTruthRecord rec;
    rec.task_id = task_id;
    rec.wrist = std::move(wrists.front());
    if (!objects.empty()) rec.object_final_pose = objects.front();
    // Pre-averaged data records how many repeats it aggregates.
    if (std::ifstream meta(dir / "repeats.txt"); meta) {
      if (!(meta >> rec.repeats) || rec.repeats < 1) throw ParseError((dir / "repeats.txt").string(), 1, "bad count");
    }
    rec.validate();
    return rec;
  }
  return average_repeats(task_id, wrists, objects);
}

/// Writes `wrist.csv` (and `object_final.csv`) into `dir`, creating it.
inline void store_ground_truth(const std::filesystem::path& dir, const GroundTruthRecord& rec) {
  rec.validate();
  std::filesystem::create_directories(dir);
  write_trajectory_csv(dir / "wrist.csv", rec.wrist);
  if (rec.object_final_pose) write_pose_csv(dir / "object_final.csv", *rec.object_final_pose, rec.wrist.end_time());
  if (rec.repeats != 1) {
    std::ofstream meta(dir / "repeats.txt");
    meta << rec.repeats << '\n';
  } else {
    std::filesystem::remove(dir / "repeats.txt");
  }
}

}  // namespace simcal

#endif  // SIMCAL_DATASET_IO_HPP
