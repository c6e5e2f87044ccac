#ifndef SIMCAL_TESTS_HELPERS_HPP
#define SIMCAL_TESTS_HELPERS_HPP

#include <unistd.h>

#include <cmath>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "simcal/trajectory.hpp"

namespace simcal::testing {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("simcal_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

/// n samples at `rate` Hz starting at t0 with positions from `pos(k)`.
template <class F>
TimedTrajectory make_trajectory(std::size_t n, double rate, F pos, double t0 = 0.0) {
  std::vector<TimedPose> s;
  for (std::size_t k = 0; k < n; ++k) s.push_back({t0 + static_cast<double>(k) / rate, Pose(pos(k))});
  return TimedTrajectory("wrist", std::move(s));
}

inline TimedTrajectory random_trajectory(std::mt19937_64& gen, std::size_t n, double rate = 20.0) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  return make_trajectory(n, rate, [&](std::size_t) { return Vec3{u(gen), u(gen), u(gen)}; });
}

}  // namespace simcal::testing

#endif  // SIMCAL_TESTS_HELPERS_HPP
