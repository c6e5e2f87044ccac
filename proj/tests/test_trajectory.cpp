#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "helpers.hpp"
#include "simcal/error.hpp"
#include "simcal/trajectory.hpp"

using namespace simcal;
using simcal::testing::make_trajectory;

TEST(Distance, IdentityIsZero) { EXPECT_EQ(euclidean_distance({0, 0, 0}, {0, 0, 0}), 0.0); }

TEST(Distance, ThreeFourFive) { EXPECT_DOUBLE_EQ(euclidean_distance({0, 0, 0}, {0, 3, 4}), 5.0); }

TEST(Distance, UnitDiagonal) { EXPECT_NEAR(euclidean_distance({1, 1, 1}, {2, 2, 2}), 1.7320508075688772, 1e-15); }

TEST(Pose, RejectsNonUnitQuaternion) {
  EXPECT_THROW(Pose({0, 0, 0}, Quaternion{0, 0, 0, 2}), ContractError);
  EXPECT_THROW(Pose({NAN, 0, 0}), ContractError);
  EXPECT_NO_THROW(Pose({0, 0, 0}, Quaternion{0, 0, 0, 1.0 + 5e-7}));
}

TEST(TimedTrajectoryTest, RequiresStrictlyIncreasingTime) {
  EXPECT_THROW(TimedTrajectory("w", {}), ContractError);
  EXPECT_THROW(TimedTrajectory("w", {{0.0, Pose()}, {0.0, Pose()}}), ContractError);
  EXPECT_THROW(TimedTrajectory("w", {{0.1, Pose()}, {0.0, Pose()}}), ContractError);
}

TEST(TimedTrajectoryTest, InterpolateClampsOutsideRange) {
  const auto tr = make_trajectory(2, 1.0, [](std::size_t k) { return Vec3{double(k), 0, 0}; });
  EXPECT_EQ(tr.interpolate(-1.0).position()[0], 0.0);
  EXPECT_EQ(tr.interpolate(5.0).position()[0], 1.0);
  EXPECT_DOUBLE_EQ(tr.interpolate(0.25).position()[0], 0.25);
}

TEST(Slerp, HalfwayAboutZ) {
  const double h = std::sqrt(0.5);
  const Quaternion a{0, 0, 0, 1}, b{0, 0, h, h};  // 0 and 90 degrees about z
  const Quaternion m = slerp(a, b, 0.5);
  EXPECT_NEAR(m.z, std::sin(M_PI / 8), 1e-12);
  EXPECT_NEAR(m.w, std::cos(M_PI / 8), 1e-12);
}

TEST(Slerp, TakesShortArc) {
  const Quaternion a{0, 0, 0, 1}, b{0, 0, 0, -1};  // same rotation
  const Quaternion m = slerp(a, b, 0.5);
  EXPECT_NEAR(std::abs(m.w), 1.0, 1e-12);
}

TEST(Resample, IdentityOnMatchingRate) {
  const auto tr = make_trajectory(41, 20.0, [](std::size_t k) { return Vec3{0.01 * k, std::sin(0.1 * k), 0}; });
  const auto out = resample(tr, 20.0);
  ASSERT_EQ(out.size(), tr.size());
  for (std::size_t k = 0; k < tr.size(); ++k) {
    EXPECT_NEAR(out[k].t, tr[k].t, 1e-12);
    for (int i = 0; i < 3; ++i) EXPECT_NEAR(out[k].pose.position()[i], tr[k].pose.position()[i], 1e-12);
  }
}

TEST(Resample, TwoSamplesAtTwoHertz) {
  const TimedTrajectory tr("w", {{0.0, Pose({0, 0, 0})}, {1.0, Pose({1, 0, 0})}});
  const auto out = resample(tr, 2.0);
  ASSERT_EQ(out.size(), 3u);
  const double ts[] = {0.0, 0.5, 1.0}, xs[] = {0.0, 0.5, 1.0};
  for (int k = 0; k < 3; ++k) {
    EXPECT_DOUBLE_EQ(out[k].t, ts[k]);
    EXPECT_DOUBLE_EQ(out[k].pose.position()[0], xs[k]);
    EXPECT_EQ(out[k].pose.position()[1], 0.0);
  }
}

TEST(Resample, HundredHertzToTwentyMatchesBracketingOracle) {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<Vec3> pts(301);
  for (auto& p : pts) p = {u(gen), u(gen), u(gen)};
  // Jittered timestamps around 100 Hz so grid points fall between samples.
  std::vector<TimedPose> samples;
  for (std::size_t k = 0; k < pts.size(); ++k)
    samples.push_back({0.01 * k + (k > 0 && k < 300 ? 0.003 * u(gen) : 0.0), Pose(pts[k])});
  const TimedTrajectory tr("w", samples);
  const auto out = resample(tr, 20.0);
  ASSERT_EQ(out.size(), 61u);
  for (std::size_t g = 0; g < out.size(); ++g) {
    const double t = out[g].t;
    // Oracle: scan for the bracketing pair, interpolate by hand.
    std::size_t hi = 0;
    while (hi < samples.size() && samples[hi].t < t) ++hi;
    Vec3 expect;
    if (hi == 0) {
      expect = samples[0].pose.position();
    } else if (hi == samples.size()) {
      expect = samples.back().pose.position();
    } else {
      const auto& a = samples[hi - 1];
      const auto& b = samples[hi];
      const double w = (t - a.t) / (b.t - a.t);
      for (int i = 0; i < 3; ++i)
        expect[i] = a.pose.position()[i] * (1 - w) + b.pose.position()[i] * w;
    }
    for (int i = 0; i < 3; ++i) EXPECT_NEAR(out[g].pose.position()[i], expect[i], 1e-12) << "grid point " << g;
  }
}

TEST(Resample, GridCountsIncludeBothEnds) {
  EXPECT_EQ(grid_point_count(1.0, 20.0), 21u);
  EXPECT_EQ(grid_point_count(0.0, 20.0), 1u);
  EXPECT_EQ(grid_point_count(0.3, 20.0), 7u);
  EXPECT_EQ(grid_point_count(0.1 + 0.2, 10.0), 4u);  // 3.0000000000000004
}

TEST(Resample, SingleSampleIsDegenerateOnALongerGrid) {
  const TimedTrajectory tr("w", {{0.0, Pose({1, 2, 3})}});
  const std::vector<double> grid{0.0, 0.05};
  EXPECT_THROW(resample_to_grid(tr, grid), DegenerateInputError);
  EXPECT_EQ(resample(tr, 20.0).size(), 1u);
}

TEST(Resample, RejectsBadRate) {
  const auto tr = make_trajectory(3, 20.0, [](std::size_t) { return Vec3{0, 0, 0}; });
  EXPECT_THROW(resample(tr, 0.0), ContractError);
  EXPECT_THROW(resample(tr, -1.0), ContractError);
}

TEST(RebaseTime, StartsAtZero) {
  const auto tr = make_trajectory(3, 10.0, [](std::size_t k) { return Vec3{double(k), 0, 0}; }, 4.5);
  const auto r = rebase_time(tr);
  EXPECT_EQ(r.start_time(), 0.0);
  EXPECT_NEAR(r.end_time(), 0.2, 1e-12);
}

TEST(AverageRepeats, MeansPositionsAndTruncatesToShortest) {
  const auto a = make_trajectory(21, 20.0, [](std::size_t k) { return Vec3{0.0, double(k), 0}; }, 3.0);
  const auto b = make_trajectory(11, 20.0, [](std::size_t k) { return Vec3{2.0, double(k), 0}; }, 7.0);
  const std::vector<TimedTrajectory> wrists{a, b};
  const std::vector<Pose> objects{Pose({1, 0, 0}), Pose({3, 0, 0})};
  const auto rec = average_repeats(3, wrists, objects);
  EXPECT_EQ(rec.repeats, 2);
  ASSERT_EQ(rec.wrist.size(), 11u);
  EXPECT_EQ(rec.wrist.start_time(), 0.0);
  for (std::size_t k = 0; k < rec.wrist.size(); ++k) {
    EXPECT_NEAR(rec.wrist[k].pose.position()[0], 1.0, 1e-12);
    EXPECT_NEAR(rec.wrist[k].pose.position()[1], double(k), 1e-9);
  }
  ASSERT_TRUE(rec.object_final_pose.has_value());
  EXPECT_NEAR(rec.object_final_pose->position()[0], 2.0, 1e-12);
}

TEST(GroundTruth, ObjectPresenceFollowsTaskId) {
  GroundTruthRecord rec;
  rec.task_id = 1;
  rec.wrist = make_trajectory(2, 20.0, [](std::size_t) { return Vec3{0, 0, 0}; });
  EXPECT_NO_THROW(rec.validate());
  rec.task_id = 4;
  EXPECT_THROW(rec.validate(), ContractError);
  rec.object_final_pose = Pose({0.5, 0, 0.02});
  EXPECT_NO_THROW(rec.validate());
  rec.task_id = 2;
  EXPECT_THROW(rec.validate(), ContractError);
  rec.task_id = 11;
  EXPECT_THROW(rec.validate(), ContractError);
}
