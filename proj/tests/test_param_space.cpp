#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "simcal/param_space.hpp"
#include "simcal/rng.hpp"

using namespace simcal;

namespace {

std::vector<BodySpec> arm_bodies(double object_mass = 0.1) {
  std::vector<BodySpec> b;
  for (int j = 1; j <= 6; ++j) b.push_back({"link" + std::to_string(j), BodyKind::Link, 0.5});
  b.push_back({"gripper", BodyKind::Gripper, 0.7});
  b.push_back({"wood_cube", BodyKind::Object, object_mass});
  b.push_back({"floor", BodyKind::Floor, 0.0});
  return b;
}

const ParameterDescriptor& find(const ParameterRegistry& r, const std::string& name) {
  const auto i = r.index_of(name);
  if (!i) throw std::runtime_error("missing " + name);
  return r[*i];
}

ParameterRegistry box(int dims, double lo = 0.0, double hi = 1.0) {
  std::vector<ParameterDescriptor> ds;
  for (int i = 0; i < dims; ++i) ds.push_back({"p" + std::to_string(i), ParameterGroup::Shared, lo, hi, "", {}});
  return ParameterRegistry(ds);
}

}  // namespace

TEST(Rng, DerivedSeedsDifferPerComponent) {
  EXPECT_NE(derive_seed({1, 2}), derive_seed({2, 1}));
  EXPECT_NE(derive_seed({0}), derive_seed({0, 0}));
  EXPECT_EQ(derive_seed({7, 8, 9}), derive_seed({7, 8, 9}));
}

TEST(Rng, UniformAndBelowStayInRange) {
  Rng rng(3);
  for (int i = 0; i < 100000; ++i) {
    const double u = rng.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    ASSERT_LT(rng.below(7), 7u);
  }
}

TEST(SharedRegistry, TimeStepBounds) {
  const auto r = default_shared_registry(arm_bodies(), 6);
  EXPECT_EQ(find(r, "time_step").lower, 0.001);
  EXPECT_EQ(find(r, "time_step").upper, 0.05);
}

TEST(SharedRegistry, JointVelocityBoundsOnAllJoints) {
  const auto r = default_shared_registry(arm_bodies(), 6);
  int count = 0;
  for (const auto& d : r.descriptors()) {
    if (d.name.rfind("max_joint_velocity.", 0) != 0) continue;
    ++count;
    EXPECT_EQ(d.lower, 10.0);
    EXPECT_EQ(d.upper, 40.0);
    EXPECT_EQ(d.target.kind, ParameterTarget::Kind::PerJoint);
  }
  EXPECT_EQ(count, 6);
}

TEST(SharedRegistry, MassBoundsScaleNominal) {
  const auto r = default_shared_registry(arm_bodies(0.1), 6);
  EXPECT_NEAR(find(r, "mass.wood_cube").lower, 0.07, 1e-15);
  EXPECT_NEAR(find(r, "mass.wood_cube").upper, 0.13, 1e-15);
  EXPECT_FALSE(r.index_of("mass.floor").has_value());
}

TEST(SharedRegistry, Composition) {
  const auto r = default_shared_registry(arm_bodies(), 6);
  // time step + 8 masses + 6 torques + 6 velocities + 3 lateral frictions
  EXPECT_EQ(r.dimension(), 24u);
  EXPECT_TRUE(r.index_of("lateral_friction.floor").has_value());
  EXPECT_TRUE(std::all_of(r.descriptors().begin(), r.descriptors().end(),
                          [](const auto& d) { return d.group == ParameterGroup::Shared; }));
}

TEST(IndividualRegistry, IsSupersetOfShared) {
  const auto s = default_shared_registry(arm_bodies(), 6);
  const auto i = default_individual_registry(arm_bodies(), 6);
  for (const auto& d : s.descriptors()) {
    ASSERT_TRUE(i.index_of(d.name).has_value()) << d.name;
    EXPECT_EQ(i[*i.index_of(d.name)], d);
  }
  EXPECT_EQ(i.shared_subset(), s);
  EXPECT_EQ(i.dimension(), 45u);
}

TEST(IndividualRegistry, RestitutionAndDampingCounts) {
  const auto r = default_individual_registry(arm_bodies(), 6);
  EXPECT_EQ(find(r, "restitution.gripper").lower, 0.0001);
  EXPECT_EQ(find(r, "restitution.gripper").upper, 0.9);
  const auto n = std::count_if(r.descriptors().begin(), r.descriptors().end(),
                               [](const auto& d) { return d.name.rfind("joint_damping.", 0) == 0; });
  EXPECT_EQ(n, 6);
}

TEST(Registry, RejectsBadDescriptors) {
  using D = ParameterDescriptor;
  EXPECT_THROW(ParameterRegistry({D{"a", ParameterGroup::Shared, 1.0, 1.0, "", {}}}), ConfigError);
  EXPECT_THROW(ParameterRegistry({D{"a", ParameterGroup::Shared, 0, 1, "", {}}, D{"a", ParameterGroup::Shared, 0, 1, "", {}}}),
               ConfigError);
  EXPECT_THROW(ParameterRegistry({D{"a", ParameterGroup::Individual, 0, 1, "", {}}, D{"b", ParameterGroup::Shared, 0, 1, "", {}}}),
               ConfigError);
}

TEST(Registry, DecodeEncodeRoundTrip) {
  const auto r = default_individual_registry(arm_bodies(), 6);
  Rng rng(4);
  const auto v = r.sample_uniform(rng);
  EXPECT_TRUE(r.in_bounds(v));
  EXPECT_EQ(r.encode(r.decode(v)), v);
  auto a = r.decode(v);
  a.erase("time_step");
  EXPECT_THROW(r.encode(a), ConfigError);
}

TEST(Target, StringFormsRoundTrip) {
  for (const auto& t : {ParameterTarget::global(), ParameterTarget::per_joint(3), ParameterTarget::per_body("gripper")})
    EXPECT_EQ(ParameterTarget::parse(t.to_string()), t);
  EXPECT_THROW(ParameterTarget::parse("per-joint(x)"), ConfigError);
  EXPECT_THROW(ParameterTarget::parse("nowhere"), ConfigError);
}

TEST(ClampOrResample, InBoundsIsIdentity) {
  const auto r = box(5);
  Rng rng(1);
  const ParameterVector v{{0.0, 0.25, 0.5, 0.75, 1.0}};
  EXPECT_EQ(clamp_or_resample(r, v, rng), v);
}

TEST(ClampOrResample, OnlyViolatingComponentChanges) {
  const auto r = box(4, -1.0, 2.0);
  Rng rng(2);
  const ParameterVector v{{0.5, -3.0, 1.5, NAN}};
  const auto out = clamp_or_resample(r, v, rng);
  EXPECT_EQ(out[0], 0.5);
  EXPECT_EQ(out[2], 1.5);
  for (int i : {1, 3}) {
    EXPECT_GE(out[i], -1.0);
    EXPECT_LE(out[i], 2.0);
  }
}

TEST(ClampOrResample, RedrawsAreUniform) {
  // Kolmogorov-Smirnov statistic against U(lo, hi); the 0.1% critical value
  // for n = 10^4 is 1.95 / sqrt(n).
  const double lo = 0.2, hi = 1.7;
  const auto r = box(1, lo, hi);
  Rng rng(99);
  std::vector<double> xs;
  for (int i = 0; i < 10000; ++i) xs.push_back(clamp_or_resample(r, ParameterVector{{hi + 1.0}}, rng)[0]);
  std::sort(xs.begin(), xs.end());
  double d = 0.0;
  const double n = static_cast<double>(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double cdf = (xs[i] - lo) / (hi - lo);
    d = std::max({d, std::abs(cdf - i / n), std::abs((i + 1) / n - cdf)});
  }
  EXPECT_LT(d, 1.95 / std::sqrt(n));
  EXPECT_GE(xs.front(), lo);
  EXPECT_LE(xs.back(), hi);
}
