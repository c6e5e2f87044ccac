#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <sstream>

#include "campaign_fixtures.hpp"
#include "helpers.hpp"
#include "simcal/analysis.hpp"

using namespace simcal;
using simcal::testing::TempDir;

namespace {

ParameterRegistry box(int dims, double lo = 0.0, double hi = 1.0) {
  std::vector<ParameterDescriptor> ds;
  for (int i = 0; i < dims; ++i) ds.push_back({"p" + std::to_string(i), ParameterGroup::Shared, lo, hi, "", {}});
  return ParameterRegistry(ds);
}

CellResult cell(int exp, const std::string& backend, int repeat, double baseline, double best,
                std::vector<double> curve = {}, ParameterGroup group = ParameterGroup::Shared) {
  CellResult c;
  c.key = {group, exp, backend, repeat};
  c.registry = box(1);
  c.best = ParameterVector{{0.5}};
  c.baseline_fitness = baseline;
  c.best_fitness = best;
  for (std::size_t g = 0; g < curve.size(); ++g) c.history.push_back({static_cast<int>(g), curve[g], 0, 0, c.best, 0});
  c.generations = curve.empty() ? 0 : static_cast<int>(curve.size()) - 1;
  return c;
}

}  // namespace

TEST(Improvement, WorkedRows) {
  const auto six = compute_improvement(
      {{"pybullet", 503.3037}, {"bullet278", 0.6029}, {"bullet283", 0.6096}, {"ode", 0.5972}, {"newton", 0.5977}},
      {{"pybullet", 0.0552}}, 6);
  EXPECT_EQ(six.best_generic.backend, "ode");
  EXPECT_EQ(six.best_tuned.backend, "pybullet");
  EXPECT_NEAR(*six.improvement, 0.9076, 5e-5);

  const auto two = compute_improvement(
      {{"pybullet", 0.1283}, {"bullet278", 0.1320}, {"bullet283", 0.1582}, {"ode", 0.1285}, {"newton", 0.1147}},
      {{"newton", 0.0984}}, 2);
  EXPECT_EQ(two.best_generic.backend, "newton");
  EXPECT_NEAR(*two.improvement, 0.1421, 5e-5);
}

TEST(Improvement, EqualTablesGiveZero) {
  const std::vector<BackendFitness> t{{"a", 0.3}, {"b", 0.2}};
  EXPECT_EQ(*compute_improvement(t, t, 1).improvement, 0.0);
}

TEST(Improvement, ZeroGenericIsUndefined) {
  const auto r = compute_improvement({{"a", 0.0}, {"b", 0.4}}, {{"a", 0.0}}, 3);
  EXPECT_FALSE(r.improvement.has_value());
  std::ostringstream out;
  write_improvement_csv(out, {r});
  EXPECT_NE(out.str().find("undefined"), std::string::npos);
  EXPECT_THROW(compute_improvement({}, {{"a", 1.0}}, 3), ContractError);
}

TEST(Improvement, RowOrderDoesNotMatter) {
  std::vector<BackendFitness> g{{"a", 0.5}, {"b", 0.4}, {"c", 0.4}, {"d", 0.9}};
  std::vector<BackendFitness> t{{"a", 0.1}, {"b", 0.2}, {"c", 0.1}, {"d", 0.3}};
  const auto ref = compute_improvement(g, t, 4);
  std::mt19937 gen(1);
  for (int i = 0; i < 20; ++i) {
    std::shuffle(g.begin(), g.end(), gen);
    std::shuffle(t.begin(), t.end(), gen);
    const auto r = compute_improvement(g, t, 4);
    EXPECT_EQ(r.best_generic.backend, ref.best_generic.backend);
    EXPECT_EQ(r.best_tuned.backend, ref.best_tuned.backend);
    EXPECT_EQ(r.improvement, ref.improvement);
  }
}

TEST(Improvement, ReportsFromCells) {
  const std::vector<CellResult> cells{cell(2, "a", 0, 1.0, 0.6), cell(2, "a", 1, 1.0, 0.5), cell(2, "b", 0, 0.8, 0.7),
                                      cell(5, "a", 0, 2.0, 2.0)};
  const auto reports = improvement_reports(cells);
  ASSERT_EQ(reports.size(), 2u);
  EXPECT_EQ(reports[0].experiment_id, 2);
  EXPECT_EQ(reports[0].best_generic.backend, "b");
  EXPECT_EQ(reports[0].best_tuned.fitness, 0.5);
  EXPECT_DOUBLE_EQ(*reports[0].improvement, (0.8 - 0.5) / 0.8);
  EXPECT_EQ(*reports[1].improvement, 0.0);
  EXPECT_TRUE(improvement_reports(cells, ParameterGroup::Individual).empty());
}

TEST(Importance, IdenticalValuesRankFirst) {
  const auto reg = box(3);
  std::vector<ParameterVector> bests;
  for (double x : {0.1, 0.5, 0.9, 0.3}) bests.push_back(ParameterVector{{x, 0.42, x / 2}});
  const auto r = importance_from_vectors(reg, bests);
  ASSERT_FALSE(r.insufficient_data);
  ASSERT_EQ(r.ranked.size(), 3u);
  EXPECT_EQ(r.ranked[0].name, "p1");
  EXPECT_EQ(r.ranked[0].std, 0.0);
  EXPECT_EQ(r.ranked[0].median, 0.42);
  EXPECT_EQ(r.ranked[1].name, "p2");
  EXPECT_EQ(r.ranked[2].name, "p0");
}

TEST(Importance, UniformSpreadNearTwoEightyNine) {
  // Sample std of U(0, 1) is 1/sqrt(12).
  const auto reg = box(1);
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<ParameterVector> bests;
  for (int i = 0; i < 20000; ++i) bests.push_back(ParameterVector{{u(gen)}});
  EXPECT_NEAR(importance_from_vectors(reg, bests).ranked[0].normalized_std, 0.2887, 0.005);
}

TEST(Importance, NormalizedStdIsScaleInvariant) {
  const auto unit = box(1, 0.0, 1.0);
  const auto wide = box(1, 10.0, 110.0);
  std::vector<ParameterVector> a, b;
  for (double x : {0.2, 0.25, 0.7, 0.4, 0.9}) {
    a.push_back(ParameterVector{{x}});
    b.push_back(ParameterVector{{10.0 + 100.0 * x}});
  }
  EXPECT_NEAR(importance_from_vectors(unit, a).ranked[0].normalized_std,
              importance_from_vectors(wide, b).ranked[0].normalized_std, 1e-12);
}

TEST(Importance, NeedsTwoRepeats) {
  const auto reg = box(2);
  EXPECT_TRUE(importance_from_vectors(reg, {}).insufficient_data);
  EXPECT_TRUE(importance_from_vectors(reg, {ParameterVector{{0.1, 0.2}}}).insufficient_data);
  EXPECT_TRUE(parameter_importance({cell(1, "a", 0, 1, 1)}, ParameterGroup::Shared, "a", 1).insufficient_data);
  EXPECT_TRUE(parameter_importance({}, ParameterGroup::Shared, "a", 1).insufficient_data);
}

TEST(Importance, QuartilesAreOrdered) {
  const auto reg = box(4, -5, 5);
  std::mt19937_64 gen(8);
  std::uniform_real_distribution<double> u(-5, 5);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<ParameterVector> bests;
    const int n = 2 + trial % 9;
    for (int i = 0; i < n; ++i) bests.push_back(ParameterVector{{u(gen), u(gen), u(gen), u(gen)}});
    for (const auto& p : importance_from_vectors(reg, bests).ranked) {
      EXPECT_LE(p.min, p.q1);
      EXPECT_LE(p.q1, p.median);
      EXPECT_LE(p.median, p.q3);
      EXPECT_LE(p.q3, p.max);
      EXPECT_GE(p.std, 0.0);
    }
  }
}

TEST(Importance, QuantileInterpolates) {
  EXPECT_EQ(quantile({4, 1, 3, 2}, 0.5), 2.5);
  EXPECT_EQ(quantile({4, 1, 3, 2}, 0.25), 1.75);
  EXPECT_EQ(quantile({7}, 0.75), 7.0);
  EXPECT_DOUBLE_EQ(sample_std({1, 2, 3, 4}), std::sqrt(5.0 / 3.0));
}

TEST(Importance, MixedRegistriesAreRejected) {
  auto a = cell(1, "a", 0, 1, 1), b = cell(1, "a", 1, 1, 1);
  b.registry = box(1, 0, 2);
  EXPECT_THROW(parameter_importance({a, b}, ParameterGroup::Shared, "a", 1), ContractError);
}

TEST(Convergence, SingleRepeatIsItsOwnCurve) {
  const auto rows = export_convergence({cell(3, "a", 0, 1, 0.2, {1.0, 0.5, 0.2})}, 3);
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[1].generation, 1);
  EXPECT_EQ(rows[1].mean_best_fitness, 0.5);
}

TEST(Convergence, ShortRunsCarryTheirFinalValue) {
  const std::vector<double> a{3.0, 2.0, 1.0}, b{4.0, 3.0, 2.0, 1.5, 0.5};
  const auto avg = average_curves({a, b});
  ASSERT_EQ(avg.size(), 5u);
  EXPECT_EQ(avg[0], 3.5);
  EXPECT_EQ(avg[2], 1.5);
  EXPECT_EQ(avg[3], (1.0 + 1.5) / 2);
  EXPECT_EQ(avg[4], (1.0 + 0.5) / 2);
}

TEST(Convergence, MeanOfMonotoneCurvesIsMonotone) {
  std::mt19937_64 gen(4);
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<CellResult> cells;
  for (int r = 0; r < 6; ++r) {
    std::vector<double> curve{10.0};
    const int len = 5 + r * 3;
    for (int g = 1; g < len; ++g) curve.push_back(curve.back() * u(gen));
    cells.push_back(cell(7, "b", r, 10.0, curve.back(), curve));
  }
  cells.push_back(cell(7, "b", 0, 10.0, 1.0, {9.0, 1.0}, ParameterGroup::Individual));
  const auto rows = export_convergence(cells, 7);
  ASSERT_EQ(rows.size(), 20u);
  for (std::size_t i = 1; i < rows.size(); ++i) EXPECT_LE(rows[i].mean_best_fitness, rows[i - 1].mean_best_fitness);
  EXPECT_EQ(rows[0].mean_best_fitness, 10.0);
}

TEST(CampaignFiles, ReportsFromDisk) {
  TempDir dir("analysis");
  const auto a = BackendRegistry::with_reference_engines();
  RunManifest m;
  m.experiments.push_back(simcal::testing::synthetic_experiment(1, a.get("engine-a")));
  m.backends = {"engine-a", "engine-b"};
  m.repeats = 2;
  m.de_config.max_generations = 2;
  m.output_dir = dir.path();
  m.clock = ClockMode::Evaluations;
  run_campaign(m);
  std::filesystem::create_directories(dir.path() / "stray");

  const auto cells = load_campaign(dir.path());
  ASSERT_EQ(cells.size(), 4u);
  EXPECT_TRUE(std::is_sorted(cells.begin(), cells.end(), [](const auto& x, const auto& y) { return x.key < y.key; }));
  const auto imp = improvement_reports(cells);
  ASSERT_EQ(imp.size(), 1u);
  EXPECT_EQ(imp[0].best_generic.backend, "engine-a");
  EXPECT_FALSE(imp[0].improvement.has_value());  // engine-a reproduces its own ground truth
  const auto importance = parameter_importance(cells, ParameterGroup::Shared, "engine-b", 1);
  EXPECT_EQ(importance.repeats, 2u);
  EXPECT_EQ(importance.ranked.size(), cells[0].registry.dimension());

  std::ostringstream csv;
  write_convergence_csv(csv, export_convergence(cells, 1));
  EXPECT_EQ(csv.str().rfind("generation,backend,mean_best_fitness\n0,engine-a,", 0), 0u);
}
