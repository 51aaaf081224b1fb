#include "coterm/error.hpp"
#include "coterm/sim.hpp"

#include <gtest/gtest.h>

#include <algorithm>

using namespace coterm;

namespace {

Scenario quick(unsigned clusters, std::size_t tasks) {
  Scenario s;
  s.clusters = clusters;
  s.tasks = tasks;
  s.task_duration = std::chrono::milliseconds(5);
  s.stale_timeout = std::chrono::milliseconds(300);
  return s;
}

std::uint64_t sum_executed(const SimReport& r) {
  std::uint64_t e = 0;
  for (const auto& c : r.clusters) e += c.executed;
  return e;
}

}  // namespace

TEST(Simulation, SingleClusterExecutesEverything) {
  const auto report = run_scenario(quick(1, 12));
  ASSERT_EQ(report.clusters.size(), 1u);
  EXPECT_EQ(report.clusters[0].executed, 12u);
  EXPECT_EQ(report.clusters[0].cached, 0u);
  EXPECT_DOUBLE_EQ(report.clusters[0].predicted, 12.0);
  EXPECT_TRUE(verify_bounds(report).passed);
}

TEST(Simulation, PrecacheShrinksTheJob) {
  auto s = quick(1, 10);
  s.precache_fraction = 0.3;
  const auto report = run_scenario(s);
  EXPECT_EQ(report.clusters[0].precached, 3u);
  EXPECT_EQ(report.clusters[0].executed, 7u);
  EXPECT_EQ(report.clusters[0].cached, 3u);
  EXPECT_TRUE(verify_bounds(report).passed);
}

TEST(Simulation, SharedListsExecuteOnce) {
  const auto report = run_scenario(quick(3, 15));
  EXPECT_EQ(sum_executed(report), 15u);
  EXPECT_EQ(report.distinct_tasks, 15u);
  for (const auto& c : report.clusters) {
    EXPECT_EQ(c.alpha, 0u);
    EXPECT_EQ(c.cached + c.executed, 15u);
  }
  const auto check = verify_bounds(report);
  EXPECT_TRUE(check.passed) << (check.violations.empty() ? "" : check.violations.front());
}

TEST(Simulation, PartialOverlap) {
  auto s = quick(2, 10);
  s.overlap_fraction = 0.4;
  const auto report = run_scenario(s);
  EXPECT_EQ(report.distinct_tasks, 4u + 2 * 6u);
  EXPECT_EQ(sum_executed(report), report.distinct_tasks);
  EXPECT_TRUE(verify_bounds(report).passed);
}

TEST(Simulation, CrashedClusterWorkIsTakenOver) {
  auto s = quick(2, 10);
  s.crash_cluster = 0;
  const auto report = run_scenario(s);
  const auto& dead = report.clusters[0];
  const auto& alive = report.clusters[1];
  EXPECT_TRUE(dead.crashed);
  EXPECT_GE(alive.alpha, dead.abandoned_claims);
  EXPECT_EQ(alive.alpha, dead.abandoned_claims);
  EXPECT_EQ(report.records_per_key.size(), 10u);
  for (const auto& [key, n] : report.records_per_key) EXPECT_EQ(n, 1u) << key;
  const auto check = verify_bounds(report);
  EXPECT_TRUE(check.passed) << (check.violations.empty() ? "" : check.violations.front());
}

TEST(Bounds, CorruptedExecutionCountFails) {
  auto report = run_scenario(quick(1, 5));
  report.clusters[0].executed = 6;
  const auto check = verify_bounds(report);
  EXPECT_FALSE(check.passed);
  EXPECT_FALSE(check.violations.empty());
}

TEST(Bounds, DuplicateExecutionWithoutCrashFails) {
  auto report = run_scenario(quick(2, 6));
  ASSERT_FALSE(report.executions.empty());
  auto dup = report.executions.front();
  dup.cluster = 1 - dup.cluster;
  report.executions.push_back(dup);
  report.clusters[dup.cluster].executed += 1;
  report.clusters[dup.cluster].cached -= 1;
  EXPECT_FALSE(verify_bounds(report).passed);
}

TEST(Bounds, WrongStoredResultFails) {
  auto report = run_scenario(quick(1, 3));
  report.wrong_results.push_back("a\tb");
  EXPECT_FALSE(verify_bounds(report).passed);
}

TEST(ScenarioConfig, ParseAndValidate) {
  const auto s = Scenario::from(KeyValueFile::parse("clusters = 3\ntasks = 30\noverlap_fraction = 0.5\n"
                                                    "precache_fraction = 0.1\ncrash_cluster = 0\n"
                                                    "stale_timeout = 1s\ntask_duration = 10ms\nseed = 4\n"));
  EXPECT_EQ(s.clusters, 3u);
  EXPECT_EQ(s.tasks, 30u);
  EXPECT_EQ(s.shared_tasks(), 15u);
  EXPECT_EQ(s.precached_tasks(), 3u);
  EXPECT_EQ(s.crash_cluster, 0u);
  EXPECT_EQ(s.stale_timeout, std::chrono::milliseconds(1000));
  EXPECT_NO_THROW(s.validate());

  Scenario bad;
  bad.clusters = 0;
  EXPECT_THROW(bad.validate(), ScenarioInvalid);
  bad = Scenario{};
  bad.overlap_fraction = 1.5;
  EXPECT_THROW(bad.validate(), ScenarioInvalid);
  bad = Scenario{};
  bad.crash_cluster = 1;
  EXPECT_THROW(bad.validate(), ScenarioInvalid);
  bad = Scenario{};
  bad.tasks = 0;
  EXPECT_THROW(run_scenario(bad), ScenarioInvalid);
  EXPECT_THROW(Scenario::from(KeyValueFile::parse("nodes = 3\n")), ConfigError);
}

TEST(SimReportOutput, TsvAndJson) {
  const auto report = run_scenario(quick(2, 4));
  const auto rows = report.tsv_rows();
  EXPECT_EQ(std::count(rows.begin(), rows.end(), '\n'), 2);
  const auto header = SimReport::tsv_header();
  EXPECT_EQ(std::count(header.begin(), header.end(), '\t'),
            std::count(rows.begin(), rows.begin() + static_cast<long>(rows.find('\n')), '\t'));
  const auto j = report.to_json();
  EXPECT_EQ(j["clusters"].size(), 2u);
}
