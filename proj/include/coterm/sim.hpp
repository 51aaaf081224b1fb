#pragma once

#include "coterm/config.hpp"
#include "coterm/controller.hpp"

#include <json.hpp>

#include <chrono>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace coterm {

/// A multi-cluster run against one shared in-process scheduler.
struct Scenario {
  unsigned clusters = 1;           // L
  std::size_t tasks = 10;          // T_t per cluster
  double overlap_fraction = 1.0;   // share of each list common to all clusters
  double precache_fraction = 0.0;  // share of each list stored before the run
  std::optional<unsigned> crash_cluster;
  std::size_t crash_after = 1;  // completed claimed tasks before the crash
  std::chrono::milliseconds task_duration{20};
  std::chrono::milliseconds stale_timeout{1000};
  unsigned workers = 1;
  std::uint64_t seed = 0;

  static Scenario from(const KeyValueFile& file);

  /// Throws ScenarioInvalid.
  void validate() const;

  std::size_t shared_tasks() const;
  std::size_t precached_tasks() const;
};

struct ClusterReport {
  std::string client_id;
  std::uint64_t total = 0;      // T_t
  std::uint64_t precached = 0;  // tasks whose result was stored before the run
  std::uint64_t shared = 0;     // uncached tasks common to every cluster (T_s)
  std::uint64_t cached = 0;     // results obtained from the store, T_c as measured
  std::uint64_t executed = 0;   // E
  std::uint64_t alpha = 0;
  std::uint64_t resolved = 0;
  std::uint64_t peak_pending = 0;
  std::uint64_t abandoned_claims = 0;
  double predicted = 0.0;  // T_t - precached - T_s (1 - 1/L) + alpha
  bool crashed = false;
};

struct ExecutionEntry {
  unsigned cluster = 0;
  std::string pair_key;
  TaskOrigin origin = TaskOrigin::executed_local;
};

struct SimReport {
  Scenario scenario;
  std::vector<ClusterReport> clusters;
  std::uint64_t distinct_tasks = 0;  // the task universe across all lists
  std::uint64_t precached_keys = 0;
  std::uint64_t total_distinct_executions = 0;
  std::uint64_t takeover_duplicates = 0;
  std::uint64_t job_size_lower = 0;
  std::uint64_t job_size_upper = 0;
  std::vector<ExecutionEntry> executions;
  /// Keys of every cluster's list, keyed to the clusters that listed them.
  std::map<std::string, std::vector<unsigned>> listed_by;
  /// Number of results the scheduler recorded per key, precached included.
  std::map<std::string, std::uint64_t> records_per_key;
  /// Keys whose stored result differs from a fresh local computation.
  std::vector<std::string> wrong_results;

  nlohmann::json to_json() const;
  static std::string tsv_header();
  /// One row per cluster.
  std::string tsv_rows() const;
};

struct BoundsCheck {
  bool passed = true;
  std::vector<std::string> violations;
};

/// Throws ScenarioInvalid.
SimReport run_scenario(const Scenario& scenario);

BoundsCheck verify_bounds(const SimReport& report);

}  // namespace coterm
