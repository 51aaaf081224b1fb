#pragma once

#include "coterm/config.hpp"
#include "coterm/cooccur.hpp"
#include "coterm/corpus.hpp"
#include "coterm/scheduler.hpp"

#include <json.hpp>

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace coterm {

inline constexpr const char* kVersion = "0.1.0";

enum class Mode { standalone, cooperation };

const char* to_string(Mode mode) noexcept;

/// How a task's result was obtained.
enum class TaskOrigin { cached, executed_local, taken_over };

const char* to_string(TaskOrigin origin) noexcept;

/// One distinct pair of a job. Several input rows may map to it.
class Task {
 public:
  Task(std::string job_id, PairedTerm canonical_pair, std::uint64_t enqueued_at)
      : job_id_(std::move(job_id)), pair_(std::move(canonical_pair)), enqueued_at_(enqueued_at) {}

  const std::string& job_id() const noexcept { return job_id_; }
  const PairedTerm& pair() const noexcept { return pair_; }
  std::uint64_t enqueued_at() const noexcept { return enqueued_at_; }
  void set_enqueued_at(std::uint64_t seq) noexcept { enqueued_at_ = seq; }

  TaskState status() const noexcept { return status_; }
  std::optional<TaskOrigin> origin() const noexcept { return origin_; }

  /// incomplete -> complete, once. Throws std::logic_error on a second call.
  void complete(TaskOrigin origin);

  std::vector<std::size_t> rows;  // input rows answered by this task

 private:
  std::string job_id_;
  PairedTerm pair_;
  std::uint64_t enqueued_at_;
  TaskState status_ = TaskState::incomplete;
  std::optional<TaskOrigin> origin_;
};

/// Tasks of a job in execution order, plus the per-row view of the input.
struct TaskPlan {
  std::vector<Task> tasks;
  /// One per input line. Rows whose terms do not normalize carry an error.
  std::vector<PairOutcome> rows;
  std::vector<std::optional<std::size_t>> task_of_row;
};

/// Normalizes the input, collapses pairs with equal canonical keys into one
/// task and orders the tasks by a permutation seeded with `shuffle_seed`.
TaskPlan plan_tasks(std::span<const PairInput> pairs, CaseMode mode, std::uint64_t shuffle_seed,
                    const std::string& job_id = {});

/// Tasks left after the crowdsourced cache: total - cached.
std::uint64_t predicted_tasks_to_process(std::uint64_t total, std::uint64_t cached);

/// Tasks a cluster executes when `shared` tasks are split evenly among
/// `clusters` clusters: total - cached - shared * (1 - 1/clusters) + alpha.
double predicted_job_size(std::uint64_t total, std::uint64_t cached, std::uint64_t shared, std::uint64_t clusters,
                          std::uint64_t alpha);

struct JobReport {
  std::string job_id;
  std::string resource_id;
  Mode mode = Mode::standalone;
  std::uint64_t total_tasks = 0;     // T_t
  std::uint64_t cached_tasks = 0;    // T_c
  std::uint64_t executed_tasks = 0;  // E
  std::uint64_t peak_pending = 0;    // P_max
  std::uint64_t alpha = 0;           // executed after taking over a stale claim
  double wall_time_seconds = 0.0;
  bool degraded = false;

  nlohmann::json to_json() const;
};

/// Job configuration file contents.
struct Config {
  Mode mode = Mode::standalone;
  std::filesystem::path resource_path;
  std::filesystem::path pair_list_path;
  Granularity granularity = Granularity::abstract;
  CaseMode case_mode = CaseMode::insensitive;
  unsigned workers = 1;
  std::optional<std::string> scheduler_url;
  bool data_transfer = true;
  std::uint64_t shuffle_seed = 0;
  std::filesystem::path output_path;
  std::chrono::milliseconds pending_poll_interval{1000};
  std::chrono::milliseconds heartbeat_interval{10'000};
  bool store_intermediate = false;
  std::optional<std::string> client_id;

  static Config from(const KeyValueFile& file);
  static Config load(const std::filesystem::path& path) { return from(KeyValueFile::load(path)); }

  /// Throws ConfigError.
  void validate() const;
};

struct JobOptions {
  Mode mode = Mode::standalone;
  CaseMode case_mode = CaseMode::insensitive;
  unsigned workers = 1;
  bool data_transfer = true;
  std::uint64_t shuffle_seed = 0;
  std::string job_id;     // derived from the inputs when empty
  std::string client_id;  // derived from host and process when empty
  std::chrono::milliseconds pending_poll_interval{1000};
  std::chrono::milliseconds heartbeat_interval{10'000};
  std::size_t co_keys_limit = kDefaultCoKeysLimit;
  std::optional<std::filesystem::path> index_cache_out;

  // Fault and timing injection for simulation.
  std::chrono::milliseconds execution_delay{0};
  /// Stop abruptly, abandoning the claim just obtained, once this many
  /// claimed tasks have been completed.
  std::optional<std::size_t> crash_after_completed;
  /// Called after every local execution, from the executing thread.
  std::function<void(const Task&, TaskOrigin)> on_execute;
};

struct JobOutcome {
  JobReport report;
  std::vector<PairOutcome> rows;  // input order
  std::vector<Task> tasks;
  bool crashed = false;
  std::size_t materialized_terms = 0;
};

/// Runs a job. Standalone mode executes every task locally. Cooperation mode
/// claims each task from `scheduler`, executing claimed tasks, taking cached
/// results and deferring tasks other clusters are running; deferred tasks
/// are then resolved oldest first by polling, taking over claims whose
/// owners stopped heartbeating. If the scheduler becomes unreachable
/// mid-job, the remaining tasks run locally and the report is degraded.
///
/// Throws SchedulerUnreachable if the scheduler cannot be reached at start.
JobOutcome run_job(const Corpus& corpus, std::span<const PairInput> pairs, const JobOptions& options,
                   SchedulerApi* scheduler);

/// Results file: a `#` header naming resource id, case mode and version,
/// then one row per input line.
std::string format_results(const JobOutcome& outcome, const ResourceId& resource_id, CaseMode mode);

/// Loads the inputs named by `config`, runs the job (over HTTP in
/// cooperation mode) and writes the results file.
JobReport execute_job(const Config& config);

}  // namespace coterm
