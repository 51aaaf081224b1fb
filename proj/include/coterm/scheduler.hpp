#pragma once

#include "coterm/cooccur.hpp"
#include "coterm/text.hpp"

#include <chrono>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace coterm {

namespace sqlite {
class Database;
}

using TaskId = std::uint64_t;

/// Milliseconds since some epoch. The scheduler reads time only through this.
using Clock = std::function<std::int64_t()>;

std::int64_t system_clock_ms();

enum class TaskState : int { incomplete = 0, complete = 1 };

/// Identity of a task across all clusters.
struct TaskKey {
  std::string resource_id;
  std::string pair_key;  // PairedTerm::canonical_key()
  CaseMode case_mode = CaseMode::insensitive;

  friend bool operator==(const TaskKey&, const TaskKey&) = default;
};

struct ResourceMetadata {
  std::string resource_id;
  std::string name;
  std::uint64_t n_docs = 0;
  std::string granularity = "abstract";
  std::string uploader;
};

struct ResourceEntry {
  std::string resource_id;
  std::string name;
  std::uint64_t n_docs = 0;
  std::string granularity;
  std::string uploader;
  std::int64_t registered_at = 0;

  friend bool operator==(const ResourceEntry&, const ResourceEntry&) = default;
};

struct ClaimRequest {
  std::string client_id;
  TaskKey key;
  bool data_transfer = true;
};

struct ClaimResponse {
  enum class Kind { cached, claimed, pending };

  Kind kind = Kind::pending;
  std::optional<CooccurrenceResult> result;  // iff cached
  std::optional<TaskId> task_id;             // iff claimed
  /// Claimed by replacing another client's stale claim.
  bool took_over = false;
};

const char* to_string(ClaimResponse::Kind kind) noexcept;

struct TaskStatusView {
  TaskState status = TaskState::incomplete;
  bool stale = false;
  std::optional<CooccurrenceResult> result;  // iff complete
  TaskId task_id = 0;
};

enum class SubmitAck { recorded, already_complete };
enum class TakeoverResult { grant, refused };
enum class QuotaDecision { allow, exceeded };

struct TaskRow {
  TaskId task_id = 0;
  TaskKey key;
  TaskState status = TaskState::incomplete;
  std::string owner;
  std::int64_t claimed_at = 0;
  std::int64_t heartbeat_at = 0;
};

struct CrowdsourcedRecord {
  TaskKey key;
  CooccurrenceResult result;
  std::string contributor;
  std::int64_t created_at = 0;
};

/// The scheduler protocol, served in-process or over HTTP.
///
/// Errors are reported as SchedulerError; transports that lose the
/// connection raise SchedulerUnreachable.
class SchedulerApi {
 public:
  virtual ~SchedulerApi() = default;

  virtual ResourceEntry register_resource(const ResourceMetadata& metadata) = 0;
  virtual std::vector<ResourceEntry> list_resources() = 0;
  virtual ClaimResponse claim_task(const ClaimRequest& request) = 0;
  virtual SubmitAck submit_result(TaskId task_id, const std::string& client_id, const CooccurrenceResult& result) = 0;
  virtual TaskStatusView task_status(const TaskKey& key) = 0;
  virtual void heartbeat(TaskId task_id, const std::string& client_id) = 0;
  virtual TakeoverResult takeover(TaskId task_id, const std::string& client_id) = 0;
};

struct SchedulerOptions {
  /// SQLite database file, or ":memory:".
  std::string store_path = ":memory:";
  std::chrono::milliseconds stale_timeout{30'000};
  /// Cached deliveries allowed per (client, resource) when the client does
  /// not contribute data.
  std::uint64_t fair_share_limit = 100;
  /// Keep shared-document keys in stored results (only up to 10,000 keys).
  bool include_keys = false;
  /// Keep an in-memory log of every protocol decision, for tests.
  bool record_events = false;
  Clock clock;
};

/// One protocol decision, in commit order.
struct SchedulerEvent {
  enum class Kind {
    claim_cached,
    claim_claimed,
    claim_pending,
    claim_quota_exceeded,
    submit_recorded,
    submit_already_complete,
    submit_not_owner,
    heartbeat,
    takeover_grant,
    takeover_refused,
  };

  Kind kind;
  std::int64_t at_ms = 0;
  std::string client_id;
  TaskId task_id = 0;
  TaskKey key;
  std::optional<CooccurrenceResult> result;
};

/// Global job scheduler backed by a transactional SQLite store. Every
/// operation is one transaction; calls are serialized, so decisions are
/// linearizable.
class Scheduler final : public SchedulerApi {
 public:
  explicit Scheduler(SchedulerOptions options = {});
  ~Scheduler() override;

  Scheduler(const Scheduler&) = delete;
  Scheduler& operator=(const Scheduler&) = delete;

  ResourceEntry register_resource(const ResourceMetadata& metadata) override;
  std::vector<ResourceEntry> list_resources() override;

  /// Cached if a record exists; pending if another client holds a fresh
  /// claim; otherwise claimed (new row, stale row taken over, or the
  /// caller's own claim repeated).
  ClaimResponse claim_task(const ClaimRequest& request) override;

  /// First write wins.
  SubmitAck submit_result(TaskId task_id, const std::string& client_id, const CooccurrenceResult& result) override;

  TaskStatusView task_status(const TaskKey& key) override;
  void heartbeat(TaskId task_id, const std::string& client_id) override;
  TakeoverResult takeover(TaskId task_id, const std::string& client_id) override;

  /// Whether one more cached delivery to this client is allowed. Does not
  /// consume quota.
  QuotaDecision quota_check(const std::string& client_id, const std::string& resource_id, bool data_transfer);

  /// Stores a completed result directly, as if contributed earlier.
  void seed_record(const TaskKey& key, const CooccurrenceResult& result, const std::string& contributor);

  std::vector<CrowdsourcedRecord> records(const std::string& resource_id);
  std::optional<TaskRow> task_row(TaskId task_id);
  std::vector<SchedulerEvent> events() const;

  std::chrono::milliseconds stale_timeout() const noexcept { return options_.stale_timeout; }
  std::int64_t now() const { return options_.clock(); }

 private:
  void require_resource(const std::string& resource_id);
  std::optional<TaskRow> find_row(const TaskKey& key);
  std::optional<TaskRow> find_row(TaskId task_id);
  std::optional<CooccurrenceResult> find_record(const TaskKey& key);
  bool is_stale(const TaskRow& row, std::int64_t now) const;
  void log(SchedulerEvent::Kind kind, std::int64_t at, const std::string& client, TaskId task_id, const TaskKey& key,
           std::optional<CooccurrenceResult> result = std::nullopt);
  CooccurrenceResult stored_form(const CooccurrenceResult& result) const;

  SchedulerOptions options_;
  mutable std::mutex mutex_;
  std::unique_ptr<sqlite::Database> db_;
  std::vector<SchedulerEvent> events_;
};

}  // namespace coterm
