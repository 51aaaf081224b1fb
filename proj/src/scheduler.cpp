#include "coterm/scheduler.hpp"

#include "coterm/error.hpp"
#include "coterm/wire.hpp"

#include "sqlite.hpp"

namespace coterm {

namespace {

constexpr std::string_view kSchema = R"sql(
CREATE TABLE IF NOT EXISTS resources (
  resource_id   TEXT PRIMARY KEY,
  name          TEXT NOT NULL,
  n_docs        INTEGER NOT NULL,
  granularity   TEXT NOT NULL,
  uploader      TEXT NOT NULL,
  registered_at INTEGER NOT NULL
);
CREATE TABLE IF NOT EXISTS tasks (
  task_id      INTEGER PRIMARY KEY AUTOINCREMENT,
  resource_id  TEXT NOT NULL,
  pair_key     TEXT NOT NULL,
  case_mode    TEXT NOT NULL,
  status       INTEGER NOT NULL,
  owner        TEXT NOT NULL,
  claimed_at   INTEGER NOT NULL,
  heartbeat_at INTEGER NOT NULL,
  UNIQUE (resource_id, pair_key, case_mode)
);
CREATE TABLE IF NOT EXISTS records (
  resource_id TEXT NOT NULL,
  pair_key    TEXT NOT NULL,
  case_mode   TEXT NOT NULL,
  result      TEXT NOT NULL,
  contributor TEXT NOT NULL,
  created_at  INTEGER NOT NULL,
  PRIMARY KEY (resource_id, pair_key, case_mode)
);
CREATE TABLE IF NOT EXISTS quota (
  client_id   TEXT NOT NULL,
  resource_id TEXT NOT NULL,
  delivered   INTEGER NOT NULL,
  PRIMARY KEY (client_id, resource_id)
);
)sql";

constexpr std::size_t kMaxStoredKeys = 10'000;

bool well_formed_resource_id(std::string_view id) {
  if (id.size() != 32) return false;
  for (char c : id) {
    if (!((c >= '0' && c <= '9') || (c >= 'a' && c <= 'f'))) return false;
  }
  return true;
}

TaskRow read_row(const sqlite::Statement& s) {
  TaskRow row;
  row.task_id = static_cast<TaskId>(s.integer(0));
  row.key.resource_id = s.text(1);
  row.key.pair_key = s.text(2);
  row.key.case_mode = parse_case_mode(s.text(3)).value_or(CaseMode::insensitive);
  row.status = s.integer(4) == 1 ? TaskState::complete : TaskState::incomplete;
  row.owner = s.text(5);
  row.claimed_at = s.integer(6);
  row.heartbeat_at = s.integer(7);
  return row;
}

constexpr std::string_view kRowColumns =
    "task_id, resource_id, pair_key, case_mode, status, owner, claimed_at, heartbeat_at";

}  // namespace

std::int64_t system_clock_ms() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::system_clock::now().time_since_epoch())
      .count();
}

Scheduler::Scheduler(SchedulerOptions options) : options_(std::move(options)) {
  if (!options_.clock) options_.clock = system_clock_ms;
  db_ = std::make_unique<sqlite::Database>(options_.store_path);
  db_->exec("PRAGMA journal_mode=WAL");
  db_->exec("PRAGMA synchronous=FULL");
  db_->exec(kSchema);
}

Scheduler::~Scheduler() = default;

void Scheduler::require_resource(const std::string& resource_id) {
  auto s = db_->prepare("SELECT 1 FROM resources WHERE resource_id = ?");
  s.bind(1, resource_id);
  if (!s.step()) throw SchedulerError(SchedulerErrc::unknown_resource, "resource " + resource_id + " is not registered");
}

std::optional<TaskRow> Scheduler::find_row(const TaskKey& key) {
  auto s = db_->prepare("SELECT " + std::string(kRowColumns) +
                        " FROM tasks WHERE resource_id = ? AND pair_key = ? AND case_mode = ?");
  s.bind(1, key.resource_id).bind(2, key.pair_key).bind(3, to_string(key.case_mode));
  if (!s.step()) return std::nullopt;
  return read_row(s);
}

std::optional<TaskRow> Scheduler::find_row(TaskId task_id) {
  auto s = db_->prepare("SELECT " + std::string(kRowColumns) + " FROM tasks WHERE task_id = ?");
  s.bind(1, static_cast<std::int64_t>(task_id));
  if (!s.step()) return std::nullopt;
  return read_row(s);
}

std::optional<CooccurrenceResult> Scheduler::find_record(const TaskKey& key) {
  auto s = db_->prepare("SELECT result FROM records WHERE resource_id = ? AND pair_key = ? AND case_mode = ?");
  s.bind(1, key.resource_id).bind(2, key.pair_key).bind(3, to_string(key.case_mode));
  if (!s.step()) return std::nullopt;
  return wire::decode_result(nlohmann::json::parse(s.text(0)));
}

bool Scheduler::is_stale(const TaskRow& row, std::int64_t now) const {
  return row.status == TaskState::incomplete && now - row.heartbeat_at > options_.stale_timeout.count();
}

void Scheduler::log(SchedulerEvent::Kind kind, std::int64_t at, const std::string& client, TaskId task_id,
                    const TaskKey& key, std::optional<CooccurrenceResult> result) {
  if (!options_.record_events) return;
  events_.push_back(SchedulerEvent{kind, at, client, task_id, key, std::move(result)});
}

CooccurrenceResult Scheduler::stored_form(const CooccurrenceResult& result) const {
  CooccurrenceResult stored = result.canonical();
  if (!options_.include_keys || (stored.co_keys && stored.co_keys->size() > kMaxStoredKeys)) {
    stored.co_keys.reset();
  }
  return stored;
}

ResourceEntry Scheduler::register_resource(const ResourceMetadata& metadata) {
  if (!well_formed_resource_id(metadata.resource_id)) {
    throw SchedulerError(SchedulerErrc::malformed_resource_id,
                         "'" + metadata.resource_id + "' is not 32 lowercase hex characters");
  }
  std::lock_guard lock(mutex_);
  sqlite::Transaction tx(*db_);
  db_->prepare("INSERT OR IGNORE INTO resources VALUES (?, ?, ?, ?, ?, ?)")
      .bind(1, metadata.resource_id)
      .bind(2, metadata.name)
      .bind(3, static_cast<std::int64_t>(metadata.n_docs))
      .bind(4, metadata.granularity)
      .bind(5, metadata.uploader)
      .bind(6, options_.clock())
      .run();
  auto s = db_->prepare("SELECT resource_id, name, n_docs, granularity, uploader, registered_at "
                        "FROM resources WHERE resource_id = ?");
  s.bind(1, metadata.resource_id);
  s.step();
  ResourceEntry entry{s.text(0), s.text(1), static_cast<std::uint64_t>(s.integer(2)), s.text(3), s.text(4),
                      s.integer(5)};
  tx.commit();
  return entry;
}

std::vector<ResourceEntry> Scheduler::list_resources() {
  std::lock_guard lock(mutex_);
  auto s = db_->prepare("SELECT resource_id, name, n_docs, granularity, uploader, registered_at "
                        "FROM resources ORDER BY registered_at, resource_id");
  std::vector<ResourceEntry> out;
  while (s.step()) {
    out.push_back(ResourceEntry{s.text(0), s.text(1), static_cast<std::uint64_t>(s.integer(2)), s.text(3),
                                s.text(4), s.integer(5)});
  }
  return out;
}

QuotaDecision Scheduler::quota_check(const std::string& client_id, const std::string& resource_id,
                                     bool data_transfer) {
  if (data_transfer) return QuotaDecision::allow;
  std::lock_guard lock(mutex_);
  auto s = db_->prepare("SELECT delivered FROM quota WHERE client_id = ? AND resource_id = ?");
  s.bind(1, client_id).bind(2, resource_id);
  const std::int64_t delivered = s.step() ? s.integer(0) : 0;
  return static_cast<std::uint64_t>(delivered) < options_.fair_share_limit ? QuotaDecision::allow
                                                                             : QuotaDecision::exceeded;
}

ClaimResponse Scheduler::claim_task(const ClaimRequest& request) {
  const auto& key = request.key;
  std::lock_guard lock(mutex_);
  sqlite::Transaction tx(*db_);
  require_resource(key.resource_id);
  const std::int64_t now = options_.clock();

  if (auto result = find_record(key)) {
    if (!request.data_transfer) {
      auto s = db_->prepare("SELECT delivered FROM quota WHERE client_id = ? AND resource_id = ?");
      s.bind(1, request.client_id).bind(2, key.resource_id);
      const std::int64_t delivered = s.step() ? s.integer(0) : 0;
      if (static_cast<std::uint64_t>(delivered) >= options_.fair_share_limit) {
        log(SchedulerEvent::Kind::claim_quota_exceeded, now, request.client_id, 0, key);
        throw SchedulerError(SchedulerErrc::quota_exceeded,
                             "fair-share limit of " + std::to_string(options_.fair_share_limit) + " reached");
      }
      db_->prepare("INSERT INTO quota VALUES (?, ?, 1) "
                   "ON CONFLICT (client_id, resource_id) DO UPDATE SET delivered = delivered + 1")
          .bind(1, request.client_id)
          .bind(2, key.resource_id)
          .run();
    }
    tx.commit();
    log(SchedulerEvent::Kind::claim_cached, now, request.client_id, 0, key, result);
    return ClaimResponse{ClaimResponse::Kind::cached, std::move(result), std::nullopt};
  }

  TaskId task_id = 0;
  bool took_over = false;
  if (auto row = find_row(key)) {
    task_id = row->task_id;
    if (row->owner != request.client_id && !is_stale(*row, now)) {
      tx.commit();
      log(SchedulerEvent::Kind::claim_pending, now, request.client_id, task_id, key);
      return ClaimResponse{ClaimResponse::Kind::pending, std::nullopt, std::nullopt};
    }
    const bool same_owner = row->owner == request.client_id;
    took_over = !same_owner;
    db_->prepare("UPDATE tasks SET owner = ?, claimed_at = ?, heartbeat_at = ? WHERE task_id = ?")
        .bind(1, request.client_id)
        .bind(2, same_owner ? row->claimed_at : now)
        .bind(3, now)
        .bind(4, static_cast<std::int64_t>(task_id))
        .run();
  } else {
    db_->prepare("INSERT INTO tasks (resource_id, pair_key, case_mode, status, owner, claimed_at, heartbeat_at) "
                 "VALUES (?, ?, ?, 0, ?, ?, ?)")
        .bind(1, key.resource_id)
        .bind(2, key.pair_key)
        .bind(3, to_string(key.case_mode))
        .bind(4, request.client_id)
        .bind(5, now)
        .bind(6, now)
        .run();
    task_id = static_cast<TaskId>(db_->last_insert_rowid());
  }
  tx.commit();
  log(SchedulerEvent::Kind::claim_claimed, now, request.client_id, task_id, key);
  return ClaimResponse{ClaimResponse::Kind::claimed, std::nullopt, task_id, took_over};
}

SubmitAck Scheduler::submit_result(TaskId task_id, const std::string& client_id, const CooccurrenceResult& result) {
  std::lock_guard lock(mutex_);
  sqlite::Transaction tx(*db_);
  const std::int64_t now = options_.clock();
  auto row = find_row(task_id);
  if (!row) throw SchedulerError(SchedulerErrc::unknown_task, "task " + std::to_string(task_id) + " does not exist");
  if (row->status == TaskState::complete) {
    log(SchedulerEvent::Kind::submit_already_complete, now, client_id, task_id, row->key);
    return SubmitAck::already_complete;
  }
  if (row->owner != client_id) {
    log(SchedulerEvent::Kind::submit_not_owner, now, client_id, task_id, row->key);
    throw SchedulerError(SchedulerErrc::not_owner, "task " + std::to_string(task_id) + " is owned by another client");
  }
  const auto stored = stored_form(result);
  if (stored.pair.canonical_key() != row->key.pair_key) {
    throw SchedulerError(SchedulerErrc::bad_request, "result pair does not match task " + std::to_string(task_id));
  }
  db_->prepare("INSERT INTO records VALUES (?, ?, ?, ?, ?, ?)")
      .bind(1, row->key.resource_id)
      .bind(2, row->key.pair_key)
      .bind(3, to_string(row->key.case_mode))
      .bind(4, wire::encode(stored).dump())
      .bind(5, client_id)
      .bind(6, now)
      .run();
  db_->prepare("UPDATE tasks SET status = 1 WHERE task_id = ?").bind(1, static_cast<std::int64_t>(task_id)).run();
  tx.commit();
  log(SchedulerEvent::Kind::submit_recorded, now, client_id, task_id, row->key, stored);
  return SubmitAck::recorded;
}

TaskStatusView Scheduler::task_status(const TaskKey& key) {
  std::lock_guard lock(mutex_);
  const std::int64_t now = options_.clock();
  auto row = find_row(key);
  if (auto result = find_record(key)) {
    return TaskStatusView{TaskState::complete, false, std::move(result), row ? row->task_id : 0};
  }
  if (!row) throw SchedulerError(SchedulerErrc::unknown_task, "no task for pair '" + key.pair_key + "'");
  return TaskStatusView{TaskState::incomplete, is_stale(*row, now), std::nullopt, row->task_id};
}

void Scheduler::heartbeat(TaskId task_id, const std::string& client_id) {
  std::lock_guard lock(mutex_);
  sqlite::Transaction tx(*db_);
  const std::int64_t now = options_.clock();
  auto row = find_row(task_id);
  if (!row) throw SchedulerError(SchedulerErrc::unknown_task, "task " + std::to_string(task_id) + " does not exist");
  if (row->status == TaskState::complete) {
    throw SchedulerError(SchedulerErrc::already_complete, "task " + std::to_string(task_id) + " is complete");
  }
  if (row->owner != client_id) {
    throw SchedulerError(SchedulerErrc::not_owner, "task " + std::to_string(task_id) + " is owned by another client");
  }
  db_->prepare("UPDATE tasks SET heartbeat_at = ? WHERE task_id = ?")
      .bind(1, now)
      .bind(2, static_cast<std::int64_t>(task_id))
      .run();
  tx.commit();
  log(SchedulerEvent::Kind::heartbeat, now, client_id, task_id, row->key);
}

TakeoverResult Scheduler::takeover(TaskId task_id, const std::string& client_id) {
  std::lock_guard lock(mutex_);
  sqlite::Transaction tx(*db_);
  const std::int64_t now = options_.clock();
  auto row = find_row(task_id);
  if (!row) throw SchedulerError(SchedulerErrc::unknown_task, "task " + std::to_string(task_id) + " does not exist");
  if (!is_stale(*row, now)) {
    tx.commit();
    log(SchedulerEvent::Kind::takeover_refused, now, client_id, task_id, row->key);
    return TakeoverResult::refused;
  }
  db_->prepare("UPDATE tasks SET owner = ?, claimed_at = ?, heartbeat_at = ? WHERE task_id = ?")
      .bind(1, client_id)
      .bind(2, now)
      .bind(3, now)
      .bind(4, static_cast<std::int64_t>(task_id))
      .run();
  tx.commit();
  log(SchedulerEvent::Kind::takeover_grant, now, client_id, task_id, row->key);
  return TakeoverResult::grant;
}

void Scheduler::seed_record(const TaskKey& key, const CooccurrenceResult& result, const std::string& contributor) {
  std::lock_guard lock(mutex_);
  sqlite::Transaction tx(*db_);
  require_resource(key.resource_id);
  const std::int64_t now = options_.clock();
  const auto stored = stored_form(result);
  if (stored.pair.canonical_key() != key.pair_key) {
    throw SchedulerError(SchedulerErrc::bad_request, "result pair does not match key '" + key.pair_key + "'");
  }
  db_->prepare("INSERT OR IGNORE INTO records VALUES (?, ?, ?, ?, ?, ?)")
      .bind(1, key.resource_id)
      .bind(2, key.pair_key)
      .bind(3, to_string(key.case_mode))
      .bind(4, wire::encode(stored).dump())
      .bind(5, contributor)
      .bind(6, now)
      .run();
  db_->prepare("INSERT INTO tasks (resource_id, pair_key, case_mode, status, owner, claimed_at, heartbeat_at) "
               "VALUES (?, ?, ?, 1, ?, ?, ?) "
               "ON CONFLICT (resource_id, pair_key, case_mode) DO UPDATE SET status = 1")
      .bind(1, key.resource_id)
      .bind(2, key.pair_key)
      .bind(3, to_string(key.case_mode))
      .bind(4, contributor)
      .bind(5, now)
      .bind(6, now)
      .run();
  tx.commit();
}

std::vector<CrowdsourcedRecord> Scheduler::records(const std::string& resource_id) {
  std::lock_guard lock(mutex_);
  auto s = db_->prepare("SELECT pair_key, case_mode, result, contributor, created_at FROM records "
                        "WHERE resource_id = ? ORDER BY pair_key, case_mode");
  s.bind(1, resource_id);
  std::vector<CrowdsourcedRecord> out;
  while (s.step()) {
    CrowdsourcedRecord r;
    r.key = TaskKey{resource_id, s.text(0), parse_case_mode(s.text(1)).value_or(CaseMode::insensitive)};
    r.result = wire::decode_result(nlohmann::json::parse(s.text(2)));
    r.contributor = s.text(3);
    r.created_at = s.integer(4);
    out.push_back(std::move(r));
  }
  return out;
}

std::optional<TaskRow> Scheduler::task_row(TaskId task_id) {
  std::lock_guard lock(mutex_);
  return find_row(task_id);
}

std::vector<SchedulerEvent> Scheduler::events() const {
  std::lock_guard lock(mutex_);
  return events_;
}

}  // namespace coterm
