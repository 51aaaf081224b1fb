#include "coterm/controller.hpp"

#include "coterm/error.hpp"
#include "coterm/scheduler_http.hpp"

#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <condition_variable>
#include <deque>
#include <fstream>
#include <mutex>
#include <random>
#include <set>
#include <thread>
#include <unordered_map>

namespace coterm {

namespace {

using SteadyClock = std::chrono::steady_clock;

// Uniform draw from [0, n) that does not depend on the standard library's
// distribution implementation.
std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t n) {
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t x = 0;
  do {
    x = rng();
  } while (x >= limit);
  return x % n;
}

std::string derive_job_id(const ResourceId& resource, CaseMode mode, const TaskPlan& plan) {
  std::vector<std::string> keys;
  keys.reserve(plan.tasks.size());
  for (const auto& task : plan.tasks) keys.push_back(task.pair().canonical_key());
  std::sort(keys.begin(), keys.end());
  std::string material = resource.hex() + '\n' + to_string(mode) + '\n';
  for (const auto& key : keys) material += key + '\n';
  return ResourceId::of_bytes(material).hex();
}

std::string default_client_id(const std::string& job_id) {
  char host[256] = {};
  if (gethostname(host, sizeof host - 1) != 0) std::snprintf(host, sizeof host, "localhost");
  return std::string(host) + "-" + std::to_string(getpid()) + "-" + job_id.substr(0, 8);
}

CooccurrenceResult oriented_for(const PairInput& row, CaseMode mode, const CooccurrenceResult& canonical) {
  const auto row_pair = PairedTerm::make(row.a, row.b, mode);
  CooccurrenceResult r = row_pair.is_canonical() ? canonical : canonical.swapped();
  r.pair = row_pair;
  return r;
}

// State of one cooperation-mode job.
class CooperativeRun {
 public:
  CooperativeRun(const Corpus& corpus, TaskPlan& plan, const JobOptions& options, SchedulerApi& api)
      : corpus_(corpus), plan_(plan), options_(options), api_(api), index_(corpus, options.case_mode),
        results_(plan.tasks.size()) {}

  void run() {
    std::thread heartbeats([this] { heartbeat_loop(); });
    {
      std::atomic<std::size_t> next{0};
      auto drain = [&] {
        for (std::size_t t = next++; t < plan_.tasks.size() && !crashed_; t = next++) dispatch_claim(t);
      };
      const unsigned threads = std::max(1U, std::min<unsigned>(options_.workers,
                                                               static_cast<unsigned>(plan_.tasks.size())));
      std::vector<std::jthread> pool;
      for (unsigned i = 1; i < threads; ++i) pool.emplace_back(drain);
      drain();
    }
    if (!crashed_) process_pending();
    stop_heartbeats();
    heartbeats.join();
  }

  bool crashed() const noexcept { return crashed_; }
  bool degraded() const noexcept { return degraded_; }
  std::uint64_t cached() const noexcept { return cached_; }
  std::uint64_t executed() const noexcept { return executed_; }
  std::uint64_t alpha() const noexcept { return alpha_; }
  std::uint64_t peak_pending() const noexcept { return peak_pending_; }
  std::size_t materialized_terms() const { return index_.materialized_count(); }
  InvertedIndex& index() noexcept { return index_; }
  std::vector<std::optional<CooccurrenceResult>>& results() noexcept { return results_; }

 private:
  struct PendingItem {
    std::size_t task;
    std::uint64_t enqueued_at;
    SteadyClock::time_point next_poll;
  };

  TaskKey key_of(std::size_t t) const {
    return TaskKey{corpus_.resource_id().hex(), plan_.tasks[t].pair().canonical_key(), options_.case_mode};
  }

  void dispatch_claim(std::size_t t) {
    if (degraded_) {
      execute(t, TaskOrigin::executed_local);
      return;
    }
    ClaimResponse response;
    try {
      response = api_.claim_task(ClaimRequest{options_.client_id, key_of(t), options_.data_transfer});
    } catch (const SchedulerUnreachable&) {
      degraded_ = true;
      execute(t, TaskOrigin::executed_local);
      return;
    } catch (const SchedulerError& e) {
      if (e.code() != SchedulerErrc::quota_exceeded) throw;
      execute(t, TaskOrigin::executed_local);
      return;
    }

    switch (response.kind) {
      case ClaimResponse::Kind::cached:
        record(t, *response.result, TaskOrigin::cached);
        break;
      case ClaimResponse::Kind::claimed:
        run_claimed(t, *response.task_id, response.took_over ? TaskOrigin::taken_over : TaskOrigin::executed_local);
        break;
      case ClaimResponse::Kind::pending: {
        std::lock_guard lock(pending_mutex_);
        plan_.tasks[t].set_enqueued_at(pending_seq_++);
        pending_.push_back(PendingItem{t, plan_.tasks[t].enqueued_at(), SteadyClock::now()});
        peak_pending_ = std::max<std::uint64_t>(peak_pending_, pending_.size());
        break;
      }
    }
  }

  // Oldest pending task first; fresh claims rotate to the back, stale ones
  // are taken over.
  void process_pending() {
    std::sort(pending_.begin(), pending_.end(),
              [](const PendingItem& x, const PendingItem& y) { return x.enqueued_at < y.enqueued_at; });
    while (!pending_.empty() && !crashed_) {
      PendingItem item = pending_.front();
      pending_.pop_front();
      if (degraded_) {
        execute(item.task, TaskOrigin::executed_local);
        continue;
      }
      std::this_thread::sleep_until(item.next_poll);

      auto rotate = [&] {
        item.next_poll = SteadyClock::now() + options_.pending_poll_interval;
        pending_.push_back(item);
      };

      TaskStatusView status;
      try {
        status = api_.task_status(key_of(item.task));
      } catch (const SchedulerUnreachable&) {
        degraded_ = true;
        execute(item.task, TaskOrigin::executed_local);
        continue;
      } catch (const SchedulerError& e) {
        if (e.code() != SchedulerErrc::unknown_task) throw;
        reclaim(item, rotate);
        continue;
      }

      if (status.status == TaskState::complete) {
        record(item.task, *status.result, TaskOrigin::cached);
      } else if (!status.stale) {
        rotate();
      } else {
        TakeoverResult outcome = TakeoverResult::refused;
        try {
          outcome = api_.takeover(status.task_id, options_.client_id);
        } catch (const SchedulerUnreachable&) {
          degraded_ = true;
          execute(item.task, TaskOrigin::executed_local);
          continue;
        }
        if (outcome == TakeoverResult::grant) {
          run_claimed(item.task, status.task_id, TaskOrigin::taken_over);
        } else {
          rotate();
        }
      }
    }
  }

  template <typename Rotate>
  void reclaim(PendingItem& item, Rotate&& rotate) {
    ClaimResponse response;
    try {
      response = api_.claim_task(ClaimRequest{options_.client_id, key_of(item.task), options_.data_transfer});
    } catch (const SchedulerUnreachable&) {
      degraded_ = true;
      execute(item.task, TaskOrigin::executed_local);
      return;
    }
    if (response.kind == ClaimResponse::Kind::cached) {
      record(item.task, *response.result, TaskOrigin::cached);
    } else if (response.kind == ClaimResponse::Kind::claimed) {
      run_claimed(item.task, *response.task_id,
                  response.took_over ? TaskOrigin::taken_over : TaskOrigin::executed_local);
    } else {
      rotate();
    }
  }

  void run_claimed(std::size_t t, TaskId task_id, TaskOrigin origin) {
    if (options_.crash_after_completed && completed_claims_ >= *options_.crash_after_completed) {
      crash();
      return;
    }
    {
      std::lock_guard lock(inflight_mutex_);
      inflight_.insert(task_id);
    }
    const auto result = compute(t);
    if (crashed_) return;
    if (!degraded_) {
      try {
        api_.submit_result(task_id, options_.client_id, result);
      } catch (const SchedulerUnreachable&) {
        degraded_ = true;
      } catch (const SchedulerError& e) {
        // Another cluster took the claim over; the local result still stands.
        if (e.code() != SchedulerErrc::not_owner) throw;
      }
    }
    {
      std::lock_guard lock(inflight_mutex_);
      inflight_.erase(task_id);
    }
    ++completed_claims_;
    finish_execution(t, result, origin);
  }

  void execute(std::size_t t, TaskOrigin origin) {
    const auto result = compute(t);
    finish_execution(t, result, origin);
  }

  void finish_execution(std::size_t t, const CooccurrenceResult& result, TaskOrigin origin) {
    ++executed_;
    if (origin == TaskOrigin::taken_over) ++alpha_;
    record(t, result, origin);
    if (options_.on_execute) options_.on_execute(plan_.tasks[t], origin);
  }

  CooccurrenceResult compute(std::size_t t) {
    const auto& pair = plan_.tasks[t].pair();
    const PairInput input{0, pair.a, pair.b};
    // TODO: materialize postings for all claimed tasks in one corpus pass
    // instead of one pass per task with missing terms.
    auto outcomes = run_job_local(index_, std::span(&input, 1), LocalRunOptions{1, options_.co_keys_limit, {}});
    if (options_.execution_delay.count() > 0) std::this_thread::sleep_for(options_.execution_delay);
    return std::move(*outcomes.front().result);
  }

  void record(std::size_t t, const CooccurrenceResult& result, TaskOrigin origin) {
    std::lock_guard lock(record_mutex_);
    if (origin == TaskOrigin::cached) ++cached_;
    plan_.tasks[t].complete(origin);
    results_[t] = result.canonical();
  }

  void crash() {
    crashed_ = true;
    stop_heartbeats();
  }

  void stop_heartbeats() {
    {
      std::lock_guard lock(heartbeat_mutex_);
      stopping_ = true;
    }
    heartbeat_cv_.notify_all();
  }

  void heartbeat_loop() {
    std::unique_lock lock(heartbeat_mutex_);
    while (!stopping_) {
      heartbeat_cv_.wait_for(lock, options_.heartbeat_interval, [this] { return stopping_; });
      if (stopping_) break;
      std::vector<TaskId> ids;
      {
        std::lock_guard inflight_lock(inflight_mutex_);
        ids.assign(inflight_.begin(), inflight_.end());
      }
      lock.unlock();
      for (TaskId id : ids) {
        try {
          api_.heartbeat(id, options_.client_id);
        } catch (const SchedulerUnreachable&) {
          degraded_ = true;
        } catch (const SchedulerError&) {
          // Completed or taken over in the meantime.
        }
      }
      lock.lock();
    }
  }

  const Corpus& corpus_;
  TaskPlan& plan_;
  const JobOptions& options_;
  SchedulerApi& api_;
  InvertedIndex index_;

  std::mutex record_mutex_;
  std::vector<std::optional<CooccurrenceResult>> results_;

  std::mutex pending_mutex_;
  std::deque<PendingItem> pending_;
  std::uint64_t pending_seq_ = 0;
  std::uint64_t peak_pending_ = 0;

  std::mutex inflight_mutex_;
  std::set<TaskId> inflight_;

  std::mutex heartbeat_mutex_;
  std::condition_variable heartbeat_cv_;
  bool stopping_ = false;

  std::atomic<bool> crashed_{false};
  std::atomic<bool> degraded_{false};
  std::atomic<std::uint64_t> cached_{0};
  std::atomic<std::uint64_t> executed_{0};
  std::atomic<std::uint64_t> alpha_{0};
  std::atomic<std::size_t> completed_claims_{0};
};

}  // namespace

const char* to_string(Mode mode) noexcept {
  return mode == Mode::standalone ? "standalone" : "cooperation";
}

const char* to_string(TaskOrigin origin) noexcept {
  switch (origin) {
    case TaskOrigin::cached: return "cached";
    case TaskOrigin::executed_local: return "executed_local";
    case TaskOrigin::taken_over: return "taken_over";
  }
  return "cached";
}

void Task::complete(TaskOrigin origin) {
  if (status_ == TaskState::complete) throw std::logic_error("task already complete");
  status_ = TaskState::complete;
  origin_ = origin;
}

TaskPlan plan_tasks(std::span<const PairInput> pairs, CaseMode mode, std::uint64_t shuffle_seed,
                    const std::string& job_id) {
  TaskPlan plan;
  plan.rows.reserve(pairs.size());
  plan.task_of_row.reserve(pairs.size());
  std::unordered_map<std::string, std::size_t> by_key;
  for (std::size_t row = 0; row < pairs.size(); ++row) {
    plan.rows.push_back(PairOutcome{pairs[row], std::nullopt, std::nullopt});
    try {
      auto pair = PairedTerm::make(pairs[row].a, pairs[row].b, mode).canonical();
      auto [it, inserted] = by_key.try_emplace(pair.canonical_key(), plan.tasks.size());
      if (inserted) plan.tasks.emplace_back(job_id, std::move(pair), 0);
      plan.tasks[it->second].rows.push_back(row);
      plan.task_of_row.emplace_back(it->second);
    } catch (const EmptyTerm& e) {
      plan.rows.back().error = e.what();
      plan.task_of_row.emplace_back(std::nullopt);
    }
  }

  std::vector<std::size_t> order(plan.tasks.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::mt19937_64 rng(shuffle_seed);
  for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[bounded(rng, i)]);

  std::vector<Task> shuffled;
  shuffled.reserve(plan.tasks.size());
  std::vector<std::size_t> new_index(plan.tasks.size());
  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    new_index[order[pos]] = pos;
    shuffled.push_back(std::move(plan.tasks[order[pos]]));
    shuffled.back().set_enqueued_at(pos);
  }
  plan.tasks = std::move(shuffled);
  for (auto& task : plan.task_of_row) {
    if (task) task = new_index[*task];
  }
  return plan;
}

std::uint64_t predicted_tasks_to_process(std::uint64_t total, std::uint64_t cached) {
  if (cached > total) throw InvalidCounts("cached tasks exceed total tasks");
  return total - cached;
}

double predicted_job_size(std::uint64_t total, std::uint64_t cached, std::uint64_t shared, std::uint64_t clusters,
                          std::uint64_t alpha) {
  if (cached > total) throw InvalidCounts("cached tasks exceed total tasks");
  if (shared > total - cached) throw InvalidCounts("shared tasks exceed uncached tasks");
  if (clusters < 1) throw InvalidCounts("at least one cluster is required");
  return static_cast<double>(total) - static_cast<double>(cached) -
         static_cast<double>(shared) * (1.0 - 1.0 / static_cast<double>(clusters)) + static_cast<double>(alpha);
}

nlohmann::json JobReport::to_json() const {
  return {{"job_id", job_id},
          {"resource_id", resource_id},
          {"mode", to_string(mode)},
          {"T_t", total_tasks},
          {"T_c", cached_tasks},
          {"E", executed_tasks},
          {"P_max", peak_pending},
          {"alpha", alpha},
          {"wall_time", wall_time_seconds},
          {"degraded", degraded}};
}

Config Config::from(const KeyValueFile& file) {
  file.require_known({"mode", "resource_path", "pair_list_path", "granularity", "case_mode", "workers",
                      "scheduler_url", "data_transfer", "shuffle_seed", "output_path", "pending_poll_interval",
                      "heartbeat_interval", "store_intermediate", "client_id"});
  Config c;
  if (auto mode = file.get("mode")) {
    if (*mode == "standalone") {
      c.mode = Mode::standalone;
    } else if (*mode == "cooperation") {
      c.mode = Mode::cooperation;
    } else {
      throw ConfigError("mode must be standalone or cooperation, got '" + *mode + "'");
    }
  }
  c.resource_path = file.get_or("resource_path", "");
  c.pair_list_path = file.get_or("pair_list_path", "");
  c.output_path = file.get_or("output_path", "");
  if (auto g = file.get("granularity")) {
    auto parsed = parse_granularity(*g);
    if (!parsed) throw ConfigError("granularity must be abstract or sentence, got '" + *g + "'");
    c.granularity = *parsed;
  }
  if (auto m = file.get("case_mode")) {
    auto parsed = parse_case_mode(*m);
    if (!parsed) throw ConfigError("case_mode must be sensitive or insensitive, got '" + *m + "'");
    c.case_mode = *parsed;
  }
  if (auto w = file.get_int("workers")) {
    if (*w < 1) throw ConfigError("workers must be positive");
    c.workers = static_cast<unsigned>(*w);
  }
  c.scheduler_url = file.get("scheduler_url");
  if (c.scheduler_url && c.scheduler_url->empty()) c.scheduler_url.reset();
  c.data_transfer = file.get_bool("data_transfer").value_or(true);
  if (auto seed = file.get_int("shuffle_seed")) c.shuffle_seed = static_cast<std::uint64_t>(*seed);
  c.pending_poll_interval = file.get_duration("pending_poll_interval").value_or(c.pending_poll_interval);
  c.heartbeat_interval = file.get_duration("heartbeat_interval").value_or(c.heartbeat_interval);
  c.store_intermediate = file.get_bool("store_intermediate").value_or(false);
  c.client_id = file.get("client_id");
  return c;
}

void Config::validate() const {
  if (resource_path.empty()) throw ConfigError("resource_path is required");
  if (pair_list_path.empty()) throw ConfigError("pair_list_path is required");
  if (output_path.empty()) throw ConfigError("output_path is required");
  if (workers < 1) throw ConfigError("workers must be positive");
  if (mode == Mode::cooperation && !scheduler_url) throw ConfigError("cooperation mode requires scheduler_url");
  if (heartbeat_interval.count() <= 0) throw ConfigError("heartbeat_interval must be positive");
}

JobOutcome run_job(const Corpus& corpus, std::span<const PairInput> pairs, const JobOptions& input_options,
                   SchedulerApi* scheduler) {
  const auto started = SteadyClock::now();
  JobOptions options = input_options;
  TaskPlan plan = plan_tasks(pairs, options.case_mode, options.shuffle_seed, options.job_id);
  if (options.job_id.empty()) options.job_id = derive_job_id(corpus.resource_id(), options.case_mode, plan);
  if (options.client_id.empty()) options.client_id = default_client_id(options.job_id);

  JobOutcome outcome;
  outcome.report.job_id = options.job_id;
  outcome.report.resource_id = corpus.resource_id().hex();
  outcome.report.mode = options.mode;
  outcome.report.total_tasks = plan.tasks.size();

  std::vector<std::optional<CooccurrenceResult>> task_results(plan.tasks.size());

  if (options.mode == Mode::standalone) {
    InvertedIndex index(corpus, options.case_mode);
    std::vector<PairInput> inputs;
    inputs.reserve(plan.tasks.size());
    for (const auto& task : plan.tasks) inputs.push_back(PairInput{0, task.pair().a, task.pair().b});
    auto local = run_job_local(index, inputs, LocalRunOptions{options.workers, options.co_keys_limit, {}});
    for (std::size_t t = 0; t < plan.tasks.size(); ++t) {
      task_results[t] = std::move(*local[t].result);
      plan.tasks[t].complete(TaskOrigin::executed_local);
      if (options.on_execute) options.on_execute(plan.tasks[t], TaskOrigin::executed_local);
    }
    outcome.report.executed_tasks = plan.tasks.size();
    outcome.materialized_terms = index.materialized_count();
    if (options.index_cache_out) index.save_cache(*options.index_cache_out);
  } else {
    if (scheduler == nullptr) throw ConfigError("cooperation mode requires a scheduler");
    scheduler->register_resource(ResourceMetadata{corpus.resource_id().hex(), "", corpus.n_docs(),
                                                  to_string(corpus.granularity()), options.client_id});
    CooperativeRun run(corpus, plan, options, *scheduler);
    run.run();
    task_results = std::move(run.results());
    outcome.crashed = run.crashed();
    outcome.report.cached_tasks = run.cached();
    outcome.report.executed_tasks = run.executed();
    outcome.report.alpha = run.alpha();
    outcome.report.peak_pending = run.peak_pending();
    outcome.report.degraded = run.degraded();
    outcome.materialized_terms = run.materialized_terms();
    if (options.index_cache_out && !outcome.crashed) run.index().save_cache(*options.index_cache_out);
  }

  for (std::size_t row = 0; row < plan.rows.size(); ++row) {
    const auto task = plan.task_of_row[row];
    if (!task) continue;
    if (task_results[*task]) {
      plan.rows[row].result = oriented_for(plan.rows[row].input, options.case_mode, *task_results[*task]);
    } else {
      plan.rows[row].error = "unresolved";
    }
  }
  outcome.rows = std::move(plan.rows);
  outcome.tasks = std::move(plan.tasks);
  outcome.report.wall_time_seconds = std::chrono::duration<double>(SteadyClock::now() - started).count();
  return outcome;
}

std::string format_results(const JobOutcome& outcome, const ResourceId& resource_id, CaseMode mode) {
  std::string out = "#coterm-results\tresource_id=" + resource_id.hex() + "\tcase_mode=" + to_string(mode) +
                    "\tversion=" + kVersion + '\n';
  for (const auto& row : outcome.rows) {
    out += format_result_row(row);
    out.push_back('\n');
  }
  return out;
}

JobReport execute_job(const Config& config) {
  config.validate();
  Corpus corpus = load_resource(config.resource_path, Granularity::abstract);
  if (config.granularity == Granularity::sentence) corpus = sentence_split(corpus);
  const auto pairs = load_pair_list(config.pair_list_path);

  JobOptions options;
  options.mode = config.mode;
  options.case_mode = config.case_mode;
  options.workers = config.workers;
  options.data_transfer = config.data_transfer;
  options.shuffle_seed = config.shuffle_seed;
  options.pending_poll_interval = config.pending_poll_interval;
  options.heartbeat_interval = config.heartbeat_interval;
  if (config.client_id) options.client_id = *config.client_id;
  if (config.store_intermediate) {
    options.index_cache_out = config.output_path;
    options.index_cache_out->replace_extension(".index");
  }

  std::unique_ptr<HttpSchedulerClient> client;
  if (config.mode == Mode::cooperation) client = std::make_unique<HttpSchedulerClient>(*config.scheduler_url);

  const auto outcome = run_job(corpus, pairs, options, client.get());

  std::ofstream out(config.output_path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write results file " + config.output_path.string());
  out << format_results(outcome, corpus.resource_id(), config.case_mode);
  if (!out) throw IoError("write error on " + config.output_path.string());
  return outcome.report;
}

}  // namespace coterm
