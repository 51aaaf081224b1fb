#include "coterm/sim.hpp"

#include "coterm/error.hpp"
#include "coterm/index.hpp"
#include "coterm/synth.hpp"

#include <cmath>
#include <exception>
#include <latch>
#include <mutex>
#include <random>
#include <set>
#include <thread>

namespace coterm {

namespace {

constexpr std::size_t kSimDocs = 40;

std::size_t vocabulary_for(std::size_t n_pairs) {
  std::size_t v = 8;
  while (v * (v - 1) / 2 < n_pairs) ++v;
  return v;
}

std::string fixed(double x, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, x);
  return buf;
}

}  // namespace

Scenario Scenario::from(const KeyValueFile& file) {
  file.require_known({"clusters", "tasks", "overlap_fraction", "precache_fraction", "crash_cluster", "crash_after",
                      "task_duration", "stale_timeout", "workers", "seed"});
  Scenario s;
  auto non_negative = [&](const char* key) -> std::optional<std::int64_t> {
    auto v = file.get_int(key);
    if (v && *v < 0) throw ScenarioInvalid(std::string(key) + " must be non-negative");
    return v;
  };
  if (auto v = non_negative("clusters")) s.clusters = static_cast<unsigned>(*v);
  if (auto v = non_negative("tasks")) s.tasks = static_cast<std::size_t>(*v);
  if (auto v = file.get_double("overlap_fraction")) s.overlap_fraction = *v;
  if (auto v = file.get_double("precache_fraction")) s.precache_fraction = *v;
  if (auto v = file.get("crash_cluster"); v && !v->empty() && *v != "none") {
    s.crash_cluster = static_cast<unsigned>(*non_negative("crash_cluster"));
  }
  if (auto v = non_negative("crash_after")) s.crash_after = static_cast<std::size_t>(*v);
  if (auto v = file.get_duration("task_duration")) s.task_duration = *v;
  if (auto v = file.get_duration("stale_timeout")) s.stale_timeout = *v;
  if (auto v = non_negative("workers")) s.workers = static_cast<unsigned>(*v);
  if (auto v = non_negative("seed")) s.seed = static_cast<std::uint64_t>(*v);
  return s;
}

void Scenario::validate() const {
  if (clusters < 1) throw ScenarioInvalid("clusters must be at least 1");
  if (tasks < 1) throw ScenarioInvalid("tasks must be at least 1");
  if (!(overlap_fraction >= 0.0 && overlap_fraction <= 1.0)) {
    throw ScenarioInvalid("overlap_fraction must lie in [0, 1]");
  }
  if (!(precache_fraction >= 0.0 && precache_fraction <= 1.0)) {
    throw ScenarioInvalid("precache_fraction must lie in [0, 1]");
  }
  if (crash_cluster && *crash_cluster >= clusters) throw ScenarioInvalid("crash_cluster out of range");
  if (stale_timeout.count() <= 0) throw ScenarioInvalid("stale_timeout must be positive");
  if (workers < 1) throw ScenarioInvalid("workers must be at least 1");
}

std::size_t Scenario::shared_tasks() const {
  if (clusters == 1) return tasks;
  return static_cast<std::size_t>(std::llround(overlap_fraction * static_cast<double>(tasks)));
}

std::size_t Scenario::precached_tasks() const {
  return static_cast<std::size_t>(std::llround(precache_fraction * static_cast<double>(tasks)));
}

SimReport run_scenario(const Scenario& scenario) {
  scenario.validate();
  const unsigned L = scenario.clusters;
  const std::size_t shared = scenario.shared_tasks();
  const std::size_t unique = scenario.tasks - shared;
  const std::size_t universe = shared + L * unique;
  const std::size_t precached = scenario.precached_tasks();

  SynthOptions synth;
  synth.n_docs = kSimDocs;
  synth.vocab_size = vocabulary_for(universe);
  synth.seed = scenario.seed;
  const Corpus corpus = parse_resource(generate_corpus(synth), Granularity::abstract);
  const auto vocab = synth_vocabulary(synth.vocab_size);

  std::vector<PairInput> all_pairs;
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    for (std::size_t j = i + 1; j < vocab.size(); ++j) all_pairs.push_back(PairInput{0, vocab[i], vocab[j]});
  }
  std::mt19937_64 rng(scenario.seed);
  std::shuffle(all_pairs.begin(), all_pairs.end(), rng);
  all_pairs.resize(universe);

  std::vector<std::vector<PairInput>> lists(L);
  for (unsigned c = 0; c < L; ++c) {
    auto& list = lists[c];
    list.assign(all_pairs.begin(), all_pairs.begin() + static_cast<std::ptrdiff_t>(shared));
    const auto first = all_pairs.begin() + static_cast<std::ptrdiff_t>(shared + c * unique);
    list.insert(list.end(), first, first + static_cast<std::ptrdiff_t>(unique));
    for (std::size_t i = 0; i < list.size(); ++i) list[i].line_no = i + 1;
  }

  const auto key_of = [](const PairInput& p) {
    return PairedTerm::make(p.a, p.b, CaseMode::insensitive).canonical_key();
  };

  std::map<std::string, CooccurrenceResult> truth;
  {
    InvertedIndex index(corpus, CaseMode::insensitive);
    for (const auto& outcome : run_job_local(index, all_pairs)) {
      auto result = outcome.result->canonical();
      result.co_keys.reset();
      truth.emplace(result.pair.canonical_key(), std::move(result));
    }
  }

  SchedulerOptions sched_options;
  sched_options.stale_timeout = scenario.stale_timeout;
  sched_options.record_events = true;
  Scheduler scheduler(sched_options);
  const std::string resource = corpus.resource_id().hex();
  scheduler.register_resource(ResourceMetadata{resource, "simulation", corpus.n_docs(), "abstract", "sim"});

  SimReport report;
  report.scenario = scenario;
  std::set<std::string> precached_keys;
  for (const auto& list : lists) {
    for (std::size_t i = 0; i < precached && i < list.size(); ++i) {
      const auto key = key_of(list[i]);
      if (precached_keys.insert(key).second) {
        scheduler.seed_record(TaskKey{resource, key, CaseMode::insensitive}, truth.at(key), "precache");
      }
    }
  }
  for (unsigned c = 0; c < L; ++c) {
    for (const auto& p : lists[c]) report.listed_by[key_of(p)].push_back(c);
  }

  std::mutex log_mutex;
  std::vector<JobOutcome> outcomes(L);
  std::vector<std::exception_ptr> failures(L);
  std::latch start(L);
  {
    std::vector<std::jthread> threads;
    for (unsigned c = 0; c < L; ++c) {
      threads.emplace_back([&, c] {
        try {
          JobOptions options;
          options.mode = Mode::cooperation;
          options.case_mode = CaseMode::insensitive;
          options.workers = scenario.workers;
          options.shuffle_seed = scenario.seed + c;
          options.client_id = "cluster-" + std::to_string(c);
          options.pending_poll_interval = std::max(std::chrono::milliseconds(1), scenario.stale_timeout / 10);
          options.heartbeat_interval = std::max(std::chrono::milliseconds(1), scenario.stale_timeout / 4);
          options.execution_delay = scenario.task_duration;
          if (scenario.crash_cluster == c) options.crash_after_completed = scenario.crash_after;
          options.on_execute = [&, c](const Task& task, TaskOrigin origin) {
            std::lock_guard lock(log_mutex);
            report.executions.push_back(ExecutionEntry{c, task.pair().canonical_key(), origin});
          };
          start.arrive_and_wait();
          outcomes[c] = run_job(corpus, lists[c], options, &scheduler);
        } catch (...) {
          failures[c] = std::current_exception();
        }
      });
    }
  }
  for (const auto& failure : failures) {
    if (failure) std::rethrow_exception(failure);
  }

  const auto events = scheduler.events();
  for (const auto& key : precached_keys) report.records_per_key[key] = 1;
  for (const auto& e : events) {
    if (e.kind == SchedulerEvent::Kind::submit_recorded) ++report.records_per_key[e.key.pair_key];
  }
  for (const auto& record : scheduler.records(resource)) {
    auto expected = truth.find(record.key.pair_key);
    if (expected == truth.end() || !(record.result == expected->second)) {
      report.wrong_results.push_back(record.key.pair_key);
    }
  }

  const std::size_t shared_uncached = shared - std::min(shared, precached);
  for (unsigned c = 0; c < L; ++c) {
    const auto& outcome = outcomes[c];
    ClusterReport cr;
    cr.client_id = "cluster-" + std::to_string(c);
    cr.total = outcome.report.total_tasks;
    cr.precached = std::min(precached, scenario.tasks);
    cr.shared = L > 1 ? shared_uncached : 0;
    cr.cached = outcome.report.cached_tasks;
    cr.executed = outcome.report.executed_tasks;
    cr.alpha = outcome.report.alpha;
    cr.peak_pending = outcome.report.peak_pending;
    cr.crashed = outcome.crashed;
    for (const auto& task : outcome.tasks) cr.resolved += task.status() == TaskState::complete ? 1 : 0;

    std::set<TaskId> claimed;
    std::set<TaskId> submitted;
    for (const auto& e : events) {
      if (e.client_id != cr.client_id) continue;
      using K = SchedulerEvent::Kind;
      if (e.kind == K::claim_claimed || e.kind == K::takeover_grant) claimed.insert(e.task_id);
      if (e.kind == K::submit_recorded || e.kind == K::submit_already_complete || e.kind == K::submit_not_owner) {
        submitted.insert(e.task_id);
      }
    }
    for (TaskId id : claimed) cr.abandoned_claims += submitted.count(id) ? 0 : 1;

    cr.predicted = predicted_job_size(cr.total, cr.precached, cr.shared, L, cr.alpha);
    report.clusters.push_back(std::move(cr));
  }

  std::set<std::string> executed_keys;
  for (const auto& e : report.executions) executed_keys.insert(e.pair_key);
  report.distinct_tasks = universe;
  report.precached_keys = precached_keys.size();
  report.total_distinct_executions = executed_keys.size();
  report.takeover_duplicates = report.executions.size() - executed_keys.size();
  report.job_size_lower = universe > 0 ? 1 : 0;
  report.job_size_upper = static_cast<std::uint64_t>(L) * scenario.tasks;
  return report;
}

BoundsCheck verify_bounds(const SimReport& report) {
  BoundsCheck check;
  auto fail = [&](std::string message) {
    check.passed = false;
    check.violations.push_back(std::move(message));
  };
  const auto& s = report.scenario;
  const bool crash = std::any_of(report.clusters.begin(), report.clusters.end(),
                                 [](const ClusterReport& c) { return c.crashed; });
  const bool symmetric = !crash && (s.clusters == 1 || s.overlap_fraction == 1.0);
  const double L = static_cast<double>(report.clusters.size());

  std::uint64_t sum_total = 0;
  std::uint64_t sum_cached = 0;
  std::uint64_t sum_executed = 0;
  for (std::size_t i = 0; i < report.clusters.size(); ++i) {
    const auto& c = report.clusters[i];
    const std::string who = c.client_id.empty() ? "cluster " + std::to_string(i) : c.client_id;
    sum_total += c.total;
    sum_cached += c.cached;
    sum_executed += c.executed;
    if (c.executed > c.total) fail(who + ": E=" + std::to_string(c.executed) + " exceeds T_t=" + std::to_string(c.total));
    if (c.precached > c.total) fail(who + ": precached tasks exceed T_t");
    if (c.executed + c.precached > c.total) fail(who + ": E exceeds T_t - T_c");
    if (c.alpha > c.executed) fail(who + ": alpha exceeds E");
    if (!c.crashed && c.cached + c.executed != c.total) {
      fail(who + ": cached + executed = " + std::to_string(c.cached + c.executed) + " != T_t=" +
           std::to_string(c.total));
    }
    if (!c.crashed && c.resolved != c.total) fail(who + ": unresolved tasks left");
    if (symmetric && std::abs(static_cast<double>(c.executed) - c.predicted) > L - 1.0 + 1e-9) {
      fail(who + ": E=" + std::to_string(c.executed) + " farther than L-1 from predicted " + fixed(c.predicted, 3));
    }
  }

  std::map<std::string, std::vector<const ExecutionEntry*>> by_key;
  for (const auto& e : report.executions) by_key[e.pair_key].push_back(&e);
  for (const auto& [key, runs] : by_key) {
    if (!report.listed_by.empty() && !report.listed_by.count(key)) fail("executed unknown task '" + key + "'");
    if (runs.size() < 2) continue;
    const bool via_takeover = std::any_of(runs.begin(), runs.end(),
                                          [](const ExecutionEntry* e) { return e->origin == TaskOrigin::taken_over; });
    if (!crash || !via_takeover) fail("task '" + key + "' executed " + std::to_string(runs.size()) + " times");
  }

  if (report.total_distinct_executions + report.takeover_duplicates != sum_executed) {
    fail("execution log disagrees with reported E totals");
  }
  if (!crash) {
    if (sum_cached + sum_executed != sum_total) fail("cached + executed across clusters != total tasks");
    if (report.total_distinct_executions + report.precached_keys != report.distinct_tasks) {
      fail("distinct executions " + std::to_string(report.total_distinct_executions) + " + precached " +
           std::to_string(report.precached_keys) + " != distinct tasks " + std::to_string(report.distinct_tasks));
    }
  }

  for (const auto& [key, n] : report.records_per_key) {
    if (n > 1) fail("task '" + key + "' has " + std::to_string(n) + " recorded results");
  }
  for (const auto& [key, clusters] : report.listed_by) {
    const bool needed = std::any_of(clusters.begin(), clusters.end(), [&](unsigned c) {
      return c < report.clusters.size() && !report.clusters[c].crashed;
    });
    if (needed && !report.records_per_key.count(key)) fail("task '" + key + "' never completed");
  }
  for (const auto& key : report.wrong_results) fail("stored result for '" + key + "' is wrong");

  const std::uint64_t total_executions = report.total_distinct_executions + report.takeover_duplicates;
  if (report.distinct_tasks > 0 && report.distinct_tasks < report.job_size_lower) fail("task universe below the lower job size bound");
  if (total_executions > report.job_size_upper) {
    fail("executions " + std::to_string(total_executions) + " exceed job size " + std::to_string(report.job_size_upper));
  }
  return check;
}

nlohmann::json SimReport::to_json() const {
  nlohmann::json clusters_json = nlohmann::json::array();
  for (const auto& c : clusters) {
    clusters_json.push_back({{"client_id", c.client_id},
                             {"T_t", c.total},
                             {"T_c", c.cached},
                             {"precached", c.precached},
                             {"T_s", c.shared},
                             {"E", c.executed},
                             {"alpha", c.alpha},
                             {"P_max", c.peak_pending},
                             {"predicted", c.predicted},
                             {"abandoned_claims", c.abandoned_claims},
                             {"crashed", c.crashed}});
  }
  nlohmann::json j = {{"L", scenario.clusters},
                      {"tasks", scenario.tasks},
                      {"overlap_fraction", scenario.overlap_fraction},
                      {"precache_fraction", scenario.precache_fraction},
                      {"seed", scenario.seed},
                      {"clusters", clusters_json},
                      {"distinct_tasks", distinct_tasks},
                      {"precached_keys", precached_keys},
                      {"total_distinct_executions", total_distinct_executions},
                      {"takeover_duplicates", takeover_duplicates},
                      {"job_size_lower", job_size_lower},
                      {"job_size_upper", job_size_upper}};
  j["crash_cluster"] = scenario.crash_cluster ? nlohmann::json(*scenario.crash_cluster) : nlohmann::json(nullptr);
  return j;
}

std::string SimReport::tsv_header() {
  return "L\ttasks\toverlap\tprecache\tcrash_cluster\tcluster\tT_t\tT_c\tT_s\tE\talpha\tpredicted\tcrashed";
}

std::string SimReport::tsv_rows() const {
  std::string out;
  for (std::size_t i = 0; i < clusters.size(); ++i) {
    const auto& c = clusters[i];
    out += std::to_string(scenario.clusters) + '\t' + std::to_string(scenario.tasks) + '\t' +
           fixed(scenario.overlap_fraction, 3) + '\t' + fixed(scenario.precache_fraction, 3) + '\t' +
           (scenario.crash_cluster ? std::to_string(*scenario.crash_cluster) : "-") + '\t' + std::to_string(i) +
           '\t' + std::to_string(c.total) + '\t' + std::to_string(c.cached) + '\t' + std::to_string(c.shared) + '\t' +
           std::to_string(c.executed) + '\t' + std::to_string(c.alpha) + '\t' + fixed(c.predicted, 3) + '\t' +
           (c.crashed ? "1" : "0") + '\n';
  }
  return out;
}

}  // namespace coterm
