// coterm command-line front end.

#include "coterm/bench.hpp"
#include "coterm/controller.hpp"
#include "coterm/error.hpp"
#include "coterm/index.hpp"
#include "coterm/scheduler_http.hpp"
#include "coterm/sim.hpp"
#include "coterm/synth.hpp"

#include <CLI11.hpp>

#include <csignal>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>

namespace {

using namespace coterm;

bool g_verbose = false;

void note(const std::string& message) {
  if (g_verbose) std::cerr << "coterm: " << message << '\n';
}

int fail(const std::string& kind, const std::string& message) {
  std::cerr << "coterm: " << kind << ": " << message << '\n';
  return 2;
}

void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path);
  out << bytes;
  if (!out) throw IoError("write error on " + path);
}

// Maps library failures onto messages and exit code 2.
template <typename Fn>
int guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const SchedulerUnreachable& e) {
    return fail("SchedulerUnreachable", e.what());
  } catch (const ConfigError& e) {
    return fail("ConfigError", e.what());
  } catch (const ScenarioInvalid& e) {
    return fail("ScenarioInvalid", e.what());
  } catch (const FormatError& e) {
    return fail("FormatError", e.what());
  } catch (const EncodingError& e) {
    return fail("EncodingError", e.what());
  } catch (const IoError& e) {
    return fail("IoError", e.what());
  } catch (const StoreCorrupt& e) {
    return fail("StoreCorrupt", e.what());
  } catch (const BenchmarkMismatch& e) {
    return fail("BenchmarkMismatch", e.what());
  } catch (const SchedulerError& e) {
    return fail(to_string(e.code()), e.what());
  } catch (const std::exception& e) {
    return fail("error", e.what());
  }
}

int cmd_index(const std::string& config_path, std::string resource, std::string pair_list, std::string granularity,
              std::string case_mode, std::string out, unsigned workers) {
  return guarded([&] {
    if (!config_path.empty()) {
      const auto config = Config::load(config_path);
      if (resource.empty()) resource = config.resource_path.string();
      if (pair_list.empty()) pair_list = config.pair_list_path.string();
      if (granularity.empty()) granularity = to_string(config.granularity);
      if (case_mode.empty()) case_mode = to_string(config.case_mode);
    }
    if (resource.empty()) throw ConfigError("a resource file is required");
    if (pair_list.empty()) throw ConfigError("a pair list is required");
    if (out.empty()) throw ConfigError("an output path is required");
    const auto g = parse_granularity(granularity.empty() ? "abstract" : granularity);
    if (!g) throw ConfigError("granularity must be abstract or sentence");
    const auto mode = parse_case_mode(case_mode.empty() ? "insensitive" : case_mode);
    if (!mode) throw ConfigError("case_mode must be sensitive or insensitive");

    Corpus corpus = load_resource(resource, Granularity::abstract);
    if (*g == Granularity::sentence) corpus = sentence_split(corpus);
    note("loaded " + std::to_string(corpus.n_docs()) + " documents");
    const auto rows = load_pair_list(pair_list);
    std::vector<PairedTerm> pairs;
    for (const auto& row : rows) {
      try {
        pairs.push_back(PairedTerm::make(row.a, row.b, *mode));
      } catch (const EmptyTerm& e) {
        note("line " + std::to_string(row.line_no) + ": " + e.what());
      }
    }
    const auto terms = unique_terms(pairs);
    InvertedIndex index(corpus, *mode);
    index.materialize(terms, workers);
    index.save_cache(out);
    const nlohmann::json summary = {{"resource_id", corpus.resource_id().hex()},
                                    {"case_mode", to_string(*mode)},
                                    {"granularity", to_string(corpus.granularity())},
                                    {"n_docs", corpus.n_docs()},
                                    {"terms", index.materialized_count()},
                                    {"output", out}};
    std::cout << summary.dump() << '\n';
    return 0;
  });
}

int cmd_run(const std::string& config_path) {
  return guarded([&] {
    if (config_path.empty()) throw ConfigError("run requires --config");
    auto config = Config::load(config_path);
    if (const char* url = std::getenv("COTERM_SCHEDULER_URL"); url != nullptr && *url != '\0') {
      config.scheduler_url = url;
    }
    note(std::string("running in ") + to_string(config.mode) + " mode");
    const auto report = execute_job(config);
    std::cout << report.to_json().dump() << '\n';
    if (report.degraded) {
      std::cerr << "coterm: scheduler became unreachable; remaining tasks ran locally\n";
      return 1;
    }
    return 0;
  });
}

int cmd_serve(const std::string& config_path, std::string host, int port, std::string store) {
  return guarded([&] {
    SchedulerOptions options;
    options.store_path = "coterm-scheduler.db";
    std::string listen_host = "127.0.0.1";
    int listen_port = 0;
    if (!config_path.empty()) {
      const auto file = KeyValueFile::load(config_path);
      file.require_known({"listen_host", "listen_port", "store_path", "stale_timeout", "fair_share_limit",
                          "include_keys"});
      listen_host = file.get_or("listen_host", listen_host);
      if (auto p = file.get_int("listen_port")) listen_port = static_cast<int>(*p);
      options.store_path = file.get_or("store_path", options.store_path);
      options.stale_timeout = file.get_duration("stale_timeout").value_or(options.stale_timeout);
      if (auto limit = file.get_int("fair_share_limit")) {
        if (*limit < 0) throw ConfigError("fair_share_limit must be non-negative");
        options.fair_share_limit = static_cast<std::uint64_t>(*limit);
      }
      options.include_keys = file.get_bool("include_keys").value_or(false);
    }
    if (!host.empty()) listen_host = host;
    if (port >= 0) listen_port = port;
    if (!store.empty()) options.store_path = store;
    if (listen_port < 0 || listen_port > 65535) throw ConfigError("listen_port out of range");

    // Signals are received by sigwait below, not by handlers.
    sigset_t signals;
    sigemptyset(&signals);
    sigaddset(&signals, SIGTERM);
    sigaddset(&signals, SIGINT);
    pthread_sigmask(SIG_BLOCK, &signals, nullptr);

    Scheduler scheduler(options);
    SchedulerServer server(scheduler);
    if (!server.bind(listen_host, listen_port)) {
      return fail("AddressInUse", "cannot listen on " + listen_host + ":" + std::to_string(listen_port));
    }
    server.start();
    std::cout << "listening on http://" << listen_host << ':' << server.port() << std::endl;
    note("store " + options.store_path);

    int received = 0;
    sigwait(&signals, &received);
    note(std::string("received ") + (received == SIGTERM ? "SIGTERM" : "SIGINT") + ", shutting down");
    server.stop();
    return 0;
  });
}

int cmd_simulate(const std::string& config_path, bool tsv) {
  return guarded([&] {
    Scenario scenario;
    if (!config_path.empty()) scenario = Scenario::from(KeyValueFile::load(config_path));
    const auto report = run_scenario(scenario);
    const auto check = verify_bounds(report);
    if (tsv) {
      std::cout << SimReport::tsv_header() << '\n' << report.tsv_rows();
    } else {
      auto j = report.to_json();
      j["bounds_ok"] = check.passed;
      j["violations"] = check.violations;
      std::cout << j.dump(2) << '\n';
    }
    for (const auto& v : check.violations) std::cerr << "coterm: bound violated: " << v << '\n';
    return check.passed ? 0 : 1;
  });
}

int cmd_bench(const std::string& config_path) {
  return guarded([&] {
    BenchConfig config;
    if (!config_path.empty()) config = BenchConfig::load(config_path);
    const auto rows = run_benchmark(config);
    std::cout << format_benchmark_rows(rows);
    return 0;
  });
}

int cmd_gen_corpus(const SynthOptions& options, const std::string& out, std::size_t n_pairs,
                   const std::string& pairs_out) {
  return guarded([&] {
    const auto corpus = generate_corpus(options);
    if (out.empty() || out == "-") {
      std::cout << corpus;
    } else {
      write_file(out, corpus);
    }
    if (n_pairs > 0) {
      if (pairs_out.empty()) throw ConfigError("--pairs requires --pairs-out");
      write_file(pairs_out, format_pair_list(generate_pairs(options, n_pairs)));
    }
    return 0;
  });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"coterm: co-occurrence search with a crowdsourced job scheduler"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  std::string config_path;
  app.add_option("--config", config_path, "configuration file")->check(CLI::ExistingFile);
  app.add_flag("--verbose", g_verbose, "log progress to stderr");

  std::string resource, pair_list, granularity, case_mode, index_out;
  unsigned index_workers = 1;
  auto* index = app.add_subcommand("index", "build the posting cache for a pair list's terms");
  index->add_option("--resource", resource, "resource file");
  index->add_option("--pairs", pair_list, "pair list");
  index->add_option("--granularity", granularity, "abstract or sentence");
  index->add_option("--case-mode", case_mode, "sensitive or insensitive");
  index->add_option("--workers", index_workers, "worker threads")->check(CLI::PositiveNumber);
  index->add_option("-o,--out", index_out, "cache file to write")->required();

  auto* run = app.add_subcommand("run", "run a job described by --config");

  std::string serve_host, serve_store;
  int serve_port = -1;
  auto* serve = app.add_subcommand("serve", "serve the global job scheduler");
  serve->add_option("--host", serve_host, "listen address");
  serve->add_option("--port", serve_port, "listen port, 0 for any");
  serve->add_option("--store", serve_store, "SQLite store path");

  bool sim_tsv = false;
  auto* simulate = app.add_subcommand("simulate", "run a multi-cluster scenario");
  simulate->add_flag("--tsv", sim_tsv, "emit TSV rows instead of JSON");

  auto* bench = app.add_subcommand("bench", "time indexed and naive modes");

  SynthOptions synth;
  std::string synth_out, pairs_out;
  std::size_t synth_pairs = 0;
  auto* gen = app.add_subcommand("gen-corpus", "write a synthetic resource file");
  gen->add_option("--n-docs", synth.n_docs, "documents")->required();
  gen->add_option("--vocab-size", synth.vocab_size, "vocabulary size")->required();
  gen->add_option("--seed", synth.seed, "random seed");
  gen->add_option("-o,--out", synth_out, "output file, stdout when omitted");
  gen->add_option("--pairs", synth_pairs, "also write this many pairs");
  gen->add_option("--pairs-out", pairs_out, "pair list output file");

  for (auto* sub : {index, run, serve, simulate, bench, gen}) {
    sub->add_option("--config", config_path, "configuration file")->check(CLI::ExistingFile);
    sub->add_flag("--verbose", g_verbose, "log progress to stderr");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (index->parsed()) {
    return cmd_index(config_path, resource, pair_list, granularity, case_mode, index_out, index_workers);
  }
  if (run->parsed()) return cmd_run(config_path);
  if (serve->parsed()) return cmd_serve(config_path, serve_host, serve_port, serve_store);
  if (simulate->parsed()) return cmd_simulate(config_path, sim_tsv);
  if (bench->parsed()) return cmd_bench(config_path);
  if (gen->parsed()) return cmd_gen_corpus(synth, synth_out, synth_pairs, pairs_out);
  return 2;
}
