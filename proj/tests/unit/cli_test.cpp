#include "process.hpp"
#include "support.hpp"

#include <gtest/gtest.h>
#include <json.hpp>

#include <csignal>
#include <fstream>

using testsupport::ChildProcess;
using testsupport::run_program;
using testsupport::TempDir;

namespace {

const std::string kCli = COTERM_CLI_PATH;
const std::string kThreeDocs = "d1\taspirin reduces pain\nd2\taspirin linked to cancer\nd3\tcancer therapy\n";

testsupport::RunResult cli(std::vector<std::string> args, const std::map<std::string, std::string>& env = {}) {
  args.insert(args.begin(), kCli);
  return run_program(args, env);
}

int port_of(const std::string& banner) {
  const auto colon = banner.rfind(':');
  return colon == std::string::npos ? -1 : std::stoi(banner.substr(colon + 1));
}

struct Job {
  TempDir dir;
  std::filesystem::path config = dir / "job.conf";
  std::filesystem::path out = dir / "out.tsv";

  explicit Job(const std::string& extra = "", const std::string& pairs = "aspirin\tcancer\npain\taspirin\n") {
    testsupport::write_file(dir / "r.tsv", kThreeDocs);
    testsupport::write_file(dir / "p.tsv", pairs);
    testsupport::write_file(config, "resource_path = " + (dir / "r.tsv").string() + "\npair_list_path = " +
                                        (dir / "p.tsv").string() + "\noutput_path = " + out.string() + "\n" +
                                        extra);
  }
};

}  // namespace

TEST(Cli, StandaloneRun) {
  Job job;
  const auto r = cli({"run", "--config", job.config.string()});
  ASSERT_EQ(r.exit_code, 0) << r.err;
  const auto report = nlohmann::json::parse(r.out);
  EXPECT_EQ(report["T_t"], 2);
  EXPECT_EQ(report["E"], 2);
  const auto text = testsupport::read_file(job.out);
  EXPECT_EQ(text.rfind("#coterm-results\t", 0), 0u);
  EXPECT_NE(text.find("\npain\taspirin\t1\t2\t1\t"), std::string::npos);
}

TEST(Cli, MissingPairFileExitsTwo) {
  Job job;
  std::filesystem::remove(job.dir / "p.tsv");
  const auto r = cli({"run", "--config", job.config.string()});
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_NE(r.err.find("p.tsv"), std::string::npos);
}

TEST(Cli, MalformedPairFileExitsTwo) {
  Job job("", "no tab here\n");
  const auto r = cli({"run", "--config", job.config.string()});
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_NE(r.err.find("FormatError"), std::string::npos);
}

TEST(Cli, SchedulerDownAtStartExitsTwo) {
  int dead_port = 0;
  {
    ChildProcess serve({kCli, "serve", "--port", "0", "--store", ":memory:"});
    dead_port = port_of(serve.read_line(std::chrono::seconds(10)));
    serve.signal(SIGTERM);
    EXPECT_EQ(serve.wait(), 0);
  }
  ASSERT_GT(dead_port, 0);
  Job job("mode = cooperation\nscheduler_url = http://127.0.0.1:" + std::to_string(dead_port) + "\n");
  const auto r = cli({"run", "--config", job.config.string()});
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_NE(r.err.find("SchedulerUnreachable"), std::string::npos);
}

TEST(Cli, ServeSurvivesRestartAndRefusesSecondBind) {
  TempDir store_dir;
  const auto store = (store_dir / "sched.db").string();
  Job job("mode = cooperation\nscheduler_url = http://unused:1\n");
  int port = 0;
  {
    ChildProcess serve({kCli, "serve", "--port", "0", "--store", store});
    port = port_of(serve.read_line(std::chrono::seconds(10)));
    ASSERT_GT(port, 0);

    const auto second = cli({"serve", "--port", std::to_string(port), "--store", ":memory:"});
    EXPECT_EQ(second.exit_code, 2);
    EXPECT_NE(second.err.find("AddressInUse"), std::string::npos);

    const auto url = "http://127.0.0.1:" + std::to_string(port);
    const auto r = cli({"run", "--config", job.config.string()}, {{"COTERM_SCHEDULER_URL", url}});
    ASSERT_EQ(r.exit_code, 0) << r.err;
    EXPECT_EQ(nlohmann::json::parse(r.out)["E"], 2);
    serve.signal(SIGTERM);
    EXPECT_EQ(serve.wait(), 0);
  }
  const auto first_results = testsupport::read_file(job.out);
  ChildProcess again({kCli, "serve", "--port", "0", "--store", store});
  const auto url = "http://127.0.0.1:" + std::to_string(port_of(again.read_line(std::chrono::seconds(10))));
  const auto r = cli({"run", "--config", job.config.string()}, {{"COTERM_SCHEDULER_URL", url}});
  ASSERT_EQ(r.exit_code, 0) << r.err;
  const auto report = nlohmann::json::parse(r.out);
  EXPECT_EQ(report["E"], 0);
  EXPECT_EQ(report["T_c"], 2);
  EXPECT_EQ(testsupport::read_file(job.out), first_results);
  again.signal(SIGINT);
  EXPECT_EQ(again.wait(), 0);
}

TEST(Cli, GenCorpusIsDeterministic) {
  TempDir dir;
  const auto a = cli({"gen-corpus", "--n-docs", "10", "--vocab-size", "50", "--seed", "7"});
  const auto b = cli({"gen-corpus", "--n-docs", "10", "--vocab-size", "50", "--seed", "7"});
  ASSERT_EQ(a.exit_code, 0);
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(std::count(a.out.begin(), a.out.end(), '\n'), 10);

  const auto one = cli({"gen-corpus", "--n-docs", "1", "--vocab-size", "1", "--seed", "0", "-o",
                        (dir / "c.tsv").string(), "--pairs", "0"});
  ASSERT_EQ(one.exit_code, 0);
  const auto text = testsupport::read_file(dir / "c.tsv");
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 1);

  const auto bad = cli({"gen-corpus", "--n-docs", "5", "--vocab-size", "0"});
  EXPECT_EQ(bad.exit_code, 2);
  EXPECT_NE(bad.err.find("ScenarioInvalid"), std::string::npos);
}

TEST(Cli, IndexWritesCache) {
  Job job;
  const auto cache = job.dir / "c.index";
  const auto r = cli({"index", "--resource", (job.dir / "r.tsv").string(), "--pairs", (job.dir / "p.tsv").string(),
                      "-o", cache.string()});
  ASSERT_EQ(r.exit_code, 0) << r.err;
  EXPECT_EQ(nlohmann::json::parse(r.out)["terms"], 3);
  EXPECT_EQ(testsupport::read_file(cache).rfind("#coterm-index\t", 0), 0u);
}

TEST(Cli, SimulateAndUsageErrors) {
  TempDir dir;
  testsupport::write_file(dir / "s.conf", "clusters = 2\ntasks = 6\ntask_duration = 2ms\n");
  const auto sim = cli({"simulate", "--config", (dir / "s.conf").string(), "--tsv"});
  EXPECT_EQ(sim.exit_code, 0) << sim.err;
  EXPECT_EQ(std::count(sim.out.begin(), sim.out.end(), '\n'), 3);

  EXPECT_EQ(cli({"frobnicate"}).exit_code, 2);
  EXPECT_EQ(cli({}).exit_code, 2);
  EXPECT_EQ(cli({"--version"}).out, "0.1.0\n");
  EXPECT_EQ(cli({"run", "--config", (dir / "missing.conf").string()}).exit_code, 2);
}
