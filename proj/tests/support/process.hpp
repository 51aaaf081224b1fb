#pragma once

#include <chrono>
#include <map>
#include <string>
#include <sys/types.h>
#include <vector>

namespace testsupport {

struct RunResult {
  int exit_code = -1;  // 128 + signal when killed
  std::string out;
  std::string err;
};

/// Runs a program to completion, capturing both output streams.
RunResult run_program(const std::vector<std::string>& argv, const std::map<std::string, std::string>& env = {});

/// A child process whose stdout is read line by line; killed on destruction.
class ChildProcess {
 public:
  explicit ChildProcess(const std::vector<std::string>& argv);
  ~ChildProcess();
  ChildProcess(const ChildProcess&) = delete;
  ChildProcess& operator=(const ChildProcess&) = delete;

  /// Next stdout line, or empty on timeout or end of stream.
  std::string read_line(std::chrono::milliseconds timeout);
  void signal(int sig);
  /// Waits for exit; returns the code as in RunResult.
  int wait();
  pid_t pid() const { return pid_; }

 private:
  pid_t pid_ = -1;
  int out_fd_ = -1;
  std::string buffer_;
  bool reaped_ = false;
  int status_ = -1;
};

}  // namespace testsupport
