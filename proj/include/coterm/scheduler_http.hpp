#pragma once

#include "coterm/scheduler.hpp"

#include <chrono>
#include <memory>
#include <string>
#include <thread>

namespace httplib {
class Server;
}

namespace coterm {

/// Serves the scheduler protocol as HTTP/1.1 + JSON:
///
///   POST /v1/resources                      register a resource
///   GET  /v1/resources                      list resources
///   POST /v1/tasks/claim                    claim a task
///   GET  /v1/tasks/status?resource_id=&pair_key=&case_mode=
///   POST /v1/tasks/{id}/heartbeat
///   POST /v1/tasks/{id}/takeover
///   POST /v1/tasks/{id}/result
///
/// Errors map to 400 (bad request), 403 (NotOwner), 404 (unknown resource or
/// task), 409 (AlreadyComplete), 429 (QuotaExceeded) with an
/// `{error, message}` body.
class SchedulerServer {
 public:
  explicit SchedulerServer(SchedulerApi& scheduler);
  ~SchedulerServer();

  SchedulerServer(const SchedulerServer&) = delete;
  SchedulerServer& operator=(const SchedulerServer&) = delete;

  /// Binds the listening socket. Port 0 picks a free port. Returns false if
  /// the address is in use.
  bool bind(const std::string& host, int port);
  int port() const noexcept { return port_; }

  /// Serves until stop(). Requires a successful bind().
  void listen();

  /// Serves on a background thread.
  void start();
  void stop();

 private:
  void install_routes();

  SchedulerApi& scheduler_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
  int port_ = 0;
};

/// SchedulerApi over HTTP. Connection failures raise SchedulerUnreachable;
/// protocol errors raise SchedulerError with the server's code. Safe to share
/// between threads.
class HttpSchedulerClient final : public SchedulerApi {
 public:
  explicit HttpSchedulerClient(std::string base_url,
                               std::chrono::milliseconds timeout = std::chrono::milliseconds(5000));

  ResourceEntry register_resource(const ResourceMetadata& metadata) override;
  std::vector<ResourceEntry> list_resources() override;
  ClaimResponse claim_task(const ClaimRequest& request) override;
  SubmitAck submit_result(TaskId task_id, const std::string& client_id, const CooccurrenceResult& result) override;
  TaskStatusView task_status(const TaskKey& key) override;
  void heartbeat(TaskId task_id, const std::string& client_id) override;
  TakeoverResult takeover(TaskId task_id, const std::string& client_id) override;

 private:
  std::string base_url_;
  std::chrono::milliseconds timeout_;
};

}  // namespace coterm
