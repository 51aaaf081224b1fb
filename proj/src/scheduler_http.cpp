#include "coterm/scheduler_http.hpp"

#include "coterm/error.hpp"
#include "coterm/wire.hpp"

#include <httplib.h>

namespace coterm {

namespace {

using nlohmann::json;

int http_status(SchedulerErrc code) {
  switch (code) {
    case SchedulerErrc::unknown_resource:
    case SchedulerErrc::unknown_task: return 404;
    case SchedulerErrc::not_owner: return 403;
    case SchedulerErrc::already_complete: return 409;
    case SchedulerErrc::quota_exceeded: return 429;
    case SchedulerErrc::malformed_resource_id:
    case SchedulerErrc::bad_request: return 400;
  }
  return 500;
}

std::optional<SchedulerErrc> parse_errc(std::string_view name) {
  for (auto code : {SchedulerErrc::unknown_resource, SchedulerErrc::unknown_task, SchedulerErrc::not_owner,
                    SchedulerErrc::already_complete, SchedulerErrc::quota_exceeded,
                    SchedulerErrc::malformed_resource_id, SchedulerErrc::bad_request}) {
    if (name == to_string(code)) return code;
  }
  return std::nullopt;
}

void reply(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void reply_error(httplib::Response& res, SchedulerErrc code, const std::string& message) {
  reply(res, http_status(code), json{{"error", to_string(code)}, {"message", message}});
}

// Runs a handler body, translating failures into protocol errors.
template <typename Fn>
void guarded(httplib::Response& res, Fn&& fn) {
  try {
    fn();
  } catch (const SchedulerError& e) {
    reply_error(res, e.code(), e.what());
  } catch (const json::exception& e) {
    reply_error(res, SchedulerErrc::bad_request, e.what());
  } catch (const std::exception& e) {
    reply(res, 500, json{{"error", "Internal"}, {"message", e.what()}});
  }
}

TaskId task_id_of(const httplib::Request& req) {
  try {
    return static_cast<TaskId>(std::stoull(req.matches[1].str()));
  } catch (const std::exception&) {
    throw SchedulerError(SchedulerErrc::bad_request, "bad task id");
  }
}

CaseMode case_mode_of(const std::string& text) {
  auto mode = parse_case_mode(text);
  if (!mode) throw SchedulerError(SchedulerErrc::bad_request, "case_mode must be sensitive or insensitive");
  return *mode;
}

}  // namespace

SchedulerServer::SchedulerServer(SchedulerApi& scheduler)
    : scheduler_(scheduler), server_(std::make_unique<httplib::Server>()) {
  install_routes();
}

SchedulerServer::~SchedulerServer() {
  stop();
}

void SchedulerServer::install_routes() {
  auto& s = *server_;

  s.Post("/v1/resources", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const auto body = json::parse(req.body);
      ResourceMetadata meta;
      meta.resource_id = body.at("resource_id").get<std::string>();
      meta.name = body.value("name", "");
      meta.n_docs = body.value("n_docs", std::uint64_t{0});
      meta.granularity = body.value("granularity", "abstract");
      meta.uploader = body.value("uploader", "");
      reply(res, 200, wire::encode(scheduler_.register_resource(meta)));
    });
  });

  s.Get("/v1/resources", [this](const httplib::Request&, httplib::Response& res) {
    guarded(res, [&] {
      json list = json::array();
      for (const auto& entry : scheduler_.list_resources()) list.push_back(wire::encode(entry));
      reply(res, 200, list);
    });
  });

  s.Post("/v1/tasks/claim", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const auto body = json::parse(req.body);
      ClaimRequest claim;
      claim.client_id = body.at("client_id").get<std::string>();
      claim.key.resource_id = body.at("resource_id").get<std::string>();
      claim.key.pair_key = body.at("pair_key").get<std::string>();
      claim.key.case_mode = case_mode_of(body.at("case_mode").get<std::string>());
      claim.data_transfer = body.value("data_transfer", true);
      reply(res, 200, wire::encode(scheduler_.claim_task(claim)));
    });
  });

  s.Get("/v1/tasks/status", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      for (const char* param : {"resource_id", "pair_key", "case_mode"}) {
        if (!req.has_param(param)) {
          throw SchedulerError(SchedulerErrc::bad_request, std::string("missing parameter ") + param);
        }
      }
      TaskKey key{req.get_param_value("resource_id"), req.get_param_value("pair_key"),
                  case_mode_of(req.get_param_value("case_mode"))};
      reply(res, 200, wire::encode(scheduler_.task_status(key)));
    });
  });

  s.Post(R"(/v1/tasks/(\d+)/heartbeat)", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const auto body = json::parse(req.body);
      scheduler_.heartbeat(task_id_of(req), body.at("client_id").get<std::string>());
      reply(res, 200, json{{"ok", true}});
    });
  });

  s.Post(R"(/v1/tasks/(\d+)/takeover)", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const auto body = json::parse(req.body);
      const auto outcome = scheduler_.takeover(task_id_of(req), body.at("client_id").get<std::string>());
      reply(res, 200, json{{"result", wire::to_string(outcome)}});
    });
  });

  s.Post(R"(/v1/tasks/(\d+)/result)", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const auto body = json::parse(req.body);
      const auto ack = scheduler_.submit_result(task_id_of(req), body.at("client_id").get<std::string>(),
                                                wire::decode_result(body.at("result")));
      reply(res, 200, json{{"ack", wire::to_string(ack)}});
    });
  });
}

bool SchedulerServer::bind(const std::string& host, int port) {
  // SO_REUSEPORT would let a second server share the port.
  server_->set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
  });
  if (port == 0) {
    port_ = server_->bind_to_any_port(host);
    return port_ > 0;
  }
  if (!server_->bind_to_port(host, port)) return false;
  port_ = port;
  return true;
}

void SchedulerServer::listen() {
  server_->listen_after_bind();
}

void SchedulerServer::start() {
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
}

void SchedulerServer::stop() {
  if (server_) server_->stop();
  if (thread_.joinable()) thread_.join();
}

HttpSchedulerClient::HttpSchedulerClient(std::string base_url, std::chrono::milliseconds timeout)
    : base_url_(std::move(base_url)), timeout_(timeout) {
  while (!base_url_.empty() && base_url_.back() == '/') base_url_.pop_back();
}

namespace {

struct Call {
  const std::string& base_url;
  std::chrono::milliseconds timeout;

  httplib::Client client() const {
    httplib::Client c(base_url);
    c.set_connection_timeout(timeout);
    c.set_read_timeout(timeout);
    c.set_write_timeout(timeout);
    return c;
  }

  json finish(const httplib::Result& result, const std::string& what) const {
    if (!result) {
      throw SchedulerUnreachable("scheduler at " + base_url + " unreachable (" + what + ": " +
                                 httplib::to_string(result.error()) + ")");
    }
    json body = json::parse(result->body, nullptr, false);
    if (result->status == 200) {
      if (body.is_discarded()) throw SchedulerError(SchedulerErrc::bad_request, "malformed response to " + what);
      return body;
    }
    if (!body.is_discarded() && body.is_object() && body.contains("error")) {
      if (auto code = parse_errc(body.value("error", ""))) throw SchedulerError(*code, body.value("message", ""));
    }
    throw Error("scheduler returned HTTP " + std::to_string(result->status) + " for " + what);
  }

  json post(const std::string& path, const json& body) const {
    auto c = client();
    return finish(c.Post(path, body.dump(), "application/json"), "POST " + path);
  }

  json get(const std::string& path, const httplib::Params& params = {}) const {
    auto c = client();
    return finish(c.Get(path, params, httplib::Headers{}), "GET " + path);
  }
};

}  // namespace

ResourceEntry HttpSchedulerClient::register_resource(const ResourceMetadata& m) {
  return wire::decode_resource(Call{base_url_, timeout_}.post(
      "/v1/resources", json{{"resource_id", m.resource_id},
                            {"name", m.name},
                            {"n_docs", m.n_docs},
                            {"granularity", m.granularity},
                            {"uploader", m.uploader}}));
}

std::vector<ResourceEntry> HttpSchedulerClient::list_resources() {
  std::vector<ResourceEntry> out;
  for (const auto& j : Call{base_url_, timeout_}.get("/v1/resources")) out.push_back(wire::decode_resource(j));
  return out;
}

ClaimResponse HttpSchedulerClient::claim_task(const ClaimRequest& r) {
  return wire::decode_claim(Call{base_url_, timeout_}.post(
      "/v1/tasks/claim", json{{"client_id", r.client_id},
                              {"resource_id", r.key.resource_id},
                              {"pair_key", r.key.pair_key},
                              {"case_mode", to_string(r.key.case_mode)},
                              {"data_transfer", r.data_transfer}}));
}

SubmitAck HttpSchedulerClient::submit_result(TaskId task_id, const std::string& client_id,
                                             const CooccurrenceResult& result) {
  const auto body = Call{base_url_, timeout_}.post("/v1/tasks/" + std::to_string(task_id) + "/result",
                                                   json{{"client_id", client_id}, {"result", wire::encode(result)}});
  return body.at("ack").get<std::string>() == "recorded" ? SubmitAck::recorded : SubmitAck::already_complete;
}

TaskStatusView HttpSchedulerClient::task_status(const TaskKey& key) {
  return wire::decode_status(Call{base_url_, timeout_}.get(
      "/v1/tasks/status", httplib::Params{{"resource_id", key.resource_id},
                                          {"pair_key", key.pair_key},
                                          {"case_mode", to_string(key.case_mode)}}));
}

void HttpSchedulerClient::heartbeat(TaskId task_id, const std::string& client_id) {
  Call{base_url_, timeout_}.post("/v1/tasks/" + std::to_string(task_id) + "/heartbeat",
                                 json{{"client_id", client_id}});
}

TakeoverResult HttpSchedulerClient::takeover(TaskId task_id, const std::string& client_id) {
  const auto body = Call{base_url_, timeout_}.post("/v1/tasks/" + std::to_string(task_id) + "/takeover",
                                                   json{{"client_id", client_id}});
  return body.at("result").get<std::string>() == "grant" ? TakeoverResult::grant : TakeoverResult::refused;
}

}  // namespace coterm
