#include "coterm/wire.hpp"

#include "coterm/error.hpp"

namespace coterm {

const char* to_string(SchedulerErrc code) noexcept {
  switch (code) {
    case SchedulerErrc::unknown_resource: return "UnknownResource";
    case SchedulerErrc::unknown_task: return "UnknownTask";
    case SchedulerErrc::not_owner: return "NotOwner";
    case SchedulerErrc::already_complete: return "AlreadyComplete";
    case SchedulerErrc::quota_exceeded: return "QuotaExceeded";
    case SchedulerErrc::malformed_resource_id: return "MalformedResourceId";
    case SchedulerErrc::bad_request: return "BadRequest";
  }
  return "Unknown";
}

const char* to_string(ClaimResponse::Kind kind) noexcept {
  switch (kind) {
    case ClaimResponse::Kind::cached: return "cached";
    case ClaimResponse::Kind::claimed: return "claimed";
    case ClaimResponse::Kind::pending: return "pending";
  }
  return "pending";
}

namespace wire {

using nlohmann::json;

json encode(const CooccurrenceResult& r) {
  json j = {
      {"term_a", r.pair.a}, {"term_b", r.pair.b}, {"n_a", r.n_a},       {"n_b", r.n_b},
      {"n_ab", r.n_ab},     {"tf_a", r.tf_a},     {"tf_b", r.tf_b},     {"n_docs", r.n_docs},
      {"significance", r.significance},
  };
  if (r.co_keys) j["co_keys"] = *r.co_keys;
  return j;
}

CooccurrenceResult decode_result(const json& j) {
  CooccurrenceResult r;
  r.pair.a = j.at("term_a").get<std::string>();
  r.pair.b = j.at("term_b").get<std::string>();
  r.n_a = j.at("n_a").get<std::uint64_t>();
  r.n_b = j.at("n_b").get<std::uint64_t>();
  r.n_ab = j.at("n_ab").get<std::uint64_t>();
  r.tf_a = j.at("tf_a").get<std::uint64_t>();
  r.tf_b = j.at("tf_b").get<std::uint64_t>();
  r.n_docs = j.at("n_docs").get<std::uint64_t>();
  r.significance = j.at("significance").get<double>();
  if (j.contains("co_keys")) r.co_keys = j.at("co_keys").get<std::vector<std::string>>();
  return r;
}

json encode(const ResourceEntry& e) {
  return {{"resource_id", e.resource_id}, {"name", e.name},         {"n_docs", e.n_docs},
          {"granularity", e.granularity}, {"uploader", e.uploader}, {"registered_at", e.registered_at}};
}

ResourceEntry decode_resource(const json& j) {
  ResourceEntry e;
  e.resource_id = j.at("resource_id").get<std::string>();
  e.name = j.value("name", "");
  e.n_docs = j.value("n_docs", std::uint64_t{0});
  e.granularity = j.value("granularity", "abstract");
  e.uploader = j.value("uploader", "");
  e.registered_at = j.value("registered_at", std::int64_t{0});
  return e;
}

json encode(const ClaimResponse& c) {
  json j = {{"kind", to_string(c.kind)}};
  if (c.result) j["result"] = encode(*c.result);
  if (c.task_id) j["task_id"] = *c.task_id;
  if (c.took_over) j["took_over"] = true;
  return j;
}

ClaimResponse decode_claim(const json& j) {
  ClaimResponse c;
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "cached") {
    c.kind = ClaimResponse::Kind::cached;
    c.result = decode_result(j.at("result"));
  } else if (kind == "claimed") {
    c.kind = ClaimResponse::Kind::claimed;
    c.task_id = j.at("task_id").get<TaskId>();
    c.took_over = j.value("took_over", false);
  } else if (kind == "pending") {
    c.kind = ClaimResponse::Kind::pending;
  } else {
    throw SchedulerError(SchedulerErrc::bad_request, "unknown claim kind '" + kind + "'");
  }
  return c;
}

json encode(const TaskStatusView& s) {
  json j = {{"status", static_cast<int>(s.status)}, {"stale", s.stale}, {"task_id", s.task_id}};
  if (s.result) j["result"] = encode(*s.result);
  return j;
}

TaskStatusView decode_status(const json& j) {
  TaskStatusView s;
  s.status = j.at("status").get<int>() == 1 ? TaskState::complete : TaskState::incomplete;
  s.stale = j.value("stale", false);
  s.task_id = j.value("task_id", TaskId{0});
  if (j.contains("result")) s.result = decode_result(j.at("result"));
  return s;
}

const char* to_string(SubmitAck ack) noexcept {
  return ack == SubmitAck::recorded ? "recorded" : "already_complete";
}

const char* to_string(TakeoverResult result) noexcept {
  return result == TakeoverResult::grant ? "grant" : "refused";
}

}  // namespace wire
}  // namespace coterm
