#pragma once

// JSON encodings shared by the scheduler store, the HTTP protocol and the
// command-line reports.

#include "coterm/cooccur.hpp"
#include "coterm/scheduler.hpp"

#include <json.hpp>

namespace coterm::wire {

nlohmann::json encode(const CooccurrenceResult& result);
CooccurrenceResult decode_result(const nlohmann::json& j);

nlohmann::json encode(const ResourceEntry& entry);
ResourceEntry decode_resource(const nlohmann::json& j);

nlohmann::json encode(const ClaimResponse& response);
ClaimResponse decode_claim(const nlohmann::json& j);

nlohmann::json encode(const TaskStatusView& status);
TaskStatusView decode_status(const nlohmann::json& j);

const char* to_string(SubmitAck ack) noexcept;
const char* to_string(TakeoverResult result) noexcept;

}  // namespace coterm::wire
