#pragma once

#include "coterm/scheduler.hpp"

#include <string>
#include <vector>

namespace testsupport {

struct ProtocolAudit {
  std::vector<std::string> violations;
  std::size_t events = 0;
  std::size_t completed_keys = 0;
  std::size_t cached_claims = 0;
  std::size_t grants = 0;
};

/// Replays the scheduler's decision log against a reference state machine:
/// at most one fresh owner per key, records written once and never changed,
/// cached answers only after completion and equal to the first record.
ProtocolAudit audit_events(const std::vector<coterm::SchedulerEvent>& events, std::int64_t stale_timeout_ms);

}  // namespace testsupport
