#pragma once

#include <cstdint>
#include <queue>
#include <variant>
#include <vector>

#include "sentinel/protocol.hpp"

namespace sentinel::sim {

enum class EventKind : std::uint8_t {
  Wake,
  ReplyTimeout,
  ReplySend,  // deferred reply after the random answer delay
  MessageDelivery,
  MetricsSample,
  FailureInjection,
  EndOfRun,
};

using TransmissionId = std::uint64_t;

struct SimEvent {
  double time = 0.0;
  std::uint64_t sequence = 0;
  EventKind kind = EventKind::EndOfRun;
  protocol::NodeId node = 0;
  /// Node state epoch when the event was scheduled; node-bound events whose
  /// epoch no longer matches are stale and skipped.
  std::uint64_t epoch = 0;
  std::variant<std::monostate, TransmissionId, protocol::ProbeRequest> payload;
};

/// Min-queue on (time, sequence). Sequence numbers are assigned on push, so
/// simultaneous events pop in insertion order.
class EventQueue {
 public:
  /// Rejects events scheduled before the current clock.
  void push(SimEvent event);
  SimEvent pop();

  [[nodiscard]] bool empty() const { return heap_.empty(); }
  [[nodiscard]] std::size_t size() const { return heap_.size(); }
  [[nodiscard]] const SimEvent& top() const { return heap_.top(); }
  [[nodiscard]] double clock() const { return clock_; }

 private:
  struct Later {
    bool operator()(const SimEvent& a, const SimEvent& b) const {
      if (a.time != b.time) return a.time > b.time;
      return a.sequence > b.sequence;
    }
  };

  std::priority_queue<SimEvent, std::vector<SimEvent>, Later> heap_;
  std::uint64_t next_sequence_ = 0;
  double clock_ = 0.0;
};

}  // namespace sentinel::sim
