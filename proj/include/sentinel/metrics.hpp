#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <vector>

#include "sentinel/protocol.hpp"

namespace sentinel {

/// One row of the metrics time series. Counters are cumulative since t = 0.
struct MetricsRecord {
  double time = 0.0;
  std::uint32_t active_count = 0;
  std::uint32_t sleeping_count = 0;
  std::uint32_t probing_count = 0;
  std::uint32_t dead_count = 0;
  double total_energy_consumed = 0.0;
  double coverage_fraction = 0.0;
  std::uint64_t probes_sent = 0;
  std::uint64_t probes_received = 0;
  std::uint64_t replies_sent = 0;
  std::uint64_t replies_received = 0;
  std::uint64_t collisions = 0;
  std::uint64_t withdrawals = 0;

  friend bool operator==(const MetricsRecord&, const MetricsRecord&) = default;
};

/// Energy decomposition kept alongside the running balance of each node.
struct NodeLedger {
  double initial_energy = 0.0;
  std::array<double, protocol::kNodeStateCount> time_in_state{};
  std::uint64_t tx_count = 0;
  std::uint64_t rx_count = 0;
  /// Charge left in the battery when a message cost could not be paid.
  double written_off = 0.0;
};

inline constexpr double kStillActive = std::numeric_limits<double>::infinity();

/// A closed stretch of time during which one node was Active.
struct ActivityInterval {
  protocol::NodeId node = 0;
  protocol::Vec3 position;
  double start = 0.0;
  double end = kStillActive;  // kStillActive if the run ended first
};

struct AppliedFailure {
  protocol::NodeId node = 0;
  protocol::Vec3 position;
  double time = 0.0;
  bool was_alive = false;
};

using TransitionMatrix =
    std::array<std::array<std::uint64_t, protocol::kNodeStateCount>, protocol::kNodeStateCount>;

/// Everything a finished run hands to post-processing.
struct RunLog {
  std::uint32_t n_nodes = 0;
  double duration = 0.0;
  std::vector<MetricsRecord> records;
  std::vector<ActivityInterval> activity;
  std::vector<NodeLedger> ledgers;
  std::vector<double> final_energy;
  std::vector<protocol::Vec3> positions;
  std::vector<bool> ever_active;
  /// Node became Active while an Active node it would have accepted (d <= delta)
  /// was already standing.
  std::vector<bool> false_activation;
  std::vector<AppliedFailure> failures;
  TransitionMatrix transitions{};
  std::uint64_t events_processed = 0;
};

}  // namespace sentinel
