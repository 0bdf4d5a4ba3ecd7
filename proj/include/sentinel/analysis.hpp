#pragma once

// Post-processing of finished runs: area coverage, hole recovery, control
// overhead, energy summaries and the paired protocol comparison.

#include <array>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sentinel/metrics.hpp"
#include "sentinel/protocol.hpp"

namespace sentinel::analysis {

/// Regular grid of sample points (cell centres) over the field.
struct CoverageGrid {
  double width = 50.0;
  double height = 50.0;
  double resolution = 1.0;
  std::uint32_t nx = 0;
  std::uint32_t ny = 0;

  static CoverageGrid over(double width, double height, double resolution = 1.0);

  [[nodiscard]] double center_x(std::uint32_t i) const { return (i + 0.5) * resolution; }
  [[nodiscard]] double center_y(std::uint32_t j) const { return (j + 0.5) * resolution; }
  [[nodiscard]] std::size_t cell_count() const { return std::size_t{nx} * ny; }
};

/// Fraction of cell centres within `sensing_radius` of at least one position.
double coverage_fraction(std::span<const protocol::Vec3> active, double sensing_radius,
                         const CoverageGrid& grid);

/// The area a failed sentinel leaves behind: its delta-disk.
struct FailureRegion {
  protocol::NodeId failed_node = 0;
  protocol::Vec3 center;
  double radius = 20.0;
};

inline constexpr double kUnrecovered = std::numeric_limits<double>::infinity();

/// Seconds from `failure_time` until some other node is Active inside the
/// region; 0 if one already was, kUnrecovered if none ever is during the run.
double recovery_latency(const RunLog& log, double failure_time, const FailureRegion& region);

struct OverheadRow {
  double time = 0.0;
  std::uint64_t probes_sent = 0;
  std::uint64_t probes_received = 0;
  std::uint64_t replies_sent = 0;
  std::uint64_t replies_received = 0;
  std::uint64_t collisions = 0;
};

struct OverheadReport {
  std::vector<OverheadRow> rows;
  /// Every reply counted as received by its prober was also counted as sent.
  bool replies_conserved = true;
};

OverheadReport overhead_report(const RunLog& log);

/// What two runs must share to be comparable.
struct RunIdentity {
  std::uint64_t seed = 0;
  std::uint32_t n_nodes = 0;
  double duration = 0.0;
  double field_width = 0.0;
  double field_height = 0.0;
  std::array<double, 6> energy_model{};

  friend bool operator==(const RunIdentity&, const RunIdentity&) = default;
};

struct SummaryReport {
  RunIdentity identity;
  double total_energy = 0.0;
  double avg_energy_per_node = 0.0;
  std::optional<double> energy_ratio_vs_baseline;
  double mean_coverage = 0.0;
  double false_activation_fraction = 0.0;
  double ever_active_fraction = 0.0;
  std::vector<double> recovery_latencies;
};

SummaryReport summarize(const RunLog& log, const RunIdentity& identity, double delta);

/// (baseline - sentinel) / baseline on average energy per node. Negative when
/// the sentinel run spent more. Throws if the runs are not comparable.
double compare_runs(const SummaryReport& sentinel, const SummaryReport& baseline);

/// Active pairs closer than `delta` that have coexisted for more than
/// `min_coexistence` seconds at time `now`.
std::size_t count_conflicting_pairs(std::span<const protocol::SensorNode> nodes, double delta,
                                    double now, double min_coexistence);

/// CSV with a header row; reals in fixed 6-decimal notation.
void write_metrics_csv(std::ostream& out, std::span<const MetricsRecord> records);
std::string metrics_csv(std::span<const MetricsRecord> records);

/// JSON object; unrecovered latencies and a missing ratio are written as null.
std::string summary_json(const SummaryReport& report);

double median(std::vector<double> values);

}  // namespace sentinel::analysis
