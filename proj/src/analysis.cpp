#include "sentinel/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace sentinel::analysis {

using protocol::Vec3;

CoverageGrid CoverageGrid::over(double width, double height, double resolution) {
  if (!(width > 0.0) || !(height > 0.0) || !(resolution > 0.0)) {
    throw std::invalid_argument("coverage grid needs positive extent and resolution");
  }
  CoverageGrid g{width, height, resolution, 0, 0};
  g.nx = static_cast<std::uint32_t>(std::ceil(width / resolution - 1e-9));
  g.ny = static_cast<std::uint32_t>(std::ceil(height / resolution - 1e-9));
  return g;
}

double coverage_fraction(std::span<const Vec3> active, double sensing_radius,
                         const CoverageGrid& grid) {
  if (grid.cell_count() == 0) return 0.0;
  std::vector<std::uint8_t> covered(grid.cell_count(), 0);
  const double r2 = sensing_radius * sensing_radius;
  const auto clamp_index = [](double v, std::uint32_t n) {
    return static_cast<std::int64_t>(std::clamp(v, 0.0, static_cast<double>(n) - 1.0));
  };

  // Rasterise each disk over its bounding box only.
  for (const Vec3& p : active) {
    const auto i0 = clamp_index(std::floor((p.x - sensing_radius) / grid.resolution - 0.5), grid.nx);
    const auto i1 = clamp_index(std::ceil((p.x + sensing_radius) / grid.resolution - 0.5), grid.nx);
    const auto j0 = clamp_index(std::floor((p.y - sensing_radius) / grid.resolution - 0.5), grid.ny);
    const auto j1 = clamp_index(std::ceil((p.y + sensing_radius) / grid.resolution - 0.5), grid.ny);
    for (auto j = j0; j <= j1; ++j) {
      const double dy = grid.center_y(static_cast<std::uint32_t>(j)) - p.y;
      for (auto i = i0; i <= i1; ++i) {
        const double dx = grid.center_x(static_cast<std::uint32_t>(i)) - p.x;
        if (dx * dx + dy * dy <= r2) covered[static_cast<std::size_t>(j) * grid.nx + i] = 1;
      }
    }
  }
  const auto n = std::count(covered.begin(), covered.end(), std::uint8_t{1});
  return static_cast<double>(n) / static_cast<double>(grid.cell_count());
}

double recovery_latency(const RunLog& log, double failure_time, const FailureRegion& region) {
  double best = kUnrecovered;
  for (const ActivityInterval& iv : log.activity) {
    if (iv.node == region.failed_node) continue;
    if (protocol::distance(iv.position, region.center) > region.radius) continue;
    if (iv.end <= failure_time) continue;
    best = std::min(best, std::max(0.0, iv.start - failure_time));
  }
  return best;
}

OverheadReport overhead_report(const RunLog& log) {
  OverheadReport report;
  report.rows.reserve(log.records.size());
  for (const MetricsRecord& r : log.records) {
    report.rows.push_back(
        {r.time, r.probes_sent, r.probes_received, r.replies_sent, r.replies_received, r.collisions});
    if (r.replies_received > r.replies_sent) report.replies_conserved = false;
  }
  return report;
}

SummaryReport summarize(const RunLog& log, const RunIdentity& identity, double delta) {
  SummaryReport s;
  s.identity = identity;
  if (!log.records.empty()) {
    s.total_energy = log.records.back().total_energy_consumed;
    double coverage = 0.0;
    for (const MetricsRecord& r : log.records) coverage += r.coverage_fraction;
    s.mean_coverage = coverage / static_cast<double>(log.records.size());
  }
  if (log.n_nodes > 0) {
    const double n = log.n_nodes;
    s.avg_energy_per_node = s.total_energy / n;
    s.false_activation_fraction =
        static_cast<double>(std::count(log.false_activation.begin(), log.false_activation.end(), true)) / n;
    s.ever_active_fraction =
        static_cast<double>(std::count(log.ever_active.begin(), log.ever_active.end(), true)) / n;
  }
  for (const AppliedFailure& f : log.failures) {
    if (!f.was_alive) continue;
    s.recovery_latencies.push_back(recovery_latency(log, f.time, {f.node, f.position, delta}));
  }
  return s;
}

double compare_runs(const SummaryReport& sentinel, const SummaryReport& baseline) {
  if (!(sentinel.identity == baseline.identity)) {
    throw std::invalid_argument("runs differ in seed, deployment or energy model");
  }
  if (!(baseline.avg_energy_per_node > 0.0)) {
    return sentinel.avg_energy_per_node > 0.0 ? -std::numeric_limits<double>::infinity() : 0.0;
  }
  return (baseline.avg_energy_per_node - sentinel.avg_energy_per_node) / baseline.avg_energy_per_node;
}

std::size_t count_conflicting_pairs(std::span<const protocol::SensorNode> nodes, double delta,
                                    double now, double min_coexistence) {
  std::vector<const protocol::SensorNode*> active;
  for (const auto& n : nodes) {
    if (n.state == protocol::NodeState::Active) active.push_back(&n);
  }
  std::size_t count = 0;
  for (std::size_t a = 0; a < active.size(); ++a) {
    for (std::size_t b = a + 1; b < active.size(); ++b) {
      if (protocol::distance(active[a]->position, active[b]->position) >= delta) continue;
      const double since = std::max(*active[a]->activity_start, *active[b]->activity_start);
      if (now - since > min_coexistence) ++count;
    }
  }
  return count;
}

namespace {

void put_real(std::ostream& out, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  out << buf;
}

}  // namespace

void write_metrics_csv(std::ostream& out, std::span<const MetricsRecord> records) {
  out << "time,active_count,sleeping_count,probing_count,dead_count,total_energy_consumed,"
         "coverage_fraction,probes_sent,probes_received,replies_sent,replies_received,"
         "collisions,withdrawals\n";
  for (const MetricsRecord& r : records) {
    const double row[] = {r.time,
                          static_cast<double>(r.active_count),
                          static_cast<double>(r.sleeping_count),
                          static_cast<double>(r.probing_count),
                          static_cast<double>(r.dead_count),
                          r.total_energy_consumed,
                          r.coverage_fraction,
                          static_cast<double>(r.probes_sent),
                          static_cast<double>(r.probes_received),
                          static_cast<double>(r.replies_sent),
                          static_cast<double>(r.replies_received),
                          static_cast<double>(r.collisions),
                          static_cast<double>(r.withdrawals)};
    for (std::size_t i = 0; i < std::size(row); ++i) {
      if (i > 0) out << ',';
      put_real(out, row[i]);
    }
    out << '\n';
  }
}

std::string metrics_csv(std::span<const MetricsRecord> records) {
  std::ostringstream out;
  write_metrics_csv(out, records);
  return out.str();
}

std::string summary_json(const SummaryReport& report) {
  nlohmann::ordered_json j;
  j["seed"] = report.identity.seed;
  j["n_nodes"] = report.identity.n_nodes;
  j["duration"] = report.identity.duration;
  j["total_energy"] = report.total_energy;
  j["avg_energy_per_node"] = report.avg_energy_per_node;
  j["energy_ratio_vs_baseline"] = report.energy_ratio_vs_baseline
                                      ? nlohmann::ordered_json(*report.energy_ratio_vs_baseline)
                                      : nlohmann::ordered_json(nullptr);
  j["mean_coverage"] = report.mean_coverage;
  j["false_activation_fraction"] = report.false_activation_fraction;
  j["ever_active_fraction"] = report.ever_active_fraction;
  auto latencies = nlohmann::ordered_json::array();
  for (double v : report.recovery_latencies) {
    latencies.push_back(std::isfinite(v) ? nlohmann::ordered_json(v) : nlohmann::ordered_json(nullptr));
  }
  j["recovery_latencies"] = latencies;
  return j.dump(2) + "\n";
}

double median(std::vector<double> values) {
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  if (values.size() % 2 == 1) return values[mid];
  return 0.5 * (values[mid - 1] + values[mid]);
}

}  // namespace sentinel::analysis
