#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "sentinel/analysis.hpp"
#include "sentinel/config.hpp"

namespace sentinel::cli {

/// One cell of the sweep grid.
struct SweepPoint {
  std::string name;  // directory name, "base" when nothing is swept
  std::vector<std::pair<std::string, std::string>> assignments;
  sim::SimConfig config;
  sim::ProtocolKind protocol = sim::ProtocolKind::Sentinel;
};

std::vector<SweepPoint> expand_sweep(const ExperimentSpec& spec);

/// Replication 0 keeps the base seed; later ones get mixed, distinct seeds.
std::uint64_t replication_seed(std::uint64_t base_seed, std::uint32_t replication);

struct RunResult {
  std::size_t point = 0;
  std::uint32_t replication = 0;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  std::string metrics_csv;
  analysis::SummaryReport summary;
};

struct ExperimentResult {
  std::vector<SweepPoint> points;
  std::vector<RunResult> runs;  // point-major, replication-minor
};

/// Runs every point x replication on up to `jobs` threads and pairs
/// Sentinel runs with the matching PEAS run for the energy ratio.
ExperimentResult execute(const ExperimentSpec& spec, unsigned jobs = 1);

/// Writes per-run metrics.csv / summary.json and sweep_summary.csv under
/// `output_dir`. Points with a failed run are removed from disk.
/// Returns 0 on full success, 2 if any run or write failed.
int write_results(const ExperimentSpec& spec, const ExperimentResult& result, std::ostream& err);

std::string sweep_summary_csv(const ExperimentSpec& spec, const ExperimentResult& result);

/// execute + write_results.
int run_experiment(const ExperimentSpec& spec, unsigned jobs, std::ostream& err);

}  // namespace sentinel::cli
