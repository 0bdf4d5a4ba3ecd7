#pragma once

// Experiment description and its line-oriented `key = value` file format.
//
//   # comment
//   n_nodes = 300
//   beta = 1.5
//   protocol = peas
//   replications = 5
//   failure = 12 @ 3000      (node id @ time; may repeat)
//
//   [energy]
//   p_active = 0.015
//
//   [sweep]
//   n_nodes = 100, 200, 300, 400
//   protocol = sentinel, peas

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "sentinel/sim_engine.hpp"

namespace sentinel::cli {

struct SweepAxis {
  std::string parameter;
  std::vector<std::string> values;
};

struct ExperimentSpec {
  sim::SimConfig base;
  std::vector<SweepAxis> sweep;
  sim::ProtocolKind protocol = sim::ProtocolKind::Sentinel;
  std::uint32_t replications = 1;
  std::string output_dir = "results";
};

/// Parse or validation failure; `line` is 0 when no single line is to blame.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(int line, const std::string& message);
  [[nodiscard]] int line() const { return line_; }

 private:
  int line_;
};

/// Every key accepted by `set_parameter`, in canonical order.
const std::vector<std::string>& parameter_names();

/// Assigns one named parameter from its textual value. Throws
/// std::invalid_argument on an unknown name or a malformed value.
void set_parameter(sim::SimConfig& config, sim::ProtocolKind& protocol, std::string_view name,
                   std::string_view value);

ExperimentSpec parse_config(std::string_view text);
ExperimentSpec load_config(const std::filesystem::path& path);

/// Command-line overrides; each one that is set replaces the file value.
struct Overrides {
  std::optional<std::string> protocol;
  std::optional<std::uint64_t> seed;
  std::optional<double> duration;
  std::optional<std::uint32_t> nodes;
  std::optional<std::string> output;
};

/// Applies the overrides and re-validates. Throws ConfigError (line 0).
void apply_overrides(ExperimentSpec& spec, const Overrides& overrides);

}  // namespace sentinel::cli
