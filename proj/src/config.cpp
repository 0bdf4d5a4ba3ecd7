#include "sentinel/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace sentinel::cli {

using sim::ProtocolKind;
using sim::SimConfig;

ConfigError::ConfigError(int line, const std::string& message)
    : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + message : message),
      line_(line) {}

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double parse_real(std::string_view text) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size() || !std::isfinite(v)) {
    throw std::invalid_argument("expected a number, got '" + std::string(text) + "'");
  }
  return v;
}

std::uint64_t parse_unsigned(std::string_view text) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw std::invalid_argument("expected a non-negative integer, got '" + std::string(text) + "'");
  }
  return v;
}

std::uint32_t parse_u32(std::string_view text) {
  const auto v = parse_unsigned(text);
  if (v > UINT32_MAX) throw std::invalid_argument("integer out of range: " + std::string(text));
  return static_cast<std::uint32_t>(v);
}

bool parse_bool(std::string_view text) {
  if (text == "true" || text == "yes" || text == "on" || text == "1") return true;
  if (text == "false" || text == "no" || text == "off" || text == "0") return false;
  throw std::invalid_argument("expected a boolean, got '" + std::string(text) + "'");
}

using Setter = std::function<void(SimConfig&, ProtocolKind&, std::string_view)>;

Setter real(double SimConfig::*field) {
  return [field](SimConfig& c, ProtocolKind&, std::string_view v) { c.*field = parse_real(v); };
}

Setter energy(double sim::EnergyModel::*field) {
  return [field](SimConfig& c, ProtocolKind&, std::string_view v) { c.energy.*field = parse_real(v); };
}

const std::vector<std::pair<std::string, Setter>>& setters() {
  static const std::vector<std::pair<std::string, Setter>> table = {
      {"field_width", real(&SimConfig::field_width)},
      {"field_height", real(&SimConfig::field_height)},
      {"n_nodes", [](SimConfig& c, ProtocolKind&, std::string_view v) { c.n_nodes = parse_u32(v); }},
      {"R_s", real(&SimConfig::R_s)},
      {"R_c", real(&SimConfig::R_c)},
      {"delta", real(&SimConfig::delta)},
      {"duration", real(&SimConfig::duration)},
      {"seed", [](SimConfig& c, ProtocolKind&, std::string_view v) { c.seed = parse_unsigned(v); }},
      {"beta", real(&SimConfig::beta)},
      {"lambda_init", real(&SimConfig::lambda_init)},
      {"t_w", real(&SimConfig::t_w)},
      {"k_probes",
       [](SimConfig& c, ProtocolKind&, std::string_view v) {
         const auto k = parse_u32(v);
         if (k > 1000) throw std::invalid_argument("k_probes out of range");
         c.k_probes = static_cast<int>(k);
       }},
      {"msg_size", [](SimConfig& c, ProtocolKind&, std::string_view v) { c.msg_size = parse_u32(v); }},
      {"bitrate", real(&SimConfig::bitrate)},
      {"loss_probability", real(&SimConfig::loss_probability)},
      {"collisions", [](SimConfig& c, ProtocolKind&, std::string_view v) { c.collisions = parse_bool(v); }},
      {"metrics_interval", real(&SimConfig::metrics_interval)},
      {"ts_initial_max", real(&SimConfig::ts_initial_max)},
      {"reply_jitter", real(&SimConfig::reply_jitter)},
      {"ts_min", real(&SimConfig::ts_min)},
      {"ts_max_factor", real(&SimConfig::ts_max_factor)},
      {"lambda_min", real(&SimConfig::lambda_min)},
      {"lambda_max", real(&SimConfig::lambda_max)},
      {"lambda_peas", real(&SimConfig::lambda_peas)},
      {"coverage_resolution", real(&SimConfig::coverage_resolution)},
      {"protocol",
       [](SimConfig&, ProtocolKind& p, std::string_view v) {
         const auto kind = sim::parse_protocol(v);
         if (!kind) throw std::invalid_argument("protocol must be 'sentinel' or 'peas', got '" + std::string(v) + "'");
         p = *kind;
       }},
      {"energy.p_sleep", energy(&sim::EnergyModel::p_sleep)},
      {"energy.p_probe_listen", energy(&sim::EnergyModel::p_probe_listen)},
      {"energy.p_active", energy(&sim::EnergyModel::p_active)},
      {"energy.e_tx", energy(&sim::EnergyModel::e_tx)},
      {"energy.e_rx", energy(&sim::EnergyModel::e_rx)},
      {"energy.initial_energy", energy(&sim::EnergyModel::initial_energy)},
  };
  return table;
}

sim::FailureInjection parse_failure(std::string_view text) {
  const auto at = text.find('@');
  if (at == std::string_view::npos) throw std::invalid_argument("failure must be written 'node @ time'");
  return {parse_u32(trim(text.substr(0, at))), parse_real(trim(text.substr(at + 1)))};
}

std::vector<std::string> split_list(std::string_view text) {
  std::vector<std::string> out;
  while (true) {
    const auto comma = text.find(',');
    const auto item = trim(text.substr(0, comma));
    if (item.empty()) throw std::invalid_argument("empty value in list");
    out.emplace_back(item);
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
  }
  return out;
}

}  // namespace

const std::vector<std::string>& parameter_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& [name, setter] : setters()) v.push_back(name);
    return v;
  }();
  return names;
}

void set_parameter(SimConfig& config, ProtocolKind& protocol, std::string_view name,
                   std::string_view value) {
  for (const auto& [key, setter] : setters()) {
    if (key == name) {
      setter(config, protocol, value);
      return;
    }
  }
  throw std::invalid_argument("unknown key '" + std::string(name) + "'");
}

ExperimentSpec parse_config(std::string_view text) {
  ExperimentSpec spec;
  std::map<std::string, int, std::less<>> line_of;
  std::map<std::string, int, std::less<>> sweep_line;
  std::string section;
  int lineno = 0;

  std::istringstream in{std::string(text)};
  std::string raw;
  while (std::getline(in, raw)) {
    ++lineno;
    std::string_view line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(lineno, "malformed section header");
      section = std::string(trim(line.substr(1, line.size() - 2)));
      if (section != "run" && section != "energy" && section != "sweep") {
        throw ConfigError(lineno, "unknown section [" + section + "]");
      }
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError(lineno, "expected 'key = value'");
    const std::string key(trim(line.substr(0, eq)));
    const std::string_view value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError(lineno, "missing key");
    if (value.empty()) throw ConfigError(lineno, "missing value for '" + key + "'");

    try {
      if (section == "sweep") {
        const auto& names = parameter_names();
        if (std::find(names.begin(), names.end(), key) == names.end()) {
          throw std::invalid_argument("unknown sweep parameter '" + key + "'");
        }
        if (sweep_line.contains(key)) throw std::invalid_argument("parameter '" + key + "' swept twice");
        SweepAxis axis{key, split_list(value)};
        for (const auto& v : axis.values) {
          SimConfig probe_config;
          ProtocolKind probe_protocol{};
          set_parameter(probe_config, probe_protocol, key, v);
        }
        spec.sweep.push_back(std::move(axis));
        sweep_line[key] = lineno;
        continue;
      }

      const std::string full = section == "energy" ? "energy." + key : key;
      if (full == "replications") {
        spec.replications = parse_u32(value);
        if (spec.replications < 1) throw std::invalid_argument("replications must be >= 1");
      } else if (full == "output_dir") {
        spec.output_dir = std::string(value);
      } else if (full == "failure") {
        spec.base.failure_injections.push_back(parse_failure(value));
      } else {
        set_parameter(spec.base, spec.protocol, full, value);
      }
      line_of[full] = lineno;
    } catch (const std::invalid_argument& e) {
      throw ConfigError(lineno, e.what());
    }
  }

  const auto blame = [&](const std::vector<std::string>& fields) {
    int line = 0;
    for (const auto& f : fields) {
      if (const auto it = line_of.find(f); it != line_of.end()) line = std::max(line, it->second);
    }
    return line;
  };
  if (const auto issues = spec.base.issues(); !issues.empty()) {
    throw ConfigError(blame(issues.front().fields), issues.front().message);
  }
  for (const auto& axis : spec.sweep) {
    for (const auto& v : axis.values) {
      SimConfig point = spec.base;
      ProtocolKind protocol = spec.protocol;
      set_parameter(point, protocol, axis.parameter, v);
      if (const auto issues = point.issues(); !issues.empty()) {
        throw ConfigError(sweep_line[axis.parameter],
                          axis.parameter + " = " + v + ": " + issues.front().message);
      }
    }
  }
  return spec;
}

ExperimentSpec load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(0, "cannot read config file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

void apply_overrides(ExperimentSpec& spec, const Overrides& o) {
  try {
    if (o.protocol) set_parameter(spec.base, spec.protocol, "protocol", *o.protocol);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(0, e.what());
  }
  if (o.seed) spec.base.seed = *o.seed;
  if (o.duration) spec.base.duration = *o.duration;
  if (o.nodes) spec.base.n_nodes = *o.nodes;
  if (o.output) spec.output_dir = *o.output;
  try {
    spec.base.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(0, e.what());
  }
}

}  // namespace sentinel::cli
