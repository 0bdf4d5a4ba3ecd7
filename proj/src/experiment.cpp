#include "sentinel/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

#include "sentinel/random.hpp"

namespace sentinel::cli {

namespace fs = std::filesystem;

namespace {

std::string sanitize(std::string_view text) {
  std::string out;
  for (const char c : text) {
    const bool keep = std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '-';
    out.push_back(keep ? c : '-');
  }
  return out;
}

std::string rep_dir(std::uint32_t rep) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "rep%03u", rep);
  return buf;
}

std::string fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
  out.close();
  if (!out) throw std::runtime_error("failed to write " + path.string());
}

}  // namespace

std::vector<SweepPoint> expand_sweep(const ExperimentSpec& spec) {
  std::vector<SweepPoint> points{{"base", {}, spec.base, spec.protocol}};
  for (const SweepAxis& axis : spec.sweep) {
    std::vector<SweepPoint> next;
    for (const SweepPoint& p : points) {
      for (const std::string& value : axis.values) {
        SweepPoint q = p;
        q.assignments.emplace_back(axis.parameter, value);
        set_parameter(q.config, q.protocol, axis.parameter, value);
        next.push_back(std::move(q));
      }
    }
    points = std::move(next);
  }
  for (SweepPoint& p : points) {
    if (p.assignments.empty()) continue;
    std::string name;
    for (const auto& [key, value] : p.assignments) {
      if (!name.empty()) name += '_';
      name += sanitize(key) + "-" + sanitize(value);
    }
    p.name = name;
  }
  return points;
}

std::uint64_t replication_seed(std::uint64_t base_seed, std::uint32_t replication) {
  return replication == 0 ? base_seed : mix_seed(base_seed + replication);
}

ExperimentResult execute(const ExperimentSpec& spec, unsigned jobs) {
  ExperimentResult result;
  result.points = expand_sweep(spec);
  for (std::size_t p = 0; p < result.points.size(); ++p) {
    for (std::uint32_t r = 0; r < spec.replications; ++r) {
      RunResult run;
      run.point = p;
      run.replication = r;
      run.seed = replication_seed(result.points[p].config.seed, r);
      result.runs.push_back(std::move(run));
    }
  }

  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next++; i < result.runs.size(); i = next++) {
      RunResult& run = result.runs[i];
      const SweepPoint& point = result.points[run.point];
      try {
        sim::SimConfig config = point.config;
        config.seed = run.seed;
        sim::Simulator simulator(config, point.protocol);
        const RunLog log = simulator.run();
        run.metrics_csv = analysis::metrics_csv(log.records);
        run.summary = analysis::summarize(log, sim::identity_of(config), config.delta);
        run.ok = true;
      } catch (const std::exception& e) {
        run.error = e.what();
      }
    }
  };
  const unsigned threads = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(result.runs.size())));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  // Pair each Sentinel run with the PEAS run that differs only in protocol.
  const auto key_without_protocol = [&](const SweepPoint& p) {
    std::vector<std::pair<std::string, std::string>> key;
    for (const auto& a : p.assignments) {
      if (a.first != "protocol") key.push_back(a);
    }
    return key;
  };
  for (RunResult& run : result.runs) {
    const SweepPoint& point = result.points[run.point];
    if (!run.ok || point.protocol != sim::ProtocolKind::Sentinel) continue;
    for (const RunResult& other : result.runs) {
      const SweepPoint& op = result.points[other.point];
      if (!other.ok || op.protocol != sim::ProtocolKind::Peas || other.replication != run.replication) continue;
      if (key_without_protocol(op) != key_without_protocol(point)) continue;
      run.summary.energy_ratio_vs_baseline = analysis::compare_runs(run.summary, other.summary);
      break;
    }
  }
  return result;
}

namespace {

std::string summary_table(const ExperimentSpec& spec, const ExperimentResult& result,
                          const std::set<std::size_t>& failed) {
  std::ostringstream out;
  out << "point,replication,seed,protocol";
  for (const auto& axis : spec.sweep) {
    if (axis.parameter != "protocol") out << ',' << axis.parameter;
  }
  out << ",avg_energy_per_node,total_energy,mean_coverage,false_activation_fraction,"
         "energy_ratio_vs_baseline\n";

  for (const RunResult& run : result.runs) {
    if (failed.contains(run.point)) continue;
    const SweepPoint& point = result.points[run.point];
    out << point.name << ',' << run.replication << ',' << run.seed << ','
        << sim::to_string(point.protocol);
    for (const auto& [key, value] : point.assignments) {
      if (key != "protocol") out << ',' << value;
    }
    const auto& s = run.summary;
    out << ',' << fixed6(s.avg_energy_per_node) << ',' << fixed6(s.total_energy) << ','
        << fixed6(s.mean_coverage) << ',' << fixed6(s.false_activation_fraction) << ','
        << (s.energy_ratio_vs_baseline ? fixed6(*s.energy_ratio_vs_baseline) : std::string{}) << '\n';
  }
  return out.str();
}

}  // namespace

std::string sweep_summary_csv(const ExperimentSpec& spec, const ExperimentResult& result) {
  std::set<std::size_t> failed;
  for (const RunResult& run : result.runs) {
    if (!run.ok) failed.insert(run.point);
  }
  return summary_table(spec, result, failed);
}

int write_results(const ExperimentSpec& spec, const ExperimentResult& result, std::ostream& err) {
  const fs::path root = spec.output_dir;
  int status = 0;
  std::set<std::size_t> failed;
  for (const RunResult& run : result.runs) {
    if (!run.ok) {
      err << "run " << result.points[run.point].name << "/" << rep_dir(run.replication)
          << " failed: " << run.error << '\n';
      failed.insert(run.point);
      status = 2;
    }
  }

  try {
    fs::create_directories(root);
    for (std::size_t p = 0; p < result.points.size(); ++p) {
      const fs::path dir = root / result.points[p].name;
      if (failed.contains(p)) {
        fs::remove_all(dir);
        continue;
      }
      try {
        for (const RunResult& run : result.runs) {
          if (run.point != p) continue;
          const fs::path rdir = dir / rep_dir(run.replication);
          fs::create_directories(rdir);
          write_file(rdir / "metrics.csv", run.metrics_csv);
          write_file(rdir / "summary.json", analysis::summary_json(run.summary));
        }
      } catch (const std::exception& e) {
        err << "writing " << dir.string() << " failed: " << e.what() << '\n';
        std::error_code ec;
        fs::remove_all(dir, ec);
        failed.insert(p);
        status = 2;
      }
    }
    write_file(root / "sweep_summary.csv", summary_table(spec, result, failed));
  } catch (const std::exception& e) {
    err << "output error: " << e.what() << '\n';
    return 2;
  }
  return status;
}

int run_experiment(const ExperimentSpec& spec, unsigned jobs, std::ostream& err) {
  return write_results(spec, execute(spec, jobs), err);
}

}  // namespace sentinel::cli
