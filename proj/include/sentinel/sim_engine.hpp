#pragma once

// Deterministic discrete-event kernel for one deployment.
//
// A `Simulator` owns a self-contained `World`: node records, the clock, the
// seeded generator, the pending event queue and the metrics log. Events are
// processed strictly in (time, sequence) order on a single thread; separate
// simulators share nothing and can run concurrently.

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "sentinel/analysis.hpp"
#include "sentinel/event_queue.hpp"
#include "sentinel/metrics.hpp"
#include "sentinel/protocol.hpp"
#include "sentinel/radio.hpp"
#include "sentinel/random.hpp"

namespace sentinel::sim {

enum class ProtocolKind : std::uint8_t { Sentinel, Peas };

std::string_view to_string(ProtocolKind kind);
std::optional<ProtocolKind> parse_protocol(std::string_view text);

struct EnergyModel {
  double p_sleep = 3e-6;          // W
  double p_probe_listen = 0.060;  // W
  double p_active = 0.015;        // W
  double e_tx = 50e-6;            // J per frame
  double e_rx = 50e-6;            // J per frame
  double initial_energy = 18720.0;

  void validate() const;
  [[nodiscard]] double power(protocol::NodeState state) const;

  friend bool operator==(const EnergyModel&, const EnergyModel&) = default;
};

struct FailureInjection {
  protocol::NodeId node = 0;
  double time = 0.0;

  friend bool operator==(const FailureInjection&, const FailureInjection&) = default;
};

/// One violated constraint and the configuration keys it involves.
struct ConfigIssue {
  std::vector<std::string> fields;
  std::string message;
};

struct SimConfig {
  double field_width = 50.0;
  double field_height = 50.0;
  std::uint32_t n_nodes = 200;
  double R_s = 10.0;
  double R_c = 20.0;
  double delta = 20.0;
  double duration = 6000.0;
  std::uint64_t seed = 1;
  double beta = 2.0;
  double lambda_init = 0.01;
  double t_w = 1.0;
  int k_probes = 3;
  std::uint32_t msg_size = protocol::kDefaultFrameOctets;
  double bitrate = 250000.0;
  double loss_probability = 0.05;
  bool collisions = true;
  EnergyModel energy;
  double metrics_interval = 10.0;
  std::vector<FailureInjection> failure_injections;

  double ts_initial_max = 10.0;
  /// Active nodes answer a probe after a delay drawn from (0, reply_jitter).
  double reply_jitter = 0.007;
  double ts_min = 1.0;
  double ts_max_factor = 10.0;
  double lambda_min = 1e-3;
  double lambda_max = 0.02;
  /// PEAS wake rate; 0 picks the rate whose mean sleep equals the
  /// mean of the first Weibull sleep at lambda_init and beta.
  double lambda_peas = 0.0;
  double coverage_resolution = 1.0;

  [[nodiscard]] std::vector<ConfigIssue> issues() const;
  /// Throws std::invalid_argument listing every violated constraint.
  void validate() const;

  [[nodiscard]] protocol::ProtocolParams protocol_params() const;
  [[nodiscard]] double peas_rate() const;

  friend bool operator==(const SimConfig&, const SimConfig&) = default;
};

/// Explicit placement used by scripted scenarios instead of random deployment.
struct NodeSetup {
  protocol::Vec3 position;
  double first_wake = 1.0;
};

struct World {
  std::vector<protocol::SensorNode> nodes;
  double clock = 0.0;
  Rng rng{0};
  EventQueue pending;
  std::vector<MetricsRecord> metrics_log;
};

/// Called after every metrics sample with the world as it stands.
using SnapshotObserver = std::function<void(const World&, double now)>;

class Simulator {
 public:
  /// Random uniform deployment from `config.seed`.
  Simulator(SimConfig config, ProtocolKind protocol);
  /// Scripted deployment; `config.n_nodes` is replaced by `nodes.size()`.
  Simulator(SimConfig config, ProtocolKind protocol, std::vector<NodeSetup> nodes);
  ~Simulator();

  Simulator(const Simulator&) = delete;
  Simulator& operator=(const Simulator&) = delete;

  void set_observer(SnapshotObserver observer) { observer_ = std::move(observer); }

  /// Processes every event up to and including `config.duration`.
  RunLog run();

  /// Processes events with time <= t. Returns false once the run is over.
  bool run_until(double t);

  [[nodiscard]] const World& world() const { return world_; }
  [[nodiscard]] const SimConfig& config() const { return config_; }
  [[nodiscard]] ProtocolKind protocol() const { return protocol_; }
  [[nodiscard]] const Radio& radio() const { return *radio_; }
  [[nodiscard]] const NodeLedger& ledger(protocol::NodeId id) const { return ledgers_[id]; }
  [[nodiscard]] RunLog log() const;

 private:
  struct NodeBook {
    double last_settled = 0.0;
    std::uint64_t epoch = 0;
    std::uint64_t radio_epoch = 0;
    std::optional<std::size_t> open_interval;
  };
  struct PendingFrame {
    std::variant<protocol::ProbeRequest, protocol::ProbeReply> frame;
    /// (receiver, radio epoch at frame start), sorted by receiver.
    std::vector<std::pair<protocol::NodeId, std::uint64_t>> listeners;
  };

  void init(std::vector<NodeSetup> nodes);
  void dispatch(const SimEvent& event);
  void handle_wake(const SimEvent& event);
  void handle_timeout(const SimEvent& event);
  void handle_reply_send(const SimEvent& event);
  void handle_delivery(const SimEvent& event);
  void handle_failure(const SimEvent& event);
  void sample_metrics(double now);
  void finish(double now);

  void settle(protocol::NodeId id, double now);
  void settle_all(double now);
  bool charge(protocol::NodeId id, double joules, bool is_tx);
  void record_transition(protocol::NodeId id, protocol::NodeState from, double at);
  void apply(protocol::NodeId id, protocol::NodeState before, const protocol::Outcome& out,
             double now);
  bool broadcast(protocol::NodeId sender,
                 std::variant<protocol::ProbeRequest, protocol::ProbeReply> frame, double now);
  void schedule(double time, EventKind kind, protocol::NodeId node,
                decltype(SimEvent::payload) payload = {});

  SimConfig config_;
  ProtocolKind protocol_;
  protocol::ProtocolParams params_;
  std::unique_ptr<protocol::SleepPolicy> policy_;
  World world_;
  std::unique_ptr<Radio> radio_;
  analysis::CoverageGrid grid_;
  std::vector<NodeBook> books_;
  std::vector<NodeLedger> ledgers_;
  std::vector<double> consumed_;
  std::unordered_map<TransmissionId, PendingFrame> frames_;
  std::vector<ActivityInterval> activity_;
  std::vector<bool> ever_active_;
  std::vector<bool> false_activation_;
  std::vector<AppliedFailure> failures_;
  TransitionMatrix transitions_{};
  MetricsRecord counters_;
  std::uint64_t events_processed_ = 0;
  bool finished_ = false;
  SnapshotObserver observer_;
};

/// Largest relative gap, over all nodes, between the energy actually drawn
/// and its decomposition into state time and per-frame costs.
double energy_ledger_error(const RunLog& log, const EnergyModel& energy);

analysis::RunIdentity identity_of(const SimConfig& config);

}  // namespace sentinel::sim
