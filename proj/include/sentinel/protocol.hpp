#pragma once

// Sentinel node state machine.
//
// Every node starts asleep. On waking it probes its vicinity; an Active node
// within the distance threshold answers and the prober goes back to sleep
// with a freshly adapted timer, otherwise after `k_probes` unanswered
// attempts it becomes Active itself. Two Active nodes that end up closer
// than the threshold resolve the conflict when one overhears the other's
// probe reply: the younger one withdraws.
//
// Handlers only mutate the node they are given and report what the engine
// must do next through `Outcome`; all inter-node effects travel as frames.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string_view>

#include "sentinel/random.hpp"
#include "sentinel/sched_core.hpp"

namespace sentinel::protocol {

using NodeId = std::uint32_t;

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend bool operator==(const Vec3&, const Vec3&) = default;
};

double distance(const Vec3& a, const Vec3& b);

enum class NodeState : std::uint8_t { Sleeping, Probing, Active, Dead };

inline constexpr int kNodeStateCount = 4;

std::string_view to_string(NodeState state);

/// True for the edges of the node lifecycle graph. Dead is absorbing and an
/// Active node only returns to Sleeping through withdrawal.
bool is_allowed_transition(NodeState from, NodeState to);

/// Raised when a handler is driven from a state it can never legally see.
class InvariantViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

struct SensorNode {
  NodeId id = 0;
  Vec3 position;
  NodeState state = NodeState::Sleeping;
  double energy_remaining = 0.0;
  bool hardware_failed = false;
  sched::ProbeRate probe_rate;
  double beta = 2.0;
  std::optional<double> activity_start;
  double wake_deadline = 0.0;
  int probes_sent_this_round = 0;

  [[nodiscard]] bool radio_on() const {
    return state == NodeState::Probing || state == NodeState::Active;
  }
};

inline constexpr std::uint32_t kDefaultFrameOctets = 25;

struct ProbeRequest {
  NodeId sender = 0;
  Vec3 sender_position;
  std::uint32_t size_octets = kDefaultFrameOctets;
};

struct ProbeReply {
  NodeId sender = 0;
  Vec3 sender_position;
  /// Seconds the sender has been Active, stamped for the instant the frame
  /// finishes arriving.
  double activity_age = 0.0;
  /// The prober this reply answers. Other nodes may still overhear it.
  NodeId requester = 0;
  std::uint32_t size_octets = kDefaultFrameOctets;
};

struct ProtocolParams {
  double delta = 20.0;           // minimum spacing between Active nodes, m
  double t_w = 1.0;              // reply wait per probe attempt, s
  int k_probes = 3;              // attempts per probing round
  double ts_initial_max = 10.0;  // initial sleep drawn from (0, ts_initial_max]
  double sensing_radius = 10.0;
  double comm_radius = 20.0;
  std::uint32_t msg_size_octets = kDefaultFrameOctets;

  void validate() const;
};

/// Decides how long a node sleeps once it has found a sentinel (or has
/// withdrawn) and whether Active nodes may withdraw at all.
class SleepPolicy {
 public:
  virtual ~SleepPolicy() = default;

  /// May update the node's probe rate. `r` is uniform on (0, 1).
  virtual double next_sleep(SensorNode& node, double now, double r) const = 0;
  [[nodiscard]] virtual bool withdraws_on_conflict() const = 0;
};

/// Weibull sleep with hazard-adapted probe rate and activity withdrawal.
class SentinelPolicy final : public SleepPolicy {
 public:
  SentinelPolicy() = default;
  SentinelPolicy(sched::SleepBounds sleep, sched::RateBounds rate);

  double next_sleep(SensorNode& node, double now, double r) const override;
  [[nodiscard]] bool withdraws_on_conflict() const override { return true; }

  [[nodiscard]] const sched::SleepBounds& sleep_bounds() const { return sleep_; }
  [[nodiscard]] const sched::RateBounds& rate_bounds() const { return rate_; }

 private:
  sched::SleepBounds sleep_;
  sched::RateBounds rate_;
};

struct Context {
  const ProtocolParams& params;
  const SleepPolicy& policy;
  Rng& rng;
};

/// What the engine must carry out after a handler ran.
struct Outcome {
  std::optional<ProbeRequest> request;  // broadcast now
  std::optional<double> timeout_at;     // reply-wait deadline
  std::optional<double> wake_at;        // next wake-up
  bool activated = false;
  bool withdrew = false;
  bool died = false;
};

bool scan_check(double d, double delta);

Outcome on_wake(SensorNode& node, double now, const Context& ctx);

/// Only Active nodes answer; `now` is the instant the reply finishes
/// arriving, which is what the age is stamped against.
std::optional<ProbeReply> on_probe_request(const SensorNode& node,
                                           const ProbeRequest& msg, double now);

Outcome on_probe_reply(SensorNode& node, const ProbeReply& msg, double now,
                       const Context& ctx);

Outcome on_reply_timeout(SensorNode& node, double now, const Context& ctx);

Outcome on_withdrawal_check(SensorNode& node, const ProbeReply& msg, double now,
                            const Context& ctx);

}  // namespace sentinel::protocol
