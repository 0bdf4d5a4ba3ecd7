#include "sentinel/protocol.hpp"

#include <cmath>
#include <sstream>

namespace sentinel::protocol {

double distance(const Vec3& a, const Vec3& b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  const double dz = a.z - b.z;
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

std::string_view to_string(NodeState state) {
  switch (state) {
    case NodeState::Sleeping: return "Sleeping";
    case NodeState::Probing: return "Probing";
    case NodeState::Active: return "Active";
    case NodeState::Dead: return "Dead";
  }
  return "?";
}

bool is_allowed_transition(NodeState from, NodeState to) {
  using S = NodeState;
  switch (from) {
    case S::Sleeping: return to == S::Probing || to == S::Dead;
    case S::Probing: return to == S::Sleeping || to == S::Active || to == S::Dead;
    case S::Active: return to == S::Sleeping || to == S::Dead;
    case S::Dead: return false;
  }
  return false;
}

void ProtocolParams::validate() const {
  std::ostringstream err;
  if (!(sensing_radius > 0.0)) err << "sensing radius must be positive; ";
  if (!(comm_radius >= sensing_radius)) err << "R_c must be >= R_s; ";
  if (!(delta > 0.0)) err << "delta must be positive; ";
  if (!(delta <= 2.0 * sensing_radius)) err << "delta must be <= 2 * R_s; ";
  if (!(t_w > 0.0)) err << "t_w must be positive; ";
  if (k_probes < 1) err << "k_probes must be >= 1; ";
  if (!(ts_initial_max > 0.0)) err << "ts_initial_max must be positive; ";
  if (msg_size_octets == 0) err << "message size must be positive; ";
  if (const auto s = err.str(); !s.empty()) throw std::invalid_argument(s);
}

SentinelPolicy::SentinelPolicy(sched::SleepBounds sleep, sched::RateBounds rate)
    : sleep_(sleep), rate_(rate) {
  sleep_.validate();
  rate_.validate();
}

double SentinelPolicy::next_sleep(SensorNode& node, double now, double r) const {
  node.probe_rate = sched::update_probe_rate(node.probe_rate, now, node.beta, rate_);
  return sched::sample_sleep_time({node.probe_rate.scale(), node.beta}, r, sleep_);
}

bool scan_check(double d, double delta) { return d <= delta; }

namespace {

void require_state(const SensorNode& node, NodeState expected, const char* handler) {
  if (node.state != expected) {
    std::ostringstream msg;
    msg << handler << ": node " << node.id << " is " << to_string(node.state)
        << ", expected " << to_string(expected);
    throw InvariantViolation(msg.str());
  }
}

ProbeRequest make_request(const SensorNode& node, const ProtocolParams& params) {
  return {node.id, node.position, params.msg_size_octets};
}

void enter_sleep(SensorNode& node, double now, const Context& ctx, Outcome& out) {
  const double duration = ctx.policy.next_sleep(node, now, ctx.rng.uniform_open());
  node.state = NodeState::Sleeping;
  node.activity_start.reset();
  node.probes_sent_this_round = 0;
  node.wake_deadline = now + duration;
  out.wake_at = node.wake_deadline;
}

}  // namespace

Outcome on_wake(SensorNode& node, double now, const Context& ctx) {
  require_state(node, NodeState::Sleeping, "on_wake");
  Outcome out;
  if (node.energy_remaining <= 0.0) {
    node.energy_remaining = 0.0;
    node.state = NodeState::Dead;
    out.died = true;
    return out;
  }
  node.state = NodeState::Probing;
  node.probes_sent_this_round = 1;
  out.request = make_request(node, ctx.params);
  out.timeout_at = now + ctx.params.t_w;
  return out;
}

std::optional<ProbeReply> on_probe_request(const SensorNode& node,
                                           const ProbeRequest& msg, double now) {
  if (node.state != NodeState::Active || !node.activity_start) return std::nullopt;
  return ProbeReply{node.id, node.position, now - *node.activity_start, msg.sender,
                    msg.size_octets};
}

Outcome on_probe_reply(SensorNode& node, const ProbeReply& msg, double now,
                       const Context& ctx) {
  Outcome out;
  switch (node.state) {
    case NodeState::Probing:
      if (scan_check(distance(node.position, msg.sender_position), ctx.params.delta)) {
        enter_sleep(node, now, ctx, out);
      }
      return out;
    case NodeState::Active:
      if (ctx.policy.withdraws_on_conflict()) return on_withdrawal_check(node, msg, now, ctx);
      return out;
    default:
      return out;
  }
}

Outcome on_reply_timeout(SensorNode& node, double now, const Context& ctx) {
  require_state(node, NodeState::Probing, "on_reply_timeout");
  Outcome out;
  if (node.probes_sent_this_round < ctx.params.k_probes) {
    ++node.probes_sent_this_round;
    out.request = make_request(node, ctx.params);
    out.timeout_at = now + ctx.params.t_w;
    return out;
  }
  node.state = NodeState::Active;
  node.activity_start = now;
  node.probes_sent_this_round = 0;
  out.activated = true;
  return out;
}

Outcome on_withdrawal_check(SensorNode& node, const ProbeReply& msg, double now,
                            const Context& ctx) {
  require_state(node, NodeState::Active, "on_withdrawal_check");
  Outcome out;
  if (msg.sender == node.id) return out;
  const double d = distance(node.position, msg.sender_position);
  if (d >= ctx.params.delta) return out;

  const double own_age = now - *node.activity_start;
  const bool younger = own_age < msg.activity_age ||
                       (own_age == msg.activity_age && node.id > msg.sender);
  if (!younger) return out;

  enter_sleep(node, now, ctx, out);
  out.withdrew = true;
  return out;
}

}  // namespace sentinel::protocol
