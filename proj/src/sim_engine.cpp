#include "sentinel/sim_engine.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "sentinel/peas.hpp"

namespace sentinel::sim {

using protocol::NodeId;
using protocol::NodeState;
using protocol::ProbeReply;
using protocol::ProbeRequest;
using protocol::SensorNode;

std::string_view to_string(ProtocolKind kind) {
  return kind == ProtocolKind::Sentinel ? "sentinel" : "peas";
}

std::optional<ProtocolKind> parse_protocol(std::string_view text) {
  if (text == "sentinel") return ProtocolKind::Sentinel;
  if (text == "peas") return ProtocolKind::Peas;
  return std::nullopt;
}

void EnergyModel::validate() const {
  std::ostringstream err;
  if (!(p_sleep >= 0.0)) err << "p_sleep must be >= 0; ";
  if (!(p_probe_listen > p_sleep)) err << "p_probe_listen must exceed p_sleep; ";
  if (!(p_active > p_sleep)) err << "p_active must exceed p_sleep; ";
  if (!(e_tx >= 0.0) || !(e_rx >= 0.0)) err << "per-message energies must be >= 0; ";
  if (!(initial_energy > 0.0)) err << "initial_energy must be positive; ";
  if (const auto s = err.str(); !s.empty()) throw std::invalid_argument(s);
}

double EnergyModel::power(NodeState state) const {
  switch (state) {
    case NodeState::Sleeping: return p_sleep;
    case NodeState::Probing: return p_probe_listen;
    case NodeState::Active: return p_active;
    case NodeState::Dead: return 0.0;
  }
  return 0.0;
}

std::vector<ConfigIssue> SimConfig::issues() const {
  std::vector<ConfigIssue> out;
  const auto check = [&](bool ok, std::vector<std::string> fields, std::string message) {
    if (!ok) out.push_back({std::move(fields), std::move(message)});
  };
  check(field_width > 0.0, {"field_width"}, "field_width must be positive");
  check(field_height > 0.0, {"field_height"}, "field_height must be positive");
  check(R_s > 0.0, {"R_s"}, "R_s must be positive");
  check(R_c >= R_s, {"R_c", "R_s"}, "R_c must be >= R_s");
  check(delta > 0.0, {"delta"}, "delta must be positive");
  check(delta <= 2.0 * R_s, {"delta", "R_s"}, "delta must be <= 2 * R_s");
  check(duration >= 0.0 && std::isfinite(duration), {"duration"}, "duration must be >= 0");
  check(beta > 0.0, {"beta"}, "beta must be positive");
  check(lambda_init > 0.0, {"lambda_init"}, "lambda_init must be positive");
  check(t_w > 0.0, {"t_w"}, "t_w must be positive");
  check(k_probes >= 1, {"k_probes"}, "k_probes must be >= 1");
  check(msg_size > 0, {"msg_size"}, "msg_size must be positive");
  check(bitrate > 0.0, {"bitrate"}, "bitrate must be positive");
  check(loss_probability >= 0.0 && loss_probability < 1.0, {"loss_probability"},
        "loss_probability must lie in [0, 1)");
  check(metrics_interval > 0.0, {"metrics_interval"}, "metrics_interval must be positive");
  check(ts_initial_max > 0.0, {"ts_initial_max"}, "ts_initial_max must be positive");
  check(reply_jitter >= 0.0 && reply_jitter < t_w, {"reply_jitter", "t_w"},
        "reply_jitter must lie in [0, t_w)");
  check(ts_min >= 0.0, {"ts_min"}, "ts_min must be >= 0");
  check(ts_max_factor > 0.0, {"ts_max_factor"}, "ts_max_factor must be positive");
  check(lambda_min > 0.0, {"lambda_min"}, "lambda_min must be positive");
  check(lambda_max >= lambda_min, {"lambda_max", "lambda_min"}, "lambda_max must be >= lambda_min");
  check(lambda_peas >= 0.0, {"lambda_peas"}, "lambda_peas must be >= 0");
  check(coverage_resolution > 0.0, {"coverage_resolution"}, "coverage_resolution must be positive");
  check(energy.p_sleep >= 0.0, {"energy.p_sleep"}, "p_sleep must be >= 0");
  check(energy.p_probe_listen > energy.p_sleep, {"energy.p_probe_listen", "energy.p_sleep"},
        "p_probe_listen must exceed p_sleep");
  check(energy.p_active > energy.p_sleep, {"energy.p_active", "energy.p_sleep"},
        "p_active must exceed p_sleep");
  check(energy.e_tx >= 0.0, {"energy.e_tx"}, "e_tx must be >= 0");
  check(energy.e_rx >= 0.0, {"energy.e_rx"}, "e_rx must be >= 0");
  check(energy.initial_energy > 0.0, {"energy.initial_energy"}, "initial_energy must be positive");
  for (const auto& f : failure_injections) {
    std::ostringstream msg;
    if (f.node >= n_nodes) {
      msg << "failure injection names unknown node " << f.node;
      check(false, {"failure", "n_nodes"}, msg.str());
    }
    if (!(f.time >= 0.0) || f.time > duration) {
      msg.str("");
      msg << "failure injection at t=" << f.time << " lies outside the run";
      check(false, {"failure", "duration"}, msg.str());
    }
  }
  return out;
}

void SimConfig::validate() const {
  const auto found = issues();
  if (found.empty()) return;
  std::ostringstream err;
  for (std::size_t i = 0; i < found.size(); ++i) err << (i ? "; " : "") << found[i].message;
  throw std::invalid_argument(err.str());
}

double SimConfig::peas_rate() const {
  if (lambda_peas > 0.0) return lambda_peas;
  return lambda_init / std::tgamma(1.0 + 1.0 / beta);
}

protocol::ProtocolParams SimConfig::protocol_params() const {
  protocol::ProtocolParams p;
  p.delta = delta;
  p.t_w = t_w;
  p.k_probes = k_probes;
  p.ts_initial_max = ts_initial_max;
  p.sensing_radius = R_s;
  p.comm_radius = R_c;
  p.msg_size_octets = msg_size;
  return p;
}

Simulator::Simulator(SimConfig config, ProtocolKind protocol)
    : config_(std::move(config)), protocol_(protocol) {
  init({});
}

Simulator::Simulator(SimConfig config, ProtocolKind protocol, std::vector<NodeSetup> nodes)
    : config_(std::move(config)), protocol_(protocol) {
  config_.n_nodes = static_cast<std::uint32_t>(nodes.size());
  if (nodes.empty()) throw std::invalid_argument("scripted deployment needs at least one node");
  init(std::move(nodes));
}

Simulator::~Simulator() = default;

void Simulator::init(std::vector<NodeSetup> setups) {
  config_.validate();
  params_ = config_.protocol_params();
  params_.validate();
  if (protocol_ == ProtocolKind::Sentinel) {
    policy_ = std::make_unique<protocol::SentinelPolicy>(
        sched::SleepBounds{config_.ts_min, config_.ts_max_factor},
        sched::RateBounds{config_.lambda_min, config_.lambda_max});
  } else {
    policy_ = std::make_unique<peas::PeasPolicy>(peas::PeasParams{config_.delta, config_.peas_rate()});
  }

  world_.rng = Rng(config_.seed);
  const std::uint32_t n = config_.n_nodes;
  if (setups.empty() && n > 0) {
    setups.resize(n);
    for (auto& s : setups) {
      s.position = {world_.rng.uniform(0.0, config_.field_width),
                    world_.rng.uniform(0.0, config_.field_height), 0.0};
    }
    for (auto& s : setups) s.first_wake = world_.rng.uniform(0.0, config_.ts_initial_max);
  }

  const double initial_rate =
      protocol_ == ProtocolKind::Sentinel ? config_.lambda_init : config_.peas_rate();
  std::vector<protocol::Vec3> positions;
  world_.nodes.reserve(n);
  for (NodeId i = 0; i < n; ++i) {
    SensorNode node;
    node.id = i;
    node.position = setups[i].position;
    node.energy_remaining = config_.energy.initial_energy;
    node.probe_rate = {initial_rate};
    node.beta = config_.beta;
    node.wake_deadline = setups[i].first_wake;
    world_.nodes.push_back(node);
    positions.push_back(node.position);
  }

  radio_ = std::make_unique<Radio>(
      positions, RadioParams{config_.R_c, config_.bitrate, config_.loss_probability, config_.collisions});
  grid_ = analysis::CoverageGrid::over(config_.field_width, config_.field_height,
                                       config_.coverage_resolution);
  books_.assign(n, NodeBook{});
  ledgers_.assign(n, NodeLedger{config_.energy.initial_energy, {}, 0, 0, 0.0});
  consumed_.assign(n, 0.0);
  ever_active_.assign(n, false);
  false_activation_.assign(n, false);

  for (NodeId i = 0; i < n; ++i) {
    if (setups[i].first_wake < 0.0) throw std::invalid_argument("negative first wake time");
    schedule(setups[i].first_wake, EventKind::Wake, i);
  }
  for (const auto& f : config_.failure_injections) schedule(f.time, EventKind::FailureInjection, f.node);
  double last_sample = 0.0;
  for (std::uint64_t k = 0;; ++k) {
    const double t = static_cast<double>(k) * config_.metrics_interval;
    if (t > config_.duration) break;
    schedule(t, EventKind::MetricsSample, 0);
    last_sample = t;
  }
  if (last_sample < config_.duration) schedule(config_.duration, EventKind::MetricsSample, 0);
  schedule(config_.duration, EventKind::EndOfRun, 0);
}

void Simulator::schedule(double time, EventKind kind, NodeId node, decltype(SimEvent::payload) payload) {
  SimEvent ev;
  ev.time = time;
  ev.kind = kind;
  ev.node = node;
  ev.epoch = node < books_.size() ? books_[node].epoch : 0;
  ev.payload = std::move(payload);
  world_.pending.push(std::move(ev));
}

bool Simulator::run_until(double t) {
  while (!finished_ && !world_.pending.empty() && world_.pending.top().time <= t) {
    const SimEvent ev = world_.pending.pop();
    world_.clock = ev.time;
    ++events_processed_;
    dispatch(ev);
  }
  return !finished_;
}

RunLog Simulator::run() {
  run_until(config_.duration);
  if (!finished_) finish(config_.duration);
  return log();
}

void Simulator::dispatch(const SimEvent& ev) {
  switch (ev.kind) {
    case EventKind::Wake: handle_wake(ev); break;
    case EventKind::ReplyTimeout: handle_timeout(ev); break;
    case EventKind::ReplySend: handle_reply_send(ev); break;
    case EventKind::MessageDelivery: handle_delivery(ev); break;
    case EventKind::MetricsSample: sample_metrics(ev.time); break;
    case EventKind::FailureInjection: handle_failure(ev); break;
    case EventKind::EndOfRun: finish(ev.time); break;
  }
}

void Simulator::handle_wake(const SimEvent& ev) {
  SensorNode& node = world_.nodes[ev.node];
  if (node.state == NodeState::Dead || ev.epoch != books_[ev.node].epoch) return;
  settle(ev.node, ev.time);
  if (node.state == NodeState::Dead) return;
  const NodeState before = node.state;
  const auto out = protocol::on_wake(node, ev.time, {params_, *policy_, world_.rng});
  apply(ev.node, before, out, ev.time);
}

void Simulator::handle_timeout(const SimEvent& ev) {
  SensorNode& node = world_.nodes[ev.node];
  if (node.state == NodeState::Dead || ev.epoch != books_[ev.node].epoch) return;
  settle(ev.node, ev.time);
  if (node.state == NodeState::Dead) return;
  const NodeState before = node.state;
  const auto out = protocol::on_reply_timeout(node, ev.time, {params_, *policy_, world_.rng});
  apply(ev.node, before, out, ev.time);
}

void Simulator::handle_reply_send(const SimEvent& ev) {
  SensorNode& node = world_.nodes[ev.node];
  if (ev.epoch != books_[ev.node].epoch) return;
  settle(ev.node, ev.time);
  if (node.state != NodeState::Active) return;
  const auto& request = std::get<ProbeRequest>(ev.payload);
  const double arrival = ev.time + radio_->airtime(request.size_octets);
  if (auto reply = protocol::on_probe_request(node, request, arrival)) {
    if (broadcast(ev.node, *reply, ev.time)) ++counters_.replies_sent;
  }
}

void Simulator::handle_delivery(const SimEvent& ev) {
  const auto tid = std::get<TransmissionId>(ev.payload);
  auto it = frames_.find(tid);
  if (it == frames_.end()) throw std::logic_error("delivery of unknown frame");
  const PendingFrame pending = std::move(it->second);
  frames_.erase(it);
  const std::vector<NodeId> delivered = radio_->complete(tid);

  for (const NodeId j : delivered) {
    const auto rec = std::lower_bound(pending.listeners.begin(), pending.listeners.end(),
                                      std::pair<NodeId, std::uint64_t>{j, 0});
    SensorNode& node = world_.nodes[j];
    settle(j, ev.time);
    if (!node.radio_on() || books_[j].radio_epoch != rec->second) continue;
    if (!charge(j, config_.energy.e_rx, false)) continue;

    if (const auto* req = std::get_if<ProbeRequest>(&pending.frame)) {
      ++counters_.probes_received;
      if (node.state == NodeState::Active) {
        const double delay = config_.reply_jitter > 0.0 ? config_.reply_jitter * world_.rng.uniform_open() : 0.0;
        schedule(ev.time + delay, EventKind::ReplySend, j, *req);
      }
    } else {
      const auto& reply = std::get<ProbeReply>(pending.frame);
      if (reply.requester == j) ++counters_.replies_received;
      const NodeState before = node.state;
      const auto out = protocol::on_probe_reply(node, reply, ev.time, {params_, *policy_, world_.rng});
      apply(j, before, out, ev.time);
    }
  }
}

void Simulator::handle_failure(const SimEvent& ev) {
  SensorNode& node = world_.nodes[ev.node];
  settle(ev.node, ev.time);
  AppliedFailure applied{ev.node, node.position, ev.time, node.state != NodeState::Dead};
  failures_.push_back(applied);
  if (!applied.was_alive) return;
  const NodeState before = node.state;
  node.state = NodeState::Dead;
  node.hardware_failed = true;
  node.activity_start.reset();
  record_transition(ev.node, before, ev.time);
}

void Simulator::apply(NodeId id, NodeState before, const protocol::Outcome& out, double now) {
  SensorNode& node = world_.nodes[id];
  if (node.state != before) record_transition(id, before, now);
  if (out.withdrew) ++counters_.withdrawals;
  if (out.request && node.state != NodeState::Dead) {
    if (broadcast(id, *out.request, now)) ++counters_.probes_sent;
  }
  if (node.state == NodeState::Dead) return;
  if (out.timeout_at) schedule(*out.timeout_at, EventKind::ReplyTimeout, id);
  if (out.wake_at) schedule(*out.wake_at, EventKind::Wake, id);
}

bool Simulator::broadcast(NodeId sender, std::variant<ProbeRequest, ProbeReply> frame, double now) {
  if (!charge(sender, config_.energy.e_tx, true)) return false;
  const std::uint32_t octets =
      std::visit([](const auto& f) { return f.size_octets; }, frame);
  const auto listening = [&](NodeId j) {
    settle(j, now);
    return world_.nodes[j].radio_on();
  };
  const TransmissionId tid = radio_->transmit(sender, octets, now, listening, world_.rng);
  PendingFrame pending{std::move(frame), {}};
  for (const Reception& rx : radio_->transmission(tid).receptions) {
    pending.listeners.emplace_back(rx.receiver, books_[rx.receiver].radio_epoch);
  }
  std::sort(pending.listeners.begin(), pending.listeners.end());
  const double end = radio_->transmission(tid).end;
  frames_.emplace(tid, std::move(pending));
  schedule(end, EventKind::MessageDelivery, sender, tid);
  return true;
}

void Simulator::settle(NodeId id, double now) {
  NodeBook& book = books_[id];
  SensorNode& node = world_.nodes[id];
  if (now <= book.last_settled) return;
  if (node.state == NodeState::Dead) {
    book.last_settled = now;
    return;
  }
  const double power = config_.energy.power(node.state);
  const double dt = now - book.last_settled;
  const double available = config_.energy.initial_energy - consumed_[id];
  NodeLedger& ledger = ledgers_[id];
  const auto s = static_cast<std::size_t>(node.state);
  if (power > 0.0 && power * dt >= available) {
    const double survived = available / power;
    ledger.time_in_state[s] += survived;
    consumed_[id] = config_.energy.initial_energy;
    node.energy_remaining = 0.0;
    const NodeState before = node.state;
    node.state = NodeState::Dead;
    node.activity_start.reset();
    record_transition(id, before, book.last_settled + survived);
  } else {
    ledger.time_in_state[s] += dt;
    consumed_[id] += power * dt;
    node.energy_remaining = config_.energy.initial_energy - consumed_[id];
  }
  book.last_settled = now;
}

void Simulator::settle_all(double now) {
  for (NodeId i = 0; i < world_.nodes.size(); ++i) settle(i, now);
}

bool Simulator::charge(NodeId id, double joules, bool is_tx) {
  SensorNode& node = world_.nodes[id];
  if (node.state == NodeState::Dead) return false;
  NodeLedger& ledger = ledgers_[id];
  const double available = config_.energy.initial_energy - consumed_[id];
  if (joules > available) {
    ledger.written_off += available;
    consumed_[id] = config_.energy.initial_energy;
    node.energy_remaining = 0.0;
    const NodeState before = node.state;
    node.state = NodeState::Dead;
    node.activity_start.reset();
    record_transition(id, before, books_[id].last_settled);
    return false;
  }
  consumed_[id] += joules;
  node.energy_remaining = config_.energy.initial_energy - consumed_[id];
  if (is_tx) {
    ++ledger.tx_count;
  } else {
    ++ledger.rx_count;
  }
  return true;
}

void Simulator::record_transition(NodeId id, NodeState from, double at) {
  SensorNode& node = world_.nodes[id];
  const NodeState to = node.state;
  if (!protocol::is_allowed_transition(from, to)) {
    std::ostringstream msg;
    msg << "node " << id << ": illegal transition " << protocol::to_string(from) << " -> "
        << protocol::to_string(to) << " at t=" << at;
    throw protocol::InvariantViolation(msg.str());
  }
  ++transitions_[static_cast<std::size_t>(from)][static_cast<std::size_t>(to)];
  NodeBook& book = books_[id];
  ++book.epoch;
  const bool radio_was_on = from == NodeState::Probing || from == NodeState::Active;
  if (radio_was_on && !node.radio_on()) ++book.radio_epoch;

  if (from == NodeState::Active && book.open_interval) {
    activity_[*book.open_interval].end = at;
    book.open_interval.reset();
  }
  if (to == NodeState::Active) {
    ever_active_[id] = true;
    for (const SensorNode& other : world_.nodes) {
      if (other.id != id && other.state == NodeState::Active &&
          protocol::scan_check(protocol::distance(other.position, node.position), config_.delta)) {
        false_activation_[id] = true;
        break;
      }
    }
    book.open_interval = activity_.size();
    activity_.push_back({id, node.position, at, kStillActive});
  }
}

void Simulator::sample_metrics(double now) {
  settle_all(now);
  MetricsRecord r = counters_;
  r.time = now;
  r.collisions = radio_->collisions();
  std::vector<protocol::Vec3> active;
  for (NodeId i = 0; i < world_.nodes.size(); ++i) {
    const SensorNode& node = world_.nodes[i];
    switch (node.state) {
      case NodeState::Sleeping: ++r.sleeping_count; break;
      case NodeState::Probing: ++r.probing_count; break;
      case NodeState::Active:
        ++r.active_count;
        active.push_back(node.position);
        break;
      case NodeState::Dead: ++r.dead_count; break;
    }
    r.total_energy_consumed += consumed_[i];
  }
  r.coverage_fraction = analysis::coverage_fraction(active, config_.R_s, grid_);
  world_.metrics_log.push_back(r);
  if (observer_) observer_(world_, now);
}

void Simulator::finish(double now) {
  settle_all(now);
  finished_ = true;
}

RunLog Simulator::log() const {
  RunLog out;
  out.n_nodes = config_.n_nodes;
  out.duration = config_.duration;
  out.records = world_.metrics_log;
  out.activity = activity_;
  out.ledgers = ledgers_;
  out.final_energy.reserve(world_.nodes.size());
  for (const auto& node : world_.nodes) {
    out.final_energy.push_back(node.energy_remaining);
    out.positions.push_back(node.position);
  }
  out.ever_active = ever_active_;
  out.false_activation = false_activation_;
  out.failures = failures_;
  out.transitions = transitions_;
  out.events_processed = events_processed_;
  return out;
}

double energy_ledger_error(const RunLog& log, const EnergyModel& energy) {
  double worst = 0.0;
  for (std::size_t i = 0; i < log.ledgers.size(); ++i) {
    const NodeLedger& l = log.ledgers[i];
    const double spent = l.initial_energy - log.final_energy[i];
    double explained = l.written_off + static_cast<double>(l.tx_count) * energy.e_tx +
                       static_cast<double>(l.rx_count) * energy.e_rx;
    for (int s = 0; s < protocol::kNodeStateCount; ++s) {
      explained += energy.power(static_cast<NodeState>(s)) * l.time_in_state[s];
    }
    const double scale = std::max(std::abs(spent), 1e-300);
    const double err = spent == 0.0 && explained == 0.0 ? 0.0 : std::abs(spent - explained) / scale;
    worst = std::max(worst, err);
  }
  return worst;
}

analysis::RunIdentity identity_of(const SimConfig& config) {
  return {config.seed,        config.n_nodes,
          config.duration,    config.field_width,
          config.field_height, {config.energy.p_sleep, config.energy.p_probe_listen,
                                config.energy.p_active, config.energy.e_tx, config.energy.e_rx,
                                config.energy.initial_energy}};
}

}  // namespace sentinel::sim
