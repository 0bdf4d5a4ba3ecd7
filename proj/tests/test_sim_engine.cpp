#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "sentinel/analysis.hpp"
#include "sentinel/sim_engine.hpp"

using namespace sentinel;
using namespace sentinel::sim;
using protocol::NodeId;
using protocol::NodeState;

namespace {

SimConfig quiet(double duration) {
  SimConfig c;
  c.duration = duration;
  c.loss_probability = 0.0;
  return c;
}

std::size_t idx(NodeState s) { return static_cast<std::size_t>(s); }

}  // namespace

TEST(Engine, EmptyWorldRunsToZeroMetrics) {
  SimConfig c;
  c.n_nodes = 0;
  const RunLog log = Simulator(c, ProtocolKind::Sentinel).run();
  ASSERT_FALSE(log.records.empty());
  for (const auto& r : log.records) {
    MetricsRecord zero;
    zero.time = r.time;
    EXPECT_EQ(r, zero);
  }
}

TEST(Engine, ZeroDurationGivesOneSample) {
  SimConfig c;
  c.duration = 0.0;
  const RunLog log = Simulator(c, ProtocolKind::Sentinel).run();
  ASSERT_EQ(log.records.size(), 1u);
  EXPECT_EQ(log.records[0].probes_sent, 0u);
  EXPECT_EQ(log.records[0].sleeping_count, c.n_nodes);
  EXPECT_EQ(log.records[0].total_energy_consumed, 0.0);
}

TEST(Engine, DeploymentIsSeededAndInsideField) {
  SimConfig c;
  c.seed = 42;
  c.duration = 0.0;
  const RunLog a = Simulator(c, ProtocolKind::Sentinel).run();
  const RunLog b = Simulator(c, ProtocolKind::Sentinel).run();
  EXPECT_EQ(a.positions, b.positions);
  for (const auto& p : a.positions) {
    EXPECT_GE(p.x, 0.0);
    EXPECT_LE(p.x, 50.0);
    EXPECT_GE(p.y, 0.0);
    EXPECT_LE(p.y, 50.0);
    EXPECT_EQ(p.z, 0.0);
  }
  c.seed = 43;
  EXPECT_NE(Simulator(c, ProtocolKind::Sentinel).run().positions, a.positions);
}

TEST(Engine, IdenticalConfigsGiveIdenticalCsv) {
  SimConfig c;
  c.seed = 42;
  c.duration = 1500.0;
  for (auto kind : {ProtocolKind::Sentinel, ProtocolKind::Peas}) {
    const RunLog a = Simulator(c, kind).run();
    const RunLog b = Simulator(c, kind).run();
    EXPECT_EQ(analysis::metrics_csv(a.records), analysis::metrics_csv(b.records));
    EXPECT_EQ(a.events_processed, b.events_processed);
  }
}

TEST(Engine, LoneNodeStandsGuard) {
  SimConfig c = quiet(500.0);
  Simulator sim(c, ProtocolKind::Sentinel, {{{25, 25, 0}, 2.0}});
  const RunLog log = sim.run();
  ASSERT_EQ(log.activity.size(), 1u);
  EXPECT_DOUBLE_EQ(log.activity[0].start, 2.0 + 3 * c.t_w);
  EXPECT_EQ(log.activity[0].end, kStillActive);
  EXPECT_EQ(log.records.back().probes_sent, 3u);
  EXPECT_EQ(log.records.back().active_count, 1u);
  EXPECT_FALSE(log.false_activation[0]);
}

TEST(Engine, LoneNodeEnergyArithmetic) {
  // Asleep 1 s, probing 3 s with 3 requests, then Active for 10 s.
  SimConfig c = quiet(14.0);
  Simulator sim(c, ProtocolKind::Sentinel, {{{25, 25, 0}, 1.0}});
  const RunLog log = sim.run();
  const NodeLedger& l = log.ledgers[0];
  EXPECT_NEAR(l.time_in_state[idx(NodeState::Active)], 10.0, 1e-12);
  EXPECT_NEAR(c.energy.p_active * l.time_in_state[idx(NodeState::Active)], 0.15, 1e-12);
  const double expected = 3e-6 * 1.0 + 0.060 * 3.0 + 3 * 50e-6 + 0.15;
  EXPECT_NEAR(c.energy.initial_energy - log.final_energy[0], expected, 1e-9);
  EXPECT_NEAR(log.records.back().total_energy_consumed, expected, 1e-9);
}

TEST(Engine, DrainedNodeDiesAndStaysDead) {
  SimConfig c = quiet(200.0);
  c.energy.initial_energy = 1.0;
  Simulator sim(c, ProtocolKind::Sentinel, {{{25, 25, 0}, 1.0}});
  const RunLog log = sim.run();
  EXPECT_EQ(log.final_energy[0], 0.0);
  EXPECT_EQ(log.records.back().dead_count, 1u);
  EXPECT_EQ(log.transitions[idx(NodeState::Active)][idx(NodeState::Dead)], 1u);
  ASSERT_EQ(log.activity.size(), 1u);
  EXPECT_LT(log.activity[0].end, 200.0);
  EXPECT_LE(energy_ledger_error(log, c.energy), 1e-9);
}

TEST(Engine, FailureInjectionKillsAndIsIdempotent) {
  SimConfig c = quiet(100.0);
  c.failure_injections = {{0, 30.0}, {0, 60.0}};
  Simulator sim(c, ProtocolKind::Sentinel, {{{25, 25, 0}, 1.0}});
  const RunLog log = sim.run();
  ASSERT_EQ(log.failures.size(), 2u);
  EXPECT_TRUE(log.failures[0].was_alive);
  EXPECT_FALSE(log.failures[1].was_alive);
  EXPECT_EQ(log.transitions[idx(NodeState::Active)][idx(NodeState::Dead)], 1u);

  // Nothing is drawn after the failure.
  const NodeLedger& l = log.ledgers[0];
  double alive = 0.0;
  for (int s = 0; s < protocol::kNodeStateCount; ++s) {
    if (s != static_cast<int>(idx(NodeState::Dead))) alive += l.time_in_state[s];
  }
  EXPECT_NEAR(alive, 30.0, 1e-12);
  EXPECT_EQ(l.time_in_state[idx(NodeState::Dead)], 0.0);
  EXPECT_GT(log.final_energy[0], 0.0);
}

TEST(Engine, DeadNodeNeverHearsOrSpeaks) {
  SimConfig c = quiet(300.0);
  c.failure_injections = {{0, 20.0}};
  // Node 1 probes after node 0 is dead and must activate on its own.
  Simulator sim(c, ProtocolKind::Sentinel, {{{25, 25, 0}, 1.0}, {{30, 25, 0}, 50.0}});
  const RunLog log = sim.run();
  EXPECT_EQ(log.ledgers[0].rx_count, 0u);
  EXPECT_EQ(log.ledgers[0].tx_count, 3u);
  EXPECT_EQ(log.records.back().replies_sent, 0u);
  EXPECT_EQ(log.records.back().active_count, 1u);
  EXPECT_FALSE(log.false_activation[1]);
}

TEST(Engine, ProberSleepsAfterReply) {
  SimConfig c = quiet(60.0);
  c.ts_min = 100.0;
  Simulator sim(c, ProtocolKind::Sentinel, {{{25, 25, 0}, 1.0}, {{35, 25, 0}, 20.0}});
  const RunLog log = sim.run();
  const auto& r = log.records.back();
  EXPECT_EQ(r.active_count, 1u);
  EXPECT_EQ(r.sleeping_count, 1u);
  EXPECT_EQ(r.probes_sent, 4u);
  EXPECT_EQ(r.probes_received, 1u);
  EXPECT_EQ(r.replies_sent, 1u);
  EXPECT_EQ(r.replies_received, 1u);
  EXPECT_EQ(log.transitions[idx(NodeState::Probing)][idx(NodeState::Sleeping)], 1u);
}

TEST(Engine, ConfigIssuesAreReported) {
  SimConfig c;
  c.failure_injections = {{c.n_nodes, 10.0}};
  EXPECT_FALSE(c.issues().empty());
  c.failure_injections = {{0, c.duration + 1.0}};
  EXPECT_FALSE(c.issues().empty());
  c = {};
  c.delta = 30.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = {};
  c.loss_probability = 1.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = {};
  c.R_c = 5.0;
  EXPECT_THROW(Simulator(c, ProtocolKind::Sentinel), std::invalid_argument);
}

TEST(Engine, PeasRateMatchesMeanFirstSleep) {
  SimConfig c;
  c.lambda_init = 0.01;
  c.beta = 2.0;
  // Weibull(100, 2) mean is 50 sqrt(pi).
  EXPECT_NEAR(1.0 / c.peas_rate(), 50.0 * std::sqrt(3.141592653589793), 1e-9);
  c.lambda_peas = 0.03;
  EXPECT_EQ(c.peas_rate(), 0.03);
}

class EngineProperty : public ::testing::TestWithParam<std::uint64_t> {};

TEST_P(EngineProperty, LedgerTransitionsAndCounts) {
  SimConfig c;
  c.seed = GetParam();
  c.n_nodes = 150;
  c.duration = 2000.0;
  c.energy.initial_energy = 25.0;
  c.failure_injections = {{3, 700.0}, {9, 1200.0}};
  for (auto kind : {ProtocolKind::Sentinel, ProtocolKind::Peas}) {
    const RunLog log = Simulator(c, kind).run();
    EXPECT_LE(energy_ledger_error(log, c.energy), 1e-9);
    for (std::size_t a = 0; a < protocol::kNodeStateCount; ++a) {
      for (std::size_t b = 0; b < protocol::kNodeStateCount; ++b) {
        if (log.transitions[a][b] == 0) continue;
        EXPECT_TRUE(protocol::is_allowed_transition(static_cast<NodeState>(a), static_cast<NodeState>(b)));
      }
    }
    double prev_time = -1.0;
    for (const auto& r : log.records) {
      EXPECT_EQ(r.active_count + r.sleeping_count + r.probing_count + r.dead_count, c.n_nodes);
      EXPECT_GE(r.coverage_fraction, 0.0);
      EXPECT_LE(r.coverage_fraction, 1.0);
      EXPECT_LE(r.replies_received, r.replies_sent);
      EXPECT_GT(r.time, prev_time);
      prev_time = r.time;
    }
    for (std::size_t i = 0; i < log.final_energy.size(); ++i) EXPECT_GE(log.final_energy[i], 0.0);
  }
}

TEST_P(EngineProperty, PeasActiveSetNeverShrinks) {
  SimConfig c;
  c.seed = GetParam();
  c.duration = 3000.0;
  Simulator sim(c, ProtocolKind::Peas);
  std::set<NodeId> previous;
  bool shrank = false;
  sim.set_observer([&](const World& w, double) {
    std::set<NodeId> now;
    for (const auto& n : w.nodes) {
      if (n.state == NodeState::Active) now.insert(n.id);
    }
    shrank |= !std::includes(now.begin(), now.end(), previous.begin(), previous.end());
    previous = std::move(now);
  });
  const RunLog log = sim.run();
  EXPECT_FALSE(shrank);
  EXPECT_EQ(log.records.back().withdrawals, 0u);
}

TEST_P(EngineProperty, PeasAndSentinelPickTheSameFirstGuard) {
  SimConfig c;
  c.seed = GetParam();
  c.duration = 30.0;
  c.collisions = false;
  const auto first = [&](ProtocolKind kind) {
    const RunLog log = Simulator(c, kind).run();
    const auto it = std::min_element(log.activity.begin(), log.activity.end(),
                                     [](const auto& a, const auto& b) { return a.start < b.start; });
    return it == log.activity.end() ? NodeId(-1) : it->node;
  };
  EXPECT_EQ(first(ProtocolKind::Sentinel), first(ProtocolKind::Peas));
}

TEST_P(EngineProperty, SingleGuardUnderSerializedRounds) {
  // Wake-ups spaced wider than a whole probing round, lossless channel,
  // overlapping frames delivered as if serialized.
  SimConfig c = quiet(600.0);
  c.seed = GetParam();
  c.collisions = false;
  c.lambda_init = 1e-3;
  Rng rng(GetParam());
  std::vector<NodeSetup> nodes(60);
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    nodes[i].position = {rng.uniform(0, 50), rng.uniform(0, 50), 0};
    nodes[i].first_wake = 1.0 + 4.0 * static_cast<double>(i);
  }
  Simulator sim(c, ProtocolKind::Sentinel, nodes);
  const double persist = 2.0 * c.t_w + sim.radio().airtime(c.msg_size);
  std::size_t worst = 0;
  sim.set_observer([&](const World& w, double now) {
    worst = std::max(worst, analysis::count_conflicting_pairs(w.nodes, c.delta, now, persist));
  });
  const RunLog log = sim.run();
  EXPECT_EQ(worst, 0u);
  EXPECT_GT(log.records.back().active_count, 0u);
}

INSTANTIATE_TEST_SUITE_P(Seeds, EngineProperty, ::testing::Values(1u, 2u, 3u, 17u, 99u));
