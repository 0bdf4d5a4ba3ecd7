#include <gtest/gtest.h>

#include <cmath>

#include "sentinel/peas.hpp"
#include "sentinel/protocol.hpp"

using namespace sentinel;
using namespace sentinel::protocol;

namespace {

struct Fixture {
  ProtocolParams params;
  SentinelPolicy policy;
  Rng rng{7};
  Context ctx() { return {params, policy, rng}; }
};

SensorNode sleeping_at(NodeId id, Vec3 pos) {
  SensorNode n;
  n.id = id;
  n.position = pos;
  n.energy_remaining = 100.0;
  n.probe_rate = {0.01};
  return n;
}

SensorNode active_since(NodeId id, Vec3 pos, double since) {
  SensorNode n = sleeping_at(id, pos);
  n.state = NodeState::Active;
  n.activity_start = since;
  return n;
}

ProbeReply reply_from(NodeId id, Vec3 pos, double age, NodeId requester = 99) {
  return {id, pos, age, requester, kDefaultFrameOctets};
}

}  // namespace

TEST(Transitions, AllowedSet) {
  using S = NodeState;
  const S all[] = {S::Sleeping, S::Probing, S::Active, S::Dead};
  int allowed = 0;
  for (S a : all) {
    for (S b : all) allowed += is_allowed_transition(a, b);
  }
  EXPECT_EQ(allowed, 7);
  EXPECT_TRUE(is_allowed_transition(S::Active, S::Sleeping));
  EXPECT_FALSE(is_allowed_transition(S::Sleeping, S::Active));
  EXPECT_FALSE(is_allowed_transition(S::Active, S::Probing));
  for (S b : all) EXPECT_FALSE(is_allowed_transition(S::Dead, b));
}

TEST(ScanCheck, BoundaryInclusive) {
  EXPECT_TRUE(scan_check(15.0, 20.0));
  EXPECT_FALSE(scan_check(25.0, 20.0));
  EXPECT_TRUE(scan_check(20.0, 20.0));
}

TEST(OnWake, StartsProbingRound) {
  Fixture f;
  SensorNode n = sleeping_at(0, {});
  const Outcome out = on_wake(n, 120.0, f.ctx());
  EXPECT_EQ(n.state, NodeState::Probing);
  EXPECT_EQ(n.probes_sent_this_round, 1);
  ASSERT_TRUE(out.request);
  EXPECT_EQ(out.request->sender, 0u);
  ASSERT_TRUE(out.timeout_at);
  EXPECT_DOUBLE_EQ(*out.timeout_at, 121.0);
}

TEST(OnWake, ExhaustedNodeDies) {
  Fixture f;
  SensorNode n = sleeping_at(0, {});
  n.energy_remaining = 0.0;
  const Outcome out = on_wake(n, 5.0, f.ctx());
  EXPECT_EQ(n.state, NodeState::Dead);
  EXPECT_TRUE(out.died);
  EXPECT_FALSE(out.request);
}

TEST(OnWake, ActiveNodeIsInvariantViolation) {
  Fixture f;
  SensorNode n = active_since(0, {}, 0.0);
  EXPECT_THROW(on_wake(n, 5.0, f.ctx()), InvariantViolation);
}

TEST(OnProbeRequest, OnlyActiveReplies) {
  const ProbeRequest req{3, {1, 1, 0}};
  const SensorNode active = active_since(1, {}, 100.0);
  const auto reply = on_probe_request(active, req, 150.0);
  ASSERT_TRUE(reply);
  EXPECT_DOUBLE_EQ(reply->activity_age, 50.0);
  EXPECT_EQ(reply->requester, 3u);

  SensorNode probing = sleeping_at(2, {});
  probing.state = NodeState::Probing;
  EXPECT_FALSE(on_probe_request(probing, req, 150.0));
  EXPECT_FALSE(on_probe_request(sleeping_at(4, {}), req, 150.0));
}

TEST(OnProbeReply, ScanSatisfiedSleepsWithUpdatedRate) {
  Fixture f;
  SensorNode n = sleeping_at(0, {0, 0, 0});
  on_wake(n, 100.0, f.ctx());
  const Outcome out = on_probe_reply(n, reply_from(1, {10, 0, 0}, 5.0, 0), 100.5, f.ctx());
  EXPECT_EQ(n.state, NodeState::Sleeping);
  EXPECT_EQ(n.probes_sent_this_round, 0);
  EXPECT_NEAR(n.probe_rate.per_second, 2.0 * 0.01 * (100.5 * 0.01), 1e-15);
  ASSERT_TRUE(out.wake_at);
  EXPECT_GT(*out.wake_at, 100.5);
  EXPECT_EQ(n.wake_deadline, *out.wake_at);
}

TEST(OnProbeReply, ScanFailureKeepsRoundGoing) {
  Fixture f;
  SensorNode n = sleeping_at(0, {0, 0, 0});
  on_wake(n, 100.0, f.ctx());
  const Outcome out = on_probe_reply(n, reply_from(1, {30, 0, 0}, 5.0, 0), 100.5, f.ctx());
  EXPECT_EQ(n.state, NodeState::Probing);
  EXPECT_FALSE(out.wake_at);
  EXPECT_NEAR(n.probe_rate.per_second, 0.01, 0.0);
}

TEST(OnProbeReply, SecondReplyIsIgnoredOnceAsleep) {
  Fixture f;
  SensorNode n = sleeping_at(0, {0, 0, 0});
  on_wake(n, 100.0, f.ctx());
  on_probe_reply(n, reply_from(1, {10, 0, 0}, 5.0, 0), 100.5, f.ctx());
  const double deadline = n.wake_deadline;
  const double rate = n.probe_rate.per_second;
  const Outcome out = on_probe_reply(n, reply_from(2, {5, 0, 0}, 9.0, 0), 100.6, f.ctx());
  EXPECT_EQ(n.state, NodeState::Sleeping);
  EXPECT_FALSE(out.wake_at);
  EXPECT_EQ(n.wake_deadline, deadline);
  EXPECT_EQ(n.probe_rate.per_second, rate);
}

TEST(OnReplyTimeout, RetriesThenActivates) {
  Fixture f;
  SensorNode n = sleeping_at(0, {});
  on_wake(n, 10.0, f.ctx());
  Outcome out = on_reply_timeout(n, 11.0, f.ctx());
  EXPECT_EQ(n.probes_sent_this_round, 2);
  ASSERT_TRUE(out.request);
  EXPECT_DOUBLE_EQ(*out.timeout_at, 12.0);
  out = on_reply_timeout(n, 12.0, f.ctx());
  EXPECT_EQ(n.probes_sent_this_round, 3);
  out = on_reply_timeout(n, 13.0, f.ctx());
  EXPECT_TRUE(out.activated);
  EXPECT_FALSE(out.request);
  EXPECT_EQ(n.state, NodeState::Active);
  EXPECT_EQ(n.activity_start, 13.0);
  EXPECT_EQ(n.probes_sent_this_round, 0);
}

TEST(OnReplyTimeout, SingleAttemptActivatesImmediately) {
  Fixture f;
  f.params.k_probes = 1;
  SensorNode n = sleeping_at(0, {});
  on_wake(n, 10.0, f.ctx());
  EXPECT_TRUE(on_reply_timeout(n, 11.0, f.ctx()).activated);
}

TEST(OnReplyTimeout, ProbeBudgetNeverExceeded) {
  Fixture f;
  for (int k = 1; k <= 6; ++k) {
    f.params.k_probes = k;
    SensorNode n = sleeping_at(0, {});
    int sent = on_wake(n, 0.0, f.ctx()).request ? 1 : 0;
    for (int i = 1; n.state == NodeState::Probing; ++i) {
      sent += on_reply_timeout(n, i, f.ctx()).request ? 1 : 0;
      ASSERT_LE(n.probes_sent_this_round, k);
    }
    EXPECT_EQ(sent, k);
  }
}

TEST(Withdrawal, YoungerYields) {
  Fixture f;
  SensorNode n = active_since(0, {0, 0, 0}, 95.0);
  const Outcome out = on_withdrawal_check(n, reply_from(1, {10, 0, 0}, 12.0), 100.0, f.ctx());
  EXPECT_TRUE(out.withdrew);
  EXPECT_EQ(n.state, NodeState::Sleeping);
  EXPECT_FALSE(n.activity_start);
  ASSERT_TRUE(out.wake_at);
}

TEST(Withdrawal, OlderIgnores) {
  Fixture f;
  SensorNode n = active_since(0, {0, 0, 0}, 88.0);
  const Outcome out = on_withdrawal_check(n, reply_from(1, {10, 0, 0}, 5.0), 100.0, f.ctx());
  EXPECT_FALSE(out.withdrew);
  EXPECT_EQ(n.state, NodeState::Active);
}

TEST(Withdrawal, NoConflictAtThreshold) {
  Fixture f;
  SensorNode n = active_since(0, {0, 0, 0}, 99.0);
  EXPECT_FALSE(on_withdrawal_check(n, reply_from(1, {20, 0, 0}, 50.0), 100.0, f.ctx()).withdrew);
  EXPECT_FALSE(on_withdrawal_check(n, reply_from(0, {0, 0, 0}, 50.0), 100.0, f.ctx()).withdrew);
}

TEST(Withdrawal, TieGoesToHigherId) {
  Fixture f;
  SensorNode low = active_since(3, {0, 0, 0}, 93.0);
  SensorNode high = active_since(8, {10, 0, 0}, 93.0);
  const bool low_out = on_withdrawal_check(low, reply_from(8, high.position, 7.0), 100.0, f.ctx()).withdrew;
  const bool high_out = on_withdrawal_check(high, reply_from(3, low.position, 7.0), 100.0, f.ctx()).withdrew;
  EXPECT_FALSE(low_out);
  EXPECT_TRUE(high_out);
}

TEST(WithdrawalProperty, ExactlyOneOfAConflictingPairYields) {
  Fixture f;
  Rng rng(21);
  for (int i = 0; i < 5000; ++i) {
    const double now = 1000.0;
    // Quantised start times make ties common.
    const double sa = std::floor(rng.uniform(0.0, 20.0));
    const double sb = std::floor(rng.uniform(0.0, 20.0));
    const Vec3 pa{rng.uniform(0, 50), rng.uniform(0, 50), 0};
    const double angle = rng.uniform(0.0, 6.283185307179586);
    const double d = rng.uniform(0.0, 19.999);
    const Vec3 pb{pa.x + d * std::cos(angle), pa.y + d * std::sin(angle), 0};
    const auto ida = static_cast<NodeId>(rng.uniform(0, 1000));
    const auto idb = ida + 1 + static_cast<NodeId>(rng.uniform(0, 1000));
    SensorNode a = active_since(ida, pa, sa);
    SensorNode b = active_since(idb, pb, sb);
    const int yielded =
        on_withdrawal_check(a, reply_from(idb, pb, now - sb), now, f.ctx()).withdrew +
        on_withdrawal_check(b, reply_from(ida, pa, now - sa), now, f.ctx()).withdrew;
    ASSERT_EQ(yielded, 1) << sa << ' ' << sb << ' ' << d;
  }
}

TEST(OnProbeReply, ActiveNodeRoutesToWithdrawal) {
  Fixture f;
  SensorNode n = active_since(0, {0, 0, 0}, 99.0);
  EXPECT_TRUE(on_probe_reply(n, reply_from(1, {5, 0, 0}, 40.0), 100.0, f.ctx()).withdrew);
}

TEST(SentinelPolicyProperty, SleepAlwaysWithinBounds) {
  const sched::SleepBounds sleep{1.0, 10.0};
  const SentinelPolicy policy(sleep, {1e-3, 0.05});
  Rng rng(22);
  for (int i = 0; i < 10000; ++i) {
    SensorNode n = sleeping_at(0, {});
    n.probe_rate = {rng.uniform(1e-3, 0.05)};
    n.beta = rng.uniform(1.0, 3.0);
    const double t = policy.next_sleep(n, rng.uniform(0.0, 6000.0), rng.uniform_open());
    ASSERT_GE(t, 1.0);
    ASSERT_LE(t, sleep.upper({n.probe_rate.scale(), n.beta}));
  }
}

TEST(Peas, SampleSleepExamples) {
  EXPECT_NEAR(peas::peas_sample_sleep(0.01, std::exp(-1.0)), 100.0, 1e-12);
  EXPECT_NEAR(peas::peas_sample_sleep(0.02, 0.5), 34.657359027997266, 1e-12);
  EXPECT_LT(peas::peas_sample_sleep(0.01, std::nextafter(1.0, 0.0)), 1e-12);
  EXPECT_THROW(peas::peas_sample_sleep(0.01, 0.0), sched::RandomDomainError);
  EXPECT_THROW(peas::peas_sample_sleep(0.01, 1.0), sched::RandomDomainError);
}

TEST(Peas, RateNeverAdapts) {
  const peas::PeasPolicy policy({20.0, 0.02});
  Rng rng(23);
  SensorNode n = sleeping_at(0, {});
  n.probe_rate = {0.02};
  for (double now = 0.0; now < 6000.0; now += 97.0) {
    policy.next_sleep(n, now, rng.uniform_open());
    ASSERT_EQ(n.probe_rate.per_second, 0.02);
  }
}

TEST(Peas, ActiveNodesNeverWithdraw) {
  const peas::PeasPolicy policy({20.0, 0.02});
  ProtocolParams params;
  Rng rng(24);
  const Context ctx{params, policy, rng};
  SensorNode n = active_since(0, {0, 0, 0}, 99.0);
  const Outcome out = on_probe_reply(n, reply_from(1, {5, 0, 0}, 40.0), 100.0, ctx);
  EXPECT_FALSE(out.withdrew);
  EXPECT_EQ(n.state, NodeState::Active);
}

TEST(Peas, RejectsBadParameters) {
  EXPECT_THROW(peas::PeasPolicy({0.0, 0.01}), std::invalid_argument);
  EXPECT_THROW(peas::PeasPolicy({20.0, 0.0}), std::invalid_argument);
}

TEST(ProtocolParams, Validation) {
  ProtocolParams p;
  EXPECT_NO_THROW(p.validate());
  p.delta = 30.0;
  EXPECT_THROW(p.validate(), std::invalid_argument);
  p = {};
  p.comm_radius = 5.0;
  EXPECT_THROW(p.validate(), std::invalid_argument);
  p = {};
  p.k_probes = 0;
  EXPECT_THROW(p.validate(), std::invalid_argument);
}
