#pragma once

// Simplified PEAS baseline: sleepers wake at a fixed exponential rate, probe
// within the probing range, and go back to sleep on any reply. A node that
// hears nothing becomes a working node and never sleeps again.

#include "sentinel/protocol.hpp"

namespace sentinel::peas {

struct PeasParams {
  double probing_range = 20.0;  // the PEAS distance c, m
  double lambda_peas = 0.01;    // wake rate, 1/s

  void validate() const;
};

/// Exponential sleep: ln(1/r) / lambda. Rejects r outside (0, 1).
double peas_sample_sleep(double lambda_peas, double r);

/// Fixed-rate exponential sleep, no rate adaptation, no withdrawal.
class PeasPolicy final : public protocol::SleepPolicy {
 public:
  explicit PeasPolicy(PeasParams params);

  double next_sleep(protocol::SensorNode& node, double now, double r) const override;
  [[nodiscard]] bool withdraws_on_conflict() const override { return false; }

  [[nodiscard]] const PeasParams& params() const { return params_; }

 private:
  PeasParams params_;
};

}  // namespace sentinel::peas
