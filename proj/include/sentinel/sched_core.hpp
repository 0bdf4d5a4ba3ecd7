#pragma once

// Weibull sleep-timer sampling and hazard-driven probe-rate adaptation.
//
// A reserve node draws its sleep time from a Weibull distribution whose scale
// is the inverse of its current probe rate, and after every successful probe
// it replaces that rate with the Weibull hazard evaluated at the network's
// age. For shape > 1 the hazard grows with time, so sleep timers shrink as the
// deployment ages and failed sentinels get replaced faster.

#include <stdexcept>

namespace sentinel::sched {

/// Weibull parameters: scale `alpha` (seconds, the inverse probe rate) and
/// dimensionless shape `beta`.
struct WeibullParams {
  double alpha = 100.0;
  double beta = 2.0;

  void validate() const;
};

/// Probe rate in events per second.
struct ProbeRate {
  double per_second = 0.01;

  [[nodiscard]] double scale() const { return 1.0 / per_second; }
};

/// Bounds applied to a sampled sleep time. The upper bound is a multiple of
/// the current Weibull scale.
struct SleepBounds {
  double min_seconds = 1.0;
  double max_scale_factor = 10.0;

  void validate() const;
  [[nodiscard]] double lower(const WeibullParams&) const { return min_seconds; }
  [[nodiscard]] double upper(const WeibullParams& params) const;
};

struct RateBounds {
  double min_per_second = 1e-4;
  double max_per_second = 10.0;

  void validate() const;
};

/// Thrown when a caller hands a uniform variate outside (0, 1); this always
/// indicates a broken random source.
class RandomDomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Unclamped inverse of the Weibull survival function:
/// alpha * (ln(1/r))^(1/beta), so that exp(-(t/alpha)^beta) == r.
double inverse_survival(const WeibullParams& params, double r);

/// Sleep time for uniform variate `r`, clamped to `bounds`.
double sample_sleep_time(const WeibullParams& params, double r,
                         const SleepBounds& bounds = {});

double weibull_cdf(const WeibullParams& params, double t);

/// h(t) = (beta/alpha) * (t/alpha)^(beta-1). Returns 0 at t == 0 for
/// beta > 1 and +inf at t == 0 for beta < 1.
ProbeRate hazard_rate(double t, const WeibullParams& params);

/// New probe rate after a successful probe at network time `t_network`:
/// the hazard of Weibull(1/lambda_old, beta), clamped to `bounds`.
ProbeRate update_probe_rate(ProbeRate lambda_old, double t_network,
                            double beta, const RateBounds& bounds = {});

}  // namespace sentinel::sched
