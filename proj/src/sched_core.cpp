#include "sentinel/sched_core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace sentinel::sched {

namespace {

bool positive_finite(double v) { return std::isfinite(v) && v > 0.0; }

}  // namespace

void WeibullParams::validate() const {
  if (!positive_finite(alpha) || !positive_finite(beta)) {
    std::ostringstream msg;
    msg << "invalid Weibull parameters: alpha = " << alpha
        << ", beta = " << beta;
    throw std::invalid_argument(msg.str());
  }
}

void SleepBounds::validate() const {
  if (!(min_seconds >= 0.0) || !positive_finite(max_scale_factor)) {
    throw std::invalid_argument("invalid sleep bounds");
  }
}

double SleepBounds::upper(const WeibullParams& params) const {
  // A tiny scale can push the upper bound below the floor; the floor wins.
  return std::max(min_seconds, max_scale_factor * params.alpha);
}

void RateBounds::validate() const {
  if (!positive_finite(min_per_second) || !positive_finite(max_per_second) ||
      min_per_second > max_per_second) {
    throw std::invalid_argument("invalid probe rate bounds");
  }
}

double inverse_survival(const WeibullParams& params, double r) {
  params.validate();
  if (!(r > 0.0 && r < 1.0)) {
    std::ostringstream msg;
    msg << "uniform variate " << r << " outside (0, 1)";
    throw RandomDomainError(msg.str());
  }
  return params.alpha * std::pow(-std::log(r), 1.0 / params.beta);
}

double sample_sleep_time(const WeibullParams& params, double r,
                         const SleepBounds& bounds) {
  const double raw = inverse_survival(params, r);
  return std::clamp(raw, bounds.lower(params), bounds.upper(params));
}

double weibull_cdf(const WeibullParams& params, double t) {
  params.validate();
  if (t <= 0.0) return 0.0;
  return -std::expm1(-std::pow(t / params.alpha, params.beta));
}

ProbeRate hazard_rate(double t, const WeibullParams& params) {
  params.validate();
  if (t < 0.0) throw std::invalid_argument("hazard evaluated at negative time");
  const double a = params.alpha;
  const double b = params.beta;
  if (t == 0.0) {
    if (b > 1.0) return {0.0};
    if (b < 1.0) return {std::numeric_limits<double>::infinity()};
    return {1.0 / a};
  }
  return {(b / a) * std::pow(t / a, b - 1.0)};
}

ProbeRate update_probe_rate(ProbeRate lambda_old, double t_network,
                            double beta, const RateBounds& bounds) {
  if (!positive_finite(lambda_old.per_second)) {
    throw std::invalid_argument("probe rate must be positive and finite");
  }
  if (t_network < 0.0) throw std::invalid_argument("negative network time");
  const ProbeRate h =
      hazard_rate(t_network, WeibullParams{lambda_old.scale(), beta});
  return {std::clamp(h.per_second, bounds.min_per_second,
                     bounds.max_per_second)};
}

}  // namespace sentinel::sched
