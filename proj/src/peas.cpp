#include "sentinel/peas.hpp"

#include <cmath>
#include <sstream>

namespace sentinel::peas {

void PeasParams::validate() const {
  if (!(probing_range > 0.0)) throw std::invalid_argument("PEAS probing range must be positive");
  if (!(lambda_peas > 0.0) || !std::isfinite(lambda_peas)) {
    throw std::invalid_argument("PEAS wake rate must be positive");
  }
}

double peas_sample_sleep(double lambda_peas, double r) {
  if (!(r > 0.0 && r < 1.0)) {
    std::ostringstream msg;
    msg << "uniform variate " << r << " outside (0, 1)";
    throw sched::RandomDomainError(msg.str());
  }
  if (!(lambda_peas > 0.0)) throw std::invalid_argument("PEAS wake rate must be positive");
  return -std::log(r) / lambda_peas;
}

PeasPolicy::PeasPolicy(PeasParams params) : params_(params) { params_.validate(); }

double PeasPolicy::next_sleep(protocol::SensorNode& node, double /*now*/, double r) const {
  node.probe_rate = {params_.lambda_peas};
  return peas_sample_sleep(params_.lambda_peas, r);
}

}  // namespace sentinel::peas
