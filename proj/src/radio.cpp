#include "sentinel/radio.hpp"

#include <algorithm>
#include <stdexcept>

namespace sentinel::sim {

using protocol::NodeId;

Radio::Radio(std::vector<protocol::Vec3> positions, RadioParams params)
    : positions_(std::move(positions)), params_(params), neighbors_(positions_.size()) {
  if (!(params_.comm_radius > 0.0) || !(params_.bitrate > 0.0)) {
    throw std::invalid_argument("radio needs positive range and bitrate");
  }
  if (!(params_.loss_probability >= 0.0 && params_.loss_probability < 1.0)) {
    throw std::invalid_argument("loss probability must lie in [0, 1)");
  }
  for (NodeId i = 0; i < positions_.size(); ++i) {
    for (NodeId j = 0; j < positions_.size(); ++j) {
      if (i != j && audible(i, j)) neighbors_[i].push_back(j);
    }
  }
}

bool Radio::audible(NodeId sender, NodeId at) const {
  return sender != at &&
         protocol::distance(positions_[sender], positions_[at]) <= params_.comm_radius;
}

TransmissionId Radio::transmit(NodeId sender, std::uint32_t octets, double now,
                               const std::function<bool(NodeId)>& listening, Rng& rng) {
  std::erase_if(in_flight_, [&](TransmissionId id) { return frames_.at(id).end <= now; });

  Transmission tx{next_id_++, sender, now, now + airtime(octets), {}};
  std::vector<NodeId> clashed;

  for (const NodeId j : neighbors_[sender]) {
    if (!listening(j)) continue;
    Reception rx{j};
    rx.lost = rng.bernoulli(params_.loss_probability);
    if (params_.collisions_enabled) {
      for (const TransmissionId other : in_flight_) {
        const Transmission& f = frames_.at(other);
        if (f.sender == j) {
          rx.corrupted = true;  // half duplex
        } else if (audible(f.sender, j)) {
          rx.corrupted = true;
          clashed.push_back(j);
        }
      }
    }
    tx.receptions.push_back(rx);
  }

  if (params_.collisions_enabled) {
    for (const TransmissionId other : in_flight_) {
      for (Reception& rx : frames_.at(other).receptions) {
        if (rx.receiver == sender) {
          rx.corrupted = true;
        } else if (audible(sender, rx.receiver)) {
          rx.corrupted = true;
          clashed.push_back(rx.receiver);
        }
      }
    }
  }

  std::sort(clashed.begin(), clashed.end());
  collisions_ += static_cast<std::uint64_t>(
      std::unique(clashed.begin(), clashed.end()) - clashed.begin());

  const TransmissionId id = tx.id;
  frames_.emplace(id, std::move(tx));
  in_flight_.push_back(id);
  return id;
}

std::vector<NodeId> Radio::complete(TransmissionId id) {
  const auto it = frames_.find(id);
  if (it == frames_.end()) throw std::logic_error("unknown transmission");
  std::vector<NodeId> delivered;
  for (const Reception& rx : it->second.receptions) {
    if (!rx.corrupted && !rx.lost) delivered.push_back(rx.receiver);
  }
  std::erase(in_flight_, id);
  frames_.erase(it);
  return delivered;
}

const Transmission& Radio::transmission(TransmissionId id) const { return frames_.at(id); }

}  // namespace sentinel::sim
