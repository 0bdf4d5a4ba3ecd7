#pragma once

// Unit-disk broadcast medium. A frame reaches every node within the
// communication radius that is listening when it starts. Overlapping frames
// audible at the same receiver destroy each other there (no capture); a node
// cannot receive while it is itself transmitting.

#include <cstdint>
#include <functional>
#include <unordered_map>
#include <vector>

#include "sentinel/event_queue.hpp"
#include "sentinel/protocol.hpp"
#include "sentinel/random.hpp"

namespace sentinel::sim {

struct RadioParams {
  double comm_radius = 20.0;
  double bitrate = 250000.0;  // bits per second
  double loss_probability = 0.05;
  bool collisions_enabled = true;
};

struct Reception {
  protocol::NodeId receiver = 0;
  bool corrupted = false;  // overlapped by another audible frame
  bool lost = false;       // independent channel loss
};

struct Transmission {
  TransmissionId id = 0;
  protocol::NodeId sender = 0;
  double start = 0.0;
  double end = 0.0;
  std::vector<Reception> receptions;
};

class Radio {
 public:
  Radio(std::vector<protocol::Vec3> positions, RadioParams params);

  [[nodiscard]] double airtime(std::uint32_t octets) const {
    return octets * 8.0 / params_.bitrate;
  }

  /// Starts a frame at `now`. `listening(id)` tells whether a node's radio is
  /// on at that instant.
  TransmissionId transmit(protocol::NodeId sender, std::uint32_t octets, double now,
                          const std::function<bool(protocol::NodeId)>& listening,
                          Rng& rng);

  /// Ends a frame and returns the receivers that got it intact.
  std::vector<protocol::NodeId> complete(TransmissionId id);

  [[nodiscard]] const Transmission& transmission(TransmissionId id) const;
  [[nodiscard]] const std::vector<protocol::NodeId>& neighbors(protocol::NodeId id) const {
    return neighbors_[id];
  }
  [[nodiscard]] bool audible(protocol::NodeId sender, protocol::NodeId at) const;
  [[nodiscard]] std::uint64_t collisions() const { return collisions_; }
  [[nodiscard]] const RadioParams& params() const { return params_; }

 private:
  std::vector<protocol::Vec3> positions_;
  RadioParams params_;
  std::vector<std::vector<protocol::NodeId>> neighbors_;
  std::unordered_map<TransmissionId, Transmission> frames_;
  std::vector<TransmissionId> in_flight_;
  TransmissionId next_id_ = 0;
  std::uint64_t collisions_ = 0;
};

}  // namespace sentinel::sim
