#include "sentinel/event_queue.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace sentinel::sim {

void EventQueue::push(SimEvent event) {
  if (!std::isfinite(event.time) || event.time < clock_) {
    std::ostringstream msg;
    msg << "event scheduled at " << event.time << " before clock " << clock_;
    throw std::logic_error(msg.str());
  }
  event.sequence = next_sequence_++;
  heap_.push(std::move(event));
}

SimEvent EventQueue::pop() {
  if (heap_.empty()) throw std::logic_error("pop from empty event queue");
  SimEvent event = heap_.top();
  heap_.pop();
  if (event.time < clock_) throw std::logic_error("event queue went back in time");
  clock_ = event.time;
  return event;
}

}  // namespace sentinel::sim
