#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <vector>

#include "pnp/registry.hpp"
#include "pnp/types.hpp"

namespace pnp {

enum class BusEventKind : std::uint8_t { Attached, Detached };

// A transducer's ID broadcast when it is plugged in or pulled out.
struct BusEvent {
  BusEventKind kind;
  TransducerId id;
  SimTime time = 0;

  friend bool operator==(const BusEvent&, const BusEvent&) = default;
};

struct ActuatorAck {
  TransducerId id;
  bool active = false;
  SimTime active_until = 0;
};

// The on-node wired bus. The data collection side polls sensors and drives
// actuators; transducers announce attach/detach by broadcasting their ID.
// Transfers are instantaneous at millisecond resolution.
class Bus {
 public:
  BusEvent attach(TransducerId id, SimTime time);
  BusEvent detach(TransducerId id, SimTime time);

  // Reads a sensor. `env_value` is the physical signal in raw counts, one
  // entry per axis; out-of-range values saturate like a real ADC.
  RawSample poll(TransducerId id, SimTime time,
                 std::span<const std::int32_t> env_value) const;

  ActuatorAck command(TransducerId id, bool activate, SimTime duration_ms,
                      SimTime now);

  // Hot-plug broadcasts not yet consumed by the monitoring side, ordered by
  // time; broadcasts sharing a timestamp are serialized lowest ID first.
  std::vector<BusEvent> take_events();
  const std::vector<BusEvent>& pending_events() const { return pending_; }

  bool is_present(TransducerId id) const { return present_.contains(id); }
  const std::set<TransducerId>& present() const { return present_; }

  bool is_active(TransducerId id, SimTime now) const;
  std::optional<SimTime> active_until(TransducerId id) const;

 private:
  std::set<TransducerId> present_;
  std::vector<BusEvent> pending_;
  std::map<TransducerId, SimTime> active_until_;
};

}  // namespace pnp
