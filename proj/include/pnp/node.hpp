#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pnp/bus.hpp"
#include "pnp/energy.hpp"
#include "pnp/protocol.hpp"
#include "pnp/registry.hpp"
#include "pnp/types.hpp"

namespace pnp {

// What the node knows about its transducers. Entries are never removed: a
// unit that was pulled out stays listed as Stopped.
class ConnectivityTable {
 public:
  struct Entry {
    TransducerKind kind;
    TransducerStatus status;
    friend bool operator==(const Entry&, const Entry&) = default;
  };

  // Idempotent when the status is already the one the event implies.
  void apply(const BusEvent& ev);

  std::optional<TransducerStatus> status(TransducerId id) const;
  bool is_running(TransducerId id) const {
    return status(id) == TransducerStatus::Running;
  }
  const std::map<TransducerId, Entry>& entries() const { return entries_; }

  // Layout description, ascending by id.
  std::vector<LayoutEntry> layout() const;

  friend bool operator==(const ConnectivityTable&,
                         const ConnectivityTable&) = default;

 private:
  std::map<TransducerId, Entry> entries_;
};

// Physical signal seen by a sensor at a given time, in raw counts.
class SignalSource {
 public:
  virtual ~SignalSource() = default;
  virtual std::vector<std::int32_t> read(TransducerId id, SimTime t) const = 0;
};

struct ControlOutcome {
  std::vector<ActuatorAck> issued;
  std::vector<TransducerId> skipped;
};

// One wireless node: transducer bus, monitoring (connectivity table), data
// collection (staged samples) and interface (message assembly). Energy is
// metered as it is spent; the caller charges radio traffic.
class Node {
 public:
  Node(NodeId id, std::string label, const EnergyParams& params);

  NodeId id() const { return id_; }
  const std::string& label() const { return label_; }

  Bus& bus() { return bus_; }
  const Bus& bus() const { return bus_; }
  const ConnectivityTable& connectivity() const { return table_; }

  // Registers a transducer the node may host; its sampling offsets join the
  // node's tick schedule even while it is unplugged.
  void install(TransducerId id);
  const std::vector<TransducerId>& installed() const { return installed_; }

  // Plug or pull a unit and let the monitoring module see the broadcast.
  BusEvent plug(TransducerId id, SimTime time);
  BusEvent unplug(TransducerId id, SimTime time);

  void handle_bus_event(const BusEvent& ev);
  // Consumes every pending broadcast on the bus.
  void sync_bus();

  // Millisecond offsets within a window at which some installed sensor is
  // sampled; offset 0 stands for the window end.
  std::vector<SimTime> tick_offsets() const;

  // Polls every running sensor due at `tick` and stages the readings.
  std::size_t collect(SimTime tick, const SignalSource& env);

  // Builds the window's message and clears the staged samples.
  MeasurementMessage emit_measurement(SimTime window_end);

  // Throws WrongNode. Running actuators are commanded, the rest skipped.
  ControlOutcome handle_control(const ControlMessage& msg, SimTime now);

  // Settles actuation energy when an actuator stops at `now`.
  void actuator_expired(TransducerId id, SimTime now);

  // Baseline draw for one window: MCU sleep, plus radio listening when the
  // node hosts a running actuator.
  void charge_window(SimTime window_ms);
  void charge_airtime(std::int64_t airtime_us);

  bool hosts_running_actuator() const;

  const std::vector<RawSample>& staged() const { return staged_; }
  std::uint64_t samples_collected() const { return collected_; }
  std::uint64_t samples_emitted() const { return emitted_; }
  // Readings staged from a unit pulled out before its window closed.
  std::uint64_t samples_dropped() const { return dropped_; }

  EnergyMeter& meter() { return meter_; }
  const EnergyMeter& meter() const { return meter_; }
  Activity& activity() { return activity_; }
  const Activity& activity() const { return activity_; }

 private:
  void settle_actuator(TransducerId id, SimTime now);
  void drop_staged(TransducerId id);

  NodeId id_;
  std::string label_;
  const EnergyParams* params_;
  Bus bus_;
  ConnectivityTable table_;
  std::vector<TransducerId> installed_;
  // offset -> sensors due at that offset
  std::map<SimTime, std::vector<TransducerId>> schedule_;
  std::vector<RawSample> staged_;
  std::map<TransducerId, SimTime> active_since_;
  std::uint64_t collected_ = 0;
  std::uint64_t emitted_ = 0;
  std::uint64_t dropped_ = 0;
  EnergyMeter meter_;
  Activity activity_;
};

}  // namespace pnp
