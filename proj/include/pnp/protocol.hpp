#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "pnp/registry.hpp"
#include "pnp/types.hpp"

// Canonical XML wire format shared by nodes and the server.
//
//   <node id="1" t="1000" if="zigbee">
//     <layout><tx id="72" kind="temp" status="running"/>...</layout>
//     <data><s id="72" t="1000">512</s>...</data>
//   </node>
//
//   <control node="4"><act id="21" on="1" ms="30000"/></control>
//
// Encoders emit no whitespace between elements and self-close empty
// containers. Numbers are unsigned decimal integers without leading zeros.
// Decoders accept insignificant whitespace but are otherwise strict: unknown
// elements, attributes, kinds or statuses are schema violations.
namespace pnp {

enum class TransducerStatus : std::uint8_t { Running, Stopped };

std::string_view status_token(TransducerStatus status);

enum class InterfaceKind : std::uint8_t { ZigBee };

std::string_view interface_token(InterfaceKind kind);

struct LayoutEntry {
  TransducerId id;
  TransducerKind kind;
  TransducerStatus status;

  friend bool operator==(const LayoutEntry&, const LayoutEntry&) = default;
};

struct MeasurementMessage {
  NodeId node_id = 0;
  SimTime timestamp_ms = 0;
  InterfaceKind interface = InterfaceKind::ZigBee;
  std::vector<LayoutEntry> layout;
  std::vector<RawSample> samples;

  friend bool operator==(const MeasurementMessage&,
                         const MeasurementMessage&) = default;
};

struct ActuatorCommand {
  TransducerId actuator_id;
  bool activate = false;
  SimTime duration_ms = 0;

  friend bool operator==(const ActuatorCommand&,
                         const ActuatorCommand&) = default;
};

struct ControlMessage {
  NodeId node_id = 0;
  std::vector<ActuatorCommand> commands;

  friend bool operator==(const ControlMessage&, const ControlMessage&) = default;
};

// Reporting window covered by a measurement message: (t - 1000, t].
inline constexpr SimTime kReportingWindowMs = 1000;

// Throw InvariantViolation when a message breaks its type invariants.
void check_invariants(const MeasurementMessage& msg);
void check_invariants(const ControlMessage& msg);

std::string encode(const MeasurementMessage& msg);
std::string encode(const ControlMessage& msg);

MeasurementMessage decode_measurement(std::string_view bytes);
ControlMessage decode_control(std::string_view bytes);

std::size_t payload_size(const MeasurementMessage& msg);
std::size_t payload_size(const ControlMessage& msg);

}  // namespace pnp
