#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "pnp/types.hpp"

namespace pnp {

enum class TransducerKind : std::uint8_t {
  Pressure,
  VibroActuator,
  LightSensor,
  Temperature,
  CoGas,
  Accelerometer,
  Flex,
};

inline constexpr std::array<TransducerKind, 7> kAllKinds = {
    TransducerKind::Pressure,    TransducerKind::VibroActuator,
    TransducerKind::LightSensor, TransducerKind::Temperature,
    TransducerKind::CoGas,       TransducerKind::Accelerometer,
    TransducerKind::Flex,
};

inline constexpr int kMinTransducerId = 1;
inline constexpr int kMaxTransducerId = 255;

struct IdInterval {
  int first;
  int last;  // inclusive

  constexpr bool contains(int id) const { return id >= first && id <= last; }
};

struct ValueRange {
  std::int32_t min;
  std::int32_t max;

  constexpr std::int32_t clamp(std::int32_t v) const {
    return v < min ? min : (v > max ? max : v);
  }
  constexpr bool contains(std::int32_t v) const { return v >= min && v <= max; }
};

struct TransducerSpec {
  TransducerKind kind;
  std::span<const IdInterval> ids;
  std::optional<std::uint32_t> sampling_rate_hz;  // empty for actuators
  std::uint32_t axes;
  ValueRange value_range;
  bool is_actuator;

  bool owns(TransducerId id) const;
};

// Returns the kind whose reserved range holds `id`; throws UnassignedId.
TransducerKind kind_for_id(TransducerId id);
std::optional<TransducerKind> try_kind_for_id(TransducerId id);

const TransducerSpec& spec_for_kind(TransducerKind kind);

inline bool is_actuator(TransducerKind kind) {
  return spec_for_kind(kind).is_actuator;
}
inline bool is_sensor(TransducerKind kind) { return !is_actuator(kind); }

// Resolves every id, preserving order. Throws UnassignedId or DuplicateId.
std::vector<std::pair<TransducerId, TransducerKind>> validate_layout(
    std::span<const TransducerId> ids);

// Wire token used in layout descriptions ("pressure", "vibro", ...).
std::string_view kind_token(TransducerKind kind);
std::optional<TransducerKind> kind_from_token(std::string_view token);

// Millisecond offsets within a one-second window at which a sensor of the
// given rate is sampled: round(k * 1000 / rate) mod 1000 for k = 1..rate,
// sorted ascending. Offset 0 denotes the window end.
std::vector<SimTime> sample_offsets_ms(std::uint32_t rate_hz);

}  // namespace pnp
