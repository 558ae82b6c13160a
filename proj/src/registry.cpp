#include "pnp/registry.hpp"

#include <algorithm>
#include <set>
#include <string>

#include "pnp/error.hpp"

namespace pnp {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::UnassignedId: return "UnassignedId";
    case ErrorCode::DuplicateId: return "DuplicateId";
    case ErrorCode::AlreadyPresent: return "AlreadyPresent";
    case ErrorCode::NotPresent: return "NotPresent";
    case ErrorCode::NotASensor: return "NotASensor";
    case ErrorCode::NotAnActuator: return "NotAnActuator";
    case ErrorCode::WrongNode: return "WrongNode";
    case ErrorCode::MalformedXml: return "MalformedXml";
    case ErrorCode::SchemaViolation: return "SchemaViolation";
    case ErrorCode::InvariantViolation: return "InvariantViolation";
    case ErrorCode::PastEvent: return "PastEvent";
    case ErrorCode::NegativeDebit: return "NegativeDebit";
    case ErrorCode::MismatchedHorizon: return "MismatchedHorizon";
    case ErrorCode::MismatchedTransducers: return "MismatchedTransducers";
    case ErrorCode::UnknownChannel: return "UnknownChannel";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ValidationError: return "ValidationError";
    case ErrorCode::EmptyStore: return "EmptyStore";
  }
  return "Unknown";
}

namespace {

constexpr ValueRange kRawCounts{0, 1023};

constexpr IdInterval kPressureIds[] = {{1, 20}};
constexpr IdInterval kActuatorIds[] = {{21, 40}};
constexpr IdInterval kLightIds[] = {{41, 41}, {57, 57}};
constexpr IdInterval kTemperatureIds[] = {{72, 75}};
// The catalog remark for this row names an ambient-light part; the row label
// and the MQ-7 part list both say CO gas, which is what we use.
constexpr IdInterval kCoGasIds[] = {{76, 78}};
constexpr IdInterval kAccelerometerIds[] = {{83, 84}};
constexpr IdInterval kFlexIds[] = {{85, 90}};

const std::array<TransducerSpec, 7> kSpecs = {{
    {TransducerKind::Pressure, kPressureIds, 1u, 1, kRawCounts, false},
    {TransducerKind::VibroActuator, kActuatorIds, std::nullopt, 1, kRawCounts,
     true},
    {TransducerKind::LightSensor, kLightIds, 1u, 1, kRawCounts, false},
    {TransducerKind::Temperature, kTemperatureIds, 1u, 1, kRawCounts, false},
    {TransducerKind::CoGas, kCoGasIds, 1u, 1, kRawCounts, false},
    {TransducerKind::Accelerometer, kAccelerometerIds, 30u, 3, kRawCounts,
     false},
    {TransducerKind::Flex, kFlexIds, 1u, 1, kRawCounts, false},
}};

}  // namespace

bool TransducerSpec::owns(TransducerId id) const {
  return std::any_of(ids.begin(), ids.end(), [&](const IdInterval& r) {
    return r.contains(id.value());
  });
}

std::optional<TransducerKind> try_kind_for_id(TransducerId id) {
  for (const auto& spec : kSpecs) {
    if (spec.owns(id)) return spec.kind;
  }
  return std::nullopt;
}

TransducerKind kind_for_id(TransducerId id) {
  if (auto kind = try_kind_for_id(id)) return *kind;
  throw Error(ErrorCode::UnassignedId,
              "transducer id " + std::to_string(id.value()) +
                  " is not reserved for any kind");
}

const TransducerSpec& spec_for_kind(TransducerKind kind) {
  return kSpecs[static_cast<std::size_t>(kind)];
}

std::vector<std::pair<TransducerId, TransducerKind>> validate_layout(
    std::span<const TransducerId> ids) {
  std::vector<std::pair<TransducerId, TransducerKind>> resolved;
  resolved.reserve(ids.size());
  std::set<TransducerId> seen;
  for (TransducerId id : ids) {
    TransducerKind kind = kind_for_id(id);
    if (!seen.insert(id).second) {
      throw Error(ErrorCode::DuplicateId,
                  "transducer id " + std::to_string(id.value()) +
                      " appears more than once");
    }
    resolved.emplace_back(id, kind);
  }
  return resolved;
}

std::string_view kind_token(TransducerKind kind) {
  switch (kind) {
    case TransducerKind::Pressure: return "pressure";
    case TransducerKind::VibroActuator: return "vibro";
    case TransducerKind::LightSensor: return "light";
    case TransducerKind::Temperature: return "temp";
    case TransducerKind::CoGas: return "co";
    case TransducerKind::Accelerometer: return "accel";
    case TransducerKind::Flex: return "flex";
  }
  return "?";
}

std::optional<TransducerKind> kind_from_token(std::string_view token) {
  for (TransducerKind kind : kAllKinds) {
    if (kind_token(kind) == token) return kind;
  }
  return std::nullopt;
}

std::vector<SimTime> sample_offsets_ms(std::uint32_t rate_hz) {
  std::vector<SimTime> offsets;
  offsets.reserve(rate_hz);
  const auto rate = static_cast<SimTime>(rate_hz);
  for (SimTime k = 1; k <= rate; ++k) {
    // Round half up without floating point.
    SimTime at = (2 * k * kMillisPerSecond + rate) / (2 * rate);
    offsets.push_back(at % kMillisPerSecond);
  }
  std::sort(offsets.begin(), offsets.end());
  offsets.erase(std::unique(offsets.begin(), offsets.end()), offsets.end());
  return offsets;
}

}  // namespace pnp
