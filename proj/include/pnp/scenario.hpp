#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "pnp/bus.hpp"
#include "pnp/radio.hpp"
#include "pnp/types.hpp"

namespace pnp {

// A time-of-day interval (from, to] in milliseconds since midnight; `to` may
// be 24:00. Half-open on the left to line up with reporting windows.
struct DayInterval {
  SimTime from_ms = 0;
  SimTime to_ms = 0;

  bool contains(SimTime time_of_day) const {
    return time_of_day > from_ms && time_of_day <= to_ms;
  }
  friend bool operator==(const DayInterval&, const DayInterval&) = default;
};

// Maps absolute time onto (0, 24h], so midnight closes the previous day.
SimTime time_of_day(SimTime t);

struct Generator;

namespace gen {

// base + amplitude * cos(2*pi*(hour - peak_hour)/24)
struct Diurnal {
  std::int32_t base = 0;
  std::int32_t amplitude = 0;
  double peak_hour = 0.0;
  friend bool operator==(const Diurnal&, const Diurnal&) = default;
};

struct Windows {
  std::int32_t low = 0;
  std::int32_t high = 0;
  std::vector<DayInterval> intervals;
  friend bool operator==(const Windows&, const Windows&) = default;
};

// `level` while occupied, exactly 0 otherwise.
struct Occupancy {
  std::vector<DayInterval> intervals;
  std::int32_t level = 0;
  friend bool operator==(const Occupancy&, const Occupancy&) = default;
};

// Per-axis baseline plus an alternating +/- magnitude swing for
// `duration_ms` after each event time-of-day.
struct Burst {
  std::vector<std::int32_t> base;
  std::int32_t magnitude = 0;
  std::vector<SimTime> event_times;
  SimTime duration_ms = 0;
  friend bool operator==(const Burst&, const Burst&) = default;
};

struct Constant {
  std::vector<std::int32_t> value;
  friend bool operator==(const Constant&, const Constant&) = default;
};

// Adds seeded uniform jitter in [-amplitude, amplitude] to every axis of
// the inner generator.
struct Noise {
  std::int32_t amplitude = 0;
  std::shared_ptr<const Generator> inner;
  friend bool operator==(const Noise& a, const Noise& b);
};

}  // namespace gen

struct Generator {
  std::variant<gen::Diurnal, gen::Windows, gen::Occupancy, gen::Burst,
               gen::Constant, gen::Noise>
      shape;

  std::size_t axes() const;
  friend bool operator==(const Generator&, const Generator&) = default;
};

Generator with_noise(std::int32_t amplitude, Generator inner);

struct ChannelTrace {
  std::string channel_id;
  Generator generator;

  // Pure function of (time, seed); values are not clamped.
  std::vector<std::int32_t> sample(SimTime t, std::uint64_t seed) const;
  friend bool operator==(const ChannelTrace&, const ChannelTrace&) = default;
};

struct TransducerConfig {
  TransducerId id;
  std::optional<std::string> channel;  // sensors only
  bool initially_attached = true;
  friend bool operator==(const TransducerConfig&,
                         const TransducerConfig&) = default;
};

struct NodeConfig {
  NodeId id = 0;
  std::string label;
  std::vector<TransducerConfig> transducers;
  // Nodes that only host actuators in a traditional network stay silent.
  bool reports = true;
  friend bool operator==(const NodeConfig&, const NodeConfig&) = default;
};

struct HotPlugAction {
  SimTime time = 0;
  NodeId node = 0;
  BusEventKind action = BusEventKind::Attached;
  TransducerId id;
  friend bool operator==(const HotPlugAction&, const HotPlugAction&) = default;
};

// Buzz `actuator` after `sensor` has read positive for 30 minutes.
struct SitRuleConfig {
  TransducerId sensor;
  TransducerId actuator;
  friend bool operator==(const SitRuleConfig&, const SitRuleConfig&) = default;
};

inline constexpr int kScenarioSchemaVersion = 1;

struct Scenario {
  std::string name;
  std::uint64_t seed = 0;
  SimTime horizon_ms = kMillisPerDay;
  std::vector<ChannelTrace> channels;
  std::vector<NodeConfig> nodes;
  std::vector<HotPlugAction> hotplug;
  std::vector<SitRuleConfig> sit_rules;
  std::optional<RadioParams> radio;  // overrides the energy profile's link

  const ChannelTrace* find_channel(std::string_view id) const;
  const NodeConfig* find_node(NodeId id) const;
  // Node hosting a transducer id; nullptr when none does.
  const NodeConfig* host_of(TransducerId id) const;
  std::size_t transducer_count() const;

  friend bool operator==(const Scenario&, const Scenario&) = default;
};

// The six-node home deployment: kitchen, fridge, sofa, chair, bedroom,
// pillow.
Scenario builtin_home();

// Throws UnknownChannel.
std::vector<std::int32_t> sample_channel(const Scenario& scenario,
                                         std::string_view channel_id,
                                         SimTime t, std::uint64_t seed);

// Throws ValidationError naming the offending field.
void validate_scenario(const Scenario& scenario);

// JSON scenario documents (schema "pnp-scenario", version 1). Throws
// ParseError for malformed documents and ValidationError otherwise.
Scenario load_scenario(std::string_view config);
std::string serialize_scenario(const Scenario& scenario);

// "HH:MM" or "HH:MM:SS" to milliseconds since midnight; "24:00" allowed.
std::optional<SimTime> parse_clock(std::string_view text);
std::string format_clock(SimTime ms_of_day);

}  // namespace pnp
