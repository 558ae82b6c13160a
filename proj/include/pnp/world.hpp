#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "pnp/energy.hpp"
#include "pnp/protocol.hpp"
#include "pnp/scenario.hpp"
#include "pnp/server.hpp"
#include "pnp/simkernel.hpp"

namespace pnp {

struct RunOptions {
  EnergyParams params;
  std::optional<std::uint64_t> seed;       // overrides the scenario seed
  std::optional<SimTime> horizon_ms;       // overrides the scenario horizon
  bool retain_events = false;
  bool retain_records = false;
  std::ostream* event_log_out = nullptr;
  std::ostream* records_out = nullptr;
  std::ostream* samples_out = nullptr;
};

// A control message the server sent and what became of it at the node.
struct ControlTrace {
  SimTime sent = 0;
  SimTime delivered = 0;
  std::string bytes;
  ControlMessage message;
  std::size_t issued = 0;
  std::size_t skipped = 0;
  std::vector<SimTime> active_ms;  // duration each issued command ran for
};

struct NodeCounters {
  NodeId node = 0;
  std::uint64_t collected = 0;
  std::uint64_t emitted = 0;
  std::uint64_t dropped = 0;
  std::uint64_t messages = 0;
};

struct RunResult {
  std::string scenario;
  std::uint64_t seed = 0;
  SimTime horizon_ms = 0;
  std::string profile;

  std::uint64_t events = 0;
  std::map<EventTag, std::uint64_t> events_by_tag;
  std::vector<EventLog::Record> event_records;  // when retained
  std::string event_digest;
  std::string records_digest;
  std::string samples_digest;

  EnergyReport energy;
  std::vector<NodeCounters> nodes;
  std::uint64_t messages_sent = 0;
  std::uint64_t messages_lost = 0;
  std::uint64_t records = 0;
  std::uint64_t rejects = 0;
  std::uint64_t samples_collected = 0;
  std::uint64_t samples_ingested = 0;
  std::uint64_t samples_dropped = 0;

  std::vector<ControlTrace> controls;
  std::vector<LayoutChange> layout_changes;
  std::vector<StoredRecord> stored;  // when retained
  ChannelAggregates aggregates;

  std::string energy_digest() const;
};

// Runs a scenario to its horizon, then lets in-flight traffic land.
RunResult simulate(const Scenario& scenario, const RunOptions& options);

// The link a scenario runs with: its own radio block if any, else the
// profile's.
EnergyParams effective_params(const Scenario& scenario, const EnergyParams& profile);

struct Comparison {
  RunResult proposed;
  RunResult traditional;
  TraditionalNetwork mapping;
  ComparisonReport report;
};

// Runs the scenario and its one-transducer-per-node equivalent on the same
// traces and horizon.
Comparison compare_networks(const Scenario& scenario, const RunOptions& options);

// Readings the scenario's sensors produce over a horizon, from the attached
// intervals implied by the initial state and hot-plug script.
std::uint64_t expected_samples(const Scenario& scenario, SimTime horizon_ms);
std::map<NodeId, std::uint64_t> expected_samples_by_node(const Scenario& scenario,
                                                         SimTime horizon_ms);

}  // namespace pnp
