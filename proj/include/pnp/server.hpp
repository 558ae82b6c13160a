#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "pnp/protocol.hpp"
#include "pnp/scenario.hpp"
#include "pnp/types.hpp"

namespace pnp {

// One heatmap channel: a sensor axis on a node.
struct ChannelKey {
  NodeId node = 0;
  TransducerId id;
  std::uint32_t axis = 0;

  friend auto operator<=>(const ChannelKey&, const ChannelKey&) = default;
};

// Sum and count of sample values per channel per time slot. Slot k covers
// (k * slot_ms, (k + 1) * slot_ms].
class ChannelAggregates {
 public:
  struct Cell {
    std::int64_t sum = 0;
    std::int64_t count = 0;
  };

  ChannelAggregates() : ChannelAggregates(60'000) {}
  explicit ChannelAggregates(SimTime slot_ms);

  void add(const ChannelKey& key, SimTime t, std::int32_t value);
  void add(NodeId node, const RawSample& sample);

  SimTime slot_ms() const { return slot_ms_; }
  bool empty() const { return cells_.empty(); }
  const std::map<ChannelKey, std::vector<Cell>>& cells() const { return cells_; }
  std::uint64_t samples() const { return samples_; }

  friend bool operator==(const ChannelAggregates& a, const ChannelAggregates& b);

 private:
  SimTime slot_ms_;
  std::map<ChannelKey, std::vector<Cell>> cells_;
  std::uint64_t samples_ = 0;  // sensor readings, not axis values
};

struct LayoutChange {
  NodeId node = 0;
  SimTime timestamp_ms = 0;
  std::vector<TransducerId> started;  // now running, previously not
  std::vector<TransducerId> stopped;  // previously running, now not

  friend bool operator==(const LayoutChange&, const LayoutChange&) = default;
};

struct Rejection {
  SimTime receive_time = 0;
  std::string reason;
};

struct StoredRecord {
  std::uint64_t id = 0;
  SimTime receive_time = 0;
  MeasurementMessage message;

  friend bool operator==(const StoredRecord&, const StoredRecord&) = default;
};

struct StoreOptions {
  std::ostream* records_out = nullptr;  // newline-delimited JSON records
  std::ostream* samples_out = nullptr;  // node_id,tx_id,timestamp_ms,axis,value
  bool retain_records = false;
  SimTime slot_ms = 60'000;
};

// Append-only measurement store. Messages may arrive slightly out of
// (timestamp, node) order because airtime differs per node; they are held
// back until no earlier message can still arrive, then appended in order.
class Store {
 public:
  explicit Store(StoreOptions options = {});

  struct Ingested {
    std::uint64_t record_id;
    MeasurementMessage message;
  };

  // Decodes and queues a message. Decode failures are counted as rejects
  // and rethrown; the store is left unchanged.
  Ingested ingest(std::string_view bytes, SimTime receive_time);

  // Appends everything still held back.
  void flush();

  std::uint64_t record_count() const { return appended_ + pending_.size(); }
  std::uint64_t appended() const { return appended_; }
  std::uint64_t reject_count() const { return rejects_.size(); }
  const std::vector<Rejection>& rejects() const { return rejects_; }
  std::uint64_t sample_count() const { return samples_; }
  std::uint64_t samples_from(NodeId node) const;
  const std::vector<LayoutChange>& layout_changes() const { return changes_; }
  const std::vector<StoredRecord>& records() const { return records_; }
  const ChannelAggregates& aggregates() const { return aggregates_; }

 private:
  using Key = std::pair<SimTime, NodeId>;

  void seal_before(SimTime receive_time);
  void append(StoredRecord&& record);

  StoreOptions options_;
  std::multimap<Key, StoredRecord> pending_;
  std::uint64_t next_id_ = 0;
  std::uint64_t appended_ = 0;
  std::uint64_t samples_ = 0;
  std::map<NodeId, std::uint64_t> samples_by_node_;
  std::map<NodeId, std::vector<LayoutEntry>> last_layout_;
  std::vector<LayoutChange> changes_;
  std::vector<Rejection> rejects_;
  std::vector<StoredRecord> records_;
  ChannelAggregates aggregates_;
  std::optional<Key> last_appended_;
};

// One NDJSON line for a stored record.
std::string record_json(const StoredRecord& record);

// Rebuilds per-slot aggregates from a samples CSV written by the store.
// Throws ParseError on malformed lines.
ChannelAggregates read_samples_csv(std::istream& in, SimTime slot_ms = 60'000);

// Buzzes an actuator after its pressure sensor has read positive for a
// continuous threshold, then again every threshold while it stays positive.
// A zero reading resets the timer.
class SitRule {
 public:
  static constexpr SimTime kThresholdMs = 1'800'000;
  static constexpr SimTime kBuzzMs = 30'000;

  SitRule(TransducerId sensor, TransducerId actuator, NodeId actuator_node);

  std::optional<ControlMessage> observe(std::int32_t reading, SimTime time);

  TransducerId sensor() const { return sensor_; }
  TransducerId actuator() const { return actuator_; }
  NodeId actuator_node() const { return node_; }
  std::optional<SimTime> positive_since() const { return since_; }
  std::optional<SimTime> last_buzz_at() const { return last_buzz_; }

 private:
  TransducerId sensor_;
  TransducerId actuator_;
  NodeId node_;
  std::optional<SimTime> since_;
  std::optional<SimTime> last_buzz_;
  SimTime next_due_ = 0;
};

// Store plus the control rules, as run by the central server.
class Server {
 public:
  Server(Store& store, const Scenario& scenario);

  struct Reply {
    std::uint64_t record_id;
    std::vector<ControlMessage> controls;
  };

  // Throws what Store::ingest throws.
  Reply receive(std::string_view bytes, SimTime receive_time);

  Store& store() { return *store_; }
  const std::vector<SitRule>& rules() const { return rules_; }

 private:
  Store* store_;
  std::vector<SitRule> rules_;
  std::multimap<TransducerId, std::size_t> by_sensor_;
};

struct Heatmap {
  SimTime bin_ms = 0;
  std::vector<std::string> row_labels;     // "node1/co76", "node2/accel83.x"
  std::vector<std::string> column_labels;  // bin start, "HH:MM"
  std::vector<std::vector<double>> values;  // rows x bins, in [0, 1]

  std::string to_csv() const;
  // Binary PGM, `cell_px` square pixels per cell, white = row minimum.
  std::string to_pgm(int cell_px = 8) const;
};

// Rows are node-major, sensor-minor, one per axis. Each row is min-max
// normalized over the horizon; bins with no samples and constant rows read
// 0. Throws EmptyStore, or ValidationError when bins do not tile the
// horizon.
Heatmap heatmap_export(const ChannelAggregates& aggregates, int bin_minutes,
                       SimTime horizon_ms);

}  // namespace pnp
