#include "pnp/server.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>

#include "pnp/error.hpp"
#include "pnp/registry.hpp"

namespace pnp {

// ------------------------------------------------------------- aggregates

ChannelAggregates::ChannelAggregates(SimTime slot_ms) : slot_ms_(slot_ms) {
  if (slot_ms <= 0) throw std::invalid_argument("slot_ms must be positive");
}

void ChannelAggregates::add(const ChannelKey& key, SimTime t, std::int32_t value) {
  auto& row = cells_[key];
  const auto slot = static_cast<std::size_t>((t - 1) / slot_ms_);
  if (row.size() <= slot) row.resize(slot + 1);
  row[slot].sum += value;
  ++row[slot].count;
}

void ChannelAggregates::add(NodeId node, const RawSample& sample) {
  for (std::size_t axis = 0; axis < sample.values.size(); ++axis) {
    add(ChannelKey{node, sample.id, static_cast<std::uint32_t>(axis)}, sample.time,
        sample.values[axis]);
  }
  ++samples_;
}

bool operator==(const ChannelAggregates& a, const ChannelAggregates& b) {
  if (a.slot_ms_ != b.slot_ms_ || a.samples_ != b.samples_ ||
      a.cells_.size() != b.cells_.size()) {
    return false;
  }
  for (auto ia = a.cells_.begin(), ib = b.cells_.begin(); ia != a.cells_.end();
       ++ia, ++ib) {
    if (ia->first != ib->first) return false;
    const auto& ra = ia->second;
    const auto& rb = ib->second;
    const std::size_t n = std::max(ra.size(), rb.size());
    for (std::size_t i = 0; i < n; ++i) {
      ChannelAggregates::Cell ca = i < ra.size() ? ra[i] : ChannelAggregates::Cell{};
      ChannelAggregates::Cell cb = i < rb.size() ? rb[i] : ChannelAggregates::Cell{};
      if (ca.sum != cb.sum || ca.count != cb.count) return false;
    }
  }
  return true;
}

// ------------------------------------------------------------------ store

namespace {

template <typename Int>
void append_int(std::string& out, Int v) {
  char buf[24];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, end);
}

// A message can spend at most this long on the air, so anything stamped
// this far before the newest arrival is final.
constexpr SimTime kHoldBackMs = 1000;

}  // namespace

Store::Store(StoreOptions options)
    : options_(options), aggregates_(options.slot_ms) {
  if (options_.samples_out) {
    *options_.samples_out << "node_id,tx_id,timestamp_ms,axis,value\n";
  }
}

Store::Ingested Store::ingest(std::string_view bytes, SimTime receive_time) {
  MeasurementMessage msg;
  try {
    msg = decode_measurement(bytes);
  } catch (const Error& e) {
    rejects_.push_back({receive_time, e.what()});
    throw;
  }
  seal_before(receive_time);

  Ingested out{next_id_++, msg};
  samples_ += msg.samples.size();
  samples_by_node_[msg.node_id] += msg.samples.size();

  auto& last = last_layout_[msg.node_id];
  if (last != msg.layout) {
    LayoutChange change{msg.node_id, msg.timestamp_ms, {}, {}};
    auto running = [](const std::vector<LayoutEntry>& layout, TransducerId id) {
      return std::any_of(layout.begin(), layout.end(), [id](const LayoutEntry& e) {
        return e.id == id && e.status == TransducerStatus::Running;
      });
    };
    for (const auto& e : msg.layout) {
      if (e.status == TransducerStatus::Running && !running(last, e.id)) {
        change.started.push_back(e.id);
      }
    }
    for (const auto& e : last) {
      if (e.status == TransducerStatus::Running && !running(msg.layout, e.id)) {
        change.stopped.push_back(e.id);
      }
    }
    changes_.push_back(std::move(change));
    last = msg.layout;
  }

  const Key key{msg.timestamp_ms, msg.node_id};
  StoredRecord record{out.record_id, receive_time, std::move(msg)};
  if (last_appended_ && key <= *last_appended_) {
    // Arrived after its slot was sealed; keep it rather than lose it.
    append(std::move(record));
  } else {
    pending_.emplace(key, std::move(record));
  }
  return out;
}

void Store::seal_before(SimTime receive_time) {
  while (!pending_.empty() &&
         pending_.begin()->first.first + kHoldBackMs <= receive_time) {
    auto node = pending_.extract(pending_.begin());
    append(std::move(node.mapped()));
  }
}

void Store::flush() {
  while (!pending_.empty()) {
    auto node = pending_.extract(pending_.begin());
    append(std::move(node.mapped()));
  }
}

void Store::append(StoredRecord&& record) {
  const auto& msg = record.message;
  last_appended_ = std::max(last_appended_.value_or(Key{INT64_MIN, 0}),
                            Key{msg.timestamp_ms, msg.node_id});
  ++appended_;
  for (const auto& s : msg.samples) aggregates_.add(msg.node_id, s);
  if (options_.records_out) {
    std::string line = record_json(record);
    line += '\n';
    options_.records_out->write(line.data(), static_cast<std::streamsize>(line.size()));
  }
  if (options_.samples_out) {
    std::string buf;
    for (const auto& s : msg.samples) {
      for (std::size_t axis = 0; axis < s.values.size(); ++axis) {
        append_int(buf, msg.node_id);
        buf += ',';
        append_int(buf, s.id.value());
        buf += ',';
        append_int(buf, s.time);
        buf += ',';
        append_int(buf, axis);
        buf += ',';
        append_int(buf, s.values[axis]);
        buf += '\n';
      }
    }
    options_.samples_out->write(buf.data(), static_cast<std::streamsize>(buf.size()));
  }
  if (options_.retain_records) records_.push_back(std::move(record));
}

std::uint64_t Store::samples_from(NodeId node) const {
  auto it = samples_by_node_.find(node);
  return it == samples_by_node_.end() ? 0 : it->second;
}

std::string record_json(const StoredRecord& r) {
  // Every token is a known identifier, so no JSON escaping is needed.
  std::string out;
  out.reserve(64 + r.message.samples.size() * 40);
  out += "{\"record\":";
  append_int(out, r.id);
  out += ",\"received_ms\":";
  append_int(out, r.receive_time);
  out += ",\"node\":";
  append_int(out, r.message.node_id);
  out += ",\"t\":";
  append_int(out, r.message.timestamp_ms);
  out += ",\"if\":\"";
  out += interface_token(r.message.interface);
  out += "\",\"layout\":[";
  for (std::size_t i = 0; i < r.message.layout.size(); ++i) {
    const auto& e = r.message.layout[i];
    if (i) out += ',';
    out += '[';
    append_int(out, e.id.value());
    out += ",\"";
    out += kind_token(e.kind);
    out += "\",\"";
    out += status_token(e.status);
    out += "\"]";
  }
  out += "],\"samples\":[";
  for (std::size_t i = 0; i < r.message.samples.size(); ++i) {
    const auto& s = r.message.samples[i];
    if (i) out += ',';
    out += '[';
    append_int(out, s.id.value());
    out += ',';
    append_int(out, s.time);
    out += ",[";
    for (std::size_t k = 0; k < s.values.size(); ++k) {
      if (k) out += ',';
      append_int(out, s.values[k]);
    }
    out += "]]";
  }
  out += "]}";
  return out;
}

ChannelAggregates read_samples_csv(std::istream& in, SimTime slot_ms) {
  ChannelAggregates agg(slot_ms);
  std::string line;
  if (!std::getline(in, line) || line != "node_id,tx_id,timestamp_ms,axis,value") {
    throw Error(ErrorCode::ParseError, "samples CSV header missing");
  }
  std::uint64_t lineno = 1;
  std::vector<RawSample> pending;  // one reading, axes accumulated
  NodeId pending_node = 0;
  auto commit = [&] {
    if (!pending.empty()) agg.add(pending_node, pending.front());
    pending.clear();
  };
  while (std::getline(in, line)) {
    ++lineno;
    std::int64_t f[5];
    const char* p = line.data();
    const char* end = line.data() + line.size();
    for (int i = 0; i < 5; ++i) {
      auto [q, ec] = std::from_chars(p, end, f[i]);
      const bool last = i == 4;
      if (ec != std::errc() || (last ? q != end : (q == end || *q != ','))) {
        throw Error(ErrorCode::ParseError,
                    fmt::format("samples CSV line {} is malformed", lineno));
      }
      p = last ? q : q + 1;
    }
    const auto node = static_cast<NodeId>(f[0]);
    const auto axis = static_cast<std::size_t>(f[3]);
    if (axis == 0) {
      commit();
      pending_node = node;
      pending.push_back(RawSample{TransducerId(static_cast<int>(f[1])), f[2], {}});
    } else if (pending.empty() || pending.front().values.size() != axis ||
               pending_node != node || pending.front().id.value() != f[1] ||
               pending.front().time != f[2]) {
      throw Error(ErrorCode::ParseError,
                  fmt::format("samples CSV line {} breaks axis order", lineno));
    }
    pending.front().values.push_back(static_cast<std::int32_t>(f[4]));
  }
  commit();
  return agg;
}

// --------------------------------------------------------------- sit rule

SitRule::SitRule(TransducerId sensor, TransducerId actuator, NodeId actuator_node)
    : sensor_(sensor), actuator_(actuator), node_(actuator_node) {}

std::optional<ControlMessage> SitRule::observe(std::int32_t reading, SimTime time) {
  if (reading <= 0) {
    since_.reset();
    last_buzz_.reset();
    return std::nullopt;
  }
  if (!since_) {
    since_ = time;
    next_due_ = time + kThresholdMs;
  }
  if (time < next_due_) return std::nullopt;
  while (next_due_ <= time) next_due_ += kThresholdMs;
  last_buzz_ = time;
  return ControlMessage{node_, {ActuatorCommand{actuator_, true, kBuzzMs}}};
}

Server::Server(Store& store, const Scenario& scenario) : store_(&store) {
  for (const auto& r : scenario.sit_rules) {
    const NodeConfig* host = scenario.host_of(r.actuator);
    if (!host) {
      throw Error(ErrorCode::NotPresent,
                  fmt::format("no node hosts actuator {}", r.actuator.value()));
    }
    by_sensor_.emplace(r.sensor, rules_.size());
    rules_.emplace_back(r.sensor, r.actuator, host->id);
  }
}

Server::Reply Server::receive(std::string_view bytes, SimTime receive_time) {
  Store::Ingested in = store_->ingest(bytes, receive_time);
  Reply reply{in.record_id, {}};
  if (by_sensor_.empty()) return reply;
  for (const auto& s : in.message.samples) {
    auto [lo, hi] = by_sensor_.equal_range(s.id);
    for (auto it = lo; it != hi; ++it) {
      if (auto control = rules_[it->second].observe(s.values.at(0), s.time)) {
        reply.controls.push_back(std::move(*control));
      }
    }
  }
  return reply;
}

// ---------------------------------------------------------------- heatmap

Heatmap heatmap_export(const ChannelAggregates& agg, int bin_minutes,
                       SimTime horizon_ms) {
  if (agg.empty() || horizon_ms <= 0) {
    throw Error(ErrorCode::EmptyStore, "no samples to plot");
  }
  const SimTime bin_ms = static_cast<SimTime>(bin_minutes) * 60'000;
  if (bin_minutes <= 0 || horizon_ms % bin_ms != 0) {
    throw ValidationError("bin_minutes",
                          fmt::format("{} min bins do not tile a {} ms horizon",
                                      bin_minutes, horizon_ms));
  }
  if (bin_ms % agg.slot_ms() != 0) {
    throw ValidationError("bin_minutes", "bins must be whole aggregate slots");
  }
  const auto bins = static_cast<std::size_t>(horizon_ms / bin_ms);
  const auto per_bin = static_cast<std::size_t>(bin_ms / agg.slot_ms());

  Heatmap map;
  map.bin_ms = bin_ms;
  for (std::size_t b = 0; b < bins; ++b) {
    map.column_labels.push_back(format_clock(static_cast<SimTime>(b) * bin_ms % kMillisPerDay));
  }
  for (const auto& [key, cells] : agg.cells()) {
    const auto kind = kind_for_id(key.id);
    std::string label =
        fmt::format("node{}/{}{}", key.node, kind_token(kind), key.id.value());
    if (spec_for_kind(kind).axes > 1) label += fmt::format(".{}", "xyz"[key.axis % 3]);
    map.row_labels.push_back(std::move(label));

    std::vector<double> mean(bins, std::numeric_limits<double>::quiet_NaN());
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t b = 0; b < bins; ++b) {
      std::int64_t sum = 0;
      std::int64_t count = 0;
      for (std::size_t k = b * per_bin; k < (b + 1) * per_bin && k < cells.size(); ++k) {
        sum += cells[k].sum;
        count += cells[k].count;
      }
      if (count == 0) continue;
      mean[b] = static_cast<double>(sum) / static_cast<double>(count);
      lo = std::min(lo, mean[b]);
      hi = std::max(hi, mean[b]);
    }
    std::vector<double> row(bins, 0.0);
    if (hi > lo) {
      for (std::size_t b = 0; b < bins; ++b) {
        if (!std::isnan(mean[b])) row[b] = (mean[b] - lo) / (hi - lo);
      }
    }
    map.values.push_back(std::move(row));
  }
  return map;
}

std::string Heatmap::to_csv() const {
  std::string out = "channel";
  for (const auto& c : column_labels) out += "," + c;
  out += "\n";
  for (std::size_t r = 0; r < values.size(); ++r) {
    out += row_labels[r];
    for (double v : values[r]) out += fmt::format(",{:.6f}", v);
    out += "\n";
  }
  return out;
}

std::string Heatmap::to_pgm(int cell_px) const {
  const std::size_t cols = column_labels.size() * static_cast<std::size_t>(cell_px);
  const std::size_t rows = values.size() * static_cast<std::size_t>(cell_px);
  std::string out = fmt::format("P5\n{} {}\n255\n", cols, rows);
  for (const auto& row : values) {
    std::string line;
    line.reserve(cols);
    for (double v : row) {
      const auto shade = static_cast<unsigned char>(std::lround(255.0 * (1.0 - v)));
      line.append(static_cast<std::size_t>(cell_px), static_cast<char>(shade));
    }
    for (int k = 0; k < cell_px; ++k) out += line;
  }
  return out;
}

}  // namespace pnp
