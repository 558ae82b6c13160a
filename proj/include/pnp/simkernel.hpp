#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <queue>
#include <random>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "pnp/bus.hpp"
#include "pnp/digest.hpp"
#include "pnp/error.hpp"
#include "pnp/types.hpp"

namespace pnp {

enum class EventTag : std::uint8_t {
  SensorTick,
  WindowEnd,
  HotPlug,
  FrameDelivery,
  ActuatorExpiry,
  RuleFire,
};

inline constexpr std::size_t kEventTagCount = 6;

std::string_view to_string(EventTag tag);

namespace event {
struct SensorTick { NodeId node; };
struct WindowEnd { NodeId node; };
struct HotPlug { NodeId node; BusEventKind action; TransducerId id; };
struct FrameDelivery { std::uint64_t delivery; };
struct ActuatorExpiry { NodeId node; TransducerId actuator; };
struct RuleFire { std::uint64_t output; };
}  // namespace event

using EventPayload =
    std::variant<event::SensorTick, event::WindowEnd, event::HotPlug,
                 event::FrameDelivery, event::ActuatorExpiry, event::RuleFire>;

struct SimEvent {
  SimTime time = 0;
  std::uint64_t seq = 0;
  EventPayload payload;

  EventTag tag() const { return static_cast<EventTag>(payload.index()); }
};

// Short deterministic text used in log records, e.g. "node=5 detach id=73".
std::string describe(const EventPayload& payload);

struct SimConfig {
  std::uint64_t seed = 0;
  SimTime horizon_ms = kMillisPerDay;
  SimTime tick_ms = 1;

  void validate() const;
};

// Append-only record of processed events. Records are always hashed and
// counted; keeping them in memory or streaming them as text is optional so
// day-long runs stay small.
class EventLog {
 public:
  struct Record {
    SimTime time;
    std::uint64_t seq;
    EventTag tag;
    std::string summary;

    friend bool operator==(const Record&, const Record&) = default;
  };

  explicit EventLog(bool retain = true) : retain_(retain) {}

  void append(const SimEvent& ev);
  void set_sink(std::ostream* sink) { sink_ = sink; }

  std::uint64_t size() const { return count_; }
  std::uint64_t count(EventTag tag) const {
    return per_tag_[static_cast<std::size_t>(tag)];
  }
  const std::vector<Record>& records() const { return records_; }
  std::string digest() const { return hash_.hex(); }

  // One line per event: time, seq, tag, summary separated by tabs.
  static std::string format(const Record& r);

 private:
  bool retain_;
  std::ostream* sink_ = nullptr;
  std::uint64_t count_ = 0;
  std::array<std::uint64_t, kEventTagCount> per_tag_{};
  std::vector<Record> records_;
  Sha256 hash_;
};

// Derives an independent seed for a named consumer, so adding a consumer
// never perturbs another consumer's draws.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view label);

// Stateless 64-bit mixer (splitmix64 finaliser).
std::uint64_t mix64(std::uint64_t x);

class Kernel {
 public:
  explicit Kernel(SimConfig config, bool retain_log = true);

  SimTime now() const { return now_; }
  const SimConfig& config() const { return config_; }

  // Events at equal times run in scheduling order. Throws PastEvent.
  std::uint64_t schedule(SimTime time, EventPayload payload);

  // Processes every queued event with time <= t_end in (time, seq) order.
  template <typename Handler>
  const EventLog& run_until(SimTime t_end, Handler&& handler);

  // Processes everything left in the queue regardless of time.
  template <typename Handler>
  const EventLog& drain(Handler&& handler);

  std::size_t pending() const { return queue_.size(); }
  EventLog& log() { return log_; }
  const EventLog& log() const { return log_; }

  std::mt19937_64 stream(std::string_view label) const {
    return std::mt19937_64(derive_seed(config_.seed, label));
  }

 private:
  struct Later {
    bool operator()(const SimEvent& a, const SimEvent& b) const {
      if (a.time != b.time) return a.time > b.time;
      return a.seq > b.seq;
    }
  };

  template <typename Handler>
  void step(Handler& handler);

  SimConfig config_;
  SimTime now_ = 0;
  std::uint64_t next_seq_ = 0;
  std::priority_queue<SimEvent, std::vector<SimEvent>, Later> queue_;
  EventLog log_;
};

template <typename Handler>
void Kernel::step(Handler& handler) {
  SimEvent ev = queue_.top();
  queue_.pop();
  now_ = ev.time;
  log_.append(ev);
  handler(ev);
}

template <typename Handler>
const EventLog& Kernel::run_until(SimTime t_end, Handler&& handler) {
  if (t_end > config_.horizon_ms) {
    throw Error(ErrorCode::InvariantViolation, "run_until beyond the configured horizon");
  }
  while (!queue_.empty() && queue_.top().time <= t_end) step(handler);
  if (t_end > now_) now_ = t_end;
  return log_;
}

template <typename Handler>
const EventLog& Kernel::drain(Handler&& handler) {
  while (!queue_.empty()) step(handler);
  return log_;
}

}  // namespace pnp
