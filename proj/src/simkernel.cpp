#include "pnp/simkernel.hpp"

#include <fmt/format.h>

#include <ostream>
#include <stdexcept>

#include "pnp/error.hpp"

namespace pnp {

std::string_view to_string(EventTag tag) {
  switch (tag) {
    case EventTag::SensorTick: return "SensorTick";
    case EventTag::WindowEnd: return "WindowEnd";
    case EventTag::HotPlug: return "HotPlug";
    case EventTag::FrameDelivery: return "FrameDelivery";
    case EventTag::ActuatorExpiry: return "ActuatorExpiry";
    case EventTag::RuleFire: return "RuleFire";
  }
  return "?";
}

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

}  // namespace

std::string describe(const EventPayload& payload) {
  return std::visit(
      Overloaded{
          [](const event::SensorTick& e) { return fmt::format("node={}", e.node); },
          [](const event::WindowEnd& e) { return fmt::format("node={}", e.node); },
          [](const event::HotPlug& e) {
            return fmt::format("node={} {} id={}", e.node,
                               e.action == BusEventKind::Attached ? "attach"
                                                                  : "detach",
                               e.id.value());
          },
          [](const event::FrameDelivery& e) {
            return fmt::format("delivery={}", e.delivery);
          },
          [](const event::ActuatorExpiry& e) {
            return fmt::format("node={} actuator={}", e.node, e.actuator.value());
          },
          [](const event::RuleFire& e) { return fmt::format("output={}", e.output); },
      },
      payload);
}

void SimConfig::validate() const {
  if (tick_ms <= 0) {
    throw Error(ErrorCode::InvariantViolation, "tick_ms must be positive");
  }
  if (horizon_ms < 0 || horizon_ms % tick_ms != 0) {
    throw Error(ErrorCode::InvariantViolation,
                "horizon_ms must be a non-negative multiple of tick_ms");
  }
}

std::string EventLog::format(const Record& r) {
  return fmt::format("{}\t{}\t{}\t{}\n", r.time, r.seq, to_string(r.tag),
                     r.summary);
}

void EventLog::append(const SimEvent& ev) {
  Record r{ev.time, ev.seq, ev.tag(), describe(ev.payload)};
  std::string line = format(r);
  hash_.update(line);
  if (sink_) sink_->write(line.data(), static_cast<std::streamsize>(line.size()));
  ++count_;
  ++per_tag_[static_cast<std::size_t>(r.tag)];
  if (retain_) records_.push_back(std::move(r));
}

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::string_view label) {
  std::uint64_t h = 0xCBF29CE484222325ull;  // FNV-1a
  for (unsigned char c : label) {
    h ^= c;
    h *= 0x100000001B3ull;
  }
  return mix64(seed ^ mix64(h));
}

Kernel::Kernel(SimConfig config, bool retain_log)
    : config_(config), log_(retain_log) {
  config_.validate();
}

std::uint64_t Kernel::schedule(SimTime time, EventPayload payload) {
  if (time < now_) {
    throw Error(ErrorCode::PastEvent,
                fmt::format("event at {} ms scheduled at clock {} ms", time, now_));
  }
  if (time % config_.tick_ms != 0) {
    throw Error(ErrorCode::InvariantViolation,
                fmt::format("event at {} ms is off the {} ms grid", time,
                            config_.tick_ms));
  }
  std::uint64_t seq = next_seq_++;
  queue_.push(SimEvent{time, seq, std::move(payload)});
  return seq;
}

}  // namespace pnp
