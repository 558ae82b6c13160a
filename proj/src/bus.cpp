#include "pnp/bus.hpp"

#include <algorithm>
#include <string>

#include "pnp/error.hpp"

namespace pnp {

namespace {

std::string describe(TransducerId id) {
  return "transducer " + std::to_string(id.value());
}

}  // namespace

BusEvent Bus::attach(TransducerId id, SimTime time) {
  kind_for_id(id);
  if (!present_.insert(id).second) {
    throw Error(ErrorCode::AlreadyPresent, describe(id) + " already attached");
  }
  BusEvent ev{BusEventKind::Attached, id, time};
  pending_.push_back(ev);
  return ev;
}

BusEvent Bus::detach(TransducerId id, SimTime time) {
  if (present_.erase(id) == 0) {
    throw Error(ErrorCode::NotPresent, describe(id) + " is not attached");
  }
  active_until_.erase(id);
  BusEvent ev{BusEventKind::Detached, id, time};
  pending_.push_back(ev);
  return ev;
}

RawSample Bus::poll(TransducerId id, SimTime time,
                    std::span<const std::int32_t> env_value) const {
  if (!present_.contains(id)) {
    throw Error(ErrorCode::NotPresent, describe(id) + " is not attached");
  }
  const auto& spec = spec_for_kind(kind_for_id(id));
  if (spec.is_actuator) {
    throw Error(ErrorCode::NotASensor, describe(id) + " is an actuator");
  }
  if (env_value.size() != spec.axes) {
    throw Error(ErrorCode::InvariantViolation,
                describe(id) + " expects " + std::to_string(spec.axes) +
                    " axes, got " + std::to_string(env_value.size()));
  }
  RawSample sample{id, time, {}};
  sample.values.reserve(env_value.size());
  for (std::int32_t v : env_value) {
    sample.values.push_back(spec.value_range.clamp(v));
  }
  return sample;
}

ActuatorAck Bus::command(TransducerId id, bool activate, SimTime duration_ms,
                         SimTime now) {
  if (!present_.contains(id)) {
    throw Error(ErrorCode::NotPresent, describe(id) + " is not attached");
  }
  if (!spec_for_kind(kind_for_id(id)).is_actuator) {
    throw Error(ErrorCode::NotAnActuator, describe(id) + " is a sensor");
  }
  if (activate && duration_ms <= 0) {
    throw Error(ErrorCode::InvariantViolation,
                "activation of " + describe(id) + " needs a positive duration");
  }
  if (!activate) {
    active_until_.erase(id);
    return {id, false, now};
  }
  active_until_[id] = now + duration_ms;
  return {id, true, now + duration_ms};
}

std::vector<BusEvent> Bus::take_events() {
  std::vector<BusEvent> out;
  out.swap(pending_);
  // Stable: a single ID's own attach/detach order is never reshuffled.
  std::stable_sort(out.begin(), out.end(),
                   [](const BusEvent& a, const BusEvent& b) {
                     if (a.time != b.time) return a.time < b.time;
                     return a.id < b.id;
                   });
  return out;
}

bool Bus::is_active(TransducerId id, SimTime now) const {
  auto it = active_until_.find(id);
  return it != active_until_.end() && now < it->second;
}

std::optional<SimTime> Bus::active_until(TransducerId id) const {
  auto it = active_until_.find(id);
  if (it == active_until_.end()) return std::nullopt;
  return it->second;
}

}  // namespace pnp
