#include "pnp/node.hpp"

#include <algorithm>

#include "pnp/error.hpp"

namespace pnp {

void ConnectivityTable::apply(const BusEvent& ev) {
  const auto status = ev.kind == BusEventKind::Attached ? TransducerStatus::Running
                                                        : TransducerStatus::Stopped;
  auto it = entries_.find(ev.id);
  if (it == entries_.end()) {
    entries_.emplace(ev.id, Entry{kind_for_id(ev.id), status});
  } else {
    it->second.status = status;
  }
}

std::optional<TransducerStatus> ConnectivityTable::status(TransducerId id) const {
  auto it = entries_.find(id);
  if (it == entries_.end()) return std::nullopt;
  return it->second.status;
}

std::vector<LayoutEntry> ConnectivityTable::layout() const {
  std::vector<LayoutEntry> out;
  out.reserve(entries_.size());
  for (const auto& [id, e] : entries_) out.push_back({id, e.kind, e.status});
  return out;
}

Node::Node(NodeId id, std::string label, const EnergyParams& params)
    : id_(id), label_(std::move(label)), params_(&params) {}

void Node::install(TransducerId id) {
  const auto& spec = spec_for_kind(kind_for_id(id));
  if (std::find(installed_.begin(), installed_.end(), id) != installed_.end()) {
    throw Error(ErrorCode::DuplicateId,
                "transducer " + std::to_string(id.value()) + " installed twice");
  }
  installed_.push_back(id);
  if (!spec.sampling_rate_hz) return;
  for (SimTime offset : sample_offsets_ms(*spec.sampling_rate_hz)) {
    auto& due = schedule_[offset];
    due.insert(std::upper_bound(due.begin(), due.end(), id), id);
  }
}

BusEvent Node::plug(TransducerId id, SimTime time) {
  BusEvent ev = bus_.attach(id, time);
  sync_bus();
  return ev;
}

BusEvent Node::unplug(TransducerId id, SimTime time) {
  BusEvent ev = bus_.detach(id, time);
  sync_bus();
  return ev;
}

void Node::handle_bus_event(const BusEvent& ev) {
  if (ev.kind == BusEventKind::Detached) {
    if (active_since_.contains(ev.id)) settle_actuator(ev.id, ev.time);
    drop_staged(ev.id);
  }
  table_.apply(ev);
}

void Node::sync_bus() {
  for (const BusEvent& ev : bus_.take_events()) handle_bus_event(ev);
}

std::vector<SimTime> Node::tick_offsets() const {
  std::vector<SimTime> out;
  out.reserve(schedule_.size());
  for (const auto& [offset, _] : schedule_) out.push_back(offset);
  return out;
}

std::size_t Node::collect(SimTime tick, const SignalSource& env) {
  auto it = schedule_.find(tick % kMillisPerSecond);
  if (it == schedule_.end()) return 0;
  std::size_t n = 0;
  for (TransducerId id : it->second) {
    if (!table_.is_running(id) || !bus_.is_present(id)) continue;
    const auto kind = kind_for_id(id);
    std::vector<std::int32_t> value = env.read(id, tick);
    staged_.push_back(bus_.poll(id, tick, value));
    meter_.debit(Phase::Sensing, params_->sense_energy(kind));
    meter_.debit(Phase::Processing, params_->mcu_active - params_->mcu_sleep,
                 params_->mcu_active_us_per_sample);
    ++activity_.samples_by_kind[static_cast<std::size_t>(kind)];
    activity_.mcu_active_us += params_->mcu_active_us_per_sample;
    ++n;
  }
  collected_ += n;
  return n;
}

MeasurementMessage Node::emit_measurement(SimTime window_end) {
  MeasurementMessage msg;
  msg.node_id = id_;
  msg.timestamp_ms = window_end;
  msg.interface = InterfaceKind::ZigBee;
  msg.layout = table_.layout();
  msg.samples = std::move(staged_);
  staged_.clear();
  emitted_ += msg.samples.size();
  return msg;
}

ControlOutcome Node::handle_control(const ControlMessage& msg, SimTime now) {
  if (msg.node_id != id_) {
    throw Error(ErrorCode::WrongNode,
                "control for node " + std::to_string(msg.node_id) +
                    " delivered to node " + std::to_string(id_));
  }
  ControlOutcome out;
  for (const auto& cmd : msg.commands) {
    auto kind = try_kind_for_id(cmd.actuator_id);
    if (!kind || !is_actuator(*kind) || !table_.is_running(cmd.actuator_id)) {
      out.skipped.push_back(cmd.actuator_id);
      continue;
    }
    if (active_since_.contains(cmd.actuator_id)) {
      settle_actuator(cmd.actuator_id, now);
    }
    ActuatorAck ack =
        bus_.command(cmd.actuator_id, cmd.activate, cmd.duration_ms, now);
    if (ack.active) active_since_[cmd.actuator_id] = now;
    out.issued.push_back(ack);
  }
  return out;
}

void Node::actuator_expired(TransducerId id, SimTime now) {
  if (!active_since_.contains(id)) return;
  auto until = bus_.active_until(id);
  // A later command extended the run; its own expiry settles it.
  if (until && *until > now) return;
  settle_actuator(id, now);
}

void Node::settle_actuator(TransducerId id, SimTime now) {
  auto it = active_since_.find(id);
  const std::int64_t us = (now - it->second) * 1000;
  active_since_.erase(it);
  meter_.debit(Phase::Actuation, params_->actuator, us);
  activity_.actuator_us += us;
}

void Node::drop_staged(TransducerId id) {
  auto gone = std::remove_if(staged_.begin(), staged_.end(),
                             [id](const RawSample& s) { return s.id == id; });
  dropped_ += static_cast<std::uint64_t>(staged_.end() - gone);
  staged_.erase(gone, staged_.end());
}

bool Node::hosts_running_actuator() const {
  for (const auto& [id, e] : table_.entries()) {
    if (e.status == TransducerStatus::Running && is_actuator(e.kind)) return true;
  }
  return false;
}

void Node::charge_window(SimTime window_ms) {
  const std::int64_t us = window_ms * 1000;
  meter_.debit(Phase::Processing, params_->mcu_sleep, us);
  activity_.powered_us += us;
  if (hosts_running_actuator()) {
    meter_.debit(Phase::Communicating, params_->radio.listen, us);
    activity_.listen_us += us;
  }
}

void Node::charge_airtime(std::int64_t airtime_us) {
  meter_.debit(Phase::Processing, params_->mcu_active - params_->mcu_sleep,
               airtime_us);
  activity_.mcu_active_us += airtime_us;
}

}  // namespace pnp
