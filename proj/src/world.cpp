#include "pnp/world.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <memory>

#include "pnp/digest.hpp"
#include "pnp/error.hpp"
#include "pnp/node.hpp"
#include "pnp/radio.hpp"

namespace pnp {

std::string RunResult::energy_digest() const { return sha256_hex(to_csv(energy)); }

EnergyParams effective_params(const Scenario& scenario, const EnergyParams& profile) {
  EnergyParams p = profile;
  if (scenario.radio) p.radio = *scenario.radio;
  return p;
}

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

class World final : public SignalSource {
 public:
  World(const Scenario& scenario, const RunOptions& options)
      : scenario_(scenario),
        params_(effective_params(scenario, options.params)),
        kernel_(SimConfig{options.seed.value_or(scenario.seed),
                          options.horizon_ms.value_or(scenario.horizon_ms), 1},
                options.retain_events),
        records_digest_(options.records_out),
        samples_digest_(options.samples_out),
        store_(StoreOptions{&records_digest_, &samples_digest_,
                            options.retain_records, 60'000}),
        server_(store_, scenario),
        rng_(kernel_.stream("radio")) {
    kernel_.config().validate();
    if (kernel_.config().horizon_ms % kReportingWindowMs != 0) {
      throw ValidationError("horizon_ms", "must be a whole number of seconds");
    }
    params_.validate();
    kernel_.log().set_sink(options.event_log_out);

    const std::uint64_t seed = kernel_.config().seed;
    for (const auto& c : scenario.channels) {
      channel_seed_[c.channel_id] = derive_seed(seed, "channel/" + c.channel_id);
    }
    for (const auto& cfg : scenario.nodes) {
      auto node = std::make_unique<Node>(cfg.id, cfg.label, params_);
      for (const auto& t : cfg.transducers) {
        node->install(t.id);
        if (t.channel) {
          const ChannelTrace* trace = scenario.find_channel(*t.channel);
          if (!trace) {
            throw Error(ErrorCode::UnknownChannel, "no channel '" + *t.channel + "'");
          }
          bindings_[t.id] = {trace, channel_seed_.at(*t.channel)};
        }
        if (t.initially_attached) node->plug(t.id, 0);
      }
      reports_[cfg.id] = cfg.reports;
      by_id_[cfg.id] = node.get();
      nodes_.push_back(std::move(node));
    }
  }

  std::vector<std::int32_t> read(TransducerId id, SimTime t) const override {
    const auto& b = bindings_.at(id);
    return b.trace->sample(t, b.seed);
  }

  RunResult run() {
    const SimTime horizon = kernel_.config().horizon_ms;
    auto actions = scenario_.hotplug;
    std::stable_sort(actions.begin(), actions.end(),
                     [](const HotPlugAction& a, const HotPlugAction& b) {
                       return a.time < b.time;
                     });
    for (const auto& a : actions) {
      if (a.time > horizon) continue;
      kernel_.schedule(a.time, event::HotPlug{a.node, a.action, a.id});
    }
    if (horizon >= kReportingWindowMs) {
      for (const auto& node : nodes_) schedule_window(*node, kReportingWindowMs);
    }

    auto handler = [this](const SimEvent& ev) { handle(ev); };
    kernel_.run_until(horizon, handler);
    kernel_.drain(handler);
    store_.flush();
    return finish();
  }

 private:
  struct Binding {
    const ChannelTrace* trace = nullptr;
    std::uint64_t seed = 0;
  };

  struct Delivery {
    NodeId src = 0;
    NodeId dst = kServer;
    std::string bytes;
    std::size_t control = 0;  // index into controls_ when dst != kServer
  };

  // Ticks of the window (end - 1000, end] followed by its WindowEnd.
  void schedule_window(const Node& node, SimTime end) {
    const SimTime start = end - kReportingWindowMs;
    for (SimTime offset : node.tick_offsets()) {
      kernel_.schedule(offset == 0 ? end : start + offset,
                       event::SensorTick{node.id()});
    }
    kernel_.schedule(end, event::WindowEnd{node.id()});
  }

  void handle(const SimEvent& ev) {
    const SimTime now = ev.time;
    std::visit(
        Overloaded{
            [&](const event::SensorTick& e) { by_id_.at(e.node)->collect(now, *this); },
            [&](const event::WindowEnd& e) { window_end(*by_id_.at(e.node), now); },
            [&](const event::HotPlug& e) {
              Node& node = *by_id_.at(e.node);
              if (e.action == BusEventKind::Attached) {
                node.plug(e.id, now);
              } else {
                node.unplug(e.id, now);
              }
            },
            [&](const event::FrameDelivery& e) { deliver(e.delivery, now); },
            [&](const event::ActuatorExpiry& e) {
              by_id_.at(e.node)->actuator_expired(e.actuator, now);
            },
            [&](const event::RuleFire& e) { send_control(e.output, now); },
        },
        ev.payload);
  }

  void window_end(Node& node, SimTime now) {
    node.charge_window(kReportingWindowMs);
    if (reports_.at(node.id())) {
      MeasurementMessage msg = node.emit_measurement(now);
      std::string bytes = encode(msg);
      TransmitResult tx = transmit(bytes, now, params_.radio, &node.meter(),
                                   &node.activity(), nullptr, nullptr, &rng_);
      node.charge_airtime(tx.airtime_us);
      ++sent_[node.id()];
      if (tx.delivered) {
        in_flight_.emplace(next_delivery_, Delivery{node.id(), kServer, std::move(bytes)});
        kernel_.schedule(tx.delivery_time, event::FrameDelivery{next_delivery_++});
      } else {
        ++lost_;
      }
    }
    const SimTime next = now + kReportingWindowMs;
    if (next <= kernel_.config().horizon_ms) schedule_window(node, next);
  }

  void deliver(std::uint64_t id, SimTime now) {
    auto it = in_flight_.find(id);
    Delivery d = std::move(it->second);
    in_flight_.erase(it);
    if (d.dst == kServer) {
      Server::Reply reply;
      try {
        reply = server_.receive(d.bytes, now);
      } catch (const Error&) {
        return;  // counted by the store's reject channel
      }
      for (auto& control : reply.controls) {
        controls_.push_back(ControlTrace{now, 0, {}, std::move(control), 0, 0, {}});
        kernel_.schedule(now, event::RuleFire{controls_.size() - 1});
      }
      return;
    }
    Node& node = *by_id_.at(d.dst);
    ControlTrace& trace = controls_.at(d.control);
    trace.delivered = now;
    ControlMessage msg = decode_control(d.bytes);
    ControlOutcome out = node.handle_control(msg, now);
    trace.issued = out.issued.size();
    trace.skipped = out.skipped.size();
    for (const auto& ack : out.issued) {
      if (!ack.active) continue;
      trace.active_ms.push_back(ack.active_until - now);
      kernel_.schedule(ack.active_until, event::ActuatorExpiry{node.id(), ack.id});
    }
  }

  void send_control(std::uint64_t index, SimTime now) {
    ControlTrace& trace = controls_.at(index);
    trace.bytes = encode(trace.message);
    Node& node = *by_id_.at(trace.message.node_id);
    TransmitResult tx = transmit(trace.bytes, now, params_.radio, nullptr, nullptr,
                                 &node.meter(), &node.activity(), &rng_);
    node.charge_airtime(tx.airtime_us);
    if (!tx.delivered) {
      ++lost_;
      return;
    }
    in_flight_.emplace(next_delivery_,
                       Delivery{kServer, node.id(), trace.bytes, index});
    kernel_.schedule(tx.delivery_time, event::FrameDelivery{next_delivery_++});
  }

  RunResult finish() {
    RunResult r;
    r.scenario = scenario_.name;
    r.seed = kernel_.config().seed;
    r.horizon_ms = kernel_.config().horizon_ms;
    r.profile = params_.name;
    const EventLog& log = kernel_.log();
    r.events = log.size();
    for (std::size_t t = 0; t < kEventTagCount; ++t) {
      const auto tag = static_cast<EventTag>(t);
      if (log.count(tag)) r.events_by_tag[tag] = log.count(tag);
    }
    r.event_records = log.records();
    r.event_digest = log.digest();
    r.records_digest = records_digest_.hex();
    r.samples_digest = samples_digest_.hex();

    r.energy.network = scenario_.name;
    r.energy.horizon_ms = r.horizon_ms;
    for (const auto& node : nodes_) {
      NodeEnergy ne;
      ne.node = node->id();
      ne.label = node->label();
      ne.transducers = node->installed();
      ne.phases = node->meter().phases();
      ne.activity = node->activity();
      r.energy.nodes.push_back(std::move(ne));

      NodeCounters c;
      c.node = node->id();
      c.collected = node->samples_collected();
      c.emitted = node->samples_emitted();
      c.dropped = node->samples_dropped();
      c.messages = sent_[node->id()];
      r.nodes.push_back(c);
      r.samples_collected += c.collected;
      r.samples_dropped += c.dropped;
      r.messages_sent += c.messages;
    }
    r.messages_lost = lost_;
    r.records = store_.record_count();
    r.rejects = store_.reject_count();
    r.samples_ingested = store_.sample_count();
    r.controls = std::move(controls_);
    r.layout_changes = store_.layout_changes();
    r.stored = store_.records();
    r.aggregates = store_.aggregates();
    return r;
  }

  const Scenario& scenario_;
  EnergyParams params_;
  Kernel kernel_;
  DigestStream records_digest_;
  DigestStream samples_digest_;
  Store store_;
  Server server_;
  std::mt19937_64 rng_;
  std::vector<std::unique_ptr<Node>> nodes_;
  std::map<NodeId, Node*> by_id_;
  std::map<NodeId, bool> reports_;
  std::map<std::string, std::uint64_t> channel_seed_;
  std::map<TransducerId, Binding> bindings_;
  std::map<std::uint64_t, Delivery> in_flight_;
  std::uint64_t next_delivery_ = 0;
  std::vector<ControlTrace> controls_;
  std::map<NodeId, std::uint64_t> sent_;
  std::uint64_t lost_ = 0;
};

}  // namespace

RunResult simulate(const Scenario& scenario, const RunOptions& options) {
  World world(scenario, options);
  return world.run();
}

Comparison compare_networks(const Scenario& scenario, const RunOptions& options) {
  Comparison c;
  c.proposed = simulate(scenario, options);
  Scenario traditional = traditional_equivalent(scenario, &c.mapping);
  RunOptions quiet = options;
  quiet.event_log_out = nullptr;
  quiet.records_out = nullptr;
  quiet.samples_out = nullptr;
  c.traditional = simulate(traditional, quiet);
  c.report = compare(c.proposed.energy, c.traditional.energy, c.mapping);
  return c;
}

namespace {

// Ticks t with t = offset (mod 1000), 1 <= t <= horizon and lo <= t < hi.
std::uint64_t ticks_between(SimTime offset, SimTime lo, SimTime hi, SimTime horizon) {
  lo = std::max<SimTime>(lo, 1);
  hi = std::min<SimTime>(hi, horizon + 1);
  if (hi <= lo) return 0;
  auto upto = [offset](SimTime x) -> SimTime {  // count of such t in [0, x)
    if (x <= offset) return 0;
    return (x - offset - 1) / kMillisPerSecond + 1;
  };
  return static_cast<std::uint64_t>(upto(hi) - upto(lo));
}

}  // namespace

std::map<NodeId, std::uint64_t> expected_samples_by_node(const Scenario& scenario,
                                                         SimTime horizon_ms) {
  std::map<NodeId, std::uint64_t> out;
  for (const auto& node : scenario.nodes) {
    std::uint64_t total = 0;
    for (const auto& t : node.transducers) {
      const auto& spec = spec_for_kind(kind_for_id(t.id));
      if (!spec.sampling_rate_hz) continue;
      // Attached spans [from, to) from the initial state and the script.
      std::vector<std::pair<SimTime, BusEventKind>> script;
      for (const auto& a : scenario.hotplug) {
        if (a.id == t.id && a.time <= horizon_ms) script.emplace_back(a.time, a.action);
      }
      std::stable_sort(script.begin(), script.end(),
                       [](const auto& a, const auto& b) { return a.first < b.first; });
      std::vector<std::pair<SimTime, SimTime>> spans;
      bool attached = t.initially_attached;
      SimTime since = 0;
      for (const auto& [time, action] : script) {
        if (action == BusEventKind::Attached) {
          attached = true;
          since = time;
        } else if (attached) {
          spans.emplace_back(since, time);
          attached = false;
        }
      }
      if (attached) spans.emplace_back(since, horizon_ms + 1);
      for (SimTime offset : sample_offsets_ms(*spec.sampling_rate_hz)) {
        for (const auto& [from, to] : spans) {
          total += ticks_between(offset, from, to, horizon_ms);
        }
      }
    }
    out[node.id] = total;
  }
  return out;
}

std::uint64_t expected_samples(const Scenario& scenario, SimTime horizon_ms) {
  std::uint64_t total = 0;
  for (const auto& [_, n] : expected_samples_by_node(scenario, horizon_ms)) total += n;
  return total;
}

}  // namespace pnp
