#include "pnp/energy.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "json_io.hpp"
#include "pnp/error.hpp"
#include "pnp/scenario.hpp"

namespace pnp {

Energy Energy::from_microjoules(double uj) {
  return Energy(static_cast<std::int64_t>(std::llround(uj * 1e3)));
}

Power Power::from_microwatts(double uw) {
  return Power(static_cast<std::int64_t>(std::llround(uw * 1e3)));
}

std::string format_microjoules(Energy e) {
  const std::int64_t nj = e.nj();
  const char* sign = nj < 0 ? "-" : "";
  const std::int64_t mag = nj < 0 ? -nj : nj;
  return fmt::format("{}{}.{:03}", sign, mag / 1000, mag % 1000);
}

std::string_view to_string(Phase phase) {
  switch (phase) {
    case Phase::Sensing: return "sensing";
    case Phase::Processing: return "processing";
    case Phase::Communicating: return "communicating";
    case Phase::Actuation: return "actuation";
  }
  return "?";
}

namespace {

constexpr std::int64_t kFemtoPerNano = 1'000'000;

// Exact accumulation of power * time: nW * us = fJ.
struct PowerTimeSum {
  std::int64_t nj = 0;
  std::int64_t fj = 0;  // remainder, always < 1 nJ

  void add(Power p, std::int64_t us) {
    nj += p.nw() * (us / 1'000'000);  // nW * s = nJ
    fj += p.nw() * (us % 1'000'000);
    nj += fj / kFemtoPerNano;
    fj %= kFemtoPerNano;
  }
};

std::size_t phase_index(Phase p) { return static_cast<std::size_t>(p); }

}  // namespace

void EnergyParams::validate() const {
  for (Energy e : sense_per_sample) {
    if (e < Energy{}) {
      throw Error(ErrorCode::InvariantViolation, "negative sensing cost");
    }
  }
  if (mcu_sleep < Power{} || mcu_active < mcu_sleep) {
    throw Error(ErrorCode::InvariantViolation,
                "MCU powers must satisfy 0 <= sleep <= active");
  }
  if (mcu_active_us_per_sample < 0 || actuator < Power{}) {
    throw Error(ErrorCode::InvariantViolation, "negative MCU or actuator cost");
  }
  radio.validate();
}

namespace {

EnergyParams base_profile() {
  EnergyParams p;
  auto set = [&](TransducerKind k, double uj) {
    p.sense_per_sample[static_cast<std::size_t>(k)] = Energy::from_microjoules(uj);
  };
  set(TransducerKind::Pressure, 0.5);
  set(TransducerKind::VibroActuator, 0.0);
  set(TransducerKind::LightSensor, 0.5);
  set(TransducerKind::Temperature, 0.8);
  set(TransducerKind::CoGas, 2.0);
  set(TransducerKind::Accelerometer, 0.3);
  set(TransducerKind::Flex, 0.5);
  p.mcu_active = Power::microwatts(1000);
  p.mcu_sleep = Power::microwatts(15);
  p.mcu_active_us_per_sample = 20;
  p.actuator = Power::microwatts(60'000);
  p.radio.overhead_bytes = 18;
  p.radio.data_rate_bps = 250'000;
  p.radio.listen = Power::microwatts(300);
  return p;
}

}  // namespace

EnergyParams energy_profile(std::string_view name) {
  EnergyParams p = base_profile();
  if (name == "zigbee-default") {
    // Fitted by tools/calibrate_profile against the built-in home; see
    // data/profiles/zigbee-default.json.
    p.name = "zigbee-default";
    p.radio.max_payload_bytes = 2048;
    p.radio.wake_per_frame = Energy::microjoules(105);
    p.radio.tx_per_byte = Energy::nanojoules(10);
    p.radio.rx_per_byte = Energy::nanojoules(10);
    p.radio.listen = Power::microwatts(350);
    return p;
  }
  if (name == "pottie-reference") {
    // 3 J per kilobyte sent: 2.93 mJ per byte, nothing else on the link.
    p.name = "pottie-reference";
    p.radio.max_payload_bytes = 100;
    p.radio.overhead_bytes = 0;
    p.radio.wake_per_frame = Energy{};
    p.radio.tx_per_byte = Energy::microjoules(2930);
    p.radio.rx_per_byte = Energy::microjoules(2930);
    return p;
  }
  throw Error(ErrorCode::ValidationError,
              "unknown energy profile '" + std::string(name) + "'");
}

std::vector<std::string> energy_profile_names() {
  return {"zigbee-default", "pottie-reference"};
}

// ------------------------------------------------------------------- JSON

void to_json(nlohmann::json& j, const RadioParams& p) {
  j = nlohmann::json{
      {"overhead_bytes", p.overhead_bytes},
      {"max_payload_bytes", p.max_payload_bytes},
      {"data_rate_bps", p.data_rate_bps},
      {"tx_uj_per_byte", p.tx_per_byte.microjoules()},
      {"rx_uj_per_byte", p.rx_per_byte.microjoules()},
      {"wake_uj_per_frame", p.wake_per_frame.microjoules()},
      {"listen_uw", p.listen.microwatts()},
      {"loss_rate", p.loss_rate},
  };
}

void from_json(const nlohmann::json& j, RadioParams& p) {
  p.overhead_bytes = j.at("overhead_bytes").get<std::uint32_t>();
  p.max_payload_bytes = j.at("max_payload_bytes").get<std::uint32_t>();
  p.data_rate_bps = j.at("data_rate_bps").get<std::uint32_t>();
  p.tx_per_byte = Energy::from_microjoules(j.at("tx_uj_per_byte").get<double>());
  p.rx_per_byte = Energy::from_microjoules(j.at("rx_uj_per_byte").get<double>());
  p.wake_per_frame =
      Energy::from_microjoules(j.at("wake_uj_per_frame").get<double>());
  p.listen = Power::from_microwatts(j.at("listen_uw").get<double>());
  p.loss_rate = j.value("loss_rate", 0.0);
}

void to_json(nlohmann::json& j, const EnergyParams& p) {
  nlohmann::json sense = nlohmann::json::object();
  for (TransducerKind k : kAllKinds) {
    sense[std::string(kind_token(k))] = p.sense_energy(k).microjoules();
  }
  j = nlohmann::json{
      {"name", p.name},
      {"sense_uj_per_sample", sense},
      {"mcu_active_uw", p.mcu_active.microwatts()},
      {"mcu_sleep_uw", p.mcu_sleep.microwatts()},
      {"mcu_active_us_per_sample", p.mcu_active_us_per_sample},
      {"actuator_uw", p.actuator.microwatts()},
      {"radio", p.radio},
  };
}

void from_json(const nlohmann::json& j, EnergyParams& p) {
  p.name = j.at("name").get<std::string>();
  const auto& sense = j.at("sense_uj_per_sample");
  for (TransducerKind k : kAllKinds) {
    p.sense_per_sample[static_cast<std::size_t>(k)] = Energy::from_microjoules(
        sense.at(std::string(kind_token(k))).get<double>());
  }
  p.mcu_active = Power::from_microwatts(j.at("mcu_active_uw").get<double>());
  p.mcu_sleep = Power::from_microwatts(j.at("mcu_sleep_uw").get<double>());
  p.mcu_active_us_per_sample = j.at("mcu_active_us_per_sample").get<std::int64_t>();
  p.actuator = Power::from_microwatts(j.at("actuator_uw").get<double>());
  p.radio = j.at("radio").get<RadioParams>();
}

std::string energy_params_to_json(const EnergyParams& params) {
  return nlohmann::json(params).dump(2) + "\n";
}

EnergyParams energy_params_from_json(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
  EnergyParams p;
  try {
    p = j.get<EnergyParams>();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("profile", e.what());
  }
  try {
    p.validate();
  } catch (const Error& e) {
    throw ValidationError("profile", e.what());
  }
  return p;
}

// --------------------------------------------------------------- metering

std::uint64_t Activity::samples() const {
  std::uint64_t n = 0;
  for (auto c : samples_by_kind) n += c;
  return n;
}

PhaseEnergy evaluate(const Activity& a, const EnergyParams& params) {
  PhaseEnergy out{};
  Energy sensing;
  for (TransducerKind k : kAllKinds) {
    sensing += params.sense_energy(k) *
               static_cast<std::int64_t>(a.samples_by_kind[static_cast<std::size_t>(k)]);
  }
  out[phase_index(Phase::Sensing)] = sensing;

  PowerTimeSum processing;
  processing.add(params.mcu_sleep, a.powered_us);
  processing.add(params.mcu_active - params.mcu_sleep, a.mcu_active_us);
  out[phase_index(Phase::Processing)] = Energy::nanojoules(processing.nj);

  PowerTimeSum listening;
  listening.add(params.radio.listen, a.listen_us);
  const auto& r = params.radio;
  out[phase_index(Phase::Communicating)] =
      r.wake_per_frame * static_cast<std::int64_t>(a.frames_tx) +
      r.tx_per_byte * static_cast<std::int64_t>(a.bytes_tx) +
      r.rx_per_byte * static_cast<std::int64_t>(a.bytes_rx) +
      Energy::nanojoules(listening.nj);

  PowerTimeSum actuation;
  actuation.add(params.actuator, a.actuator_us);
  out[phase_index(Phase::Actuation)] = Energy::nanojoules(actuation.nj);
  return out;
}

void EnergyMeter::debit(Phase phase, Energy amount) {
  if (amount < Energy{}) {
    throw Error(ErrorCode::NegativeDebit,
                fmt::format("debit of {} nJ", amount.nj()));
  }
  phases_[phase_index(phase)] += amount;
}

void EnergyMeter::debit(Phase phase, Power power, std::int64_t duration_us) {
  if (power < Power{} || duration_us < 0) {
    throw Error(ErrorCode::NegativeDebit, "negative power or duration");
  }
  PowerTimeSum sum{0, carry_fj_[phase_index(phase)]};
  sum.add(power, duration_us);
  carry_fj_[phase_index(phase)] = sum.fj;
  phases_[phase_index(phase)] += Energy::nanojoules(sum.nj);
}

Energy EnergyMeter::total() const {
  Energy t;
  for (Energy e : phases_) t += e;
  return t;
}

Energy EnergyMeter::total_excluding_actuation() const {
  return total() - phase(Phase::Actuation);
}

// ---------------------------------------------------------------- reports

Energy NodeEnergy::total() const {
  Energy t;
  for (Energy e : phases) t += e;
  return t;
}

Energy NodeEnergy::compared() const {
  return total() - phases[phase_index(Phase::Actuation)];
}

Energy EnergyReport::network_total() const {
  Energy t;
  for (const auto& n : nodes) t += n.total();
  return t;
}

std::uint64_t EnergyReport::messages() const {
  std::uint64_t m = 0;
  for (const auto& n : nodes) m += n.activity.messages_tx;
  return m;
}

std::uint64_t EnergyReport::bytes() const {
  std::uint64_t b = 0;
  for (const auto& n : nodes) b += n.activity.bytes_tx;
  return b;
}

const NodeEnergy& EnergyReport::node(NodeId id) const {
  for (const auto& n : nodes) {
    if (n.node == id) return n;
  }
  throw std::out_of_range(fmt::format("no node {} in report", id));
}

std::string to_csv(const EnergyReport& report) {
  std::string out =
      "node_id,label,sensing_uj,processing_uj,communicating_uj,actuation_uj,"
      "total_uj,messages_tx,bytes_tx,samples\n";
  for (const auto& n : report.nodes) {
    out += fmt::format("{},{},{},{},{},{},{},{},{},{}\n", n.node, n.label,
                       format_microjoules(n.phases[0]),
                       format_microjoules(n.phases[1]),
                       format_microjoules(n.phases[2]),
                       format_microjoules(n.phases[3]),
                       format_microjoules(n.total()), n.activity.messages_tx,
                       n.activity.bytes_tx, n.activity.samples());
  }
  out += fmt::format("network,{},,,,,{},{},{},\n", report.network,
                     format_microjoules(report.network_total()),
                     report.messages(), report.bytes());
  return out;
}

// ------------------------------------------------------------- comparison

Scenario traditional_equivalent(const Scenario& clustered,
                                TraditionalNetwork* mapping) {
  Scenario out;
  out.name = clustered.name + "-traditional";
  out.seed = clustered.seed;
  out.horizon_ms = clustered.horizon_ms;
  out.channels = clustered.channels;
  out.sit_rules = clustered.sit_rules;
  out.radio = clustered.radio;

  std::map<TransducerId, NodeId> host;
  NodeId next = kTraditionalIdBase;
  for (const auto& node : clustered.nodes) {
    for (const auto& tc : node.transducers) {
      NodeConfig single;
      single.id = next++;
      auto kind = kind_for_id(tc.id);
      single.label = fmt::format("{}/{}{}", node.label, kind_token(kind),
                                 tc.id.value());
      single.transducers = {tc};
      single.reports = is_sensor(kind);
      host[tc.id] = single.id;
      if (mapping) mapping->group_of[single.id] = node.id;
      out.nodes.push_back(std::move(single));
    }
  }
  for (auto action : clustered.hotplug) {
    action.node = host.at(action.id);
    out.hotplug.push_back(action);
  }
  return out;
}

const ComparisonRow& ComparisonReport::row(NodeId id) const {
  for (const auto& r : rows) {
    if (r.node == id) return r;
  }
  throw std::out_of_range(fmt::format("no node {} in comparison", id));
}

ComparisonReport compare(const EnergyReport& proposed,
                         const EnergyReport& traditional,
                         const TraditionalNetwork& mapping) {
  if (proposed.horizon_ms != traditional.horizon_ms) {
    throw Error(ErrorCode::MismatchedHorizon,
                fmt::format("proposed covers {} ms, traditional {} ms",
                            proposed.horizon_ms, traditional.horizon_ms));
  }
  if (proposed.horizon_ms <= 0) {
    throw Error(ErrorCode::MismatchedHorizon, "empty horizon");
  }

  ComparisonReport report;
  report.horizon_ms = proposed.horizon_ms;
  std::set<NodeId> claimed;
  for (const auto& p : proposed.nodes) {
    ComparisonRow row;
    row.node = p.node;
    row.label = p.label;
    row.transducers = p.transducers.size();
    row.proposed = p.compared();

    std::set<TransducerId> expected(p.transducers.begin(), p.transducers.end());
    std::set<TransducerId> got;
    for (const auto& t : traditional.nodes) {
      auto it = mapping.group_of.find(t.node);
      if (it == mapping.group_of.end() || it->second != p.node) continue;
      claimed.insert(t.node);
      got.insert(t.transducers.begin(), t.transducers.end());
      row.traditional += t.compared();
    }
    if (got != expected) {
      throw Error(ErrorCode::MismatchedTransducers,
                  fmt::format("node {} transducers differ between networks",
                              p.node));
    }
    row.ratio = static_cast<double>(row.proposed.nj()) /
                static_cast<double>(row.traditional.nj());
    report.proposed_total += row.proposed;
    report.traditional_total += row.traditional;
    report.rows.push_back(std::move(row));
  }
  if (claimed.size() != traditional.nodes.size()) {
    throw Error(ErrorCode::MismatchedTransducers,
                "traditional network has nodes outside every group");
  }
  report.network_ratio = static_cast<double>(report.proposed_total.nj()) /
                         static_cast<double>(report.traditional_total.nj());
  return report;
}

std::string to_csv(const ComparisonReport& report) {
  std::string out = "node_id,label,transducers,proposed_uj,traditional_uj,ratio\n";
  std::size_t transducers = 0;
  for (const auto& r : report.rows) {
    transducers += r.transducers;
    out += fmt::format("{},{},{},{},{},{:.6f}\n", r.node, r.label,
                       r.transducers, format_microjoules(r.proposed),
                       format_microjoules(r.traditional), r.ratio);
  }
  out += fmt::format("network,all,{},{},{},{:.6f}\n", transducers,
                     format_microjoules(report.proposed_total),
                     format_microjoules(report.traditional_total),
                     report.network_ratio);
  return out;
}

std::string summary_text(const ComparisonReport& report) {
  std::string out = fmt::format(
      "Energy comparison over {:.2f} h (actuation excluded)\n",
      static_cast<double>(report.horizon_ms) / 3.6e6);
  out += fmt::format("{:>6} {:<10} {:>11} {:>16} {:>16} {:>8}\n", "node",
                     "label", "transducers", "proposed_J", "traditional_J",
                     "ratio");
  for (const auto& r : report.rows) {
    out += fmt::format("{:>6} {:<10} {:>11} {:>16.6f} {:>16.6f} {:>8.4f}\n",
                       r.node, r.label, r.transducers, r.proposed.joules(),
                       r.traditional.joules(), r.ratio);
  }
  out += fmt::format("network ratio (proposed / traditional): {:.4f}\n",
                     report.network_ratio);

  auto sorted = report.rows;
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const ComparisonRow& a, const ComparisonRow& b) {
                     return a.transducers > b.transducers;
                   });
  out += "ordering by transducer count (desc):";
  for (const auto& r : sorted) {
    out += fmt::format(" node{}[{}]={:.4f}", r.node, r.transducers, r.ratio);
  }
  out += "\n";
  return out;
}

}  // namespace pnp
