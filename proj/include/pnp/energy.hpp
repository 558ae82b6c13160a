#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "pnp/radio.hpp"
#include "pnp/registry.hpp"
#include "pnp/types.hpp"
#include "pnp/units.hpp"

namespace pnp {

struct Scenario;

enum class Phase : std::uint8_t { Sensing, Processing, Communicating, Actuation };

inline constexpr std::size_t kPhaseCount = 4;

std::string_view to_string(Phase phase);

using PhaseEnergy = std::array<Energy, kPhaseCount>;

struct EnergyParams {
  std::string name;
  std::array<Energy, kAllKinds.size()> sense_per_sample{};  // by kind
  Power mcu_active;
  Power mcu_sleep;
  std::int64_t mcu_active_us_per_sample = 0;
  Power actuator;
  RadioParams radio;

  Energy sense_energy(TransducerKind kind) const {
    return sense_per_sample[static_cast<std::size_t>(kind)];
  }
  void validate() const;

  friend bool operator==(const EnergyParams&, const EnergyParams&) = default;
};

// Built-in profiles: "zigbee-default" (fitted by tools/calibrate_profile)
// and "pottie-reference" (about 3 J per transmitted kilobyte).
EnergyParams energy_profile(std::string_view name);
std::vector<std::string> energy_profile_names();

// JSON form of a profile, as written by the calibration tool. Energies are
// microjoules, powers microwatts. Throws ParseError / ValidationError.
std::string energy_params_to_json(const EnergyParams& params);
EnergyParams energy_params_from_json(std::string_view text);

// What a node did, independent of what it cost. Energy is a linear function
// of these counters, which is how calibration sweeps parameters without
// re-simulating.
struct Activity {
  std::array<std::uint64_t, kAllKinds.size()> samples_by_kind{};
  std::uint64_t messages_tx = 0;
  std::uint64_t frames_tx = 0;
  std::uint64_t bytes_tx = 0;  // including per-frame overhead
  std::uint64_t messages_rx = 0;
  std::uint64_t frames_rx = 0;
  std::uint64_t bytes_rx = 0;
  std::int64_t powered_us = 0;    // MCU baseline (sleep) draw
  std::int64_t mcu_active_us = 0;
  std::int64_t listen_us = 0;
  std::int64_t actuator_us = 0;

  std::uint64_t samples() const;
  friend bool operator==(const Activity&, const Activity&) = default;
};

// Closed-form energy of an activity record under `params`.
PhaseEnergy evaluate(const Activity& activity, const EnergyParams& params);

// Integer per-phase accumulators. Power-over-time debits keep an exact
// sub-nanojoule remainder, so the total never drifts.
class EnergyMeter {
 public:
  // Throws NegativeDebit.
  void debit(Phase phase, Energy amount);
  void debit(Phase phase, Power power, std::int64_t duration_us);

  Energy phase(Phase p) const { return phases_[static_cast<std::size_t>(p)]; }
  const PhaseEnergy& phases() const { return phases_; }
  Energy total() const;
  Energy total_excluding_actuation() const;

 private:
  PhaseEnergy phases_{};
  std::array<std::int64_t, kPhaseCount> carry_fj_{};  // femtojoules < 1 nJ
};

struct NodeEnergy {
  NodeId node = 0;
  std::string label;
  std::vector<TransducerId> transducers;
  PhaseEnergy phases{};
  Activity activity;

  Energy total() const;
  Energy compared() const;  // total without actuation
  Energy communicating() const {
    return phases[static_cast<std::size_t>(Phase::Communicating)];
  }
};

struct EnergyReport {
  std::string network;
  SimTime horizon_ms = 0;
  std::vector<NodeEnergy> nodes;

  Energy network_total() const;
  std::uint64_t messages() const;
  std::uint64_t bytes() const;
  const NodeEnergy& node(NodeId id) const;
};

std::string to_csv(const EnergyReport& report);

// A traditional network built from a clustered one: every transducer gets
// its own node, radio and MCU. `group_of` maps each synthetic node back to
// the clustered node it came from.
struct TraditionalNetwork {
  std::map<NodeId, NodeId> group_of;
};

// Synthetic node ids start here.
inline constexpr NodeId kTraditionalIdBase = 101;

Scenario traditional_equivalent(const Scenario& clustered,
                                TraditionalNetwork* mapping = nullptr);

struct ComparisonRow {
  NodeId node = 0;
  std::string label;
  std::size_t transducers = 0;
  Energy proposed;
  Energy traditional;
  double ratio = 0.0;
};

struct ComparisonReport {
  SimTime horizon_ms = 0;
  std::vector<ComparisonRow> rows;
  Energy proposed_total;
  Energy traditional_total;
  double network_ratio = 0.0;

  const ComparisonRow& row(NodeId id) const;
};

// Actuation is excluded from both sides. Throws MismatchedHorizon or
// MismatchedTransducers.
ComparisonReport compare(const EnergyReport& proposed,
                         const EnergyReport& traditional,
                         const TraditionalNetwork& mapping);

std::string to_csv(const ComparisonReport& report);
std::string summary_text(const ComparisonReport& report);

}  // namespace pnp
