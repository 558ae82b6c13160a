#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "pnp/types.hpp"
#include "pnp/units.hpp"

namespace pnp {

class EnergyMeter;
struct Activity;

// Link parameters for the ZigBee-like star network. These are model
// parameters, not transceiver datasheet values.
struct RadioParams {
  std::uint32_t overhead_bytes = 18;  // header + trailer per frame
  std::uint32_t max_payload_bytes = 100;
  std::uint32_t data_rate_bps = 250'000;
  Energy tx_per_byte;
  Energy rx_per_byte;
  Energy wake_per_frame;
  // Receiver idle-listening draw of a node that hosts actuators and must
  // stay reachable for control messages.
  Power listen;
  double loss_rate = 0.0;

  void validate() const;
  friend bool operator==(const RadioParams&, const RadioParams&) = default;
};

// Splits a payload into frame-sized slices. An empty payload still yields
// one (empty) frame.
std::vector<std::string_view> fragment(std::string_view payload,
                                       const RadioParams& params);

std::size_t frame_count(std::size_t payload_bytes, const RadioParams& params);

// On-air time of one frame carrying `payload_bytes`, rounded up to whole
// microseconds.
std::int64_t frame_airtime_us(std::size_t payload_bytes,
                              const RadioParams& params);

// Sentinel destination for the central server.
inline constexpr NodeId kServer = 0;

struct Frame {
  NodeId src = 0;
  NodeId dst = kServer;
  std::string payload;
  SimTime time_sent = 0;
};

struct TransmitResult {
  std::size_t frames = 0;
  std::size_t bytes_on_air = 0;  // payload + per-frame overhead
  std::size_t frames_received = 0;
  std::int64_t airtime_us = 0;
  SimTime delivery_time = 0;  // time_sent + airtime, rounded up to 1 ms
  bool delivered = false;     // every fragment arrived
};

// Transmits one message as a burst of frames. Debits wake + per-byte energy
// to the sender and per-byte receive energy to the receiver (either may be
// null for the mains-powered server). With a zero loss rate every frame is
// delivered; otherwise each frame is dropped independently using `rng`.
TransmitResult transmit(std::string_view payload, SimTime time_sent,
                        const RadioParams& params, EnergyMeter* sender,
                        Activity* sender_activity, EnergyMeter* receiver,
                        Activity* receiver_activity,
                        std::mt19937_64* rng = nullptr);

// Radio energy of one burst as seen by the sender, computed in closed form.
Energy transmit_energy(std::size_t payload_bytes, const RadioParams& params);

}  // namespace pnp
