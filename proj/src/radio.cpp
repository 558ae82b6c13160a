#include "pnp/radio.hpp"

#include <algorithm>
#include <stdexcept>

#include "pnp/energy.hpp"
#include "pnp/error.hpp"

namespace pnp {

void RadioParams::validate() const {
  if (max_payload_bytes == 0) {
    throw Error(ErrorCode::InvariantViolation, "max_payload_bytes must be positive");
  }
  if (data_rate_bps == 0) {
    throw Error(ErrorCode::InvariantViolation, "data_rate_bps must be positive");
  }
  if (tx_per_byte < Energy{} || rx_per_byte < Energy{} ||
      wake_per_frame < Energy{} || listen < Power{}) {
    throw Error(ErrorCode::InvariantViolation, "radio costs must be non-negative");
  }
  if (!(loss_rate >= 0.0 && loss_rate <= 1.0)) {
    throw Error(ErrorCode::InvariantViolation, "loss_rate must lie in [0, 1]");
  }
}

std::size_t frame_count(std::size_t payload_bytes, const RadioParams& params) {
  const std::size_t max = params.max_payload_bytes;
  return std::max<std::size_t>(1, (payload_bytes + max - 1) / max);
}

std::vector<std::string_view> fragment(std::string_view payload,
                                       const RadioParams& params) {
  const std::size_t n = frame_count(payload.size(), params);
  std::vector<std::string_view> slices;
  slices.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    slices.push_back(payload.substr(i * params.max_payload_bytes,
                                    params.max_payload_bytes));
  }
  return slices;
}

std::int64_t frame_airtime_us(std::size_t payload_bytes,
                              const RadioParams& params) {
  const auto bits =
      static_cast<std::int64_t>((payload_bytes + params.overhead_bytes) * 8);
  const auto rate = static_cast<std::int64_t>(params.data_rate_bps);
  return (bits * 1'000'000 + rate - 1) / rate;
}

Energy transmit_energy(std::size_t payload_bytes, const RadioParams& params) {
  const auto frames = static_cast<std::int64_t>(frame_count(payload_bytes, params));
  const auto on_air = static_cast<std::int64_t>(payload_bytes) +
                      frames * static_cast<std::int64_t>(params.overhead_bytes);
  return params.wake_per_frame * frames + params.tx_per_byte * on_air;
}

TransmitResult transmit(std::string_view payload, SimTime time_sent,
                        const RadioParams& params, EnergyMeter* sender,
                        Activity* sender_activity, EnergyMeter* receiver,
                        Activity* receiver_activity, std::mt19937_64* rng) {
  TransmitResult result;
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  for (std::string_view slice : fragment(payload, params)) {
    const std::size_t on_air = slice.size() + params.overhead_bytes;
    ++result.frames;
    result.bytes_on_air += on_air;
    result.airtime_us += frame_airtime_us(slice.size(), params);
    if (sender) {
      sender->debit(Phase::Communicating, params.wake_per_frame);
      sender->debit(Phase::Communicating,
                    params.tx_per_byte * static_cast<std::int64_t>(on_air));
    }
    bool lost = params.loss_rate > 0.0 && rng && coin(*rng) < params.loss_rate;
    if (lost) continue;
    ++result.frames_received;
    if (receiver) {
      receiver->debit(Phase::Communicating,
                      params.rx_per_byte * static_cast<std::int64_t>(on_air));
    }
    if (receiver_activity) {
      ++receiver_activity->frames_rx;
      receiver_activity->bytes_rx += on_air;
    }
  }
  if (sender_activity) {
    ++sender_activity->messages_tx;
    sender_activity->frames_tx += result.frames;
    sender_activity->bytes_tx += result.bytes_on_air;
  }
  result.delivered = result.frames_received == result.frames;
  if (result.delivered && receiver_activity) ++receiver_activity->messages_rx;
  result.delivery_time = time_sent + (result.airtime_us + 999) / 1000;
  return result;
}

}  // namespace pnp
