#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <ostream>
#include <vector>

namespace pnp {

// Simulation time in integer milliseconds.
using SimTime = std::int64_t;

inline constexpr SimTime kMillisPerSecond = 1000;
inline constexpr SimTime kMillisPerDay = 86'400'000;

using NodeId = std::uint32_t;

// Transducer IDs are small integers burned into each unit's flash; only the
// values listed in the registry are assigned to a kind.
class TransducerId {
 public:
  constexpr TransducerId() = default;
  constexpr explicit TransducerId(int value) : value_(value) {}

  constexpr int value() const { return value_; }

  friend constexpr auto operator<=>(TransducerId, TransducerId) = default;

  friend std::ostream& operator<<(std::ostream& os, TransducerId id) {
    return os << id.value_;
  }

 private:
  int value_ = 0;
};

// One reading of a transducer: one integer per axis, in raw ADC counts.
struct RawSample {
  TransducerId id;
  SimTime time = 0;
  std::vector<std::int32_t> values;

  friend bool operator==(const RawSample&, const RawSample&) = default;
};

}  // namespace pnp

template <>
struct std::hash<pnp::TransducerId> {
  std::size_t operator()(pnp::TransducerId id) const noexcept {
    return std::hash<int>{}(id.value());
  }
};
