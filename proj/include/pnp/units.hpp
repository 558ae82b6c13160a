#pragma once

#include <compare>
#include <cstdint>
#include <string>

namespace pnp {

// Energy in integer nanojoules. Parameters given in microjoules with up to
// three decimals convert exactly.
class Energy {
 public:
  constexpr Energy() = default;

  static constexpr Energy nanojoules(std::int64_t nj) { return Energy(nj); }
  static constexpr Energy microjoules(std::int64_t uj) {
    return Energy(uj * 1000);
  }
  // Rounds to the nearest nanojoule.
  static Energy from_microjoules(double uj);

  constexpr std::int64_t nj() const { return nj_; }
  double microjoules() const { return static_cast<double>(nj_) / 1e3; }
  double joules() const { return static_cast<double>(nj_) / 1e9; }

  constexpr Energy& operator+=(Energy o) {
    nj_ += o.nj_;
    return *this;
  }
  friend constexpr Energy operator+(Energy a, Energy b) { return a += b; }
  friend constexpr Energy operator-(Energy a, Energy b) {
    return Energy(a.nj_ - b.nj_);
  }
  friend constexpr Energy operator*(Energy a, std::int64_t k) {
    return Energy(a.nj_ * k);
  }
  friend constexpr auto operator<=>(Energy, Energy) = default;

 private:
  constexpr explicit Energy(std::int64_t nj) : nj_(nj) {}
  std::int64_t nj_ = 0;
};

// Power in integer nanowatts.
class Power {
 public:
  constexpr Power() = default;

  static constexpr Power nanowatts(std::int64_t nw) { return Power(nw); }
  static constexpr Power microwatts(std::int64_t uw) { return Power(uw * 1000); }
  static Power from_microwatts(double uw);

  constexpr std::int64_t nw() const { return nw_; }
  double microwatts() const { return static_cast<double>(nw_) / 1e3; }

  friend constexpr Power operator-(Power a, Power b) {
    return Power(a.nw_ - b.nw_);
  }
  friend constexpr auto operator<=>(Power, Power) = default;

 private:
  constexpr explicit Power(std::int64_t nw) : nw_(nw) {}
  std::int64_t nw_ = 0;
};

// Microjoules with three decimals, e.g. "1234.567".
std::string format_microjoules(Energy e);

}  // namespace pnp
