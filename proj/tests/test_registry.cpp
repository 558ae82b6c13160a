#include <gtest/gtest.h>

#include <map>

#include "pnp/error.hpp"
#include "pnp/registry.hpp"
#include "test_support.hpp"

using namespace pnp;
using pnp::test::code_of;

namespace {

// Reserved ranges as an independent table.
struct Range {
  int first, last;
  TransducerKind kind;
};
const Range kTable[] = {
    {1, 20, TransducerKind::Pressure},     {21, 40, TransducerKind::VibroActuator},
    {41, 41, TransducerKind::LightSensor}, {57, 57, TransducerKind::LightSensor},
    {72, 75, TransducerKind::Temperature}, {76, 78, TransducerKind::CoGas},
    {83, 84, TransducerKind::Accelerometer}, {85, 90, TransducerKind::Flex},
};

std::optional<TransducerKind> oracle(int id) {
  for (const auto& r : kTable) {
    if (id >= r.first && id <= r.last) return r.kind;
  }
  return std::nullopt;
}

}  // namespace

TEST(Registry, KindForIdExamples) {
  EXPECT_EQ(kind_for_id(TransducerId(5)), TransducerKind::Pressure);
  EXPECT_EQ(kind_for_id(TransducerId(30)), TransducerKind::VibroActuator);
  EXPECT_EQ(kind_for_id(TransducerId(84)), TransducerKind::Accelerometer);
  EXPECT_EQ(code_of([] { kind_for_id(TransducerId(50)); }), ErrorCode::UnassignedId);
}

TEST(Registry, GapsAreUnassigned) {
  for (int id : {0, 42, 56, 58, 71, 79, 82, 91, 255, 256, -1}) {
    EXPECT_FALSE(try_kind_for_id(TransducerId(id))) << id;
    EXPECT_EQ(code_of([&] { kind_for_id(TransducerId(id)); }), ErrorCode::UnassignedId) << id;
  }
}

TEST(Registry, ExhaustiveAgainstTable) {
  for (int id = kMinTransducerId; id <= kMaxTransducerId; ++id) {
    int owners = 0;
    for (auto kind : kAllKinds) owners += spec_for_kind(kind).owns(TransducerId(id)) ? 1 : 0;
    const auto expected = oracle(id);
    EXPECT_EQ(owners, expected ? 1 : 0) << id;
    EXPECT_EQ(try_kind_for_id(TransducerId(id)), expected) << id;
  }
}

TEST(Registry, EveryRangeRoundTrips) {
  for (auto kind : kAllKinds) {
    const auto& spec = spec_for_kind(kind);
    EXPECT_EQ(spec.kind, kind);
    ASSERT_FALSE(spec.ids.empty());
    for (const auto& interval : spec.ids) {
      for (int id = interval.first; id <= interval.last; ++id) {
        EXPECT_EQ(kind_for_id(TransducerId(id)), kind) << id;
      }
    }
  }
}

TEST(Registry, SpecExamples) {
  const auto& temp = spec_for_kind(TransducerKind::Temperature);
  EXPECT_EQ(temp.sampling_rate_hz, 1u);
  EXPECT_EQ(temp.axes, 1u);
  const auto& accel = spec_for_kind(TransducerKind::Accelerometer);
  EXPECT_EQ(accel.sampling_rate_hz, 30u);
  EXPECT_EQ(accel.axes, 3u);
  const auto& vibro = spec_for_kind(TransducerKind::VibroActuator);
  EXPECT_TRUE(vibro.is_actuator);
  EXPECT_FALSE(vibro.sampling_rate_hz);
}

TEST(Registry, SpecInvariants) {
  EXPECT_EQ(kAllKinds.size(), 7u);
  for (auto kind : kAllKinds) {
    const auto& s = spec_for_kind(kind);
    EXPECT_EQ(s.is_actuator, kind == TransducerKind::VibroActuator);
    EXPECT_EQ(s.sampling_rate_hz.has_value(), !s.is_actuator);
    if (!s.is_actuator) {
      EXPECT_EQ(*s.sampling_rate_hz, kind == TransducerKind::Accelerometer ? 30u : 1u);
    }
    EXPECT_EQ(s.axes, kind == TransducerKind::Accelerometer ? 3u : 1u);
    EXPECT_EQ(s.value_range.min, 0);
    EXPECT_EQ(s.value_range.max, 1023);
    EXPECT_EQ(is_sensor(kind), !s.is_actuator);
  }
}

TEST(Registry, ValidateLayout) {
  const TransducerId kitchen[] = {TransducerId(72), TransducerId(41), TransducerId(76)};
  auto resolved = validate_layout(kitchen);
  ASSERT_EQ(resolved.size(), 3u);
  EXPECT_EQ(resolved[0], std::pair(TransducerId(72), TransducerKind::Temperature));
  EXPECT_EQ(resolved[1], std::pair(TransducerId(41), TransducerKind::LightSensor));
  EXPECT_EQ(resolved[2], std::pair(TransducerId(76), TransducerKind::CoGas));

  EXPECT_TRUE(validate_layout({}).empty());

  const TransducerId twice[] = {TransducerId(5), TransducerId(5)};
  EXPECT_EQ(code_of([&] { validate_layout(twice); }), ErrorCode::DuplicateId);
  const TransducerId bad[] = {TransducerId(5), TransducerId(60)};
  EXPECT_EQ(code_of([&] { validate_layout(bad); }), ErrorCode::UnassignedId);
}

TEST(Registry, KindTokensRoundTrip) {
  std::map<std::string_view, int> seen;
  for (auto kind : kAllKinds) {
    auto token = kind_token(kind);
    EXPECT_EQ(kind_from_token(token), kind);
    EXPECT_EQ(++seen[token], 1);
  }
  EXPECT_FALSE(kind_from_token("humidity"));
  EXPECT_FALSE(kind_from_token(""));
}

TEST(Registry, SampleOffsets) {
  EXPECT_EQ(sample_offsets_ms(1), std::vector<SimTime>{0});
  auto thirty = sample_offsets_ms(30);
  ASSERT_EQ(thirty.size(), 30u);
  // round(k * 1000 / 30) for k = 0..29
  std::vector<SimTime> expected;
  for (int k = 0; k < 30; ++k) expected.push_back((k * 1000 + 15) / 30);
  EXPECT_EQ(thirty, expected);
  EXPECT_TRUE(std::is_sorted(thirty.begin(), thirty.end()));
}
