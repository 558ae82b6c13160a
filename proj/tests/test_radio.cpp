#include <gtest/gtest.h>

#include <random>

#include "pnp/energy.hpp"
#include "pnp/radio.hpp"
#include "test_support.hpp"

using namespace pnp;
using pnp::test::code_of;

namespace {

RadioParams small_frames() {
  RadioParams p;
  p.max_payload_bytes = 100;
  p.overhead_bytes = 18;
  p.data_rate_bps = 250'000;
  p.tx_per_byte = Energy::nanojoules(10);
  p.rx_per_byte = Energy::nanojoules(7);
  p.wake_per_frame = Energy::microjoules(105);
  return p;
}

std::string random_payload(std::mt19937_64& rng, std::size_t max_len) {
  std::string s(rng() % (max_len + 1), '\0');
  for (auto& c : s) c = static_cast<char>('a' + rng() % 26);
  return s;
}

}  // namespace

TEST(Radio, FragmentExamples) {
  RadioParams p = small_frames();
  auto empty = fragment("", p);
  ASSERT_EQ(empty.size(), 1u);
  EXPECT_TRUE(empty[0].empty());

  const std::string payload(250, 'x');
  auto slices = fragment(payload, p);
  ASSERT_EQ(slices.size(), 3u);
  EXPECT_EQ(slices[0].size(), 100u);
  EXPECT_EQ(slices[1].size(), 100u);
  EXPECT_EQ(slices[2].size(), 50u);
  EXPECT_EQ(frame_count(200, p), 2u);
  EXPECT_EQ(frame_count(201, p), 3u);
}

TEST(Radio, PottieReferenceKilobyteCostsThreeJoules) {
  const RadioParams p = energy_profile("pottie-reference").radio;
  const Energy e = transmit_energy(1024, p);
  EXPECT_NEAR(e.joules(), 3.0, 0.01);
  EXPECT_EQ(e, Energy::microjoules(2930) * 1024);
}

TEST(Radio, EmptyFrameCostsWakePlusHeader) {
  RadioParams p = small_frames();
  EXPECT_EQ(transmit_energy(0, p), p.wake_per_frame + p.tx_per_byte * 18);
  p.overhead_bytes = 0;
  EXPECT_EQ(transmit_energy(0, p), p.wake_per_frame);
}

TEST(Radio, TransmitDebitsBothEnds) {
  const RadioParams p = small_frames();
  EnergyMeter tx, rx;
  Activity txa, rxa;
  const std::string payload(250, 'x');
  auto r = transmit(payload, 1000, p, &tx, &txa, &rx, &rxa);
  EXPECT_EQ(r.frames, 3u);
  EXPECT_EQ(r.bytes_on_air, 250u + 3 * 18);
  EXPECT_TRUE(r.delivered);
  EXPECT_EQ(r.frames_received, 3u);
  EXPECT_EQ(tx.phase(Phase::Communicating), transmit_energy(250, p));
  EXPECT_EQ(rx.phase(Phase::Communicating), p.rx_per_byte * static_cast<std::int64_t>(r.bytes_on_air));
  EXPECT_EQ(txa.messages_tx, 1u);
  EXPECT_EQ(txa.frames_tx, 3u);
  EXPECT_EQ(txa.bytes_tx, r.bytes_on_air);
  EXPECT_EQ(rxa.messages_rx, 1u);
  EXPECT_EQ(rxa.bytes_rx, r.bytes_on_air);
  // (118 + 118 + 68) bytes * 8 bits at 250 kbps
  EXPECT_EQ(r.airtime_us, 3776 + 3776 + 2176);
  EXPECT_EQ(r.delivery_time, 1000 + 10);
}

TEST(Radio, ServerSideNeedsNoMeter) {
  const RadioParams p = small_frames();
  EnergyMeter tx;
  auto r = transmit("abc", 0, p, &tx, nullptr, nullptr, nullptr);
  EXPECT_TRUE(r.delivered);
  EXPECT_EQ(tx.phase(Phase::Communicating), transmit_energy(3, p));
}

TEST(Radio, LossyLink) {
  RadioParams p = small_frames();
  p.loss_rate = 1.0;
  std::mt19937_64 rng(1);
  EnergyMeter tx, rx;
  auto r = transmit(std::string(250, 'x'), 0, p, &tx, nullptr, &rx, nullptr, &rng);
  EXPECT_FALSE(r.delivered);
  EXPECT_EQ(r.frames_received, 0u);
  EXPECT_EQ(rx.total(), Energy{});
  EXPECT_EQ(tx.phase(Phase::Communicating), transmit_energy(250, p));

  p.loss_rate = 0.5;
  std::size_t received = 0;
  for (int i = 0; i < 2000; ++i) received += transmit("", 0, p, nullptr, nullptr, nullptr, nullptr, &rng).frames_received;
  EXPECT_NEAR(static_cast<double>(received) / 2000, 0.5, 0.05);
}

TEST(Radio, Validation) {
  RadioParams p = small_frames();
  EXPECT_NO_THROW(p.validate());
  p.max_payload_bytes = 0;
  EXPECT_EQ(code_of([&] { p.validate(); }), ErrorCode::InvariantViolation);
  p = small_frames();
  p.tx_per_byte = Energy::nanojoules(-1);
  EXPECT_EQ(code_of([&] { p.validate(); }), ErrorCode::InvariantViolation);
  p = small_frames();
  p.loss_rate = 1.5;
  EXPECT_EQ(code_of([&] { p.validate(); }), ErrorCode::InvariantViolation);
  p = small_frames();
  p.data_rate_bps = 0;
  EXPECT_EQ(code_of([&] { p.validate(); }), ErrorCode::InvariantViolation);
}

TEST(RadioProperty, FragmentsReassemble) {
  std::mt19937_64 rng(5);
  RadioParams p = small_frames();
  for (int i = 0; i < 1000; ++i) {
    p.max_payload_bytes = 1 + static_cast<std::uint32_t>(rng() % 300);
    const std::string payload = random_payload(rng, 2000);
    auto slices = fragment(payload, p);
    std::string joined;
    for (auto s : slices) {
      ASSERT_LE(s.size(), p.max_payload_bytes);
      joined += s;
    }
    ASSERT_EQ(joined, payload);
    const std::size_t expected =
        payload.empty() ? 1 : (payload.size() + p.max_payload_bytes - 1) / p.max_payload_bytes;
    ASSERT_EQ(slices.size(), expected);
  }
}

TEST(RadioProperty, ExactAccountingAndMonotonicity) {
  std::mt19937_64 rng(6);
  for (int i = 0; i < 1000; ++i) {
    RadioParams p = small_frames();
    p.max_payload_bytes = 1 + static_cast<std::uint32_t>(rng() % 300);
    p.tx_per_byte = Energy::nanojoules(1 + static_cast<std::int64_t>(rng() % 5000));
    p.wake_per_frame = Energy::nanojoules(static_cast<std::int64_t>(rng() % 200'000));
    EnergyMeter tx, rx;
    Activity txa, rxa;
    std::uint64_t frames = 0, bytes = 0;
    const int messages = 1 + static_cast<int>(rng() % 10);
    for (int m = 0; m < messages; ++m) {
      auto r = transmit(random_payload(rng, 1500), 0, p, &tx, &txa, &rx, &rxa);
      frames += r.frames;
      bytes += r.bytes_on_air;
    }
    ASSERT_EQ(tx.phase(Phase::Communicating),
              p.wake_per_frame * static_cast<std::int64_t>(frames) +
                  p.tx_per_byte * static_cast<std::int64_t>(bytes));
    ASSERT_EQ(txa.bytes_tx, rxa.bytes_rx);
    ASSERT_EQ(txa.frames_tx, rxa.frames_rx);
    ASSERT_EQ(txa.messages_tx, rxa.messages_rx);

    const std::size_t n = rng() % 1000;
    ASSERT_LT(transmit_energy(n, p), transmit_energy(n + 1, p));
  }
}
