#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "pnp/digest.hpp"
#include "pnp/simkernel.hpp"
#include "test_support.hpp"

using namespace pnp;
using pnp::test::code_of;

namespace {

SimConfig config(SimTime horizon = 10'000, std::uint64_t seed = 1) {
  return SimConfig{seed, horizon, 1};
}

auto noop = [](const SimEvent&) {};

// A toy world: two "modules" that reschedule themselves and draw from
// their own random streams.
std::string toy_run(std::uint64_t seed, std::ostream* sink = nullptr) {
  Kernel k(config(50'000, seed));
  k.log().set_sink(sink);
  auto a = k.stream("a");
  auto b = k.stream("b");
  k.schedule(0, event::SensorTick{1});
  k.schedule(0, event::WindowEnd{2});
  k.run_until(50'000, [&](const SimEvent& ev) {
    if (ev.tag() == EventTag::SensorTick) {
      SimTime next = ev.time + static_cast<SimTime>(a() % 700);
      if (next <= 50'000) k.schedule(next, event::SensorTick{1});
    } else if (ev.tag() == EventTag::WindowEnd) {
      SimTime next = ev.time + static_cast<SimTime>(b() % 900);
      if (next <= 50'000) k.schedule(next, event::WindowEnd{2});
    }
  });
  return k.log().digest();
}

}  // namespace

TEST(Kernel, SameTimeRunsInScheduleOrder) {
  Kernel k(config());
  k.schedule(5, event::SensorTick{1});
  k.schedule(5, event::SensorTick{2});
  k.schedule(3, event::WindowEnd{9});
  std::vector<NodeId> order;
  k.run_until(5, [&](const SimEvent& ev) {
    if (ev.tag() == EventTag::SensorTick) {
      order.push_back(std::get<event::SensorTick>(ev.payload).node);
      if (order.size() == 1) k.schedule(5, event::SensorTick{3});
    }
  });
  EXPECT_EQ(order, (std::vector<NodeId>{1, 2, 3}));
  EXPECT_EQ(k.log().size(), 4u);
}

TEST(Kernel, PastEventRejected) {
  Kernel k(config());
  k.schedule(10, event::SensorTick{1});
  k.run_until(10, noop);
  EXPECT_EQ(code_of([&] { k.schedule(9, event::SensorTick{1}); }), ErrorCode::PastEvent);
  EXPECT_NO_THROW(k.schedule(10, event::SensorTick{1}));
}

TEST(Kernel, RunUntilPastHorizonRejected) {
  Kernel k(config(1000));
  EXPECT_EQ(code_of([&] { k.run_until(1001, noop); }), ErrorCode::InvariantViolation);
}

TEST(Kernel, ConfigValidation) {
  EXPECT_EQ(code_of([] { SimConfig{0, 10, 0}.validate(); }), ErrorCode::InvariantViolation);
  EXPECT_EQ(code_of([] { SimConfig{0, 10, 3}.validate(); }), ErrorCode::InvariantViolation);
  EXPECT_EQ(code_of([] { SimConfig{0, -1, 1}.validate(); }), ErrorCode::InvariantViolation);
  EXPECT_NO_THROW((SimConfig{0, 12, 3}.validate()));
  EXPECT_EQ(SimConfig{}.horizon_ms, 86'400'000);
  Kernel coarse(SimConfig{0, 30, 10});
  EXPECT_EQ(code_of([&] { coarse.schedule(5, event::SensorTick{1}); }),
            ErrorCode::InvariantViolation);
}

TEST(Kernel, EmptyWorldEmptyLog) {
  Kernel k(config());
  const auto& log = k.run_until(10'000, noop);
  EXPECT_EQ(log.size(), 0u);
  EXPECT_EQ(log.digest(), sha256_hex(""));
  EXPECT_EQ(k.now(), 10'000);
}

TEST(Kernel, EventsAfterTEndStayQueued) {
  Kernel k(config());
  k.schedule(100, event::SensorTick{1});
  k.schedule(200, event::SensorTick{1});
  k.run_until(150, noop);
  EXPECT_EQ(k.log().size(), 1u);
  EXPECT_EQ(k.pending(), 1u);
  k.drain(noop);
  EXPECT_EQ(k.log().size(), 2u);
}

TEST(Kernel, LogFormatAndSink) {
  std::ostringstream sink;
  Kernel k(config());
  k.log().set_sink(&sink);
  k.schedule(7, event::HotPlug{5, BusEventKind::Detached, TransducerId(73)});
  k.schedule(9, event::ActuatorExpiry{4, TransducerId(24)});
  k.run_until(10, noop);
  EXPECT_EQ(sink.str(), "7\t0\tHotPlug\tnode=5 detach id=73\n9\t1\tActuatorExpiry\tnode=4 actuator=24\n");
  EXPECT_EQ(k.log().digest(), sha256_hex(sink.str()));
  EXPECT_EQ(k.log().count(EventTag::HotPlug), 1u);
  ASSERT_EQ(k.log().records().size(), 2u);
  EXPECT_EQ(k.log().records()[0].summary, "node=5 detach id=73");
}

TEST(Kernel, UnretainedLogStillCountsAndHashes) {
  Kernel kept(config(), true);
  Kernel lean(config(), false);
  for (Kernel* k : {&kept, &lean}) {
    k->schedule(1, event::RuleFire{3});
    k->schedule(2, event::FrameDelivery{8});
    k->run_until(10, noop);
  }
  EXPECT_EQ(lean.log().size(), 2u);
  EXPECT_TRUE(lean.log().records().empty());
  EXPECT_EQ(lean.log().digest(), kept.log().digest());
}

TEST(Kernel, DeterministicGivenSeed) {
  EXPECT_EQ(toy_run(5), toy_run(5));
  EXPECT_NE(toy_run(5), toy_run(6));
}

TEST(Kernel, StreamsAreIndependentByLabel) {
  Kernel k(config(10, 42));
  auto a1 = k.stream("radio");
  auto a2 = k.stream("radio");
  auto b = k.stream("channel/kitchen-co");
  EXPECT_EQ(a1(), a2());
  EXPECT_NE(k.stream("radio")(), b());
  EXPECT_NE(derive_seed(1, "radio"), derive_seed(2, "radio"));
  EXPECT_EQ(derive_seed(1, "radio"), derive_seed(1, "radio"));
}

// Replay oracle: the log is the list of scheduled events sorted by
// (time, call order), each exactly once.
TEST(KernelProperty, NoLossAndTotalOrder) {
  std::mt19937_64 rng(17);
  for (int round = 0; round < 1000; ++round) {
    Kernel k(config(1000));
    struct Planned {
      SimTime time;
      std::uint64_t order;
    };
    std::vector<Planned> planned;
    const int n = 1 + static_cast<int>(rng() % 40);
    for (int i = 0; i < n; ++i) {
      SimTime t = static_cast<SimTime>(rng() % 1200);
      k.schedule(t, event::RuleFire{static_cast<std::uint64_t>(i)});
      planned.push_back({t, static_cast<std::uint64_t>(i)});
    }
    const SimTime t_end = static_cast<SimTime>(rng() % 1001);
    std::vector<std::uint64_t> seen;
    k.run_until(t_end, [&](const SimEvent& ev) {
      seen.push_back(std::get<event::RuleFire>(ev.payload).output);
    });
    std::stable_sort(planned.begin(), planned.end(),
                     [](const Planned& a, const Planned& b) { return a.time < b.time; });
    std::vector<std::uint64_t> expected;
    for (const auto& p : planned) {
      if (p.time <= t_end) expected.push_back(p.order);
    }
    ASSERT_EQ(seen, expected) << "round " << round;
    ASSERT_EQ(k.pending(), planned.size() - expected.size());

    const auto& recs = k.log().records();
    for (std::size_t i = 1; i < recs.size(); ++i) {
      ASSERT_TRUE(recs[i - 1].time < recs[i].time ||
                  (recs[i - 1].time == recs[i].time && recs[i - 1].seq < recs[i].seq));
    }
  }
}
