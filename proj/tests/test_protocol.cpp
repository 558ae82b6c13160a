#include <gtest/gtest.h>

#include <filesystem>
#include <map>
#include <random>

#include "pnp/fuzz.hpp"
#include "pnp/protocol.hpp"
#include "test_support.hpp"

using namespace pnp;
using pnp::test::code_of;

namespace {

TransducerId T(int v) { return TransducerId(v); }

constexpr LayoutEntry run(int id, TransducerKind k) {
  return {TransducerId(id), k, TransducerStatus::Running};
}

MeasurementMessage bedroom() {
  MeasurementMessage m{5, 1000, InterfaceKind::ZigBee, {}, {}};
  m.layout = {run(57, TransducerKind::LightSensor), run(73, TransducerKind::Temperature)};
  m.samples = {{T(57), 1000, {412}}, {T(73), 1000, {498}}};
  return m;
}

MeasurementMessage pillow_window() {
  MeasurementMessage m{6, 2000, InterfaceKind::ZigBee, {}, {}};
  for (int id : {6, 7, 8}) m.layout.push_back(run(id, TransducerKind::Pressure));
  m.layout.push_back(run(84, TransducerKind::Accelerometer));
  for (SimTime off : sample_offsets_ms(30)) {
    m.samples.push_back({T(84), off == 0 ? 2000 : 1000 + off, {500, 510, 520}});
  }
  for (int id : {6, 7, 8}) m.samples.push_back({T(id), 2000, {0}});
  return m;
}

std::size_t count(const std::string& s, const std::string& needle) {
  std::size_t n = 0;
  for (auto p = s.find(needle); p != std::string::npos; p = s.find(needle, p + 1)) ++n;
  return n;
}

}  // namespace

TEST(Protocol, MinimalMeasurement) {
  MeasurementMessage m{1, 0, InterfaceKind::ZigBee, {}, {}};
  const std::string doc = R"(<node id="1" t="0" if="zigbee"><layout/><data/></node>)";
  EXPECT_EQ(encode(m), doc);
  EXPECT_EQ(decode_measurement(doc), m);
  EXPECT_EQ(payload_size(m), doc.size());
}

TEST(Protocol, BedroomWindow) {
  const std::string doc = encode(bedroom());
  EXPECT_EQ(count(doc, "<tx "), 2u);
  EXPECT_EQ(count(doc, "<s "), 2u);
  EXPECT_EQ(doc,
            R"(<node id="5" t="1000" if="zigbee"><layout>)"
            R"(<tx id="57" kind="light" status="running"/>)"
            R"(<tx id="73" kind="temp" status="running"/></layout>)"
            R"(<data><s id="57" t="1000">412</s><s id="73" t="1000">498</s></data></node>)");
  EXPECT_EQ(decode_measurement(doc), bedroom());
}

TEST(Protocol, ControlExamples) {
  ControlMessage buzz{4, {{T(21), true, 30'000}}};
  EXPECT_EQ(encode(buzz), R"(<control node="4"><act id="21" on="1" ms="30000"/></control>)");
  EXPECT_EQ(decode_control(encode(buzz)), buzz);
  ControlMessage empty{4, {}};
  EXPECT_EQ(encode(empty), R"(<control node="4"/>)");
  EXPECT_EQ(decode_control(R"(<control node="4"/>)"), empty);
  EXPECT_EQ(decode_control(R"(<control node="4"></control>)"), empty);
  EXPECT_EQ(code_of([] { decode_control(R"(<control node="4"><act id="21" on="1" ms="0"/></control>)"); }),
            ErrorCode::InvariantViolation);
  EXPECT_EQ(code_of([] { encode(ControlMessage{4, {{T(21), true, 0}}}); }),
            ErrorCode::InvariantViolation);
}

TEST(Protocol, GoldenFilesMatchCodec) {
  namespace fs = std::filesystem;
  const auto dir = pnp::test::source_path("data/golden");
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) files.push_back(e.path());
  std::sort(files.begin(), files.end());
  ASSERT_EQ(files.size(), builtin_golden_documents().size());

  std::set<std::string> builtin;
  for (auto& d : builtin_golden_documents()) builtin.insert(d);
  for (const auto& f : files) {
    const std::string doc = pnp::test::slurp(f.string());
    EXPECT_TRUE(builtin.contains(doc)) << f;
    const bool control = doc.starts_with("<control");
    const std::string again =
        control ? encode(decode_control(doc)) : encode(decode_measurement(doc));
    EXPECT_EQ(again, doc) << f;
  }
  EXPECT_EQ(pnp::test::slurp(dir + "/control-buzz.xml"),
            R"(<control node="4"><act id="21" on="1" ms="30000"/></control>)");
  EXPECT_EQ(pnp::test::slurp(dir + "/measurement-minimal.xml"),
            R"(<node id="1" t="0" if="zigbee"><layout/><data/></node>)");
}

TEST(Protocol, DecodeErrors) {
  const std::string doc = encode(bedroom());
  EXPECT_EQ(code_of([&] { decode_measurement(doc.substr(0, doc.size() - 3)); }),
            ErrorCode::MalformedXml);
  EXPECT_EQ(code_of([] { decode_measurement(""); }), ErrorCode::MalformedXml);
  EXPECT_EQ(code_of([&] { decode_measurement("\xEF\xBB\xBF" + doc); }), ErrorCode::MalformedXml);
  EXPECT_EQ(code_of([&] { decode_measurement(doc + "<x/>"); }), ErrorCode::MalformedXml);

  // Sample referencing an id missing from the layout.
  std::string orphan = doc;
  orphan.replace(orphan.find(R"(<s id="73")"), 10, R"(<s id="72")");
  EXPECT_EQ(code_of([&] { decode_measurement(orphan); }), ErrorCode::InvariantViolation);

  std::string kind = doc;
  kind.replace(kind.find("kind=\"temp\""), 11, "kind=\"humid\"");
  EXPECT_EQ(code_of([&] { decode_measurement(kind); }), ErrorCode::SchemaViolation);

  std::string extra = doc;
  extra.insert(extra.find("</data>"), "<note/>");
  EXPECT_EQ(code_of([&] { decode_measurement(extra); }), ErrorCode::SchemaViolation);

  std::string padded = doc;
  padded.replace(padded.find("t=\"1000\""), 8, "t=\"01000\"");
  EXPECT_EQ(code_of([&] { decode_measurement(padded); }), ErrorCode::SchemaViolation);

  EXPECT_EQ(code_of([] { decode_measurement(R"(<node id="0" t="0" if="zigbee"><layout/><data/></node>)"); }),
            ErrorCode::InvariantViolation);
  EXPECT_EQ(code_of([] { decode_measurement(R"(<control node="4"/>)"); }), ErrorCode::SchemaViolation);
  EXPECT_EQ(code_of([&] { decode_control(doc); }), ErrorCode::SchemaViolation);
}

TEST(Protocol, WhitespaceTolerated) {
  const std::string doc =
      "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      "<node id=\"5\" t=\"1000\" if=\"zigbee\">\n  <layout>\n"
      "    <tx id=\"57\" kind=\"light\" status=\"running\" />\n"
      "    <tx id=\"73\" kind=\"temp\" status=\"running\"/>\n  </layout>\n"
      "  <data>\n    <s id=\"57\" t=\"1000\"> 412 </s>\n"
      "    <s id=\"73\" t=\"1000\">498</s>\n  </data>\n</node>\n";
  EXPECT_EQ(decode_measurement(doc), bedroom());
}

TEST(Protocol, EncodeRejectsBrokenInvariants) {
  auto broken = [](auto mutate) {
    MeasurementMessage m = bedroom();
    mutate(m);
    return code_of([&] { encode(m); });
  };
  EXPECT_EQ(broken([](auto& m) { m.node_id = 0; }), ErrorCode::InvariantViolation);
  EXPECT_EQ(broken([](auto& m) { m.layout[1].status = TransducerStatus::Stopped; }),
            ErrorCode::InvariantViolation);
  EXPECT_EQ(broken([](auto& m) { m.layout[1].kind = TransducerKind::CoGas; }),
            ErrorCode::InvariantViolation);
  EXPECT_EQ(broken([](auto& m) { m.layout.push_back(m.layout[0]); }), ErrorCode::InvariantViolation);
  EXPECT_EQ(broken([](auto& m) { m.samples[0].time = 0; }), ErrorCode::InvariantViolation);
  EXPECT_EQ(broken([](auto& m) { m.samples[0].time = 1001; }), ErrorCode::InvariantViolation);
  EXPECT_EQ(broken([](auto& m) { m.samples[0].values = {1, 2}; }), ErrorCode::InvariantViolation);
  EXPECT_EQ(broken([](auto& m) { m.samples[0].values = {1024}; }), ErrorCode::InvariantViolation);
  EXPECT_EQ(broken([](auto& m) { m.layout.push_back(run(60, TransducerKind::Flex)); }),
            ErrorCode::InvariantViolation);
  EXPECT_EQ(broken([](auto& m) {
              m.layout.push_back(run(24, TransducerKind::VibroActuator));
              m.samples.push_back({T(24), 1000, {1}});
            }),
            ErrorCode::InvariantViolation);

  EXPECT_EQ(code_of([] { encode(ControlMessage{4, {{T(5), true, 10}}}); }),
            ErrorCode::InvariantViolation);
  EXPECT_EQ(code_of([] { encode(ControlMessage{4, {{T(21), true, 10}, {T(21), false, 0}}}); }),
            ErrorCode::InvariantViolation);
  EXPECT_EQ(code_of([] { encode(ControlMessage{0, {}}); }), ErrorCode::InvariantViolation);
}

TEST(Protocol, PayloadSizes) {
  EXPECT_EQ(payload_size(MeasurementMessage{1, 0, InterfaceKind::ZigBee, {}, {}}),
            std::string(R"(<node id="1" t="0" if="zigbee"><layout/><data/></node>)").size());
  EXPECT_GT(payload_size(pillow_window()), payload_size(bedroom()));
  EXPECT_EQ(payload_size(ControlMessage{4, {}}), 19u);
}

TEST(ProtocolProperty, RoundTripBothTypes) {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 1000; ++i) {
    const MeasurementMessage m = random_measurement(rng);
    const std::string bytes = encode(m);
    ASSERT_EQ(decode_measurement(bytes), m) << bytes;
    ASSERT_EQ(encode(decode_measurement(bytes)), bytes);
    const ControlMessage c = random_control(rng);
    ASSERT_EQ(decode_control(encode(c)), c) << encode(c);
  }
}

TEST(ProtocolProperty, EncodeIsInjective) {
  std::mt19937_64 rng(2);
  std::map<std::string, MeasurementMessage> seen;
  std::map<std::string, ControlMessage> seen_control;
  for (int i = 0; i < 1000; ++i) {
    MeasurementMessage m = random_measurement(rng);
    auto [it, fresh] = seen.emplace(encode(m), m);
    if (!fresh) ASSERT_EQ(it->second, m);
    ControlMessage c = random_control(rng);
    auto [jt, fresh_c] = seen_control.emplace(encode(c), c);
    if (!fresh_c) ASSERT_EQ(jt->second, c);
  }
  // Distinct messages differing in a single field.
  MeasurementMessage a = bedroom();
  MeasurementMessage b = bedroom();
  b.samples[0].values[0] = 41;
  EXPECT_NE(encode(a), encode(b));
}

TEST(ProtocolProperty, SizeNondecreasingInSamples) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 1000; ++i) {
    MeasurementMessage m = random_measurement(rng);
    MeasurementMessage prefix = m;
    prefix.samples.clear();
    std::size_t last = payload_size(prefix);
    for (const auto& s : m.samples) {
      prefix.samples.push_back(s);
      const std::size_t size = payload_size(prefix);
      ASSERT_GE(size, last);
      last = size;
    }
  }
}

TEST(ProtocolProperty, EncodingIsStable) {
  std::mt19937_64 a(11);
  std::mt19937_64 b(11);
  for (int i = 0; i < 200; ++i) {
    ASSERT_EQ(encode(random_measurement(a)), encode(random_measurement(b)));
  }
}
