#include "pnp/protocol.hpp"

#include <charconv>
#include <limits>
#include <set>
#include <string>

#include "pnp/error.hpp"
#include "xml.hpp"

namespace pnp {

std::string_view status_token(TransducerStatus status) {
  return status == TransducerStatus::Running ? "running" : "stopped";
}

std::string_view interface_token(InterfaceKind kind) {
  switch (kind) {
    case InterfaceKind::ZigBee: return "zigbee";
  }
  return "?";
}

namespace {

[[noreturn]] void invariant(const std::string& what) {
  throw Error(ErrorCode::InvariantViolation, what);
}

[[noreturn]] void schema(const std::string& what) {
  throw Error(ErrorCode::SchemaViolation, what);
}

std::string id_text(TransducerId id) { return std::to_string(id.value()); }

// ---------------------------------------------------------------- encoding

void append_uint(std::string& out, std::uint64_t v) {
  char buf[24];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, end);
}

void append_attr(std::string& out, std::string_view name, std::uint64_t v) {
  out += ' ';
  out += name;
  out += "=\"";
  append_uint(out, v);
  out += '"';
}

void append_attr(std::string& out, std::string_view name,
                 std::string_view v) {
  out += ' ';
  out += name;
  out += "=\"";
  out += v;
  out += '"';
}

// ---------------------------------------------------------------- decoding

std::uint64_t parse_uint(std::string_view text, std::string_view what) {
  if (text.empty() || text.size() > 18 ||
      text.find_first_not_of("0123456789") != std::string_view::npos ||
      (text.size() > 1 && text[0] == '0')) {
    schema(std::string(what) + " must be a canonical unsigned integer, got '" +
           std::string(text) + "'");
  }
  std::uint64_t v = 0;
  std::from_chars(text.data(), text.data() + text.size(), v);
  return v;
}

NodeId parse_node_id(std::string_view text, std::string_view what) {
  auto v = parse_uint(text, what);
  if (v > std::numeric_limits<NodeId>::max()) {
    schema(std::string(what) + " does not fit a node id");
  }
  return static_cast<NodeId>(v);
}

TransducerId parse_transducer_id(std::string_view text) {
  auto v = parse_uint(text, "transducer id");
  if (v > static_cast<std::uint64_t>(kMaxTransducerId)) {
    invariant("transducer id " + std::string(text) + " exceeds " +
              std::to_string(kMaxTransducerId));
  }
  return TransducerId(static_cast<int>(v));
}

void expect_name(const xml::Element& el, std::string_view name) {
  if (el.name != name) {
    schema("expected element <" + std::string(name) + ">, got <" +
           std::string(el.name) + ">");
  }
}

// Requires exactly the listed attributes, in any order.
void expect_attributes(const xml::Element& el,
                       std::initializer_list<std::string_view> names) {
  for (const auto& attr : el.attributes) {
    bool known = false;
    for (auto n : names) known = known || attr.name == n;
    if (!known) {
      schema("unknown attribute '" + std::string(attr.name) + "' on <" +
             std::string(el.name) + ">");
    }
  }
  for (auto n : names) {
    if (!el.attribute(n)) {
      schema("<" + std::string(el.name) + "> is missing attribute '" +
             std::string(n) + "'");
    }
  }
}

void expect_no_text(const xml::Element& el) {
  if (el.has_significant_text()) {
    schema("<" + std::string(el.name) + "> must not contain character data");
  }
}

void expect_leaf(const xml::Element& el) {
  if (!el.children.empty()) {
    schema("<" + std::string(el.name) + "> must not contain elements");
  }
}

std::vector<std::int32_t> parse_values(const xml::Element& el) {
  std::vector<std::int32_t> values;
  for (auto seg : el.text) {
    std::size_t i = 0;
    while (i < seg.size()) {
      while (i < seg.size() && xml::is_space(seg[i])) ++i;
      std::size_t start = i;
      while (i < seg.size() && !xml::is_space(seg[i])) ++i;
      if (i > start) {
        auto v = parse_uint(seg.substr(start, i - start), "sample value");
        if (v > static_cast<std::uint64_t>(
                    std::numeric_limits<std::int32_t>::max())) {
          invariant("sample value out of range");
        }
        values.push_back(static_cast<std::int32_t>(v));
      }
    }
  }
  return values;
}

}  // namespace

void check_invariants(const MeasurementMessage& msg) {
  if (msg.node_id == 0) invariant("node id 0 is reserved");
  if (msg.timestamp_ms < 0) invariant("negative timestamp");

  std::set<TransducerId> running;
  std::set<TransducerId> seen;
  for (const auto& entry : msg.layout) {
    auto kind = try_kind_for_id(entry.id);
    if (!kind) invariant("layout lists unassigned id " + id_text(entry.id));
    if (*kind != entry.kind) {
      invariant("layout kind of id " + id_text(entry.id) +
                " does not match its reserved range");
    }
    if (!seen.insert(entry.id).second) {
      invariant("layout lists id " + id_text(entry.id) + " twice");
    }
    if (entry.status == TransducerStatus::Running) running.insert(entry.id);
  }

  for (const auto& s : msg.samples) {
    if (!running.contains(s.id)) {
      invariant("sample of id " + id_text(s.id) +
                " has no running layout entry");
    }
    const auto& spec = spec_for_kind(kind_for_id(s.id));
    if (spec.is_actuator) invariant("sample from actuator " + id_text(s.id));
    if (s.time <= msg.timestamp_ms - kReportingWindowMs ||
        s.time > msg.timestamp_ms || s.time < 0) {
      invariant("sample time " + std::to_string(s.time) +
                " outside the reporting window");
    }
    if (s.values.size() != spec.axes) {
      invariant("sample of id " + id_text(s.id) + " has " +
                std::to_string(s.values.size()) + " values, expected " +
                std::to_string(spec.axes));
    }
    for (auto v : s.values) {
      if (!spec.value_range.contains(v)) {
        invariant("sample value " + std::to_string(v) + " out of range");
      }
    }
  }
}

void check_invariants(const ControlMessage& msg) {
  if (msg.node_id == 0) invariant("node id 0 is reserved");
  std::set<TransducerId> seen;
  for (const auto& cmd : msg.commands) {
    auto kind = try_kind_for_id(cmd.actuator_id);
    if (!kind || !is_actuator(*kind)) {
      invariant("id " + id_text(cmd.actuator_id) + " is not an actuator");
    }
    if (!seen.insert(cmd.actuator_id).second) {
      invariant("actuator " + id_text(cmd.actuator_id) + " addressed twice");
    }
    if (cmd.duration_ms < 0) invariant("negative duration");
    if (cmd.activate && cmd.duration_ms == 0) {
      invariant("activation of " + id_text(cmd.actuator_id) +
                " needs a positive duration");
    }
  }
}

std::string encode(const MeasurementMessage& msg) {
  check_invariants(msg);
  std::string out;
  out.reserve(64 + msg.layout.size() * 48 + msg.samples.size() * 40);
  out += "<node";
  append_attr(out, "id", msg.node_id);
  append_attr(out, "t", static_cast<std::uint64_t>(msg.timestamp_ms));
  append_attr(out, "if", interface_token(msg.interface));
  out += '>';
  if (msg.layout.empty()) {
    out += "<layout/>";
  } else {
    out += "<layout>";
    for (const auto& e : msg.layout) {
      out += "<tx";
      append_attr(out, "id", static_cast<std::uint64_t>(e.id.value()));
      append_attr(out, "kind", kind_token(e.kind));
      append_attr(out, "status", status_token(e.status));
      out += "/>";
    }
    out += "</layout>";
  }
  if (msg.samples.empty()) {
    out += "<data/>";
  } else {
    out += "<data>";
    for (const auto& s : msg.samples) {
      out += "<s";
      append_attr(out, "id", static_cast<std::uint64_t>(s.id.value()));
      append_attr(out, "t", static_cast<std::uint64_t>(s.time));
      out += '>';
      for (std::size_t i = 0; i < s.values.size(); ++i) {
        if (i) out += ' ';
        append_uint(out, static_cast<std::uint64_t>(s.values[i]));
      }
      out += "</s>";
    }
    out += "</data>";
  }
  out += "</node>";
  return out;
}

std::string encode(const ControlMessage& msg) {
  check_invariants(msg);
  std::string out = "<control";
  append_attr(out, "node", msg.node_id);
  if (msg.commands.empty()) {
    out += "/>";
    return out;
  }
  out += '>';
  for (const auto& cmd : msg.commands) {
    out += "<act";
    append_attr(out, "id", static_cast<std::uint64_t>(cmd.actuator_id.value()));
    append_attr(out, "on", cmd.activate ? "1" : "0");
    append_attr(out, "ms", static_cast<std::uint64_t>(cmd.duration_ms));
    out += "/>";
  }
  out += "</control>";
  return out;
}

MeasurementMessage decode_measurement(std::string_view bytes) {
  const xml::Element root = xml::parse(bytes);
  expect_name(root, "node");
  expect_attributes(root, {"id", "t", "if"});
  expect_no_text(root);

  MeasurementMessage msg;
  msg.node_id = parse_node_id(*root.attribute("id"), "node id");
  msg.timestamp_ms = static_cast<SimTime>(parse_uint(*root.attribute("t"), "t"));
  if (*root.attribute("if") != interface_token(InterfaceKind::ZigBee)) {
    schema("unknown interface '" + std::string(*root.attribute("if")) + "'");
  }

  if (root.children.size() != 2) {
    schema("<node> must contain exactly <layout> and <data>");
  }
  const auto& layout = root.children[0];
  const auto& data = root.children[1];
  expect_name(layout, "layout");
  expect_name(data, "data");
  expect_attributes(layout, {});
  expect_attributes(data, {});
  expect_no_text(layout);
  expect_no_text(data);

  msg.layout.reserve(layout.children.size());
  for (const auto& tx : layout.children) {
    expect_name(tx, "tx");
    expect_attributes(tx, {"id", "kind", "status"});
    expect_leaf(tx);
    expect_no_text(tx);
    LayoutEntry entry;
    entry.id = parse_transducer_id(*tx.attribute("id"));
    auto kind = kind_from_token(*tx.attribute("kind"));
    if (!kind) schema("unknown kind '" + std::string(*tx.attribute("kind")) + "'");
    entry.kind = *kind;
    auto status = *tx.attribute("status");
    if (status == "running") {
      entry.status = TransducerStatus::Running;
    } else if (status == "stopped") {
      entry.status = TransducerStatus::Stopped;
    } else {
      schema("unknown status '" + std::string(status) + "'");
    }
    msg.layout.push_back(entry);
  }

  msg.samples.reserve(data.children.size());
  for (const auto& s : data.children) {
    expect_name(s, "s");
    expect_attributes(s, {"id", "t"});
    expect_leaf(s);
    RawSample sample;
    sample.id = parse_transducer_id(*s.attribute("id"));
    sample.time = static_cast<SimTime>(parse_uint(*s.attribute("t"), "t"));
    sample.values = parse_values(s);
    msg.samples.push_back(std::move(sample));
  }

  check_invariants(msg);
  return msg;
}

ControlMessage decode_control(std::string_view bytes) {
  const xml::Element root = xml::parse(bytes);
  expect_name(root, "control");
  expect_attributes(root, {"node"});
  expect_no_text(root);

  ControlMessage msg;
  msg.node_id = parse_node_id(*root.attribute("node"), "node");
  for (const auto& act : root.children) {
    expect_name(act, "act");
    expect_attributes(act, {"id", "on", "ms"});
    expect_leaf(act);
    expect_no_text(act);
    ActuatorCommand cmd;
    cmd.actuator_id = parse_transducer_id(*act.attribute("id"));
    auto on = *act.attribute("on");
    if (on != "0" && on != "1") schema("'on' must be 0 or 1");
    cmd.activate = on == "1";
    cmd.duration_ms = static_cast<SimTime>(parse_uint(*act.attribute("ms"), "ms"));
    msg.commands.push_back(cmd);
  }
  check_invariants(msg);
  return msg;
}

std::size_t payload_size(const MeasurementMessage& msg) {
  return encode(msg).size();
}

std::size_t payload_size(const ControlMessage& msg) {
  return encode(msg).size();
}

}  // namespace pnp
