#include "pnp/fuzz.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <exception>
#include <set>

#include "pnp/registry.hpp"

namespace pnp {

namespace {

std::uint64_t uniform(std::mt19937_64& rng, std::uint64_t lo, std::uint64_t hi) {
  return std::uniform_int_distribution<std::uint64_t>(lo, hi)(rng);
}

std::vector<TransducerId> all_assigned_ids() {
  std::vector<TransducerId> ids;
  for (int v = kMinTransducerId; v <= kMaxTransducerId; ++v) {
    if (try_kind_for_id(TransducerId(v))) ids.emplace_back(v);
  }
  return ids;
}

}  // namespace

MeasurementMessage random_measurement(std::mt19937_64& rng) {
  static const std::vector<TransducerId> kIds = all_assigned_ids();
  MeasurementMessage m;
  m.node_id = static_cast<NodeId>(
      uniform(rng, 0, 3) == 0 ? uniform(rng, 1, UINT32_MAX) : uniform(rng, 1, 64));
  m.timestamp_ms = static_cast<SimTime>(
      uniform(rng, 0, 3) == 0 ? uniform(rng, 0, 2000) : uniform(rng, 0, 10'000'000'000));

  std::vector<TransducerId> pool = kIds;
  std::shuffle(pool.begin(), pool.end(), rng);
  pool.resize(uniform(rng, 0, 8));
  std::vector<TransducerId> running_sensors;
  for (TransducerId id : pool) {
    const auto kind = kind_for_id(id);
    const auto status =
        uniform(rng, 0, 3) == 0 ? TransducerStatus::Stopped : TransducerStatus::Running;
    m.layout.push_back({id, kind, status});
    if (status == TransducerStatus::Running && is_sensor(kind)) {
      running_sensors.push_back(id);
    }
  }
  if (running_sensors.empty()) return m;

  const SimTime earliest = std::max<SimTime>(0, m.timestamp_ms - kReportingWindowMs + 1);
  const std::uint64_t n = uniform(rng, 0, 20);
  for (std::uint64_t i = 0; i < n; ++i) {
    RawSample s;
    s.id = running_sensors[uniform(rng, 0, running_sensors.size() - 1)];
    s.time = static_cast<SimTime>(uniform(rng, static_cast<std::uint64_t>(earliest),
                                          static_cast<std::uint64_t>(m.timestamp_ms)));
    const auto& spec = spec_for_kind(kind_for_id(s.id));
    for (std::uint32_t a = 0; a < spec.axes; ++a) {
      s.values.push_back(static_cast<std::int32_t>(
          uniform(rng, static_cast<std::uint64_t>(spec.value_range.min),
                  static_cast<std::uint64_t>(spec.value_range.max))));
    }
    m.samples.push_back(std::move(s));
  }
  return m;
}

ControlMessage random_control(std::mt19937_64& rng) {
  ControlMessage c;
  c.node_id = static_cast<NodeId>(
      uniform(rng, 0, 3) == 0 ? uniform(rng, 1, UINT32_MAX) : uniform(rng, 1, 64));
  std::vector<int> pool;
  for (int v = 21; v <= 40; ++v) pool.push_back(v);
  std::shuffle(pool.begin(), pool.end(), rng);
  pool.resize(uniform(rng, 0, 5));
  for (int v : pool) {
    ActuatorCommand cmd;
    cmd.actuator_id = TransducerId(v);
    cmd.activate = uniform(rng, 0, 1) == 1;
    cmd.duration_ms = static_cast<SimTime>(
        cmd.activate ? uniform(rng, 1, 10'000'000) : uniform(rng, 0, 10'000'000));
    c.commands.push_back(cmd);
  }
  return c;
}

// ------------------------------------------------------------- mutations

namespace {

struct Span {
  std::size_t begin = 0;
  std::size_t end = 0;  // one past
};

struct Attr {
  Span whole;  // from the leading space to the closing quote
  Span name;
  Span value;
};

struct Tag {
  Span whole;
  Span name;
  std::vector<Attr> attrs;
  bool self_closing = false;
  bool closing = false;
  std::optional<std::size_t> partner;  // matching end tag, for start tags
};

// Lexes a canonical document (no comments, declarations or entities).
std::vector<Tag> lex(std::string_view doc, std::vector<Span>& texts) {
  std::vector<Tag> tags;
  std::vector<std::size_t> open;
  std::size_t i = 0;
  while (i < doc.size()) {
    if (doc[i] != '<') {
      std::size_t j = doc.find('<', i);
      if (j == std::string_view::npos) j = doc.size();
      texts.push_back({i, j});
      i = j;
      continue;
    }
    Tag t;
    t.whole.begin = i;
    std::size_t p = i + 1;
    if (p < doc.size() && doc[p] == '/') {
      t.closing = true;
      ++p;
    }
    t.name.begin = p;
    while (p < doc.size() && doc[p] != ' ' && doc[p] != '>' && doc[p] != '/') ++p;
    t.name.end = p;
    while (p < doc.size() && doc[p] == ' ') {
      Attr a;
      a.whole.begin = p;
      a.name.begin = p + 1;
      std::size_t eq = doc.find('=', p);
      a.name.end = eq;
      a.value.begin = eq + 2;
      a.value.end = doc.find('"', a.value.begin);
      a.whole.end = a.value.end + 1;
      t.attrs.push_back(a);
      p = a.whole.end;
    }
    if (p < doc.size() && doc[p] == '/') {
      t.self_closing = true;
      ++p;
    }
    t.whole.end = p + 1;
    i = t.whole.end;
    const std::size_t index = tags.size();
    tags.push_back(t);
    if (t.closing) {
      if (!open.empty()) {
        tags[open.back()].partner = index;
        open.pop_back();
      }
    } else if (!t.self_closing) {
      open.push_back(index);
    }
  }
  return tags;
}

struct Edit {
  std::size_t at;
  std::size_t erase;
  std::string insert;
};

std::string apply(std::string_view doc, std::vector<Edit> edits) {
  std::sort(edits.begin(), edits.end(),
            [](const Edit& a, const Edit& b) { return a.at > b.at; });
  std::string out(doc);
  for (const auto& e : edits) out.replace(e.at, e.erase, e.insert);
  return out;
}

std::string_view slice(std::string_view doc, Span s) {
  return doc.substr(s.begin, s.end - s.begin);
}

}  // namespace

std::vector<Mutation> single_field_mutations(std::string_view doc) {
  std::vector<Mutation> out;
  std::vector<Span> texts;
  const std::vector<Tag> tags = lex(doc, texts);

  std::map<std::string, int> seen;
  for (std::size_t k = 0; k < tags.size(); ++k) {
    const Tag& t = tags[k];
    if (t.closing) continue;
    const std::string name(slice(doc, t.name));
    const std::string where = fmt::format("<{}>#{}", name, seen[name]++);

    std::vector<Edit> rename{{t.name.end, 0, "x"}};
    if (t.partner) rename.push_back({tags[*t.partner].name.end, 0, "x"});
    out.push_back({"rename element " + where, apply(doc, rename)});

    if (name == "layout" || name == "data") {
      const std::size_t end = t.partner ? tags[*t.partner].whole.end : t.whole.end;
      out.push_back({"drop element " + where, apply(doc, {{t.whole.begin, end - t.whole.begin, ""}})});
    }

    for (const Attr& a : t.attrs) {
      const std::string attr(slice(doc, a.name));
      const std::string at = where + " @" + attr;
      out.push_back({"drop attribute " + at,
                     apply(doc, {{a.whole.begin, a.whole.end - a.whole.begin, ""}})});
      out.push_back({"rename attribute " + at, apply(doc, {{a.name.end, 0, "x"}})});
      out.push_back({"corrupt value " + at,
                     apply(doc, {{a.value.begin, a.value.end - a.value.begin, "x"}})});
      out.push_back({"duplicate attribute " + at,
                     apply(doc, {{a.whole.end, 0, std::string(slice(doc, a.whole))}})});
    }
  }

  for (std::size_t k = 0; k < texts.size(); ++k) {
    const Span s = texts[k];
    const std::string_view text = slice(doc, s);
    const std::string where = fmt::format("sample text #{}", k);
    out.push_back({"corrupt " + where, apply(doc, {{s.begin, s.end - s.begin, "x"}})});
    const std::size_t last_space = text.rfind(' ');
    const std::size_t keep = last_space == std::string_view::npos ? 0 : last_space;
    out.push_back({"drop last value of " + where,
                   apply(doc, {{s.begin + keep, text.size() - keep, ""}})});
    out.push_back({"extra value in " + where, apply(doc, {{s.end, 0, " 1"}})});
  }

  for (std::size_t n = 0; n < doc.size(); ++n) {
    out.push_back({fmt::format("truncate to {} bytes", n), std::string(doc.substr(0, n))});
  }
  return out;
}

// ------------------------------------------------------------ golden set

std::vector<std::string> builtin_golden_documents() {
  std::vector<std::string> docs;
  docs.push_back(encode(MeasurementMessage{1, 0, InterfaceKind::ZigBee, {}, {}}));

  MeasurementMessage bedroom{5, 1000, InterfaceKind::ZigBee, {}, {}};
  bedroom.layout = {{TransducerId(57), TransducerKind::LightSensor, TransducerStatus::Running},
                    {TransducerId(73), TransducerKind::Temperature, TransducerStatus::Running}};
  bedroom.samples = {{TransducerId(57), 1000, {412}}, {TransducerId(73), 1000, {498}}};
  docs.push_back(encode(bedroom));

  MeasurementMessage unplugged = bedroom;
  unplugged.timestamp_ms = 46'801'000;
  unplugged.layout[1].status = TransducerStatus::Stopped;
  unplugged.samples = {{TransducerId(57), 46'801'000, {530}}};
  docs.push_back(encode(unplugged));

  MeasurementMessage pillow{6, 3'600'000, InterfaceKind::ZigBee, {}, {}};
  for (int id : {6, 7, 8}) {
    pillow.layout.push_back({TransducerId(id), TransducerKind::Pressure,
                             TransducerStatus::Running});
  }
  pillow.layout.push_back({TransducerId(84), TransducerKind::Accelerometer,
                           TransducerStatus::Running});
  for (SimTime offset : sample_offsets_ms(30)) {
    if (offset == 0) continue;
    pillow.samples.push_back({TransducerId(84), 3'599'000 + offset,
                              {512 + static_cast<std::int32_t>(offset % 7), 509,
                               515 - static_cast<std::int32_t>(offset % 5)}});
  }
  for (int id : {6, 7, 8}) {
    pillow.samples.push_back({TransducerId(id), 3'600'000, {540 - 60 * (id - 6)}});
  }
  pillow.samples.push_back({TransducerId(84), 3'600'000, {512, 511, 513}});
  docs.push_back(encode(pillow));

  docs.push_back(encode(ControlMessage{4, {{TransducerId(21), true, 30'000}}}));
  docs.push_back(encode(ControlMessage{4, {}}));
  docs.push_back(encode(ControlMessage{
      3,
      {{TransducerId(21), true, 30'000},
       {TransducerId(22), true, 30'000},
       {TransducerId(23), true, 30'000}}}));
  docs.push_back(encode(ControlMessage{3, {{TransducerId(22), false, 0}}}));
  return docs;
}

// ---------------------------------------------------------------- harness

namespace {

bool is_control(std::string_view doc) { return doc.starts_with("<control"); }

// Inserts line breaks and indentation between adjacent tags.
std::string pretty(std::string_view doc) {
  std::string out;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    out += doc[i];
    if (doc[i] == '>' && i + 1 < doc.size() && doc[i + 1] == '<') out += "\n  ";
  }
  return out;
}

// Decodes with the decoder matching the unmutated document; returns the
// error code, or nullopt when the document was accepted.
std::optional<ErrorCode> rejection(std::string_view doc, bool control) {
  if (control) {
    decode_control(doc);
  } else {
    decode_measurement(doc);
  }
  return std::nullopt;
}

class Harness {
 public:
  explicit Harness(FuzzReport& report) : report_(report) {}

  bool fail(std::string property, std::string detail, std::string doc) {
    if (!report_.failure) {
      report_.failure = FuzzFailure{std::move(property), std::move(detail), std::move(doc)};
    }
    return false;
  }

  template <typename Msg, typename Decode>
  bool round_trip(const Msg& m, Decode decode, const char* property) {
    std::string bytes;
    try {
      bytes = encode(m);
      if (decode(bytes) != m) return fail(property, "decode(encode(m)) != m", bytes);
      if (encode(decode(bytes)) != bytes) return fail(property, "re-encoding differs", bytes);
      if (decode(pretty(bytes)) != m) {
        return fail("whitespace-tolerance", "indented document decodes differently",
                    pretty(bytes));
      }
    } catch (const std::exception& e) {
      return fail(property, e.what(), bytes);
    }
    return true;
  }

  bool mutations_rejected(std::string_view doc) {
    const bool control = is_control(doc);
    for (auto& m : single_field_mutations(doc)) {
      ++report_.mutations;
      try {
        rejection(m.document, control);
      } catch (const Error& e) {
        ++report_.rejected;
        ++report_.rejected_by[e.code()];
        continue;
      } catch (const std::exception& e) {
        return fail("typed-rejection", m.description + ": " + e.what(), m.document);
      }
      return fail("mutation-rejected", m.description + " was accepted", m.document);
    }
    return true;
  }

  bool golden(std::string_view doc) {
    ++report_.golden_documents;
    try {
      std::string again = is_control(doc) ? encode(decode_control(doc))
                                          : encode(decode_measurement(doc));
      if (again != doc) {
        return fail("golden-canonical", "golden document is not canonical", std::string(doc));
      }
    } catch (const std::exception& e) {
      return fail("golden-canonical", e.what(), std::string(doc));
    }
    return mutations_rejected(doc);
  }

 private:
  FuzzReport& report_;
};

constexpr std::uint64_t kMutatedRandomDocs = 20;

}  // namespace

FuzzReport fuzz_protocol(const FuzzOptions& options) {
  FuzzReport report;
  Harness h(report);
  std::mt19937_64 rng(options.seed);

  std::vector<std::string> golden = builtin_golden_documents();
  golden.insert(golden.end(), options.corpus.begin(), options.corpus.end());
  for (const auto& doc : golden) {
    if (!h.golden(doc)) return report;
  }

  for (std::uint64_t i = 0; i < options.iterations; ++i) {
    MeasurementMessage m = random_measurement(rng);
    if (!h.round_trip(m, decode_measurement, "measurement-round-trip")) return report;
    ++report.measurement_round_trips;
    ControlMessage c = random_control(rng);
    if (!h.round_trip(c, decode_control, "control-round-trip")) return report;
    ++report.control_round_trips;
    if (i < kMutatedRandomDocs) {
      if (!h.mutations_rejected(encode(m)) || !h.mutations_rejected(encode(c))) {
        return report;
      }
    }
  }
  return report;
}

}  // namespace pnp
