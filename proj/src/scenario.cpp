#include "pnp/scenario.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <numbers>
#include <set>

#include <json.hpp>

#include "json_io.hpp"
#include "pnp/error.hpp"
#include "pnp/registry.hpp"
#include "pnp/simkernel.hpp"

namespace pnp {

using nlohmann::json;

SimTime time_of_day(SimTime t) {
  SimTime r = (t - 1) % kMillisPerDay;
  if (r < 0) r += kMillisPerDay;
  return r + 1;
}

namespace gen {

bool operator==(const Noise& a, const Noise& b) {
  if (a.amplitude != b.amplitude) return false;
  if (!a.inner || !b.inner) return a.inner == b.inner;
  return *a.inner == *b.inner;
}

}  // namespace gen

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

bool in_any(const std::vector<DayInterval>& intervals, SimTime tod) {
  return std::any_of(intervals.begin(), intervals.end(),
                     [tod](const DayInterval& i) { return i.contains(tod); });
}

// Uniform integer in [-amplitude, amplitude] from a hash of (seed, t, axis).
std::int32_t jitter(std::uint64_t seed, SimTime t, std::size_t axis,
                    std::int32_t amplitude) {
  if (amplitude <= 0) return 0;
  const std::uint64_t h =
      mix64(seed ^ mix64(static_cast<std::uint64_t>(t) * 8 + axis));
  const auto span = static_cast<std::uint64_t>(2 * amplitude + 1);
  return static_cast<std::int32_t>(h % span) - amplitude;
}

std::vector<std::int32_t> evaluate(const Generator& g, SimTime t,
                                   std::uint64_t seed) {
  const SimTime tod = time_of_day(t);
  return std::visit(
      Overloaded{
          [&](const gen::Diurnal& d) -> std::vector<std::int32_t> {
            const double hour = static_cast<double>(tod) / 3.6e6;
            const double phase = 2.0 * std::numbers::pi * (hour - d.peak_hour) / 24.0;
            return {static_cast<std::int32_t>(
                std::lround(d.base + d.amplitude * std::cos(phase)))};
          },
          [&](const gen::Windows& w) -> std::vector<std::int32_t> {
            return {in_any(w.intervals, tod) ? w.high : w.low};
          },
          [&](const gen::Occupancy& o) -> std::vector<std::int32_t> {
            return {in_any(o.intervals, tod) ? o.level : 0};
          },
          [&](const gen::Burst& b) -> std::vector<std::int32_t> {
            std::vector<std::int32_t> out = b.base;
            for (SimTime ev : b.event_times) {
              const SimTime since = tod - ev;
              if (since <= 0 || since > b.duration_ms) continue;
              // Swing sign flips every 50 ms, axes alternate in phase.
              const std::int32_t sign = (since / 50) % 2 == 0 ? 1 : -1;
              for (std::size_t i = 0; i < out.size(); ++i) {
                out[i] += (i % 2 == 0 ? sign : -sign) * b.magnitude;
              }
              break;
            }
            return out;
          },
          [&](const gen::Constant& c) -> std::vector<std::int32_t> {
            return c.value;
          },
          [&](const gen::Noise& n) -> std::vector<std::int32_t> {
            auto out = evaluate(*n.inner, t, mix64(seed ^ 0x6e6f697365ULL));
            for (std::size_t i = 0; i < out.size(); ++i) {
              out[i] += jitter(seed, t, i, n.amplitude);
            }
            return out;
          },
      },
      g.shape);
}

}  // namespace

std::size_t Generator::axes() const {
  return std::visit(
      Overloaded{
          [](const gen::Burst& b) { return b.base.size(); },
          [](const gen::Constant& c) { return c.value.size(); },
          [](const gen::Noise& n) -> std::size_t {
            return n.inner ? n.inner->axes() : 0;
          },
          [](const auto&) -> std::size_t { return 1; },
      },
      shape);
}

Generator with_noise(std::int32_t amplitude, Generator inner) {
  return Generator{gen::Noise{amplitude,
                              std::make_shared<const Generator>(std::move(inner))}};
}

std::vector<std::int32_t> ChannelTrace::sample(SimTime t,
                                               std::uint64_t seed) const {
  return evaluate(generator, t, seed);
}

const ChannelTrace* Scenario::find_channel(std::string_view id) const {
  for (const auto& c : channels) {
    if (c.channel_id == id) return &c;
  }
  return nullptr;
}

const NodeConfig* Scenario::find_node(NodeId id) const {
  for (const auto& n : nodes) {
    if (n.id == id) return &n;
  }
  return nullptr;
}

const NodeConfig* Scenario::host_of(TransducerId id) const {
  for (const auto& n : nodes) {
    for (const auto& t : n.transducers) {
      if (t.id == id) return &n;
    }
  }
  return nullptr;
}

std::size_t Scenario::transducer_count() const {
  std::size_t n = 0;
  for (const auto& node : nodes) n += node.transducers.size();
  return n;
}

std::vector<std::int32_t> sample_channel(const Scenario& scenario,
                                         std::string_view channel_id,
                                         SimTime t, std::uint64_t seed) {
  const ChannelTrace* c = scenario.find_channel(channel_id);
  if (!c) {
    throw Error(ErrorCode::UnknownChannel,
                "no channel '" + std::string(channel_id) + "'");
  }
  return c->sample(t, seed);
}

// ------------------------------------------------------------------ clock

std::optional<SimTime> parse_clock(std::string_view text) {
  auto number = [&](std::string_view s, int digits) -> std::optional<int> {
    if (static_cast<int>(s.size()) != digits) return std::nullopt;
    int v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size()) return std::nullopt;
    return v;
  };
  if (text.size() < 5 || text[2] != ':') return std::nullopt;
  auto hh = number(text.substr(0, 2), 2);
  auto mm = number(text.substr(3, 2), 2);
  int ss = 0;
  int ms = 0;
  std::string_view rest = text.substr(5);
  if (!rest.empty()) {
    if (rest[0] != ':' || rest.size() < 3) return std::nullopt;
    auto s = number(rest.substr(1, 2), 2);
    if (!s) return std::nullopt;
    ss = *s;
    rest = rest.substr(3);
    if (!rest.empty()) {
      if (rest[0] != '.') return std::nullopt;
      auto m = number(rest.substr(1), 3);
      if (!m) return std::nullopt;
      ms = *m;
    }
  }
  if (!hh || !mm || *hh > 24 || *mm > 59 || ss > 59) return std::nullopt;
  SimTime total = ((*hh * 60LL + *mm) * 60 + ss) * 1000 + ms;
  if (total > kMillisPerDay) return std::nullopt;
  return total;
}

std::string format_clock(SimTime ms_of_day) {
  const SimTime h = ms_of_day / 3'600'000;
  const SimTime m = ms_of_day / 60'000 % 60;
  const SimTime s = ms_of_day / 1000 % 60;
  const SimTime ms = ms_of_day % 1000;
  if (ms != 0) return fmt::format("{:02}:{:02}:{:02}.{:03}", h, m, s, ms);
  if (s != 0) return fmt::format("{:02}:{:02}:{:02}", h, m, s);
  return fmt::format("{:02}:{:02}", h, m);
}

// ----------------------------------------------------------- built-in home

namespace {

SimTime clock(std::string_view text) { return *parse_clock(text); }

DayInterval between(std::string_view from, std::string_view to) {
  return {clock(from), clock(to)};
}

ChannelTrace channel(std::string id, Generator g) {
  return {std::move(id), std::move(g)};
}

TransducerConfig sensor(int id, std::string channel_id) {
  return {TransducerId(id), std::move(channel_id), true};
}

TransducerConfig actuator(int id) { return {TransducerId(id), std::nullopt, true}; }

}  // namespace

Scenario builtin_home() {
  Scenario s;
  s.name = "builtin-home";
  s.seed = 7;
  s.horizon_ms = kMillisPerDay;

  s.channels = {
      channel("kitchen-temp", with_noise(3, {gen::Diurnal{520, 60, 15.0}})),
      channel("kitchen-light", with_noise(5, {gen::Diurnal{400, 300, 13.0}})),
      channel("kitchen-co",
              with_noise(8, {gen::Windows{120, 880,
                                          {between("10:00", "12:00"),
                                           between("20:00", "21:00")}}})),
      channel("fridge-shelf",
              {gen::Occupancy{{between("00:00", "07:30"), between("07:35", "12:40"),
                               between("12:45", "19:00"), between("19:10", "24:00")},
                              610}}),
      channel("fridge-door",
              with_noise(4, {gen::Burst{{512, 512, 800},
                                        150,
                                        {clock("07:30"), clock("12:40"),
                                         clock("19:00"), clock("22:15")},
                                        8000}})),
      channel("sofa-left",
              {gen::Occupancy{{between("18:00", "19:10")}, 650}}),
      channel("sofa-middle",
              {gen::Occupancy{{between("18:00", "19:10"), between("21:00", "21:20")},
                              700}}),
      channel("sofa-right",
              {gen::Occupancy{{between("18:00", "19:10")}, 620}}),
      channel("chair-seat",
              {gen::Occupancy{{between("09:00", "09:45"), between("14:00", "14:20"),
                               between("16:00", "16:40")},
                              700}}),
      channel("bedroom-temp", with_noise(3, {gen::Diurnal{480, 40, 16.0}})),
      channel("bedroom-light", with_noise(5, {gen::Diurnal{300, 250, 12.0}})),
      channel("pillow-left",
              {gen::Occupancy{{between("00:00", "06:30"), between("22:30", "24:00")},
                              540}}),
      channel("pillow-middle",
              {gen::Occupancy{{between("00:00", "03:10"), between("03:40", "06:30"),
                               between("22:30", "24:00")},
                              420}}),
      channel("pillow-right",
              {gen::Occupancy{{between("00:00", "06:30"), between("23:00", "24:00")},
                              480}}),
      channel("pillow-motion",
              with_noise(3, {gen::Burst{{512, 512, 512},
                                        200,
                                        {clock("01:15"), clock("02:40"),
                                         clock("04:05"), clock("05:30"),
                                         clock("23:10")},
                                        20000}})),
  };

  s.nodes = {
      {1, "kitchen",
       {sensor(72, "kitchen-temp"), sensor(41, "kitchen-light"),
        sensor(76, "kitchen-co")},
       true},
      {2, "fridge", {sensor(1, "fridge-shelf"), sensor(83, "fridge-door")}, true},
      {3, "sofa",
       {sensor(2, "sofa-left"), sensor(3, "sofa-middle"), sensor(4, "sofa-right"),
        actuator(21), actuator(22), actuator(23)},
       true},
      {4, "chair", {sensor(5, "chair-seat"), actuator(24)}, true},
      {5, "bedroom",
       {sensor(73, "bedroom-temp"), sensor(57, "bedroom-light")},
       true},
      {6, "pillow",
       {sensor(6, "pillow-left"), sensor(7, "pillow-middle"),
        sensor(8, "pillow-right"), sensor(84, "pillow-motion")},
       true},
  };

  // The bedroom thermometer is unplugged for ten minutes after lunch.
  s.hotplug = {
      {46'800'500, 5, BusEventKind::Detached, TransducerId(73)},
      {47'400'500, 5, BusEventKind::Attached, TransducerId(73)},
  };

  s.sit_rules = {
      {TransducerId(5), TransducerId(24)},
      {TransducerId(2), TransducerId(21)},
      {TransducerId(3), TransducerId(22)},
      {TransducerId(4), TransducerId(23)},
  };
  return s;
}

// -------------------------------------------------------------- validation

namespace {

void check_generator(const Generator& g, const std::string& path) {
  std::visit(
      Overloaded{
          [&](const gen::Diurnal& d) {
            if (d.amplitude < 0) throw ValidationError(path + ".amplitude", "negative");
            if (!(d.peak_hour >= 0.0 && d.peak_hour < 24.0)) {
              throw ValidationError(path + ".peak_hour", "must lie in [0, 24)");
            }
          },
          [&](const gen::Windows& w) {
            for (std::size_t i = 0; i < w.intervals.size(); ++i) {
              const auto& iv = w.intervals[i];
              if (iv.from_ms < 0 || iv.from_ms >= iv.to_ms || iv.to_ms > kMillisPerDay) {
                throw ValidationError(fmt::format("{}.intervals[{}]", path, i),
                                      "interval must satisfy from < to <= 24:00");
              }
            }
          },
          [&](const gen::Occupancy& o) {
            for (std::size_t i = 0; i < o.intervals.size(); ++i) {
              const auto& iv = o.intervals[i];
              if (iv.from_ms < 0 || iv.from_ms >= iv.to_ms || iv.to_ms > kMillisPerDay) {
                throw ValidationError(fmt::format("{}.intervals[{}]", path, i),
                                      "interval must satisfy from < to <= 24:00");
              }
            }
            if (o.level <= 0) throw ValidationError(path + ".level", "must be positive");
          },
          [&](const gen::Burst& b) {
            if (b.base.empty()) throw ValidationError(path + ".base", "empty");
            if (b.magnitude < 0) throw ValidationError(path + ".magnitude", "negative");
            if (b.duration_ms <= 0) {
              throw ValidationError(path + ".duration_ms", "must be positive");
            }
            for (std::size_t i = 0; i < b.event_times.size(); ++i) {
              if (b.event_times[i] < 0 || b.event_times[i] >= kMillisPerDay) {
                throw ValidationError(fmt::format("{}.events[{}]", path, i),
                                      "outside the day");
              }
            }
          },
          [&](const gen::Constant& c) {
            if (c.value.empty()) throw ValidationError(path + ".value", "empty");
          },
          [&](const gen::Noise& n) {
            if (n.amplitude < 0) throw ValidationError(path + ".amplitude", "negative");
            if (!n.inner) throw ValidationError(path + ".inner", "missing");
            check_generator(*n.inner, path + ".inner");
          },
      },
      g.shape);
}

}  // namespace

void validate_scenario(const Scenario& s) {
  if (s.name.empty()) throw ValidationError("name", "empty");
  if (s.horizon_ms < 0 || s.horizon_ms % kMillisPerSecond != 0) {
    throw ValidationError("horizon_ms",
                          "must be a non-negative whole number of seconds");
  }

  std::set<std::string> channel_ids;
  for (std::size_t i = 0; i < s.channels.size(); ++i) {
    const auto& c = s.channels[i];
    const std::string path = fmt::format("channels[{}]", i);
    if (c.channel_id.empty()) throw ValidationError(path + ".id", "empty");
    if (!channel_ids.insert(c.channel_id).second) {
      throw ValidationError(path + ".id", "duplicate channel '" + c.channel_id + "'");
    }
    check_generator(c.generator, path + ".generator");
  }

  std::set<NodeId> node_ids;
  std::map<TransducerId, NodeId> host;
  std::map<TransducerId, bool> attached;
  for (std::size_t i = 0; i < s.nodes.size(); ++i) {
    const auto& n = s.nodes[i];
    const std::string path = fmt::format("nodes[{}]", i);
    if (n.id == 0) throw ValidationError(path + ".id", "0 is reserved for the server");
    if (!node_ids.insert(n.id).second) {
      throw ValidationError(path + ".id", fmt::format("duplicate node {}", n.id));
    }
    if (n.label.empty()) throw ValidationError(path + ".label", "empty");
    for (std::size_t j = 0; j < n.transducers.size(); ++j) {
      const auto& t = n.transducers[j];
      const std::string tpath = fmt::format("{}.transducers[{}]", path, j);
      auto kind = try_kind_for_id(t.id);
      if (!kind) {
        throw ValidationError(tpath + ".id",
                              fmt::format("id {} is unassigned", t.id.value()),
                              ErrorCode::UnassignedId);
      }
      if (!host.emplace(t.id, n.id).second) {
        throw ValidationError(tpath + ".id",
                              fmt::format("id {} used twice", t.id.value()),
                              ErrorCode::DuplicateId);
      }
      attached[t.id] = t.initially_attached;
      const auto& spec = spec_for_kind(*kind);
      if (spec.is_actuator) {
        if (t.channel) {
          throw ValidationError(tpath + ".channel", "actuators take no channel");
        }
        continue;
      }
      if (!t.channel) {
        throw ValidationError(tpath + ".channel",
                              fmt::format("sensor {} has no channel", t.id.value()),
                              ErrorCode::UnknownChannel);
      }
      const ChannelTrace* c = s.find_channel(*t.channel);
      if (!c) {
        throw ValidationError(
            tpath + ".channel",
            fmt::format("sensor {} is bound to missing channel '{}'", t.id.value(),
                        *t.channel),
            ErrorCode::UnknownChannel);
      }
      if (c->generator.axes() != spec.axes) {
        throw ValidationError(
            tpath + ".channel",
            fmt::format("channel '{}' has {} axes, sensor {} needs {}", *t.channel,
                        c->generator.axes(), t.id.value(), spec.axes));
      }
    }
  }

  std::vector<std::size_t> order(s.hotplug.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return s.hotplug[a].time < s.hotplug[b].time;
  });
  for (std::size_t k : order) {
    const auto& a = s.hotplug[k];
    const std::string path = fmt::format("hotplug[{}]", k);
    if (a.time < 0 || a.time > s.horizon_ms) {
      throw ValidationError(path + ".time_ms", "outside the horizon");
    }
    if (!try_kind_for_id(a.id)) {
      throw ValidationError(path + ".id",
                            fmt::format("id {} is unassigned", a.id.value()),
                            ErrorCode::UnassignedId);
    }
    auto it = host.find(a.id);
    if (it == host.end() || it->second != a.node) {
      throw ValidationError(path + ".node",
                            fmt::format("node {} does not host transducer {}",
                                        a.node, a.id.value()));
    }
    bool& now = attached[a.id];
    const bool attach = a.action == BusEventKind::Attached;
    if (attach == now) {
      throw ValidationError(path + ".action",
                            fmt::format("transducer {} is already {}", a.id.value(),
                                        attach ? "attached" : "detached"),
                            attach ? ErrorCode::AlreadyPresent : ErrorCode::NotPresent);
    }
    now = attach;
  }

  for (std::size_t i = 0; i < s.sit_rules.size(); ++i) {
    const auto& r = s.sit_rules[i];
    const std::string path = fmt::format("sit_rules[{}]", i);
    if (try_kind_for_id(r.sensor) != TransducerKind::Pressure || !host.contains(r.sensor)) {
      throw ValidationError(path + ".sensor", "must name a hosted pressure sensor");
    }
    if (try_kind_for_id(r.actuator) != TransducerKind::VibroActuator ||
        !host.contains(r.actuator)) {
      throw ValidationError(path + ".actuator", "must name a hosted actuator");
    }
  }

  if (s.radio) {
    try {
      s.radio->validate();
    } catch (const Error& e) {
      throw ValidationError("radio", e.what());
    }
  }
}

// ----------------------------------------------------------------- JSON io

namespace {

constexpr std::string_view kSchema = "pnp-scenario";

// Field access with a path for diagnostics.
struct Reader {
  const json& j;
  std::string path;

  [[noreturn]] void fail(const std::string& what) const {
    throw ValidationError(path, what);
  }

  Reader at(std::string_view key) const {
    if (!j.is_object()) fail("expected an object");
    auto it = j.find(key);
    std::string sub = path.empty() ? std::string(key) : path + "." + std::string(key);
    if (it == j.end()) throw ValidationError(sub, "missing");
    return Reader{*it, sub};
  }
  bool has(std::string_view key) const { return j.is_object() && j.contains(key); }

  Reader operator[](std::size_t i) const {
    return Reader{j[i], fmt::format("{}[{}]", path, i)};
  }
  std::size_t size() const {
    if (!j.is_array()) fail("expected an array");
    return j.size();
  }

  std::string str() const {
    if (!j.is_string()) fail("expected a string");
    return j.get<std::string>();
  }
  std::int64_t integer() const {
    if (!j.is_number_integer()) fail("expected an integer");
    return j.get<std::int64_t>();
  }
  std::uint64_t unsigned_integer() const {
    if (!j.is_number_unsigned()) fail("expected a non-negative integer");
    return j.get<std::uint64_t>();
  }
  std::int32_t int32() const {
    auto v = integer();
    if (v < INT32_MIN || v > INT32_MAX) fail("out of range");
    return static_cast<std::int32_t>(v);
  }
  double number() const {
    if (!j.is_number()) fail("expected a number");
    return j.get<double>();
  }
  bool boolean() const {
    if (!j.is_boolean()) fail("expected true or false");
    return j.get<bool>();
  }
  SimTime clock() const {
    auto t = parse_clock(str());
    if (!t) fail("expected HH:MM[:SS[.mmm]]");
    return *t;
  }
  std::vector<std::int32_t> int_list() const {
    std::vector<std::int32_t> out;
    for (std::size_t i = 0; i < size(); ++i) out.push_back((*this)[i].int32());
    return out;
  }
  std::vector<DayInterval> intervals() const {
    std::vector<DayInterval> out;
    for (std::size_t i = 0; i < size(); ++i) {
      Reader pair = (*this)[i];
      if (pair.size() != 2) pair.fail("expected [from, to]");
      out.push_back({pair[0].clock(), pair[1].clock()});
    }
    return out;
  }
  void only(std::initializer_list<std::string_view> keys) const {
    if (!j.is_object()) fail("expected an object");
    for (const auto& [k, _] : j.items()) {
      if (std::find(keys.begin(), keys.end(), k) == keys.end()) {
        throw ValidationError(path.empty() ? k : path + "." + k, "unknown field");
      }
    }
  }
};

Generator read_generator(const Reader& r) {
  const std::string type = r.at("type").str();
  if (type == "diurnal") {
    r.only({"type", "base", "amplitude", "peak_hour"});
    return {gen::Diurnal{r.at("base").int32(), r.at("amplitude").int32(),
                         r.at("peak_hour").number()}};
  }
  if (type == "windows") {
    r.only({"type", "low", "high", "intervals"});
    return {gen::Windows{r.at("low").int32(), r.at("high").int32(),
                         r.at("intervals").intervals()}};
  }
  if (type == "occupancy") {
    r.only({"type", "intervals", "level"});
    return {gen::Occupancy{r.at("intervals").intervals(), r.at("level").int32()}};
  }
  if (type == "burst") {
    r.only({"type", "base", "magnitude", "events", "duration_ms"});
    gen::Burst b;
    b.base = r.at("base").int_list();
    b.magnitude = r.at("magnitude").int32();
    Reader events = r.at("events");
    for (std::size_t i = 0; i < events.size(); ++i) {
      b.event_times.push_back(events[i].clock());
    }
    b.duration_ms = r.at("duration_ms").integer();
    return {b};
  }
  if (type == "constant") {
    r.only({"type", "value"});
    return {gen::Constant{r.at("value").int_list()}};
  }
  if (type == "noise") {
    r.only({"type", "amplitude", "inner"});
    return with_noise(r.at("amplitude").int32(), read_generator(r.at("inner")));
  }
  r.at("type").fail("unknown generator type '" + type + "'");
}

json write_intervals(const std::vector<DayInterval>& intervals) {
  json out = json::array();
  for (const auto& iv : intervals) {
    out.push_back({format_clock(iv.from_ms), format_clock(iv.to_ms)});
  }
  return out;
}

json write_generator(const Generator& g) {
  return std::visit(
      Overloaded{
          [](const gen::Diurnal& d) {
            return json{{"type", "diurnal"},
                        {"base", d.base},
                        {"amplitude", d.amplitude},
                        {"peak_hour", d.peak_hour}};
          },
          [](const gen::Windows& w) {
            return json{{"type", "windows"},
                        {"low", w.low},
                        {"high", w.high},
                        {"intervals", write_intervals(w.intervals)}};
          },
          [](const gen::Occupancy& o) {
            return json{{"type", "occupancy"},
                        {"intervals", write_intervals(o.intervals)},
                        {"level", o.level}};
          },
          [](const gen::Burst& b) {
            json events = json::array();
            for (SimTime t : b.event_times) events.push_back(format_clock(t));
            return json{{"type", "burst"},
                        {"base", b.base},
                        {"magnitude", b.magnitude},
                        {"events", events},
                        {"duration_ms", b.duration_ms}};
          },
          [](const gen::Constant& c) {
            return json{{"type", "constant"}, {"value", c.value}};
          },
          [](const gen::Noise& n) {
            return json{{"type", "noise"},
                        {"amplitude", n.amplitude},
                        {"inner", write_generator(*n.inner)}};
          },
      },
      g.shape);
}

TransducerId read_id(const Reader& r) {
  auto v = r.integer();
  if (v < kMinTransducerId || v > kMaxTransducerId) {
    throw ValidationError(r.path, fmt::format("id {} is outside [1, 255]", v),
                          ErrorCode::UnassignedId);
  }
  TransducerId id(static_cast<int>(v));
  if (!try_kind_for_id(id)) {
    throw ValidationError(r.path, fmt::format("id {} is unassigned", v),
                          ErrorCode::UnassignedId);
  }
  return id;
}

}  // namespace

Scenario load_scenario(std::string_view config) {
  json doc;
  try {
    doc = json::parse(config);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
  Reader root{doc, ""};
  if (!doc.is_object()) throw ValidationError("$", "expected an object");
  root.only({"schema", "version", "name", "seed", "horizon_ms", "channels", "nodes",
             "hotplug", "sit_rules", "radio"});
  if (root.at("schema").str() != kSchema) {
    throw ValidationError("schema", "expected \"pnp-scenario\"");
  }
  if (root.at("version").integer() != kScenarioSchemaVersion) {
    throw ValidationError("version",
                          fmt::format("unsupported, expected {}", kScenarioSchemaVersion));
  }

  Scenario s;
  s.name = root.at("name").str();
  s.seed = root.at("seed").unsigned_integer();
  s.horizon_ms = root.at("horizon_ms").integer();

  Reader channels = root.at("channels");
  for (std::size_t i = 0; i < channels.size(); ++i) {
    Reader c = channels[i];
    c.only({"id", "generator"});
    s.channels.push_back({c.at("id").str(), read_generator(c.at("generator"))});
  }

  Reader nodes = root.at("nodes");
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    Reader n = nodes[i];
    n.only({"id", "label", "transducers", "reports"});
    NodeConfig node;
    auto id = n.at("id").unsigned_integer();
    if (id > UINT32_MAX) n.at("id").fail("out of range");
    node.id = static_cast<NodeId>(id);
    node.label = n.at("label").str();
    if (n.has("reports")) node.reports = n.at("reports").boolean();
    Reader ts = n.at("transducers");
    for (std::size_t k = 0; k < ts.size(); ++k) {
      Reader t = ts[k];
      t.only({"id", "channel", "attached"});
      TransducerConfig tc;
      tc.id = read_id(t.at("id"));
      if (t.has("channel")) tc.channel = t.at("channel").str();
      if (t.has("attached")) tc.initially_attached = t.at("attached").boolean();
      node.transducers.push_back(std::move(tc));
    }
    s.nodes.push_back(std::move(node));
  }

  if (root.has("hotplug")) {
    Reader hp = root.at("hotplug");
    for (std::size_t i = 0; i < hp.size(); ++i) {
      Reader a = hp[i];
      a.only({"time_ms", "node", "action", "id"});
      HotPlugAction action;
      action.time = a.at("time_ms").integer();
      action.node = static_cast<NodeId>(a.at("node").unsigned_integer());
      const std::string verb = a.at("action").str();
      if (verb == "attach") {
        action.action = BusEventKind::Attached;
      } else if (verb == "detach") {
        action.action = BusEventKind::Detached;
      } else {
        a.at("action").fail("expected \"attach\" or \"detach\"");
      }
      action.id = read_id(a.at("id"));
      s.hotplug.push_back(action);
    }
  }

  if (root.has("sit_rules")) {
    Reader rules = root.at("sit_rules");
    for (std::size_t i = 0; i < rules.size(); ++i) {
      Reader r = rules[i];
      r.only({"sensor", "actuator"});
      s.sit_rules.push_back({read_id(r.at("sensor")), read_id(r.at("actuator"))});
    }
  }

  if (root.has("radio")) {
    try {
      s.radio = doc.at("radio").get<RadioParams>();
    } catch (const json::exception& e) {
      throw ValidationError("radio", e.what());
    }
  }

  validate_scenario(s);
  return s;
}

std::string serialize_scenario(const Scenario& s) {
  json doc;
  doc["schema"] = kSchema;
  doc["version"] = kScenarioSchemaVersion;
  doc["name"] = s.name;
  doc["seed"] = s.seed;
  doc["horizon_ms"] = s.horizon_ms;
  json channels = json::array();
  for (const auto& c : s.channels) {
    channels.push_back({{"id", c.channel_id}, {"generator", write_generator(c.generator)}});
  }
  doc["channels"] = channels;
  json nodes = json::array();
  for (const auto& n : s.nodes) {
    json ts = json::array();
    for (const auto& t : n.transducers) {
      json tj{{"id", t.id.value()}};
      if (t.channel) tj["channel"] = *t.channel;
      if (!t.initially_attached) tj["attached"] = false;
      ts.push_back(tj);
    }
    json nj{{"id", n.id}, {"label", n.label}, {"transducers", ts}};
    if (!n.reports) nj["reports"] = false;
    nodes.push_back(nj);
  }
  doc["nodes"] = nodes;
  json hp = json::array();
  for (const auto& a : s.hotplug) {
    hp.push_back({{"time_ms", a.time},
                  {"node", a.node},
                  {"action", a.action == BusEventKind::Attached ? "attach" : "detach"},
                  {"id", a.id.value()}});
  }
  doc["hotplug"] = hp;
  json rules = json::array();
  for (const auto& r : s.sit_rules) {
    rules.push_back({{"sensor", r.sensor.value()}, {"actuator", r.actuator.value()}});
  }
  doc["sit_rules"] = rules;
  if (s.radio) doc["radio"] = *s.radio;
  return doc.dump(2) + "\n";
}

}  // namespace pnp
