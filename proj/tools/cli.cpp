#include "cli.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "pnp/digest.hpp"
#include "pnp/energy.hpp"
#include "pnp/error.hpp"
#include "pnp/fuzz.hpp"
#include "pnp/server.hpp"
#include "pnp/world.hpp"
#include "serve.hpp"

namespace pnp::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kEventLog = "events.tsv";
constexpr const char* kRecords = "records.ndjson";
constexpr const char* kSamples = "samples.csv";
constexpr const char* kEnergy = "energy.csv";
constexpr const char* kManifest = "manifest.json";
constexpr const char* kRepro = "fuzz-repro.xml";

std::string read_file(const fs::path& path, const std::string& field) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError(field, "cannot read '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw ValidationError("out", "cannot write '" + path.string() + "'");
}

std::string default_out() {
  const char* env = std::getenv(kOutEnv);
  return env && *env ? env : "pnpsim-out";
}

fs::path prepare_out(const std::string& dir) {
  fs::path p = dir.empty() ? fs::path(default_out()) : fs::path(dir);
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec || !fs::is_directory(p)) {
    throw ValidationError("out", "cannot create directory '" + p.string() + "'");
  }
  const fs::path probe = p / ".pnpsim-write-test";
  {
    std::ofstream f(probe);
    if (!f) throw ValidationError("out", "directory '" + p.string() + "' is not writable");
  }
  fs::remove(probe, ec);
  return p;
}

EnergyParams resolve_profile(const RunManifest& m) {
  if (!m.profile_file.empty()) {
    return energy_params_from_json(read_file(m.profile_file, "profile-file"));
  }
  return energy_profile(m.profile);
}

std::optional<SimTime> resolve_horizon(const RunManifest& m) {
  if (!m.hours) return std::nullopt;
  if (!std::isfinite(*m.hours) || *m.hours < 0) {
    throw ValidationError("hours", "must be a non-negative number");
  }
  const auto ms = static_cast<SimTime>(std::llround(*m.hours * 3'600'000.0));
  if (ms % kMillisPerSecond != 0) {
    throw ValidationError("hours", "must be a whole number of seconds");
  }
  return ms;
}

RunOptions run_options(const RunManifest& m) {
  RunOptions o;
  o.params = resolve_profile(m);
  o.seed = m.seed;
  o.horizon_ms = resolve_horizon(m);
  return o;
}

void add_manifest_flags(CLI::App* cmd, RunManifest& m) {
  cmd->add_option("--scenario", m.scenario,
                  "Scenario JSON file, or 'builtin-home'")
      ->capture_default_str();
  cmd->add_option("--hours", m.hours,
                  "Simulated horizon in hours (default: the scenario's own)");
  cmd->add_option("--seed", m.seed, "Seed (default: the scenario's own)");
  cmd->add_option("--profile", m.profile,
                  "Energy profile: " + fmt::format("{}", fmt::join(energy_profile_names(), ", ")))
      ->capture_default_str();
  cmd->add_option("--profile-file", m.profile_file,
                  "Energy profile JSON; overrides --profile");
  cmd->add_option("--out", m.out_dir,
                  std::string("Output directory (default: $") + kOutEnv + " or ./pnpsim-out)");
}

// ------------------------------------------------------------------ run

int cmd_run(const RunManifest& m, std::ostream& out) {
  const Scenario scenario = load_scenario_arg(m.scenario);
  RunOptions options = run_options(m);
  const fs::path dir = prepare_out(m.out_dir);

  std::ofstream events(dir / kEventLog, std::ios::binary);
  std::ofstream records(dir / kRecords, std::ios::binary);
  std::ofstream samples(dir / kSamples, std::ios::binary);
  if (!events || !records || !samples) {
    throw ValidationError("out", "cannot open artifacts in '" + dir.string() + "'");
  }
  options.event_log_out = &events;
  options.records_out = &records;
  options.samples_out = &samples;
  const RunResult r = simulate(scenario, options);
  events.close();
  records.close();
  samples.close();

  const std::string energy_csv = to_csv(r.energy);
  write_file(dir / kEnergy, energy_csv);

  json manifest = {
      {"schema", "pnp-run"},
      {"scenario", m.scenario},
      {"scenario_name", r.scenario},
      {"seed", r.seed},
      {"horizon_ms", r.horizon_ms},
      {"profile", r.profile},
      {"artifacts",
       {{"event_log", kEventLog}, {"records", kRecords}, {"samples", kSamples},
        {"energy", kEnergy}}},
      {"digests",
       {{"event_log", r.event_digest},
        {"records", r.records_digest},
        {"samples", r.samples_digest},
        {"energy", sha256_hex(energy_csv)}}},
      {"counters",
       {{"events", r.events},
        {"messages_sent", r.messages_sent},
        {"messages_lost", r.messages_lost},
        {"records", r.records},
        {"rejects", r.rejects},
        {"samples_collected", r.samples_collected},
        {"samples_ingested", r.samples_ingested},
        {"samples_dropped", r.samples_dropped},
        {"controls", r.controls.size()}}},
  };
  write_file(dir / kManifest, manifest.dump(2) + "\n");

  out << fmt::format("{} over {} ms, seed {}: {} events, {} records, {} samples, {} controls\n",
                     r.scenario, r.horizon_ms, r.seed, r.events, r.records,
                     r.samples_ingested, r.controls.size());
  for (const char* name : {kEventLog, kRecords, kSamples, kEnergy, kManifest}) {
    out << (dir / name).string() << "\n";
  }
  return kExitOk;
}

// ------------------------------------------------------- compare-energy

int cmd_compare(const RunManifest& m, std::ostream& out) {
  const Scenario scenario = load_scenario_arg(m.scenario);
  const RunOptions options = run_options(m);
  const fs::path dir = prepare_out(m.out_dir);
  const Comparison c = compare_networks(scenario, options);

  const std::string summary = summary_text(c.report);
  const std::vector<std::pair<std::string, std::string>> files = {
      {"comparison.csv", to_csv(c.report)},
      {"comparison.txt", summary},
      {"energy-proposed.csv", to_csv(c.proposed.energy)},
      {"energy-traditional.csv", to_csv(c.traditional.energy)},
  };
  for (const auto& [name, bytes] : files) write_file(dir / name, bytes);
  out << summary;
  for (const auto& [name, _] : files) out << (dir / name).string() << "\n";
  return kExitOk;
}

// ------------------------------------------------------- export-heatmap

struct HeatmapArgs {
  std::string run_dir;
  int bin_minutes = 60;
  std::string out_dir;
};

int cmd_heatmap(const HeatmapArgs& a, std::ostream& out) {
  const fs::path run = a.run_dir.empty() ? fs::path(default_out()) : fs::path(a.run_dir);
  json manifest;
  try {
    manifest = json::parse(read_file(run / kManifest, "run"));
  } catch (const json::exception& e) {
    throw ValidationError("run", (run / kManifest).string() + ": " + e.what());
  }
  if (!manifest.contains("horizon_ms") || !manifest["horizon_ms"].is_number_integer()) {
    throw ValidationError("run", (run / kManifest).string() + ": missing horizon_ms");
  }
  const auto horizon = manifest["horizon_ms"].get<SimTime>();

  std::ifstream samples(run / kSamples, std::ios::binary);
  if (!samples) throw ValidationError("run", "cannot read '" + (run / kSamples).string() + "'");
  const ChannelAggregates aggregates = read_samples_csv(samples);
  const Heatmap h = heatmap_export(aggregates, a.bin_minutes, horizon);

  const fs::path dir = a.out_dir.empty() ? run : prepare_out(a.out_dir);
  const std::string csv = h.to_csv();
  const std::string pgm = h.to_pgm();
  write_file(dir / "heatmap.csv", csv);
  write_file(dir / "heatmap.pgm", pgm);
  out << fmt::format("{} rows x {} bins of {} min\n", h.row_labels.size(),
                     h.column_labels.size(), a.bin_minutes);
  out << fmt::format("{}  sha256 {}\n", (dir / "heatmap.csv").string(), sha256_hex(csv));
  out << fmt::format("{}  sha256 {}\n", (dir / "heatmap.pgm").string(), sha256_hex(pgm));
  return kExitOk;
}

// -------------------------------------------------------- fuzz-protocol

struct FuzzArgs {
  std::uint64_t iterations = 1000;
  std::uint64_t seed = 0;
  std::vector<std::string> corpus;
  std::string out_dir;
};

std::vector<std::string> load_corpus(const std::vector<std::string>& paths) {
  std::vector<std::string> docs;
  for (const auto& p : paths) {
    if (fs::is_directory(p)) {
      std::vector<fs::path> files;
      for (const auto& entry : fs::directory_iterator(p)) {
        if (entry.is_regular_file()) files.push_back(entry.path());
      }
      std::sort(files.begin(), files.end());
      for (const auto& f : files) docs.push_back(read_file(f, "corpus"));
    } else {
      docs.push_back(read_file(p, "corpus"));
    }
  }
  return docs;
}

int cmd_fuzz(const FuzzArgs& a, std::ostream& out, std::ostream& err) {
  if (a.iterations == 0) throw ValidationError("iterations", "must be positive");
  FuzzOptions options;
  options.iterations = a.iterations;
  options.seed = a.seed;
  options.corpus = load_corpus(a.corpus);
  const FuzzReport r = fuzz_protocol(options);

  out << fmt::format("golden documents: {}\n", r.golden_documents);
  out << fmt::format("measurement round-trips: {}\ncontrol round-trips: {}\n",
                     r.measurement_round_trips, r.control_round_trips);
  out << fmt::format("mutations rejected: {}/{}\n", r.rejected, r.mutations);
  for (const auto& [code, n] : r.rejected_by) {
    out << fmt::format("  {}: {}\n", to_string(code), n);
  }
  if (r.passed()) {
    out << "PASS\n";
    return kExitOk;
  }
  const fs::path dir = prepare_out(a.out_dir);
  const fs::path repro = dir / kRepro;
  write_file(repro, r.failure->document);
  err << fmt::format("FAIL {}: {}\nrepro: {}\n", r.failure->property, r.failure->detail,
                     repro.string());
  return kExitPropertyFailure;
}

// ------------------------------------------------------------- scenario

int cmd_scenario_validate(const std::string& arg, std::ostream& out) {
  const Scenario s = load_scenario_arg(arg);
  out << fmt::format("{}: ok ({} nodes, {} transducers, {} channels, horizon {} ms)\n", arg,
                     s.nodes.size(), s.transducer_count(), s.channels.size(), s.horizon_ms);
  return kExitOk;
}

int cmd_scenario_show(const std::string& arg, std::ostream& out) {
  out << serialize_scenario(load_scenario_arg(arg));
  return kExitOk;
}

}  // namespace

Scenario load_scenario_arg(const std::string& arg) {
  if (arg == "builtin-home") return builtin_home();
  const std::string text = read_file(arg, "scenario");
  try {
    return load_scenario(text);
  } catch (const ValidationError& e) {
    throw ValidationError(arg + ": " + e.field(), e.what(), e.cause());
  } catch (const Error& e) {
    throw Error(e.code(), arg + ": " + e.what());
  }
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Plug-and-play transducer network simulator"};
  app.name("pnpsim");
  app.require_subcommand(1);

  RunManifest manifest;
  auto* run_cmd = app.add_subcommand("run", "Simulate a scenario and write its artifacts");
  add_manifest_flags(run_cmd, manifest);

  auto* compare_cmd = app.add_subcommand(
      "compare-energy", "Simulate the clustered and one-per-node networks and compare energy");
  add_manifest_flags(compare_cmd, manifest);

  HeatmapArgs heatmap;
  auto* heatmap_cmd =
      app.add_subcommand("export-heatmap", "Write a normalized heatmap of a run's samples");
  heatmap_cmd->add_option("--run", heatmap.run_dir,
                          std::string("Directory written by 'run' (default: $") + kOutEnv +
                              " or ./pnpsim-out)");
  heatmap_cmd->add_option("--bin-minutes", heatmap.bin_minutes, "Bin width in minutes")
      ->capture_default_str();
  heatmap_cmd->add_option("--out", heatmap.out_dir, "Output directory (default: the run directory)");

  FuzzArgs fuzz;
  auto* fuzz_cmd = app.add_subcommand(
      "fuzz-protocol", "Round-trip random messages and check mutations are rejected");
  fuzz_cmd->add_option("--iterations", fuzz.iterations, "Random messages of each type")
      ->capture_default_str();
  fuzz_cmd->add_option("--seed", fuzz.seed, "Seed of the case sequence")->capture_default_str();
  fuzz_cmd->add_option("--corpus", fuzz.corpus,
                       "Extra canonical documents (files or directories)");
  fuzz_cmd->add_option("--out", fuzz.out_dir,
                       std::string("Where a failing case is written (default: $") + kOutEnv +
                           " or ./pnpsim-out)");

  std::string scenario_arg = "builtin-home";
  auto* scenario_cmd = app.add_subcommand("scenario", "Inspect scenario files");
  scenario_cmd->require_subcommand(1);
  auto* validate_cmd = scenario_cmd->add_subcommand("validate", "Check a scenario file");
  validate_cmd->add_option("--scenario", scenario_arg, "Scenario JSON file, or 'builtin-home'")
      ->capture_default_str();
  auto* show_cmd = scenario_cmd->add_subcommand("show", "Print a scenario as JSON");
  show_cmd->add_option("--scenario", scenario_arg, "Scenario JSON file, or 'builtin-home'")
      ->capture_default_str();

  ServeOptions serve_opts;
  std::string serve_scenario = "builtin-home";
  auto* serve_cmd = app.add_subcommand(
      "serve", "Accept XML measurements over local TCP, one per line (manual testing)");
  serve_cmd->add_option("--port", serve_opts.port, "TCP port on 127.0.0.1; 0 picks one")
      ->capture_default_str();
  serve_cmd->add_option("--scenario", serve_scenario,
                        "Scenario whose sit rules answer with control messages")
      ->capture_default_str();
  serve_cmd->add_option("--max-connections", serve_opts.max_connections,
                        "Exit after this many connections; 0 runs until killed")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInvalid;
  }

  try {
    if (*run_cmd) return cmd_run(manifest, out);
    if (*compare_cmd) return cmd_compare(manifest, out);
    if (*heatmap_cmd) return cmd_heatmap(heatmap, out);
    if (*fuzz_cmd) return cmd_fuzz(fuzz, out, err);
    if (*validate_cmd) return cmd_scenario_validate(scenario_arg, out);
    if (*show_cmd) return cmd_scenario_show(scenario_arg, out);
    if (*serve_cmd) {
      serve(load_scenario_arg(serve_scenario), serve_opts, out);
      return kExitOk;
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitInvalid;
  }
  return kExitInvalid;
}

}  // namespace pnp::cli
