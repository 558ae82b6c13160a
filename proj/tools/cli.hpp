#pragma once

#include <cstdint>
#include <ostream>
#include <string>

#include "pnp/scenario.hpp"

namespace pnp::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalid = 1;
inline constexpr int kExitPropertyFailure = 2;

// Environment variable naming the default output directory.
inline constexpr const char* kOutEnv = "PNPSIM_OUT";

struct RunManifest {
  std::string scenario = "builtin-home";  // a path, or "builtin-home"
  std::optional<std::uint64_t> seed;
  std::optional<double> hours;
  std::string profile = "zigbee-default";
  std::string profile_file;  // overrides `profile` when set
  std::string out_dir;
};

// Loads a scenario file, or the built-in home; errors carry the path.
Scenario load_scenario_arg(const std::string& arg);

// Parses argv and runs one subcommand. Returns the process exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace pnp::cli
