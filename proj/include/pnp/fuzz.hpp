#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "pnp/error.hpp"
#include "pnp/protocol.hpp"

namespace pnp {

// Random messages that satisfy every codec invariant.
MeasurementMessage random_measurement(std::mt19937_64& rng);
ControlMessage random_control(std::mt19937_64& rng);

struct Mutation {
  std::string description;  // e.g. "rename element <tx>#2"
  std::string document;
};

// Every single-field mutation of a canonical document: element renames,
// attribute drops, renames, duplicates and bad values, broken sample
// values, dropped containers, and every truncation. Each result is
// invalid by construction.
std::vector<Mutation> single_field_mutations(std::string_view canonical);

struct FuzzFailure {
  std::string property;
  std::string detail;
  std::string document;
};

struct FuzzReport {
  std::uint64_t measurement_round_trips = 0;
  std::uint64_t control_round_trips = 0;
  std::uint64_t mutations = 0;
  std::uint64_t rejected = 0;
  std::map<ErrorCode, std::uint64_t> rejected_by;
  std::uint64_t golden_documents = 0;
  std::optional<FuzzFailure> failure;  // first counterexample

  bool passed() const { return !failure; }
};

struct FuzzOptions {
  std::uint64_t iterations = 1000;
  std::uint64_t seed = 0;
  // Extra canonical documents; each must round-trip byte for byte and have
  // all its mutations rejected.
  std::vector<std::string> corpus;
};

// Round-trips `iterations` random messages of each type, and checks that
// every mutation of every golden document (and of the random documents'
// first few) is rejected with a typed error. Stops at the first failure.
FuzzReport fuzz_protocol(const FuzzOptions& options);

// The built-in golden documents shipped with the codec.
std::vector<std::string> builtin_golden_documents();

}  // namespace pnp
