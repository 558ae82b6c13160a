#include <gtest/gtest.h>

#include <filesystem>

#include "pnp/fuzz.hpp"
#include "pnp/protocol.hpp"
#include "test_support.hpp"

namespace pnp {
namespace {

bool rejected(const std::string& doc) {
  const bool control = doc.rfind("<control", 0) == 0;
  try {
    if (control) {
      decode_control(doc);
    } else {
      decode_measurement(doc);
    }
  } catch (const Error& e) {
    return e.code() == ErrorCode::MalformedXml || e.code() == ErrorCode::SchemaViolation ||
           e.code() == ErrorCode::InvariantViolation;
  }
  return false;
}

TEST(Fuzz, ThousandIterationsPass) {
  const FuzzReport r = fuzz_protocol({1000, 1, {}});
  ASSERT_TRUE(r.passed()) << r.failure->property << ": " << r.failure->detail << "\n"
                          << r.failure->document;
  EXPECT_EQ(r.measurement_round_trips, 1000u);
  EXPECT_EQ(r.control_round_trips, 1000u);
  EXPECT_EQ(r.golden_documents, builtin_golden_documents().size());
  EXPECT_GT(r.mutations, 1000u);
  EXPECT_EQ(r.rejected, r.mutations);
  std::uint64_t by_code = 0;
  for (const auto& [code, n] : r.rejected_by) by_code += n;
  EXPECT_EQ(by_code, r.rejected);
}

TEST(Fuzz, SameSeedSameCases) {
  std::mt19937_64 a(42), b(42), c(43);
  bool differs = false;
  for (int i = 0; i < 100; ++i) {
    const auto ma = random_measurement(a);
    EXPECT_EQ(ma, random_measurement(b));
    differs = differs || ma != random_measurement(c);
    const auto ca = random_control(a);
    EXPECT_EQ(ca, random_control(b));
    random_control(c);
  }
  EXPECT_TRUE(differs);

  const FuzzReport x = fuzz_protocol({200, 9, {}});
  const FuzzReport y = fuzz_protocol({200, 9, {}});
  EXPECT_EQ(x.mutations, y.mutations);
  EXPECT_EQ(x.rejected_by, y.rejected_by);
}

TEST(Fuzz, RandomMessagesSatisfyInvariants) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 1000; ++i) {
    const auto m = random_measurement(rng);
    EXPECT_NO_THROW(check_invariants(m));
    const auto c = random_control(rng);
    EXPECT_NO_THROW(check_invariants(c));
  }
}

TEST(Fuzz, GoldenMutationsAreAllRejected) {
  for (const auto& doc : builtin_golden_documents()) {
    const auto mutations = single_field_mutations(doc);
    // At least every proper prefix.
    EXPECT_GE(mutations.size(), doc.size());
    for (const auto& m : mutations) {
      EXPECT_NE(m.document, doc);
      EXPECT_TRUE(rejected(m.document)) << m.description << "\n" << m.document;
    }
  }
}

TEST(Fuzz, MutationClasses) {
  const std::string doc =
      "<control node=\"4\"><act id=\"24\" on=\"1\" ms=\"30000\"/></control>";
  ASSERT_EQ(encode(decode_control(doc)), doc);
  const auto mutations = single_field_mutations(doc);
  auto has = [&](const std::string& doc_text) {
    return std::any_of(mutations.begin(), mutations.end(),
                       [&](const Mutation& m) { return m.document == doc_text; });
  };
  EXPECT_TRUE(has("<control><act id=\"24\" on=\"1\" ms=\"30000\"/></control>"));
  EXPECT_TRUE(has("<control node=\"x\"><act id=\"24\" on=\"1\" ms=\"30000\"/></control>"));
  EXPECT_TRUE(has("<control node=\"4\"><act id=\"24\" on=\"1\"/></control>"));
  EXPECT_TRUE(has("<control node=\"4\"><act id=\"24\" on=\"1\" ms=\"30000\"/></contro"));
  for (const auto& m : mutations) EXPECT_TRUE(rejected(m.document)) << m.description;
}

TEST(Fuzz, CommittedGoldenFilesMatch) {
  const auto dir = std::filesystem::path(test::source_path("data/golden"));
  std::vector<std::string> on_disk;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    if (e.path().extension() == ".xml") on_disk.push_back(test::slurp(e.path()));
  }
  auto builtin = builtin_golden_documents();
  std::sort(on_disk.begin(), on_disk.end());
  std::sort(builtin.begin(), builtin.end());
  EXPECT_EQ(on_disk, builtin);
}

TEST(Fuzz, NonCanonicalCorpusEntryFails) {
  const std::string padded =
      "<control node=\"4\">\n  <act id=\"24\" on=\"1\" ms=\"30000\"/>\n</control>";
  const FuzzReport r = fuzz_protocol({10, 1, {padded}});
  ASSERT_FALSE(r.passed());
  EXPECT_EQ(r.failure->property, "golden-canonical");
  EXPECT_EQ(r.failure->document, padded);
  EXPECT_EQ(r.measurement_round_trips, 0u);
}

TEST(Fuzz, InvalidCorpusEntryFails) {
  const FuzzReport r = fuzz_protocol({10, 1, {"<control node=\"0\"/>"}});
  ASSERT_FALSE(r.passed());
  EXPECT_EQ(r.failure->property, "golden-canonical");
}

TEST(Fuzz, CanonicalCorpusEntryPasses) {
  std::mt19937_64 rng(77);
  const FuzzReport r = fuzz_protocol({10, 1, {encode(random_measurement(rng))}});
  EXPECT_TRUE(r.passed());
  EXPECT_EQ(r.golden_documents, builtin_golden_documents().size() + 1);
}

}  // namespace
}  // namespace pnp
