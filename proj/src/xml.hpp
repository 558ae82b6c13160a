#pragma once

#include <optional>
#include <string_view>
#include <utility>
#include <vector>

// Minimal non-validating XML reader for the wire subset: elements,
// attributes, character data. Comments, CDATA, DOCTYPE and processing
// instructions other than a leading XML declaration are outside the subset.
// All strings are views into the input buffer, which must outlive the tree.
namespace pnp::xml {

struct Attribute {
  std::string_view name;
  std::string_view value;
};

struct Element {
  std::string_view name;
  std::vector<Attribute> attributes;
  std::vector<Element> children;
  std::vector<std::string_view> text;  // character data segments, in order

  std::optional<std::string_view> attribute(std::string_view name) const;
  bool has_significant_text() const;
};

// Throws pnp::Error with MalformedXml for well-formedness failures and
// SchemaViolation for well-formed constructs outside the subset.
Element parse(std::string_view document);

bool is_space(char c);

}  // namespace pnp::xml
