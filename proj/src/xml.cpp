#include "xml.hpp"

#include <string>

#include "pnp/error.hpp"

namespace pnp::xml {

namespace {

constexpr int kMaxDepth = 32;

[[noreturn]] void malformed(std::size_t pos, const std::string& what) {
  throw Error(ErrorCode::MalformedXml,
              what + " at offset " + std::to_string(pos));
}

[[noreturn]] void unsupported(std::size_t pos, const std::string& what) {
  throw Error(ErrorCode::SchemaViolation,
              what + " at offset " + std::to_string(pos));
}

bool is_name_start(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_' ||
         c == ':';
}

bool is_name_char(char c) {
  return is_name_start(c) || (c >= '0' && c <= '9') || c == '-' || c == '.';
}

class Reader {
 public:
  explicit Reader(std::string_view in) : in_(in) {}

  Element document() {
    if (in_.size() >= 3 && static_cast<unsigned char>(in_[0]) == 0xEF &&
        static_cast<unsigned char>(in_[1]) == 0xBB &&
        static_cast<unsigned char>(in_[2]) == 0xBF) {
      malformed(0, "byte order mark is not permitted");
    }
    if (in_.substr(0, 5) == "<?xml") {
      auto end = in_.find("?>");
      if (end == std::string_view::npos) malformed(0, "unterminated declaration");
      pos_ = end + 2;
    }
    skip_space();
    if (at_end() || peek() != '<') malformed(pos_, "expected root element");
    Element root = element(0);
    skip_space();
    if (!at_end()) malformed(pos_, "content after root element");
    return root;
  }

 private:
  bool at_end() const { return pos_ >= in_.size(); }
  char peek() const { return in_[pos_]; }
  bool starts_with(std::string_view s) const {
    return in_.substr(pos_, s.size()) == s;
  }

  void skip_space() {
    while (!at_end() && is_space(peek())) ++pos_;
  }

  void expect(char c) {
    if (at_end() || peek() != c) {
      malformed(pos_, std::string("expected '") + c + "'");
    }
    ++pos_;
  }

  std::string_view name() {
    std::size_t start = pos_;
    if (at_end() || !is_name_start(peek())) malformed(pos_, "expected a name");
    while (!at_end() && is_name_char(peek())) ++pos_;
    return in_.substr(start, pos_ - start);
  }

  // Validates entity/character references without expanding them.
  void check_references(std::string_view s, std::size_t base) const {
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (s[i] != '&') continue;
      auto semi = s.find(';', i);
      if (semi == std::string_view::npos) malformed(base + i, "bare '&'");
      auto ref = s.substr(i + 1, semi - i - 1);
      bool ok = ref == "lt" || ref == "gt" || ref == "amp" || ref == "quot" ||
                ref == "apos";
      if (!ok && ref.size() >= 2 && ref[0] == '#') {
        ok = ref.find_first_not_of("0123456789", 1) == std::string_view::npos ||
             (ref[1] == 'x' && ref.size() > 2 &&
              ref.find_first_not_of("0123456789abcdefABCDEF", 2) ==
                  std::string_view::npos);
      }
      if (!ok) malformed(base + i, "unknown reference");
      i = semi;
    }
  }

  Element element(int depth) {
    if (depth >= kMaxDepth) malformed(pos_, "nesting too deep");
    expect('<');
    Element el;
    el.name = name();
    for (;;) {
      bool spaced = !at_end() && is_space(peek());
      skip_space();
      if (at_end()) malformed(pos_, "unterminated start tag");
      if (starts_with("/>")) {
        pos_ += 2;
        return el;
      }
      if (peek() == '>') {
        ++pos_;
        break;
      }
      if (!spaced) malformed(pos_, "attributes must be separated by space");
      Attribute attr;
      attr.name = name();
      skip_space();
      expect('=');
      skip_space();
      if (at_end() || (peek() != '"' && peek() != '\'')) {
        malformed(pos_, "attribute value must be quoted");
      }
      char quote = peek();
      ++pos_;
      std::size_t start = pos_;
      while (!at_end() && peek() != quote) {
        if (peek() == '<') malformed(pos_, "'<' in attribute value");
        ++pos_;
      }
      if (at_end()) malformed(start, "unterminated attribute value");
      attr.value = in_.substr(start, pos_ - start);
      check_references(attr.value, start);
      ++pos_;
      for (const auto& a : el.attributes) {
        if (a.name == attr.name) malformed(start, "duplicate attribute");
      }
      el.attributes.push_back(attr);
    }

    for (;;) {
      std::size_t start = pos_;
      while (!at_end() && peek() != '<') ++pos_;
      if (pos_ > start) {
        auto text = in_.substr(start, pos_ - start);
        check_references(text, start);
        if (text.find("]]>") != std::string_view::npos) {
          malformed(start, "']]>' in character data");
        }
        el.text.push_back(text);
      }
      if (at_end()) malformed(pos_, "unterminated element '" +
                                        std::string(el.name) + "'");
      if (starts_with("</")) {
        pos_ += 2;
        auto closing = name();
        if (closing != el.name) {
          malformed(pos_, "end tag '" + std::string(closing) +
                              "' does not match '" + std::string(el.name) +
                              "'");
        }
        skip_space();
        expect('>');
        return el;
      }
      if (starts_with("<!--") || starts_with("<![CDATA[") ||
          starts_with("<!") || starts_with("<?")) {
        unsupported(pos_, "markup outside the wire subset");
      }
      el.children.push_back(element(depth + 1));
    }
  }

  std::string_view in_;
  std::size_t pos_ = 0;
};

}  // namespace

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r';
}

std::optional<std::string_view> Element::attribute(std::string_view n) const {
  for (const auto& a : attributes) {
    if (a.name == n) return a.value;
  }
  return std::nullopt;
}

bool Element::has_significant_text() const {
  for (auto seg : text) {
    for (char c : seg) {
      if (!is_space(c)) return true;
    }
  }
  return false;
}

Element parse(std::string_view document) { return Reader(document).document(); }

}  // namespace pnp::xml
