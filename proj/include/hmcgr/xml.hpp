#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace hmcgr::xml {

// Minimal reader for the annotation interchange subset: elements with
// attributes, text, CDATA, comments and an optional prolog. No namespaces,
// no DTD. Errors carry the byte offset of the offending input.
struct ParseError : std::runtime_error {
  ParseError(const std::string& msg, std::size_t offset)
      : std::runtime_error(msg + " (byte " + std::to_string(offset) + ")"),
        offset(offset) {}
  std::size_t offset;
};

struct Attribute {
  std::string name;
  std::string value;
};

struct Element {
  std::string tag;
  std::vector<Attribute> attributes;
  std::vector<Element> children;
  std::string text;    // concatenated character data, CDATA included verbatim
  std::size_t offset;  // byte offset of the '<' that opened this element

  const std::string* attribute(std::string_view name) const;
  const Element* child(std::string_view tag) const;
};

Element parse(std::string_view bytes);

std::string escape_text(std::string_view raw);
std::string escape_attribute(std::string_view raw);

}  // namespace hmcgr::xml
