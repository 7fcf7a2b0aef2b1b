#include "hmcgr/xml.hpp"

#include <cctype>

namespace hmcgr::xml {

namespace {

struct Cursor {
  std::string_view in;
  std::size_t pos = 0;

  bool done() const { return pos >= in.size(); }
  char peek() const { return in[pos]; }
  bool starts_with(std::string_view s) const { return in.substr(pos, s.size()) == s; }

  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, pos); }

  void expect(std::string_view s) {
    if (!starts_with(s)) fail("expected '" + std::string(s) + "'");
    pos += s.size();
  }

  void skip_ws() {
    while (!done() && std::isspace(static_cast<unsigned char>(peek()))) ++pos;
  }

  void skip_until(std::string_view terminator, const std::string& what) {
    std::size_t at = in.find(terminator, pos);
    if (at == std::string_view::npos) fail("unterminated " + what);
    pos = at + terminator.size();
  }
};

bool name_start(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
}

bool name_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' ||
         c == '.' || c == ':';
}

std::string read_name(Cursor& c) {
  if (c.done() || !name_start(c.peek())) c.fail("expected name");
  std::size_t start = c.pos;
  while (!c.done() && name_char(c.peek())) ++c.pos;
  return std::string(c.in.substr(start, c.pos - start));
}

void append_decoded(std::string& out, Cursor& c) {
  // Entity reference; cursor sits on '&'.
  std::size_t start = c.pos;
  std::size_t semi = c.in.find(';', c.pos);
  if (semi == std::string_view::npos || semi - c.pos > 8) c.fail("bad entity reference");
  std::string_view ent = c.in.substr(c.pos + 1, semi - c.pos - 1);
  if (ent == "lt") out += '<';
  else if (ent == "gt") out += '>';
  else if (ent == "amp") out += '&';
  else if (ent == "quot") out += '"';
  else if (ent == "apos") out += '\'';
  else if (!ent.empty() && ent[0] == '#') {
    int code = 0;
    try {
      code = ent[1] == 'x' || ent[1] == 'X'
                 ? std::stoi(std::string(ent.substr(2)), nullptr, 16)
                 : std::stoi(std::string(ent.substr(1)));
    } catch (...) {
      c.pos = start;
      c.fail("bad numeric character reference");
    }
    if (code < 0 || code > 127) {
      // Encode as UTF-8 for the few non-ASCII escapes we may meet.
      if (code <= 0x7FF) {
        out += static_cast<char>(0xC0 | (code >> 6));
        out += static_cast<char>(0x80 | (code & 0x3F));
      } else {
        out += static_cast<char>(0xE0 | (code >> 12));
        out += static_cast<char>(0x80 | ((code >> 6) & 0x3F));
        out += static_cast<char>(0x80 | (code & 0x3F));
      }
    } else {
      out += static_cast<char>(code);
    }
  } else {
    c.pos = start;
    c.fail("unknown entity '" + std::string(ent) + "'");
  }
  c.pos = semi + 1;
}

std::string read_attr_value(Cursor& c) {
  if (c.done() || (c.peek() != '"' && c.peek() != '\'')) c.fail("expected quoted attribute value");
  char quote = c.peek();
  ++c.pos;
  std::string out;
  while (true) {
    if (c.done()) c.fail("unterminated attribute value");
    char ch = c.peek();
    if (ch == quote) {
      ++c.pos;
      return out;
    }
    if (ch == '&') {
      append_decoded(out, c);
    } else if (ch == '<') {
      c.fail("'<' in attribute value");
    } else {
      out += ch;
      ++c.pos;
    }
  }
}

void skip_misc(Cursor& c) {
  // Whitespace, comments, processing instructions, DOCTYPE.
  while (true) {
    c.skip_ws();
    if (c.starts_with("<!--")) {
      c.skip_until("-->", "comment");
    } else if (c.starts_with("<?")) {
      c.skip_until("?>", "processing instruction");
    } else if (c.starts_with("<!DOCTYPE")) {
      c.skip_until(">", "DOCTYPE");
    } else {
      return;
    }
  }
}

Element read_element(Cursor& c) {
  Element el;
  el.offset = c.pos;
  c.expect("<");
  el.tag = read_name(c);
  while (true) {
    c.skip_ws();
    if (c.done()) c.fail("unterminated start tag <" + el.tag + ">");
    if (c.starts_with("/>")) {
      c.pos += 2;
      return el;
    }
    if (c.peek() == '>') {
      ++c.pos;
      break;
    }
    Attribute a;
    a.name = read_name(c);
    c.skip_ws();
    c.expect("=");
    c.skip_ws();
    a.value = read_attr_value(c);
    el.attributes.push_back(std::move(a));
  }

  // Content until the matching end tag.
  while (true) {
    if (c.done()) c.fail("missing </" + el.tag + ">");
    if (c.starts_with("<![CDATA[")) {
      std::size_t body = c.pos + 9;
      std::size_t end = c.in.find("]]>", body);
      if (end == std::string_view::npos) c.fail("unterminated CDATA");
      el.text.append(c.in.substr(body, end - body));
      c.pos = end + 3;
    } else if (c.starts_with("<!--")) {
      c.skip_until("-->", "comment");
    } else if (c.starts_with("</")) {
      std::size_t tag_at = c.pos;
      c.pos += 2;
      std::string closing = read_name(c);
      if (closing != el.tag)
        throw ParseError("mismatched end tag </" + closing + ">, expected </" + el.tag + ">",
                         tag_at);
      c.skip_ws();
      c.expect(">");
      return el;
    } else if (c.peek() == '<') {
      el.children.push_back(read_element(c));
    } else if (c.peek() == '&') {
      append_decoded(el.text, c);
    } else {
      el.text += c.peek();
      ++c.pos;
    }
  }
}

}  // namespace

const std::string* Element::attribute(std::string_view name) const {
  for (const auto& a : attributes)
    if (a.name == name) return &a.value;
  return nullptr;
}

const Element* Element::child(std::string_view tag) const {
  for (const auto& ch : children)
    if (ch.tag == tag) return &ch;
  return nullptr;
}

Element parse(std::string_view bytes) {
  Cursor c{bytes};
  skip_misc(c);
  if (c.done() || c.peek() != '<') c.fail("expected root element");
  Element root = read_element(c);
  skip_misc(c);
  if (!c.done()) c.fail("trailing content after root element");
  return root;
}

std::string escape_text(std::string_view raw) {
  std::string out;
  out.reserve(raw.size());
  for (char ch : raw) {
    switch (ch) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += ch;
    }
  }
  return out;
}

std::string escape_attribute(std::string_view raw) {
  std::string out = escape_text(raw);
  std::string quoted;
  quoted.reserve(out.size());
  for (char ch : out) {
    if (ch == '"') quoted += "&quot;";
    else quoted += ch;
  }
  return quoted;
}

}  // namespace hmcgr::xml
