// Copyright 2026 The DiffRoad Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "diffroad/xml.hpp"

#include <cctype>
#include <cstdio>

#include "diffroad/error.hpp"

namespace diffroad::xml
{

const std::string * Element::attribute(std::string_view key) const
{
  for (const auto & [k, v] : attributes) {
    if (k == key) {
      return &v;
    }
  }
  return nullptr;
}

const Element * Element::child(std::string_view child_name) const
{
  for (const auto & c : children) {
    if (c.name == child_name) {
      return &c;
    }
  }
  return nullptr;
}

std::vector<const Element *> Element::children_named(std::string_view child_name) const
{
  std::vector<const Element *> out;
  for (const auto & c : children) {
    if (c.name == child_name) {
      out.push_back(&c);
    }
  }
  return out;
}

namespace
{

class Parser
{
public:
  explicit Parser(std::string_view text) : text_(text) {}

  Element document()
  {
    skip_misc();
    if (at_end() || peek() != '<') {
      fail("expected a root element");
    }
    Element root = element();
    skip_misc();
    if (!at_end()) {
      fail("content after the root element");
    }
    return root;
  }

private:
  [[noreturn]] void fail(const std::string & what) const
  {
    throw Error(ErrorKind::kXmlSyntax, "line " + std::to_string(line_) + ": " + what);
  }

  bool at_end() const { return pos_ >= text_.size(); }
  char peek() const { return text_[pos_]; }
  bool starts_with(std::string_view s) const { return text_.substr(pos_, s.size()) == s; }

  void advance(std::size_t n = 1)
  {
    for (std::size_t i = 0; i < n && pos_ < text_.size(); ++i) {
      if (text_[pos_++] == '\n') {
        ++line_;
      }
    }
  }

  void skip_space()
  {
    while (!at_end() && std::isspace(static_cast<unsigned char>(peek()))) {
      advance();
    }
  }

  void skip_until(std::string_view terminator, const char * what)
  {
    while (!at_end() && !starts_with(terminator)) {
      advance();
    }
    if (at_end()) {
      fail(std::string("unterminated ") + what);
    }
    advance(terminator.size());
  }

  // Prolog, comments and whitespace around the root.
  void skip_misc()
  {
    for (;;) {
      skip_space();
      if (starts_with("<?")) {
        skip_until("?>", "processing instruction");
      } else if (starts_with("<!--")) {
        skip_until("-->", "comment");
      } else if (starts_with("<!DOCTYPE")) {
        fail("DOCTYPE declarations are not supported");
      } else {
        return;
      }
    }
  }

  static bool name_char(char c)
  {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.' || c == ':';
  }

  std::string name()
  {
    const std::size_t start = pos_;
    if (at_end() || !(std::isalpha(static_cast<unsigned char>(peek())) || peek() == '_' || peek() == ':')) {
      fail("expected a name");
    }
    while (!at_end() && name_char(peek())) {
      advance();
    }
    return std::string(text_.substr(start, pos_ - start));
  }

  void append_entity(std::string & out)
  {
    const std::size_t semi = text_.find(';', pos_);
    if (semi == std::string_view::npos || semi - pos_ > 12) {
      fail("unterminated entity reference");
    }
    const std::string_view ent = text_.substr(pos_ + 1, semi - pos_ - 1);
    if (ent == "amp") {
      out += '&';
    } else if (ent == "lt") {
      out += '<';
    } else if (ent == "gt") {
      out += '>';
    } else if (ent == "quot") {
      out += '"';
    } else if (ent == "apos") {
      out += '\'';
    } else if (!ent.empty() && ent[0] == '#') {
      unsigned long code = 0;
      try {
        code = ent.size() > 1 && (ent[1] == 'x' || ent[1] == 'X')
                 ? std::stoul(std::string(ent.substr(2)), nullptr, 16)
                 : std::stoul(std::string(ent.substr(1)), nullptr, 10);
      } catch (const std::exception &) {
        fail("bad character reference");
      }
      encode_utf8(static_cast<char32_t>(code), out);
    } else {
      fail("unknown entity '&" + std::string(ent) + ";'");
    }
    advance(semi - pos_ + 1);
  }

  void encode_utf8(char32_t c, std::string & out)
  {
    if (c < 0x80) {
      out += static_cast<char>(c);
    } else if (c < 0x800) {
      out += static_cast<char>(0xC0 | (c >> 6));
      out += static_cast<char>(0x80 | (c & 0x3F));
    } else if (c < 0x10000) {
      out += static_cast<char>(0xE0 | (c >> 12));
      out += static_cast<char>(0x80 | ((c >> 6) & 0x3F));
      out += static_cast<char>(0x80 | (c & 0x3F));
    } else if (c < 0x110000) {
      out += static_cast<char>(0xF0 | (c >> 18));
      out += static_cast<char>(0x80 | ((c >> 12) & 0x3F));
      out += static_cast<char>(0x80 | ((c >> 6) & 0x3F));
      out += static_cast<char>(0x80 | (c & 0x3F));
    } else {
      fail("character reference out of range");
    }
  }

  std::string attribute_value()
  {
    if (at_end() || (peek() != '"' && peek() != '\'')) {
      fail("attribute value must be quoted");
    }
    const char quote = peek();
    advance();
    std::string value;
    while (!at_end() && peek() != quote) {
      if (peek() == '<') {
        fail("'<' inside attribute value");
      }
      if (peek() == '&') {
        append_entity(value);
      } else {
        value += peek();
        advance();
      }
    }
    if (at_end()) {
      fail("unterminated attribute value");
    }
    advance();
    return value;
  }

  Element element()
  {
    Element e;
    e.line = line_;
    advance();  // '<'
    e.name = name();
    for (;;) {
      const bool had_space = !at_end() && std::isspace(static_cast<unsigned char>(peek()));
      skip_space();
      if (at_end()) {
        fail("unterminated start tag <" + e.name + ">");
      }
      if (starts_with("/>")) {
        advance(2);
        return e;
      }
      if (peek() == '>') {
        advance();
        break;
      }
      if (!had_space) {
        fail("expected whitespace between attributes of <" + e.name + ">");
      }
      std::string key = name();
      skip_space();
      if (at_end() || peek() != '=') {
        fail("expected '=' after attribute '" + key + "'");
      }
      advance();
      skip_space();
      if (e.attribute(key)) {
        fail("duplicate attribute '" + key + "' on <" + e.name + ">");
      }
      e.attributes.emplace_back(std::move(key), attribute_value());
    }
    for (;;) {
      if (at_end()) {
        fail("element <" + e.name + "> is never closed");
      }
      if (starts_with("</")) {
        advance(2);
        const std::string closing = name();
        if (closing != e.name) {
          fail("mismatched closing tag </" + closing + "> for <" + e.name + ">");
        }
        skip_space();
        if (at_end() || peek() != '>') {
          fail("malformed closing tag </" + closing + ">");
        }
        advance();
        return e;
      }
      if (starts_with("<!--")) {
        skip_until("-->", "comment");
      } else if (starts_with("<![CDATA[")) {
        advance(9);
        const std::size_t end = text_.find("]]>", pos_);
        if (end == std::string_view::npos) {
          fail("unterminated CDATA section");
        }
        e.text += text_.substr(pos_, end - pos_);
        advance(end - pos_ + 3);
      } else if (starts_with("<?")) {
        skip_until("?>", "processing instruction");
      } else if (peek() == '<') {
        e.children.push_back(element());
      } else if (peek() == '&') {
        append_entity(e.text);
      } else {
        e.text += peek();
        advance();
      }
    }
  }

  std::string_view text_;
  std::size_t pos_{0};
  int line_{1};
};

}  // namespace

Element parse(std::string_view text)
{
  return Parser(text).document();
}

std::string escape(std::string_view text)
{
  std::string out;
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}

Writer::Writer() : out_("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n") {}

void Writer::start_tag(std::string_view name,
                       const std::vector<std::pair<std::string, std::string>> & attrs)
{
  out_.append(2 * stack_.size(), ' ');
  out_ += '<';
  out_ += name;
  for (const auto & [k, v] : attrs) {
    out_ += ' ';
    out_ += k;
    out_ += "=\"";
    out_ += escape(v);
    out_ += '"';
  }
}

Writer & Writer::open(std::string_view name,
                      const std::vector<std::pair<std::string, std::string>> & attrs)
{
  start_tag(name, attrs);
  out_ += ">\n";
  stack_.emplace_back(name);
  return *this;
}

Writer & Writer::empty(std::string_view name,
                       const std::vector<std::pair<std::string, std::string>> & attrs)
{
  start_tag(name, attrs);
  out_ += "/>\n";
  return *this;
}

Writer & Writer::cdata(std::string_view name, std::string_view content)
{
  if (content.find("]]>") != std::string_view::npos) {
    throw Error(ErrorKind::kInvalidArgument, "xml: CDATA content contains ']]>'");
  }
  start_tag(name, {});
  out_ += "><![CDATA[";
  out_ += content;
  out_ += "]]></";
  out_ += name;
  out_ += ">\n";
  return *this;
}

Writer & Writer::close()
{
  if (stack_.empty()) {
    throw Error(ErrorKind::kInvalidArgument, "xml: close without open element");
  }
  out_.append(2 * (stack_.size() - 1), ' ');
  out_ += "</";
  out_ += stack_.back();
  out_ += ">\n";
  stack_.pop_back();
  return *this;
}

const std::string & Writer::str() const
{
  if (!stack_.empty()) {
    throw Error(ErrorKind::kInvalidArgument, "xml: unclosed element <" + stack_.back() + ">");
  }
  return out_;
}

std::string format_double(double v)
{
  if (v == 0.0) {
    return "0";  // also folds -0
  }
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace diffroad::xml
