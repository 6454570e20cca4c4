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

#ifndef DIFFROAD__XML_HPP_
#define DIFFROAD__XML_HPP_

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

/// Minimal XML: elements, attributes, text, CDATA, comments, the five
/// predefined entities and numeric character references. No DTDs.
namespace diffroad::xml
{

struct Element
{
  std::string name;
  std::vector<std::pair<std::string, std::string>> attributes;
  std::vector<Element> children;
  std::string text;
  int line{0};

  const std::string * attribute(std::string_view key) const;
  const Element * child(std::string_view child_name) const;
  std::vector<const Element *> children_named(std::string_view child_name) const;
};

/// Throws Error(kXmlSyntax) with the line number on malformed input.
Element parse(std::string_view text);

std::string escape(std::string_view text);

/// Streaming writer with two-space indentation and stable attribute order.
class Writer
{
public:
  Writer();

  Writer & open(std::string_view name, const std::vector<std::pair<std::string, std::string>> & attrs = {});
  Writer & empty(std::string_view name, const std::vector<std::pair<std::string, std::string>> & attrs = {});
  Writer & cdata(std::string_view name, std::string_view content);
  Writer & close();

  const std::string & str() const;

private:
  void start_tag(std::string_view name, const std::vector<std::pair<std::string, std::string>> & attrs);

  std::string out_;
  std::vector<std::string> stack_;
};

/// 17 significant digits, so every double round-trips.
std::string format_double(double v);

}  // namespace diffroad::xml

#endif  // DIFFROAD__XML_HPP_
