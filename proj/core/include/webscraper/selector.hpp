#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "webscraper/html.hpp"

namespace webscraper::css {

// One compound selector: tag#id.class1.class2[attr="v"]:nth-of-type(n).
struct Compound {
  std::string tag;  // empty matches any element
  std::string id;
  std::vector<std::string> classes;
  std::vector<std::pair<std::string, std::optional<std::string>>> attrs;
  int nth_of_type = 0;  // 0 = not constrained
};

// Compounds joined by combinators; combinator[i] sits between part i and
// part i+1 and is '>' (child) or ' ' (descendant).
struct Complex {
  std::vector<Compound> parts;
  std::vector<char> combinators;
};

class Selector {
 public:
  // Throws ValidationError when the string is not valid under the grammar:
  //   list    := complex ("," complex)*
  //   complex := compound ((">" | " ") compound)*
  static Selector parse(const std::string& text);

  const std::vector<Complex>& alternatives() const { return alts_; }
  const std::string& text() const { return text_; }

 private:
  std::vector<Complex> alts_;
  std::string text_;
};

bool matches(const html::Document& doc, int element, const Selector& sel);

// Matching elements under `scope` in document order.
std::vector<int> query_all(const html::Document& doc, const Selector& sel,
                           int scope = 0);
int query_first(const html::Document& doc, const Selector& sel, int scope = 0);

// Parse-and-query conveniences; throw ValidationError on bad selectors.
std::vector<int> query_all(const html::Document& doc, const std::string& sel,
                           int scope = 0);
int query_first(const html::Document& doc, const std::string& sel,
                int scope = 0);

}  // namespace webscraper::css
