#include "webscraper/selector.hpp"

#include <cctype>

#include "webscraper/errors.hpp"

namespace webscraper::css {

namespace {

bool ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_';
}

struct Lexer {
  const std::string& in;
  size_t pos = 0;

  explicit Lexer(const std::string& s) : in(s) {}

  bool eof() const { return pos >= in.size(); }
  char peek() const { return eof() ? '\0' : in[pos]; }

  std::string ident() {
    std::string out;
    while (!eof() && ident_char(in[pos])) out.push_back(in[pos++]);
    return out;
  }

  void skip_ws() {
    while (!eof() && in[pos] == ' ') ++pos;
  }
};

Compound parse_compound(Lexer& lex, const std::string& full) {
  Compound c;
  bool any = false;
  if (lex.peek() == '*') {
    ++lex.pos;
    any = true;
  } else if (ident_char(lex.peek())) {
    c.tag = lex.ident();
    any = true;
  }
  for (;;) {
    char ch = lex.peek();
    if (ch == '#') {
      ++lex.pos;
      c.id = lex.ident();
      if (c.id.empty())
        throw ValidationError("selector: empty #id in \"" + full + "\"");
      any = true;
    } else if (ch == '.') {
      ++lex.pos;
      std::string cls = lex.ident();
      if (cls.empty())
        throw ValidationError("selector: empty .class in \"" + full + "\"");
      c.classes.push_back(cls);
      any = true;
    } else if (ch == '[') {
      ++lex.pos;
      lex.skip_ws();
      std::string name = lex.ident();
      if (name.empty())
        throw ValidationError("selector: empty [attr] in \"" + full + "\"");
      lex.skip_ws();
      std::optional<std::string> value;
      if (lex.peek() == '=') {
        ++lex.pos;
        lex.skip_ws();
        if (lex.peek() == '"' || lex.peek() == '\'') {
          char quote = lex.in[lex.pos++];
          std::string v;
          while (!lex.eof() && lex.peek() != quote) v.push_back(lex.in[lex.pos++]);
          if (lex.eof())
            throw ValidationError("selector: unterminated attribute value in \"" +
                                  full + "\"");
          ++lex.pos;
          value = v;
        } else {
          std::string v;
          while (!lex.eof() && lex.peek() != ']') v.push_back(lex.in[lex.pos++]);
          value = v;
        }
      }
      lex.skip_ws();
      if (lex.peek() != ']')
        throw ValidationError("selector: missing ] in \"" + full + "\"");
      ++lex.pos;
      c.attrs.emplace_back(name, value);
      any = true;
    } else if (ch == ':') {
      ++lex.pos;
      std::string name = lex.ident();
      if (name != "nth-of-type")
        throw ValidationError("selector: unsupported pseudo-class :" + name);
      if (lex.peek() != '(')
        throw ValidationError("selector: :nth-of-type needs (n)");
      ++lex.pos;
      std::string digits;
      while (std::isdigit(static_cast<unsigned char>(lex.peek())))
        digits.push_back(lex.in[lex.pos++]);
      if (digits.empty() || lex.peek() != ')')
        throw ValidationError("selector: bad :nth-of-type argument in \"" +
                              full + "\"");
      ++lex.pos;
      c.nth_of_type = std::stoi(digits);
      if (c.nth_of_type < 1)
        throw ValidationError("selector: :nth-of-type argument must be >= 1");
      any = true;
    } else {
      break;
    }
  }
  if (!any)
    throw ValidationError("selector: expected a compound selector in \"" +
                          full + "\"");
  return c;
}

Complex parse_complex(Lexer& lex, const std::string& full) {
  Complex cx;
  cx.parts.push_back(parse_compound(lex, full));
  for (;;) {
    size_t before = lex.pos;
    lex.skip_ws();
    char combinator = ' ';
    if (lex.peek() == '>') {
      ++lex.pos;
      lex.skip_ws();
      combinator = '>';
    } else if (lex.pos == before || lex.eof() || lex.peek() == ',') {
      lex.pos = before;
      break;
    }
    cx.combinators.push_back(combinator);
    cx.parts.push_back(parse_compound(lex, full));
  }
  return cx;
}

bool match_compound(const html::Document& doc, int id, const Compound& c) {
  const html::Node& n = doc.node(id);
  if (n.type != html::NodeType::kElement) return false;
  if (!c.tag.empty() && n.tag != c.tag) return false;
  if (!c.id.empty()) {
    const std::string* v = n.attr("id");
    if (!v || *v != c.id) return false;
  }
  for (const auto& cls : c.classes)
    if (!n.has_class(cls)) return false;
  for (const auto& [name, value] : c.attrs) {
    const std::string* v = n.attr(name);
    if (!v) return false;
    if (value && *v != *value) return false;
  }
  if (c.nth_of_type > 0) {
    int parent = n.parent;
    if (parent < 0) return false;
    int ordinal = 0;
    for (int sib : doc.node(parent).children) {
      const html::Node& s = doc.node(sib);
      if (s.type == html::NodeType::kElement && s.tag == n.tag) {
        ++ordinal;
        if (sib == id) break;
      }
    }
    if (ordinal != c.nth_of_type) return false;
  }
  return true;
}

bool match_complex(const html::Document& doc, int id, const Complex& cx,
                   size_t part) {
  if (!match_compound(doc, id, cx.parts[part])) return false;
  if (part == 0) return true;
  char comb = cx.combinators[part - 1];
  int parent = doc.node(id).parent;
  if (comb == '>') {
    return parent > 0 && match_complex(doc, parent, cx, part - 1);
  }
  // Descendant: any ancestor may satisfy the next part to the left.
  for (int a = parent; a > 0; a = doc.node(a).parent)
    if (match_complex(doc, a, cx, part - 1)) return true;
  return false;
}

}  // namespace

Selector Selector::parse(const std::string& text) {
  Selector sel;
  sel.text_ = text;
  Lexer lex(text);
  lex.skip_ws();
  if (lex.eof()) throw ValidationError("selector: empty selector");
  for (;;) {
    sel.alts_.push_back(parse_complex(lex, text));
    lex.skip_ws();
    if (lex.eof()) break;
    if (lex.peek() != ',')
      throw ValidationError("selector: trailing garbage in \"" + text + "\"");
    ++lex.pos;
    lex.skip_ws();
  }
  return sel;
}

bool matches(const html::Document& doc, int element, const Selector& sel) {
  for (const auto& alt : sel.alternatives())
    if (match_complex(doc, element, alt, alt.parts.size() - 1)) return true;
  return false;
}

std::vector<int> query_all(const html::Document& doc, const Selector& sel,
                           int scope) {
  std::vector<int> out;
  for (int id : doc.elements(scope))
    if (matches(doc, id, sel)) out.push_back(id);
  return out;
}

int query_first(const html::Document& doc, const Selector& sel, int scope) {
  for (int id : doc.elements(scope))
    if (matches(doc, id, sel)) return id;
  return -1;
}

std::vector<int> query_all(const html::Document& doc, const std::string& sel,
                           int scope) {
  return query_all(doc, Selector::parse(sel), scope);
}

int query_first(const html::Document& doc, const std::string& sel, int scope) {
  return query_first(doc, Selector::parse(sel), scope);
}

}  // namespace webscraper::css
