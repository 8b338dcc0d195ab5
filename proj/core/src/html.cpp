#include "webscraper/html.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdint>

namespace webscraper::html {

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return s;
}

bool is_ws(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

const std::array<const char*, 14> kVoidTags = {
    "area", "base",  "br",    "col",   "embed",  "hr",  "img",
    "input", "link", "meta",  "param", "source", "track", "wbr"};

bool is_raw_text(const std::string& tag) {
  return tag == "script" || tag == "style";
}

// Tags whose opening implies closing an open <p>.
bool closes_p(const std::string& tag) {
  static const char* kBlocks[] = {
      "address", "article", "aside",  "blockquote", "div",    "dl",
      "fieldset", "footer", "form",   "h1",         "h2",     "h3",
      "h4",       "h5",     "h6",     "header",     "hr",     "main",
      "nav",      "ol",     "p",      "pre",        "section", "table",
      "ul",       "li"};
  for (const char* b : kBlocks)
    if (tag == b) return true;
  return false;
}

void append_utf8(std::string* out, std::uint32_t cp) {
  if (cp <= 0x7F) {
    out->push_back(static_cast<char>(cp));
  } else if (cp <= 0x7FF) {
    out->push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out->push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp <= 0xFFFF) {
    out->push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out->push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out->push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp <= 0x10FFFF) {
    out->push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out->push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out->push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out->push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

struct Parser {
  const std::string& in;
  size_t pos = 0;
  Document* doc;
  std::vector<int> stack;  // open element ids, stack[0] is the document

  explicit Parser(const std::string& s, Document* d) : in(s), doc(d) {
    stack.push_back(d->root());
  }

  bool eof() const { return pos >= in.size(); }
  char peek(size_t ahead = 0) const {
    return pos + ahead < in.size() ? in[pos + ahead] : '\0';
  }

  bool starts_with_ci(const char* prefix) const {
    size_t i = 0;
    while (prefix[i]) {
      if (pos + i >= in.size()) return false;
      if (std::tolower(static_cast<unsigned char>(in[pos + i])) !=
          std::tolower(static_cast<unsigned char>(prefix[i])))
        return false;
      ++i;
    }
    return true;
  }

  void run() {
    std::string text;
    while (!eof()) {
      if (peek() == '<') {
        if (peek(1) == '!' || peek(1) == '?' || peek(1) == '/' ||
            std::isalpha(static_cast<unsigned char>(peek(1)))) {
          flush_text(&text);
          markup();
          continue;
        }
      }
      text.push_back(in[pos++]);
    }
    flush_text(&text);
  }

  void flush_text(std::string* text) {
    if (text->empty()) return;
    bool all_ws = std::all_of(text->begin(), text->end(),
                              [](char c) { return is_ws(c); });
    if (!all_ws) {
      Node n;
      n.type = NodeType::kText;
      n.text = decode_entities(*text);
      add_to_top(std::move(n));
    }
    text->clear();
  }

  void markup() {
    if (starts_with_ci("<!--")) {
      comment();
    } else if (peek(1) == '!' || peek(1) == '?') {
      // doctype / processing instruction: skip to '>'
      while (!eof() && in[pos] != '>') ++pos;
      if (!eof()) ++pos;
    } else if (peek(1) == '/') {
      end_tag();
    } else {
      start_tag();
    }
  }

  void comment() {
    pos += 4;
    auto end = in.find("-->", pos);
    Node n;
    n.type = NodeType::kComment;
    n.text = in.substr(pos, end == std::string::npos ? std::string::npos
                                                     : end - pos);
    add_to_top(std::move(n));
    pos = end == std::string::npos ? in.size() : end + 3;
  }

  std::string read_tag_name() {
    std::string name;
    while (!eof() && (std::isalnum(static_cast<unsigned char>(peek())) ||
                      peek() == '-' || peek() == '_' || peek() == ':'))
      name.push_back(in[pos++]);
    return lower(name);
  }

  void skip_ws() {
    while (!eof() && is_ws(peek())) ++pos;
  }

  void start_tag() {
    ++pos;  // '<'
    std::string tag = read_tag_name();
    Node n;
    n.type = NodeType::kElement;
    n.tag = tag;
    bool self_closing = false;
    for (;;) {
      skip_ws();
      if (eof()) break;
      if (peek() == '>') {
        ++pos;
        break;
      }
      if (peek() == '/' && peek(1) == '>') {
        pos += 2;
        self_closing = true;
        break;
      }
      // attribute
      std::string name;
      while (!eof() && !is_ws(peek()) && peek() != '=' && peek() != '>' &&
             peek() != '/')
        name.push_back(in[pos++]);
      if (name.empty()) {
        ++pos;
        continue;
      }
      name = lower(name);
      std::string value;
      skip_ws();
      if (peek() == '=') {
        ++pos;
        skip_ws();
        if (peek() == '"' || peek() == '\'') {
          char quote = in[pos++];
          while (!eof() && peek() != quote) value.push_back(in[pos++]);
          if (!eof()) ++pos;
        } else {
          while (!eof() && !is_ws(peek()) && peek() != '>')
            value.push_back(in[pos++]);
        }
      }
      // first declaration wins, per HTML parsing rules
      bool dup = false;
      for (auto& [k, v] : n.attrs)
        if (k == name) dup = true;
      if (!dup) n.attrs.emplace_back(name, decode_entities(value));
    }

    implied_end_tags(tag);
    int id = add_to_top(std::move(n));
    if (self_closing || is_void_element(tag)) return;
    if (is_raw_text(tag)) {
      raw_text(tag, id);
      return;
    }
    stack.push_back(id);
  }

  // Pops elements whose end tag the markup left implicit.
  void implied_end_tags(const std::string& incoming) {
    while (stack.size() > 1) {
      const std::string& open = doc->node(stack.back()).tag;
      bool pop = false;
      if (open == "p" && closes_p(incoming)) pop = true;
      if (open == "li" && incoming == "li") pop = true;
      if ((open == "td" || open == "th") &&
          (incoming == "td" || incoming == "th" || incoming == "tr"))
        pop = true;
      if (open == "tr" && incoming == "tr") pop = true;
      if (open == "option" && incoming == "option") pop = true;
      if (!pop) break;
      stack.pop_back();
    }
  }

  void raw_text(const std::string& tag, int id) {
    std::string close = "</" + tag;
    size_t end = pos;
    for (;;) {
      end = in.find('<', end);
      if (end == std::string::npos) {
        end = in.size();
        break;
      }
      bool match = true;
      for (size_t i = 0; i < close.size(); ++i) {
        if (end + i >= in.size() ||
            std::tolower(static_cast<unsigned char>(in[end + i])) !=
                close[i]) {
          match = false;
          break;
        }
      }
      if (match) break;
      ++end;
    }
    if (end > pos) {
      Node t;
      t.type = NodeType::kText;
      t.text = in.substr(pos, end - pos);  // raw: no entity decoding
      t.parent = id;
      int tid = doc->create_raw(std::move(t));
      doc->node(id).children.push_back(tid);
    }
    pos = end;
    if (pos < in.size()) {
      pos = in.find('>', pos);
      pos = pos == std::string::npos ? in.size() : pos + 1;
    }
  }

  void end_tag() {
    pos += 2;  // "</"
    std::string tag = read_tag_name();
    while (!eof() && in[pos] != '>') ++pos;
    if (!eof()) ++pos;
    // Find a matching open element; ignore strays.
    for (size_t i = stack.size(); i-- > 1;) {
      if (doc->node(stack[i]).tag == tag) {
        stack.resize(i);
        return;
      }
    }
  }

  int add_to_top(Node n) {
    n.parent = stack.back();
    int id = doc->create_raw(std::move(n));
    doc->node(stack.back()).children.push_back(id);
    return id;
  }
};

}  // namespace

const std::string* Node::attr(const std::string& name) const {
  for (const auto& [k, v] : attrs)
    if (k == name) return &v;
  return nullptr;
}

std::vector<std::string> Node::classes() const {
  std::vector<std::string> out;
  const std::string* cls = attr("class");
  if (!cls) return out;
  std::string cur;
  for (char c : *cls) {
    if (is_ws(c)) {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

bool Node::has_class(const std::string& cls) const {
  for (const auto& c : classes())
    if (c == cls) return true;
  return false;
}

Document::Document() {
  Node root;
  root.type = NodeType::kDocument;
  nodes_.push_back(std::move(root));
}

Document Document::parse(const std::string& input) {
  Document doc;
  Parser p(input, &doc);
  p.run();
  return doc;
}

std::vector<int> Document::elements(int under) const {
  std::vector<int> out;
  std::vector<int> work{under};
  // Iterative DFS preserving document order.
  while (!work.empty()) {
    int id = work.back();
    work.pop_back();
    if (id != under && nodes_[id].type == NodeType::kElement)
      out.push_back(id);
    const auto& ch = nodes_[id].children;
    for (auto it = ch.rbegin(); it != ch.rend(); ++it) work.push_back(*it);
  }
  return out;
}

int Document::first_tag(const std::string& tag) const {
  for (int id : elements())
    if (nodes_[id].tag == tag) return id;
  return -1;
}

std::string Document::text_content(int id) const {
  std::string raw;
  std::vector<int> work{id};
  std::vector<int> order;
  while (!work.empty()) {
    int cur = work.back();
    work.pop_back();
    order.push_back(cur);
    const Node& n = nodes_[cur];
    if (n.type == NodeType::kElement && is_raw_text(n.tag)) continue;
    for (auto it = n.children.rbegin(); it != n.children.rend(); ++it)
      work.push_back(*it);
  }
  for (int cur : order) {
    const Node& n = nodes_[cur];
    if (n.type == NodeType::kText) {
      raw += n.text;
      raw += ' ';
    }
  }
  return normalize_ws(raw);
}

int Document::create_element(const std::string& tag) {
  Node n;
  n.type = NodeType::kElement;
  n.tag = tag;
  return add_node(std::move(n));
}

int Document::create_raw(Node n) { return add_node(std::move(n)); }

void Document::append_child(int parent, int child) {
  nodes_[child].parent = parent;
  nodes_[parent].children.push_back(child);
}

void Document::detach(int id) {
  int parent = nodes_[id].parent;
  if (parent < 0) return;
  auto& ch = nodes_[parent].children;
  ch.erase(std::remove(ch.begin(), ch.end(), id), ch.end());
  nodes_[id].parent = -1;
}

int Document::graft(int parent, const Document& src, int src_node) {
  const Node& s = src.node(src_node);
  Node copy;
  copy.type = s.type;
  copy.tag = s.tag;
  copy.attrs = s.attrs;
  copy.text = s.text;
  int id = add_node(std::move(copy));
  append_child(parent, id);
  for (int child : s.children) graft(id, src, child);
  return id;
}

int Document::add_node(Node n) {
  nodes_.push_back(std::move(n));
  return static_cast<int>(nodes_.size() - 1);
}

void Document::serialize_node(int id, std::string* out) const {
  const Node& n = nodes_[id];
  switch (n.type) {
    case NodeType::kDocument:
      for (int c : n.children) serialize_node(c, out);
      break;
    case NodeType::kText: {
      int parent = n.parent;
      bool raw = parent >= 0 && nodes_[parent].type == NodeType::kElement &&
                 is_raw_text(nodes_[parent].tag);
      *out += raw ? n.text : escape_text(n.text);
      break;
    }
    case NodeType::kComment:
      *out += "<!--" + n.text + "-->";
      break;
    case NodeType::kElement: {
      *out += "<" + n.tag;
      for (const auto& [k, v] : n.attrs) {
        *out += " " + k;
        *out += "=\"" + escape_attr(v) + "\"";
      }
      *out += ">";
      if (is_void_element(n.tag)) break;
      for (int c : n.children) serialize_node(c, out);
      *out += "</" + n.tag + ">";
      break;
    }
  }
}

std::string Document::serialize() const {
  std::string out = "<!doctype html>";
  serialize_node(0, &out);
  return out;
}

std::string decode_entities(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  size_t i = 0;
  while (i < s.size()) {
    if (s[i] != '&') {
      out.push_back(s[i++]);
      continue;
    }
    auto semi = s.find(';', i + 1);
    if (semi == std::string::npos || semi - i > 12) {
      out.push_back(s[i++]);
      continue;
    }
    std::string ent = s.substr(i + 1, semi - i - 1);
    if (ent == "amp") {
      out.push_back('&');
    } else if (ent == "lt") {
      out.push_back('<');
    } else if (ent == "gt") {
      out.push_back('>');
    } else if (ent == "quot") {
      out.push_back('"');
    } else if (ent == "apos") {
      out.push_back('\'');
    } else if (ent == "nbsp") {
      out.push_back(' ');
    } else if (!ent.empty() && ent[0] == '#') {
      std::uint32_t cp = 0;
      bool ok = false;
      try {
        if (ent.size() > 1 && (ent[1] == 'x' || ent[1] == 'X')) {
          cp = static_cast<std::uint32_t>(std::stoul(ent.substr(2), nullptr, 16));
          ok = ent.size() > 2;
        } else {
          cp = static_cast<std::uint32_t>(std::stoul(ent.substr(1)));
          ok = true;
        }
      } catch (...) {
        ok = false;
      }
      if (!ok) {
        out.push_back(s[i++]);
        continue;
      }
      append_utf8(&out, cp);
    } else {
      out.push_back(s[i++]);
      continue;
    }
    i = semi + 1;
  }
  return out;
}

std::string escape_text(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    if (c == '&')
      out += "&amp;";
    else if (c == '<')
      out += "&lt;";
    else if (c == '>')
      out += "&gt;";
    else
      out.push_back(c);
  }
  return out;
}

std::string escape_attr(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    if (c == '&')
      out += "&amp;";
    else if (c == '<')
      out += "&lt;";
    else if (c == '"')
      out += "&quot;";
    else
      out.push_back(c);
  }
  return out;
}

std::string normalize_ws(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  bool pending_space = false;
  for (char c : s) {
    if (is_ws(c)) {
      pending_space = !out.empty();
    } else {
      if (pending_space) out.push_back(' ');
      pending_space = false;
      out.push_back(c);
    }
  }
  return out;
}

bool is_void_element(const std::string& tag) {
  for (const char* v : kVoidTags)
    if (tag == v) return true;
  return false;
}

}  // namespace webscraper::html
