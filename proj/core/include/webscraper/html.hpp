#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace webscraper::html {

enum class NodeType { kDocument, kElement, kText, kComment };

// Arena-backed DOM node. Children are indices into the owning Document so
// fragments can be grafted in without pointer fixups (the lightweight
// browser mutates the tree for load-more interactions).
struct Node {
  NodeType type = NodeType::kDocument;
  std::string tag;  // lowercase, elements only
  std::vector<std::pair<std::string, std::string>> attrs;
  std::string text;  // payload for text and comment nodes
  int parent = -1;
  std::vector<int> children;

  const std::string* attr(const std::string& name) const;
  bool has_class(const std::string& cls) const;
  std::vector<std::string> classes() const;
};

class Document {
 public:
  Document();

  // Tolerant HTML parse: void elements, raw-text script/style, implied end
  // tags for li/p/tr/td/th/option, entity decoding in text and attributes.
  // Never fails; garbage in, best-effort tree out.
  static Document parse(const std::string& input);

  int root() const { return 0; }
  int size() const { return static_cast<int>(nodes_.size()); }
  const Node& node(int id) const { return nodes_[id]; }
  Node& node(int id) { return nodes_[id]; }

  // Element ids in document order, strictly below `under`.
  std::vector<int> elements(int under = 0) const;

  // First element with the given tag, document order; -1 when absent.
  int first_tag(const std::string& tag) const;

  // Concatenated descendant text with runs of whitespace collapsed to a
  // single space and ends trimmed. Script/style contents are skipped.
  std::string text_content(int id) const;

  std::string serialize() const;

  // Tree surgery for simulated interactions.
  int create_element(const std::string& tag);
  int create_raw(Node n);
  void append_child(int parent, int child);
  void detach(int id);
  // Deep-copies `src_node` (from another document) under `parent`.
  int graft(int parent, const Document& src, int src_node);

 private:
  int add_node(Node n);
  void serialize_node(int id, std::string* out) const;

  std::vector<Node> nodes_;
};

// Entity-decodes the five named HTML entities plus &nbsp; and numeric
// character references.
std::string decode_entities(const std::string& s);

std::string escape_text(const std::string& s);
std::string escape_attr(const std::string& s);

// Collapse whitespace runs to single spaces and trim.
std::string normalize_ws(const std::string& s);

bool is_void_element(const std::string& tag);

}  // namespace webscraper::html
