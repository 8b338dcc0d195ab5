#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "webscraper/html.hpp"
#include "webscraper/model.hpp"
#include "webscraper/provider.hpp"

namespace webscraper::parse {

enum class ExtractKind { kText, kAttribute, kHref };

std::string extract_kind_name(ExtractKind kind);
ExtractKind extract_kind_from_name(const std::string& name);

struct FieldRule {
  std::string selector;
  ExtractKind kind = ExtractKind::kText;
  std::string attribute;  // only for kAttribute
  // When set, among all selector matches the one whose parent's text
  // mentions this label (case-insensitive) is chosen. Lets one rule set
  // stay correct on pages that reorder label/value rows.
  std::string label;

  bool operator==(const FieldRule& other) const = default;
};

struct RuleSet {
  std::optional<std::string> item_selector;  // index pages: repeated items
  std::map<std::string, FieldRule> field_rules;
  std::string base_url;  // absolute; href rules resolve against it

  void validate() const;

  static RuleSet from_json(const nlohmann::json& j);
  nlohmann::ordered_json to_json() const;

  bool operator==(const RuleSet& other) const = default;
};

enum class PageKind { kIndex, kContent };

std::string page_kind_name(PageKind kind);
PageKind page_kind_from_name(const std::string& name);

struct ParseRequest {
  std::string html;
  std::vector<std::string> fields;           // ordered, from the task
  std::map<std::string, std::string> hints;  // field -> free text
  PageKind page_kind = PageKind::kIndex;
  std::string base_url;  // absolute URL of the page being parsed

  void validate() const;
};

// Index pages yield records; content pages yield a transferable rule set.
struct ParseOutput {
  std::vector<model::ItemRecord> records;
  std::optional<RuleSet> ruleset;
};

class ParseBackend {
 public:
  virtual ~ParseBackend() = default;
  virtual ParseOutput parse(const ParseRequest& request) = 0;
};

// Deterministic offline backend. Index: densest repeated anchor cluster
// by DOM-path signature. Content: first h1 for the title, the element
// with the largest direct-paragraph text mass for the content, and
// hint-guided label matching for extra fields.
class HeuristicBackend : public ParseBackend {
 public:
  ParseOutput parse(const ParseRequest& request) override;
};

// Delegates parsing to the model provider; expects a bare JSON object
// {"records": [...]} or {"ruleset": {...}} as the reply text.
class ProviderParseBackend : public ParseBackend {
 public:
  ProviderParseBackend(provider::Provider& backend,
                       provider::ProviderConfig config);
  ParseOutput parse(const ParseRequest& request) override;

 private:
  provider::Provider& backend_;
  provider::ProviderConfig config_;
};

// Applies a content-page rule set: one value per rule, null when the
// node is missing; text is whitespace-normalized descendant text. The
// record's url is left empty for the caller to fill in.
model::ItemRecord apply_ruleset(const std::string& html,
                                const RuleSet& ruleset);

// Enforces that backend output only covers requested fields (index
// records additionally need URLs). Throws ValidationError.
void validate_output(const ParseOutput& output, const ParseRequest& request);

// Stable selector for a node: #id when unique, tag.classes when unique,
// else a nth-of-type path from the nearest stable ancestor.
std::string derive_selector(const html::Document& doc, int node);

// Tool-facing flat record shape: {"url": ..., "<field>": value-or-null}.
nlohmann::ordered_json record_to_flat_json(
    const model::ItemRecord& record, const std::vector<std::string>& fields);
model::ItemRecord record_from_flat_json(const nlohmann::json& j);

ParseOutput output_from_json(const nlohmann::json& j);
nlohmann::ordered_json output_to_json(const ParseOutput& output,
                                      const std::vector<std::string>& fields);

}  // namespace webscraper::parse
