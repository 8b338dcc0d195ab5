#include "webscraper/parse.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <set>

#include "webscraper/errors.hpp"
#include "webscraper/selector.hpp"
#include "webscraper/url.hpp"

namespace webscraper::parse {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

bool icontains(const std::string& hay, const std::string& needle) {
  return lower(hay).find(lower(needle)) != std::string::npos;
}

}  // namespace

std::string extract_kind_name(ExtractKind kind) {
  switch (kind) {
    case ExtractKind::kText: return "text";
    case ExtractKind::kAttribute: return "attribute";
    case ExtractKind::kHref: return "href";
  }
  return "text";
}

ExtractKind extract_kind_from_name(const std::string& name) {
  if (name == "text") return ExtractKind::kText;
  if (name == "attribute") return ExtractKind::kAttribute;
  if (name == "href") return ExtractKind::kHref;
  throw ValidationError("unknown extraction kind \"" + name + "\"");
}

std::string page_kind_name(PageKind kind) {
  return kind == PageKind::kIndex ? "index" : "content";
}

PageKind page_kind_from_name(const std::string& name) {
  if (name == "index") return PageKind::kIndex;
  if (name == "content") return PageKind::kContent;
  throw ValidationError("unknown page kind \"" + name +
                        "\" (expected index|content)");
}

void RuleSet::validate() const {
  if (!url::is_absolute_http(base_url))
    throw ValidationError("ruleset.base_url must be an absolute http(s) URL");
  if (item_selector) css::Selector::parse(*item_selector);
  for (const auto& [field, rule] : field_rules) {
    if (!model::is_valid_field_name(field))
      throw ValidationError("ruleset: \"" + field +
                            "\" is not a valid field name");
    css::Selector::parse(rule.selector);
    if (rule.kind == ExtractKind::kAttribute && rule.attribute.empty())
      throw ValidationError("ruleset: attribute rule for \"" + field +
                            "\" names no attribute");
  }
}

RuleSet RuleSet::from_json(const json& j) {
  RuleSet rs;
  try {
    if (j.contains("item_selector") && !j["item_selector"].is_null())
      rs.item_selector = j["item_selector"].get<std::string>();
    rs.base_url = j.at("base_url").get<std::string>();
    for (const auto& [field, rj] : j.at("field_rules").items()) {
      FieldRule rule;
      rule.selector = rj.at("selector").get<std::string>();
      rule.kind = extract_kind_from_name(rj.value("kind", "text"));
      rule.attribute = rj.value("attribute", "");
      rule.label = rj.value("label", "");
      rs.field_rules[field] = std::move(rule);
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed ruleset: ") + e.what());
  }
  rs.validate();
  return rs;
}

ordered_json RuleSet::to_json() const {
  ordered_json rules = ordered_json::object();
  for (const auto& [field, rule] : field_rules) {
    ordered_json rj = {{"selector", rule.selector},
                       {"kind", extract_kind_name(rule.kind)}};
    if (rule.kind == ExtractKind::kAttribute) rj["attribute"] = rule.attribute;
    if (!rule.label.empty()) rj["label"] = rule.label;
    rules[field] = std::move(rj);
  }
  ordered_json out;
  out["item_selector"] =
      item_selector ? ordered_json(*item_selector) : ordered_json(nullptr);
  out["base_url"] = base_url;
  out["field_rules"] = std::move(rules);
  return out;
}

void ParseRequest::validate() const {
  if (html.empty()) throw ValidationError("parse request: html is empty");
  if (fields.empty())
    throw ValidationError("parse request: no fields requested");
  if (!url::is_absolute_http(base_url))
    throw ValidationError(
        "parse request: base_url must be an absolute http(s) URL");
  for (const auto& [key, hint] : hints)
    if (std::find(fields.begin(), fields.end(), key) == fields.end())
      throw ValidationError("parse request: hint for unknown field \"" + key +
                            "\"");
}

// --- selector derivation ---

namespace {

bool selector_is_unique(const html::Document& doc, const std::string& sel,
                        int node) {
  try {
    auto matches = css::query_all(doc, sel);
    return matches.size() == 1 && matches[0] == node;
  } catch (const ValidationError&) {
    return false;
  }
}

std::string tag_class_selector(const html::Node& n) {
  std::string sel = n.tag;
  for (const auto& cls : n.classes()) sel += "." + cls;
  return sel;
}

}  // namespace

std::string derive_selector(const html::Document& doc, int node) {
  const html::Node& n = doc.node(node);
  if (const std::string* id = n.attr("id")) {
    std::string sel = "#" + *id;
    if (selector_is_unique(doc, sel, node)) return sel;
  }
  std::string sel = tag_class_selector(n);
  if (selector_is_unique(doc, sel, node)) return sel;

  int k = 1;
  if (n.parent >= 0)
    for (int sibling : doc.node(n.parent).children) {
      if (sibling == node) break;
      if (doc.node(sibling).type == html::NodeType::kElement &&
          doc.node(sibling).tag == n.tag)
        ++k;
    }
  std::string self = n.tag + ":nth-of-type(" + std::to_string(k) + ")";
  if (n.parent <= 0) return self;
  return derive_selector(doc, n.parent) + " > " + self;
}

// --- rule application ---

namespace {

std::optional<std::string> extract_value(const html::Document& doc, int node,
                                         const FieldRule& rule,
                                         const std::string& base_url) {
  switch (rule.kind) {
    case ExtractKind::kText:
      return doc.text_content(node);
    case ExtractKind::kAttribute: {
      const std::string* v = doc.node(node).attr(rule.attribute);
      if (!v) return std::nullopt;
      return *v;
    }
    case ExtractKind::kHref: {
      const std::string* href = doc.node(node).attr("href");
      if (!href) return std::nullopt;
      auto resolved = url::resolve(base_url, *href);
      if (!resolved) return std::nullopt;
      return *resolved;
    }
  }
  return std::nullopt;
}

int pick_match(const html::Document& doc, const std::vector<int>& matches,
               const std::string& label) {
  if (matches.empty()) return -1;
  if (label.empty()) return matches.front();
  for (int m : matches) {
    int parent = doc.node(m).parent;
    if (parent >= 0 && icontains(doc.text_content(parent), label)) return m;
  }
  return -1;  // labeled rule with no labeled match: treat as missing
}

}  // namespace

model::ItemRecord apply_ruleset(const std::string& html,
                                const RuleSet& ruleset) {
  if (html.empty()) throw ValidationError("apply_ruleset: html is empty");
  ruleset.validate();
  html::Document doc = html::Document::parse(html);

  model::ItemRecord record;
  for (const auto& [field, rule] : ruleset.field_rules) {
    auto matches = css::query_all(doc, rule.selector);
    int chosen = pick_match(doc, matches, rule.label);
    if (chosen < 0) {
      record.values[field] = std::nullopt;
      continue;
    }
    record.values[field] = extract_value(doc, chosen, rule, ruleset.base_url);
  }
  return record;
}

// --- heuristic backend ---

namespace {

std::string path_signature(const html::Document& doc, int node) {
  std::vector<std::string> parts;
  for (int at = node; at > 0; at = doc.node(at).parent) {
    const html::Node& n = doc.node(at);
    if (n.type != html::NodeType::kElement) continue;
    parts.push_back(tag_class_selector(n));
  }
  std::reverse(parts.begin(), parts.end());
  std::string sig;
  for (const auto& p : parts) {
    if (!sig.empty()) sig += '>';
    sig += p;
  }
  return sig;
}

bool usable_href(const std::string& href) {
  return !href.empty() && href[0] != '#' &&
         href.rfind("javascript:", 0) == std::string::npos &&
         href.rfind("mailto:", 0) == std::string::npos;
}

int count_cluster_anchors_under(const html::Document& doc, int root,
                                const std::set<int>& cluster) {
  int count = cluster.count(root) ? 1 : 0;
  for (int child : doc.node(root).children)
    count += count_cluster_anchors_under(doc, child, cluster);
  return count;
}

// Widest ancestor that still contains only this anchor from the cluster:
// the per-item container.
int container_of(const html::Document& doc, int anchor,
                 const std::set<int>& cluster) {
  int node = anchor;
  int parent = doc.node(anchor).parent;
  while (parent > 0) {
    if (count_cluster_anchors_under(doc, parent, cluster) > 1) return node;
    node = parent;
    parent = doc.node(parent).parent;
  }
  return node;
}

std::optional<std::string> listing_field_value(const html::Document& doc,
                                               int container,
                                               const std::string& field) {
  std::vector<int> exact, partial;
  for (int id : doc.elements(container)) {
    const html::Node& n = doc.node(id);
    for (const auto& cls : n.classes()) {
      if (cls == field) exact.push_back(id);
      else if (cls.find(field) != std::string::npos) partial.push_back(id);
    }
  }
  if (!exact.empty()) return doc.text_content(exact.front());
  if (!partial.empty()) return doc.text_content(partial.front());
  return std::nullopt;
}

std::vector<model::ItemRecord> heuristic_index(const html::Document& doc,
                                               const ParseRequest& request) {
  std::map<std::string, std::vector<int>> clusters;
  for (int id : doc.elements()) {
    const html::Node& n = doc.node(id);
    if (n.tag != "a") continue;
    const std::string* href = n.attr("href");
    if (!href || !usable_href(*href)) continue;
    clusters[path_signature(doc, id)].push_back(id);
  }

  const std::vector<int>* best = nullptr;
  for (const auto& [sig, anchors] : clusters) {
    bool any_text = false;
    for (int a : anchors)
      if (!doc.text_content(a).empty()) any_text = true;
    if (!any_text) continue;
    if (!best || anchors.size() > best->size() ||
        (anchors.size() == best->size() && anchors.front() < best->front()))
      best = &anchors;
  }
  if (!best) return {};

  std::set<int> cluster(best->begin(), best->end());
  std::vector<model::ItemRecord> records;
  std::set<std::string> seen_urls;
  for (int anchor : *best) {
    const std::string* href = doc.node(anchor).attr("href");
    auto absolute = url::resolve(request.base_url, *href);
    if (!absolute) continue;
    if (!seen_urls.insert(url::normalize(*absolute)).second) continue;

    model::ItemRecord rec;
    rec.url = *absolute;
    int container = container_of(doc, anchor, cluster);
    for (const auto& field : request.fields) {
      if (field == "title") {
        rec.values[field] = doc.text_content(anchor);
      } else if (field == "link" || field == "url") {
        rec.values[field] = *absolute;
      } else if (field == "content") {
        // content lives on the item's own page
      } else {
        auto value = listing_field_value(doc, container, field);
        if (value) rec.values[field] = value;
      }
    }
    records.push_back(std::move(rec));
  }
  return records;
}

int content_node(const html::Document& doc) {
  int best = -1;
  size_t best_mass = 0;
  for (int id : doc.elements()) {
    size_t mass = 0;
    for (int child : doc.node(id).children)
      if (doc.node(child).type == html::NodeType::kElement &&
          doc.node(child).tag == "p")
        mass += doc.text_content(child).size();
    if (mass > best_mass) {
      best_mass = mass;
      best = id;
    }
  }
  if (best >= 0) return best;
  return doc.first_tag("body");
}

// Label element: a leaf whose text mentions the hint.
int find_label_node(const html::Document& doc, const std::string& hint) {
  for (int id : doc.elements()) {
    const html::Node& n = doc.node(id);
    if (n.tag == "script" || n.tag == "style") continue;
    bool leaf = true;
    for (int child : n.children)
      if (doc.node(child).type == html::NodeType::kElement) leaf = false;
    if (!leaf) continue;
    if (icontains(doc.text_content(id), hint)) return id;
  }
  return -1;
}

int value_sibling_of(const html::Document& doc, int label) {
  int parent = doc.node(label).parent;
  if (parent < 0) return -1;
  bool after = false;
  for (int child : doc.node(parent).children) {
    if (child == label) {
      after = true;
      continue;
    }
    if (after && doc.node(child).type == html::NodeType::kElement)
      return child;
  }
  for (int child : doc.node(parent).children)
    if (child != label && doc.node(child).type == html::NodeType::kElement)
      return child;
  return -1;
}

RuleSet heuristic_content(const html::Document& doc,
                          const ParseRequest& request) {
  RuleSet rs;
  rs.base_url = request.base_url;

  for (const auto& field : request.fields) {
    if (field == "link" || field == "url") continue;

    if (field == "title") {
      int h1 = doc.first_tag("h1");
      if (h1 < 0) h1 = doc.first_tag("title");
      if (h1 >= 0)
        rs.field_rules[field] = {derive_selector(doc, h1), ExtractKind::kText,
                                 "", ""};
      continue;
    }
    if (field == "content") {
      int body = content_node(doc);
      if (body >= 0)
        rs.field_rules[field] = {derive_selector(doc, body),
                                 ExtractKind::kText, "", ""};
      continue;
    }

    auto hint_it = request.hints.find(field);
    if (hint_it != request.hints.end()) {
      int label = find_label_node(doc, hint_it->second);
      int value = label >= 0 ? value_sibling_of(doc, label) : -1;
      if (value >= 0) {
        rs.field_rules[field] = {tag_class_selector(doc.node(value)),
                                 ExtractKind::kText, "", hint_it->second};
        continue;
      }
    }

    // No hint (or the hint matched nothing): first class-name candidate,
    // favoring value-carrying nodes over labels.
    std::vector<int> candidates, value_like;
    for (int id : doc.elements()) {
      for (const auto& cls : doc.node(id).classes())
        if (cls.find(field) != std::string::npos) {
          candidates.push_back(id);
          if (cls.find("value") != std::string::npos) value_like.push_back(id);
          break;
        }
    }
    int chosen = !value_like.empty() ? value_like.front()
                                     : (!candidates.empty() ? candidates.front()
                                                            : -1);
    if (chosen >= 0)
      rs.field_rules[field] = {tag_class_selector(doc.node(chosen)),
                               ExtractKind::kText, "", ""};
  }
  return rs;
}

}  // namespace

ParseOutput HeuristicBackend::parse(const ParseRequest& request) {
  request.validate();
  html::Document doc = html::Document::parse(request.html);

  ParseOutput output;
  if (request.page_kind == PageKind::kIndex) {
    output.records = heuristic_index(doc, request);
  } else {
    output.ruleset = heuristic_content(doc, request);
  }
  validate_output(output, request);
  return output;
}

// --- provider-backed backend ---

ProviderParseBackend::ProviderParseBackend(provider::Provider& backend,
                                           provider::ProviderConfig config)
    : backend_(backend), config_(std::move(config)) {}

ParseOutput ProviderParseBackend::parse(const ParseRequest& request) {
  request.validate();

  static const char* kSystem =
      "You turn raw HTML into structured extraction output. For an index "
      "page reply with {\"records\": [{\"url\": ..., \"<field>\": ...}]}; "
      "for a content page reply with {\"ruleset\": {\"item_selector\": "
      "null, \"base_url\": ..., \"field_rules\": {\"<field>\": "
      "{\"selector\": ..., \"kind\": \"text|attribute|href\"}}}}. Reply "
      "with the bare JSON object and nothing else.";

  ordered_json payload = {{"page_kind", page_kind_name(request.page_kind)},
                          {"base_url", request.base_url},
                          {"fields", request.fields},
                          {"hints", request.hints},
                          {"html", request.html}};

  provider::Message ask;
  ask.role = provider::Role::kUser;
  ask.blocks.push_back(provider::ContentBlock::make_text(payload.dump()));

  provider::Message reply = backend_.complete(kSystem, {ask}, {}, config_);

  std::string text;
  for (const auto& b : reply.blocks)
    if (b.kind == provider::BlockKind::kText) text += b.text;

  json j = json::parse(text, nullptr, false);
  if (j.is_discarded())
    throw ProviderError(ProviderErrorKind::kSchema,
                        "parse backend reply is not JSON", text);
  ParseOutput output;
  try {
    output = output_from_json(j);
    validate_output(output, request);
  } catch (const Error& e) {
    throw ProviderError(ProviderErrorKind::kSchema,
                        std::string("parse backend reply rejected: ") +
                            e.what(),
                        text);
  }
  return output;
}

void validate_output(const ParseOutput& output, const ParseRequest& request) {
  std::set<std::string> requested(request.fields.begin(),
                                  request.fields.end());
  for (const auto& rec : output.records) {
    if (request.page_kind == PageKind::kIndex && rec.url.empty())
      throw ValidationError("parse output: index record without a url");
    for (const auto& [key, value] : rec.values)
      if (!requested.count(key))
        throw ValidationError("parse output: unrequested field \"" + key +
                              "\"");
  }
  if (output.ruleset) {
    output.ruleset->validate();
    for (const auto& [field, rule] : output.ruleset->field_rules)
      if (!requested.count(field))
        throw ValidationError("parse output: rule for unrequested field \"" +
                              field + "\"");
  }
}

// --- tool-facing JSON shapes ---

ordered_json record_to_flat_json(const model::ItemRecord& record,
                                 const std::vector<std::string>& fields) {
  ordered_json j;
  j["url"] = record.url;
  for (const auto& field : fields) {
    auto it = record.values.find(field);
    if (it == record.values.end() || !it->second)
      j[field] = nullptr;
    else
      j[field] = *it->second;
  }
  // keep any extra keys the record carries, in map order
  for (const auto& [key, value] : record.values)
    if (!j.contains(key)) j[key] = value ? ordered_json(*value)
                                         : ordered_json(nullptr);
  return j;
}

model::ItemRecord record_from_flat_json(const json& j) {
  if (!j.is_object())
    throw ValidationError("record must be a JSON object");
  model::ItemRecord rec;
  for (const auto& [key, value] : j.items()) {
    if (key == "url") {
      if (!value.is_string())
        throw ValidationError("record url must be a string");
      rec.url = value.get<std::string>();
    } else if (value.is_null()) {
      rec.values[key] = std::nullopt;
    } else if (value.is_string()) {
      rec.values[key] = value.get<std::string>();
    } else {
      throw ValidationError("record field \"" + key +
                            "\" must be a string or null");
    }
  }
  if (rec.url.empty()) throw ValidationError("record lacks a url");
  return rec;
}

ParseOutput output_from_json(const json& j) {
  if (!j.is_object())
    throw ValidationError("parse output must be a JSON object");
  ParseOutput output;
  if (j.contains("records")) {
    if (!j["records"].is_array())
      throw ValidationError("parse output: records must be an array");
    for (const auto& rj : j["records"])
      output.records.push_back(record_from_flat_json(rj));
  }
  if (j.contains("ruleset") && !j["ruleset"].is_null())
    output.ruleset = RuleSet::from_json(j["ruleset"]);
  if (!j.contains("records") && !output.ruleset)
    throw ValidationError(
        "parse output needs a records array or a ruleset object");
  return output;
}

ordered_json output_to_json(const ParseOutput& output,
                            const std::vector<std::string>& fields) {
  ordered_json j;
  if (output.ruleset) {
    j["ruleset"] = output.ruleset->to_json();
  } else {
    ordered_json records = ordered_json::array();
    for (const auto& rec : output.records)
      records.push_back(record_to_flat_json(rec, fields));
    j["records"] = std::move(records);
  }
  return j;
}

}  // namespace webscraper::parse
