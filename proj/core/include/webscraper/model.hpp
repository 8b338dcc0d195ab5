#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace webscraper::model {

enum class Mode { kBaseline, kPromptOnly, kPromptTool };

// Lowercase ASCII identifier check used for task field names.
bool is_valid_field_name(const std::string& f);

std::string mode_name(Mode m);
// Throws ValidationError for unknown names.
Mode mode_from_name(const std::string& name);

enum class Language { kEnglish, kChinese };

std::string language_name(Language l);
Language language_from_name(const std::string& name);

// The user's objective, read from a task file. The natural-language prompt
// the agent sees is rendered from this via assemble_user_prompt, so runs
// are reproducible.
struct ScrapeTask {
  std::string target_url;
  std::string section_hint;  // may be empty
  int page_scope = 1;
  std::vector<std::string> fields;
  // Free-text disambiguation per field, e.g. price -> "market". Keys must
  // be requested fields.
  std::map<std::string, std::string> field_hints;
  Mode mode = Mode::kPromptTool;
  int politeness_delay_ms = 2000;
  int max_iterations = 50;

  // Throws ValidationError naming the offending field.
  void validate() const;
};

// One extracted item. `values` is keyed by the owning task's field names;
// null means the field was requested but not found. `source_page` is the
// 1-based index page ordinal where the item's link was discovered — it is
// in-memory provenance and not serialized, so equality ignores it.
struct ItemRecord {
  std::string url;
  std::map<std::string, std::optional<std::string>> values;
  int source_page = 0;

  bool operator==(const ItemRecord& other) const {
    return url == other.url && values == other.values;
  }
};

struct Dataset {
  std::string task_id;
  std::vector<std::string> fields;  // requested order, drives file key order
  std::vector<ItemRecord> items;    // first-discovery order
  std::string created_at;           // excluded from equality

  bool operator==(const Dataset& other) const {
    return fields == other.fields && items == other.items;
  }

  // Enforces pairwise-distinct normalized URLs. Throws ValidationError.
  void validate() const;
};

struct GoldenItem {
  std::string url;
  std::string title;
  std::string content;
};

struct GoldenSet {
  std::string site_id;
  Language language = Language::kEnglish;
  std::vector<GoldenItem> items;

  void validate() const;
};

// --- task files ---

ScrapeTask task_from_json_text(const std::string& text);
ScrapeTask load_task(const std::string& path);

// Renders the single-sentence natural language objective, e.g.
// "Scrape the first two pages of US-Canada section from <url>, extracting
// the title, link, content for each item." Deterministic.
std::string assemble_user_prompt(const ScrapeTask& task);

// --- dataset files (JSON array of objects; keys: "url" then the requested
// fields in order) ---

std::string dataset_to_json_text(const Dataset& dataset);
void write_dataset(const Dataset& dataset, const std::string& path);
Dataset dataset_from_json_text(const std::string& text,
                               const std::vector<std::string>& fields);
Dataset read_dataset(const std::string& path,
                     const std::vector<std::string>& fields);

// --- golden set files ---

GoldenSet golden_from_json_text(const std::string& text);
GoldenSet load_golden(const std::string& path);
std::string golden_to_json_text(const GoldenSet& golden);

// Shared file helpers.
std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

}  // namespace webscraper::model
