#include "webscraper/model.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "webscraper/errors.hpp"
#include "webscraper/url.hpp"

namespace webscraper::model {

using nlohmann::json;
using nlohmann::ordered_json;

std::string mode_name(Mode m) {
  switch (m) {
    case Mode::kBaseline:
      return "baseline";
    case Mode::kPromptOnly:
      return "prompt_only";
    case Mode::kPromptTool:
      return "prompt_tool";
  }
  return "prompt_tool";
}

Mode mode_from_name(const std::string& name) {
  if (name == "baseline") return Mode::kBaseline;
  if (name == "prompt_only") return Mode::kPromptOnly;
  if (name == "prompt_tool") return Mode::kPromptTool;
  throw ValidationError("unknown mode \"" + name +
                        "\" (expected baseline|prompt_only|prompt_tool)");
}

std::string language_name(Language l) {
  return l == Language::kEnglish ? "english" : "chinese";
}

Language language_from_name(const std::string& name) {
  if (name == "english") return Language::kEnglish;
  if (name == "chinese") return Language::kChinese;
  throw ValidationError("unknown language \"" + name +
                        "\" (expected english|chinese)");
}

bool is_valid_field_name(const std::string& f) {
  if (f.empty()) return false;
  if (!(f[0] >= 'a' && f[0] <= 'z')) return false;
  for (char c : f)
    if (!((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_'))
      return false;
  return true;
}

namespace {

// Spelled-out small counts read like the prompt template's example.
std::string spell_count(int n) {
  static const char* kWords[] = {"zero", "one", "two",   "three", "four",
                                 "five", "six", "seven", "eight", "nine",
                                 "ten",  "eleven", "twelve"};
  if (n >= 0 && n <= 12) return kWords[n];
  return std::to_string(n);
}

}  // namespace

void ScrapeTask::validate() const {
  if (!url::is_absolute_http(target_url))
    throw ValidationError(
        "task.target_url must be an absolute http(s) URL, got \"" +
        target_url + "\"");
  if (page_scope < 1) throw ValidationError("task.page_scope must be >= 1");
  if (fields.empty()) throw ValidationError("task.fields must be non-empty");
  std::set<std::string> seen;
  for (const auto& f : fields) {
    if (!is_valid_field_name(f))
      throw ValidationError("task.fields: \"" + f +
                            "\" is not a lowercase ASCII identifier");
    if (!seen.insert(f).second)
      throw ValidationError("task.fields: duplicate field \"" + f + "\"");
  }
  for (const auto& [key, hint] : field_hints) {
    if (!seen.count(key))
      throw ValidationError("task.field_hints: \"" + key +
                            "\" is not a requested field");
    if (hint.empty())
      throw ValidationError("task.field_hints: empty hint for \"" + key +
                            "\"");
  }
  if (politeness_delay_ms < 0)
    throw ValidationError("task.politeness_delay_ms must be >= 0");
  if (max_iterations < 1)
    throw ValidationError("task.max_iterations must be >= 1");
}

void Dataset::validate() const {
  std::set<std::string> seen;
  for (const auto& item : items) {
    if (item.url.empty())
      throw ValidationError("dataset: item with empty url");
    std::string norm = url::normalize(item.url);
    if (!seen.insert(norm).second)
      throw ValidationError("dataset: duplicate item URL after normalization: " +
                            norm);
    for (const auto& [key, value] : item.values) {
      bool known = false;
      for (const auto& f : fields)
        if (f == key) known = true;
      if (!known)
        throw ValidationError("dataset: item value key \"" + key +
                              "\" is not a requested field");
    }
  }
}

void GoldenSet::validate() const {
  std::set<std::string> seen;
  for (const auto& item : items) {
    if (!seen.insert(url::normalize(item.url)).second)
      throw ValidationError("golden set: duplicate URL " + item.url);
    if (item.title.empty())
      throw ValidationError("golden set: empty title for " + item.url);
    if (item.content.empty())
      throw ValidationError("golden set: empty content for " + item.url);
  }
}

namespace {

json parse_json_or_throw(const std::string& text, const std::string& what) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw ParseError(what + ": malformed JSON");
  return j;
}

}  // namespace

ScrapeTask task_from_json_text(const std::string& text) {
  json j = parse_json_or_throw(text, "task file");
  if (!j.is_object()) throw ParseError("task file: expected a JSON object");

  ScrapeTask task;
  if (!j.contains("target_url"))
    throw ValidationError("task file: missing required key \"target_url\"");
  if (!j["target_url"].is_string())
    throw ParseError("task file: key \"target_url\" must be a string");
  task.target_url = j["target_url"].get<std::string>();

  if (!j.contains("fields"))
    throw ValidationError("task file: missing required key \"fields\"");
  if (!j["fields"].is_array())
    throw ParseError("task file: key \"fields\" must be an array of strings");
  for (const auto& f : j["fields"]) {
    if (!f.is_string())
      throw ParseError("task file: key \"fields\" must be an array of strings");
    task.fields.push_back(f.get<std::string>());
  }

  auto get_int = [&](const char* key, int fallback) {
    if (!j.contains(key)) return fallback;
    if (!j[key].is_number_integer())
      throw ParseError(std::string("task file: key \"") + key +
                       "\" must be an integer");
    return j[key].get<int>();
  };
  task.page_scope = get_int("page_scope", 1);
  task.politeness_delay_ms = get_int("politeness_delay_ms", 2000);
  task.max_iterations = get_int("max_iterations", 50);

  if (j.contains("section_hint")) {
    if (!j["section_hint"].is_string())
      throw ParseError("task file: key \"section_hint\" must be a string");
    task.section_hint = j["section_hint"].get<std::string>();
  }
  if (j.contains("mode")) {
    if (!j["mode"].is_string())
      throw ParseError("task file: key \"mode\" must be a string");
    task.mode = mode_from_name(j["mode"].get<std::string>());
  }
  if (j.contains("field_hints")) {
    if (!j["field_hints"].is_object())
      throw ParseError(
          "task file: key \"field_hints\" must be an object of strings");
    for (const auto& [key, value] : j["field_hints"].items()) {
      if (!value.is_string())
        throw ParseError(
            "task file: key \"field_hints\" must be an object of strings");
      task.field_hints[key] = value.get<std::string>();
    }
  }
  task.validate();
  return task;
}

ScrapeTask load_task(const std::string& path) {
  return task_from_json_text(read_file(path));
}

std::string assemble_user_prompt(const ScrapeTask& task) {
  std::ostringstream out;
  out << "Scrape the first ";
  if (task.page_scope == 1)
    out << "page";
  else
    out << spell_count(task.page_scope) << " pages";
  if (!task.section_hint.empty()) out << " of " << task.section_hint;
  out << " from " << task.target_url << ", extracting the ";
  for (size_t i = 0; i < task.fields.size(); ++i) {
    if (i) out << ", ";
    out << task.fields[i];
  }
  out << " for each item.";
  return out.str();
}

std::string dataset_to_json_text(const Dataset& dataset) {
  dataset.validate();
  ordered_json arr = ordered_json::array();
  for (const auto& item : dataset.items) {
    ordered_json obj;
    obj["url"] = item.url;
    for (const auto& f : dataset.fields) {
      auto it = item.values.find(f);
      if (it == item.values.end() || !it->second.has_value())
        obj[f] = nullptr;
      else
        obj[f] = *it->second;
    }
    arr.push_back(std::move(obj));
  }
  return arr.dump(2) + "\n";
}

void write_dataset(const Dataset& dataset, const std::string& path) {
  write_file(path, dataset_to_json_text(dataset));
}

Dataset dataset_from_json_text(const std::string& text,
                               const std::vector<std::string>& fields) {
  json j = parse_json_or_throw(text, "dataset file");
  if (!j.is_array()) throw ParseError("dataset file: expected a JSON array");
  Dataset d;
  d.fields = fields;
  for (const auto& obj : j) {
    if (!obj.is_object())
      throw ParseError("dataset file: expected array of objects");
    ItemRecord rec;
    if (!obj.contains("url") || !obj["url"].is_string())
      throw ParseError("dataset file: item missing string \"url\"");
    rec.url = obj["url"].get<std::string>();
    for (const auto& f : fields) {
      if (!obj.contains(f) || obj[f].is_null())
        rec.values[f] = std::nullopt;
      else if (obj[f].is_string())
        rec.values[f] = obj[f].get<std::string>();
      else
        throw ParseError("dataset file: field \"" + f +
                         "\" must be a string or null");
    }
    d.items.push_back(std::move(rec));
  }
  d.validate();
  return d;
}

Dataset read_dataset(const std::string& path,
                     const std::vector<std::string>& fields) {
  return dataset_from_json_text(read_file(path), fields);
}

GoldenSet golden_from_json_text(const std::string& text) {
  json j = parse_json_or_throw(text, "golden set file");
  if (!j.is_object())
    throw ParseError("golden set file: expected a JSON object");
  GoldenSet g;
  if (j.contains("site_id") && j["site_id"].is_string())
    g.site_id = j["site_id"].get<std::string>();
  if (!j.contains("language") || !j["language"].is_string())
    throw ParseError("golden set file: missing string \"language\"");
  g.language = language_from_name(j["language"].get<std::string>());
  if (!j.contains("items") || !j["items"].is_array())
    throw ParseError("golden set file: missing array \"items\"");
  for (const auto& obj : j["items"]) {
    GoldenItem item;
    for (const char* key : {"url", "title", "content"})
      if (!obj.contains(key) || !obj[key].is_string())
        throw ParseError(std::string("golden set file: item missing string \"") +
                         key + "\"");
    item.url = obj["url"].get<std::string>();
    item.title = obj["title"].get<std::string>();
    item.content = obj["content"].get<std::string>();
    g.items.push_back(std::move(item));
  }
  g.validate();
  return g;
}

GoldenSet load_golden(const std::string& path) {
  return golden_from_json_text(read_file(path));
}

std::string golden_to_json_text(const GoldenSet& golden) {
  ordered_json j;
  j["site_id"] = golden.site_id;
  j["language"] = language_name(golden.language);
  ordered_json items = ordered_json::array();
  for (const auto& item : golden.items) {
    ordered_json obj;
    obj["url"] = item.url;
    obj["title"] = item.title;
    obj["content"] = item.content;
    items.push_back(std::move(obj));
  }
  j["items"] = std::move(items);
  return j.dump(2) + "\n";
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open file: " + path);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write file: " + path);
  out << content;
  if (!out) throw IoError("write failed: " + path);
}

}  // namespace webscraper::model
