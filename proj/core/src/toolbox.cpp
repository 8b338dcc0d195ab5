#include "webscraper/toolbox.hpp"

#include <filesystem>

#include "webscraper/errors.hpp"
#include "webscraper/merge.hpp"

namespace webscraper::tools {

using nlohmann::json;
using nlohmann::ordered_json;
using provider::ToolParam;
using provider::ToolSchema;

Toolbox::Toolbox(const model::ScrapeTask& task, browser::Browser& browser,
                 sandbox::Sandbox& sandbox, parse::ParseBackend& backend)
    : task_(task), browser_(browser), sandbox_(sandbox), backend_(backend) {}

std::vector<ToolSchema> Toolbox::schemas() const {
  std::vector<ToolSchema> out = {
      {"navigate",
       "Load an absolute http(s) URL in the browser.",
       {{"url", "string", "absolute URL to open", true}}},
      {"click",
       "Click the first element matching a CSS selector on the current "
       "page. Anchors and data-href elements navigate; load-more buttons "
       "append further items to the list.",
       {{"selector", "string", "CSS selector of the element", true}}},
      {"scroll",
       "Scroll the page vertically by the given number of pixels.",
       {{"amount", "integer", "positive scrolls down", true}}},
      {"screenshot",
       "Capture the current viewport as a PNG.",
       {}},
      {"get_html",
       "Return the serialized DOM of the current page.",
       {}},
      {"shell_exec",
       "Run a shell command inside the workspace directory.",
       {{"command", "string", "sh command line", true},
        {"timeout_ms", "integer", "kill after this many ms (default 10000)",
         false}}},
      {"file_write",
       "Write a file in the workspace, creating parent directories.",
       {{"path", "string", "workspace-relative path", true},
        {"content", "string", "file content", true}}},
      {"file_read",
       "Read a file from the workspace.",
       {{"path", "string", "workspace-relative path", true}}},
      {"file_str_replace",
       "Replace exactly one occurrence of a string in a workspace file.",
       {{"path", "string", "workspace-relative path", true},
        {"old_str", "string", "text to find (must match exactly once)", true},
        {"new_str", "string", "replacement text", true}}},
  };

  if (task_.mode == model::Mode::kPromptTool) {
    out.push_back(
        {"parse_tool",
         "Convert HTML into structured data. page_kind=index returns item "
         "records (collected for merge_tool); page_kind=content returns a "
         "rule set reusable on every sibling content page. HTML defaults "
         "to the current browser page.",
         {{"page_kind", "string", "index or content", true},
          {"html", "string", "HTML to parse (default: current page)", false},
          {"base_url", "string",
           "URL the HTML came from (default: current page URL)", false},
          {"fields", "object",
           "array of field names (default: the task's fields)", false},
          {"hints", "object", "field name to free-text hint map", false}}});
    out.push_back(
        {"apply_ruleset",
         "Apply a content-page rule set to one page and collect the "
         "resulting record. Navigates first when url is given; the rule "
         "set defaults to the last one parse_tool produced.",
         {{"url", "string", "content page to open first", false},
          {"html", "string", "HTML to extract from (default: current page)",
           false},
          {"ruleset", "object", "rule set object (default: last parsed)",
           false}}});
    out.push_back(
        {"merge_tool",
         "Deduplicate and consolidate collected record batches into one "
         "list, which becomes the run's dataset. Pass batches explicitly "
         "or omit them to merge everything collected so far.",
         {{"batches", "object", "array of record arrays", false}}});
  }
  return out;
}

ToolResult Toolbox::dispatch(const std::string& name, const json& args) {
  try {
    return run(name, args);
  } catch (const ToolFatalError&) {
    throw;
  } catch (const ProviderError& e) {
    std::string text = e.what();
    if (!e.raw_payload().empty())
      text += "\nraw backend output:\n" + e.raw_payload();
    return {text, true};
  } catch (const Error& e) {
    return {e.what(), true};
  } catch (const json::exception& e) {
    return {std::string("bad arguments: ") + e.what(), true};
  }
}

namespace {

std::string require_string(const json& args, const char* key) {
  if (!args.contains(key) || !args[key].is_string())
    throw ValidationError(std::string("missing string argument \"") + key +
                          "\"");
  return args[key].get<std::string>();
}

std::string optional_string(const json& args, const char* key,
                            const std::string& fallback) {
  if (!args.contains(key) || args[key].is_null()) return fallback;
  if (!args[key].is_string())
    throw ValidationError(std::string("argument \"") + key +
                          "\" must be a string");
  return args[key].get<std::string>();
}

}  // namespace

ToolResult Toolbox::run(const std::string& name, const json& args) {
  if (name == "navigate") {
    browser_.navigate(require_string(args, "url"));
    return {"loaded " + browser_.current_url()};
  }
  if (name == "click") {
    browser_.click(require_string(args, "selector"));
    return {"clicked; now at " + browser_.current_url()};
  }
  if (name == "scroll") {
    if (!args.contains("amount") || !args["amount"].is_number_integer())
      throw ValidationError("missing integer argument \"amount\"");
    browser_.scroll(args["amount"].get<int>());
    return {"scrolled"};
  }
  if (name == "screenshot") {
    ordered_json j = {{"media_type", "image/png"},
                      {"data_base64", provider::base64_encode(
                                          browser_.screenshot())}};
    return {j.dump()};
  }
  if (name == "get_html") {
    return {browser_.get_html()};
  }
  if (name == "shell_exec") {
    std::string command = require_string(args, "command");
    int timeout_ms = 10000;
    if (args.contains("timeout_ms")) {
      if (!args["timeout_ms"].is_number_integer())
        throw ValidationError("argument \"timeout_ms\" must be an integer");
      timeout_ms = args["timeout_ms"].get<int>();
    }
    sandbox::ExecResult r = sandbox_.shell_exec(command, timeout_ms);
    ordered_json j = {{"stdout", r.stdout_text},
                      {"stderr", r.stderr_text},
                      {"exit_code", r.exit_code}};
    if (r.timed_out) {
      j["error"] = "timeout after " + std::to_string(timeout_ms) +
                   " ms, output is partial";
      return {j.dump(), true};
    }
    return {j.dump()};
  }
  if (name == "file_write") {
    std::string path = require_string(args, "path");
    std::string content = require_string(args, "content");
    sandbox_.file_write(path, content);
    return {"wrote " + std::to_string(content.size()) + " bytes to " + path};
  }
  if (name == "file_read") {
    return {sandbox_.file_read(require_string(args, "path"))};
  }
  if (name == "file_str_replace") {
    std::string path = require_string(args, "path");
    sandbox_.file_str_replace(path, require_string(args, "old_str"),
                              require_string(args, "new_str"));
    return {"replaced 1 occurrence in " + path};
  }

  if (task_.mode == model::Mode::kPromptTool) {
    if (name == "parse_tool") return do_parse(args);
    if (name == "apply_ruleset") return do_apply(args);
    if (name == "merge_tool") return do_merge(args);
  }
  return {"unknown tool \"" + name + "\"", true};
}

ToolResult Toolbox::do_parse(const json& args) {
  parse::ParseRequest request;
  request.page_kind =
      parse::page_kind_from_name(require_string(args, "page_kind"));
  request.html = optional_string(args, "html", "");
  if (request.html.empty()) request.html = browser_.get_html();
  request.base_url = optional_string(args, "base_url", "");
  if (request.base_url.empty()) request.base_url = browser_.current_url();

  if (args.contains("fields") && !args["fields"].is_null()) {
    if (!args["fields"].is_array())
      throw ValidationError("argument \"fields\" must be an array of strings");
    for (const auto& f : args["fields"]) {
      if (!f.is_string())
        throw ValidationError(
            "argument \"fields\" must be an array of strings");
      request.fields.push_back(f.get<std::string>());
    }
  } else {
    request.fields = task_.fields;
  }
  if (args.contains("hints") && !args["hints"].is_null()) {
    if (!args["hints"].is_object())
      throw ValidationError("argument \"hints\" must be an object");
    for (const auto& [key, value] : args["hints"].items()) {
      if (!value.is_string())
        throw ValidationError("hint for \"" + key + "\" must be a string");
      request.hints[key] = value.get<std::string>();
    }
  } else {
    request.hints = task_.field_hints;
  }

  parse::ParseOutput output = backend_.parse(request);
  if (output.ruleset) last_ruleset_ = output.ruleset;
  if (request.page_kind == parse::PageKind::kIndex)
    collected_.push_back(output.records);
  return {parse::output_to_json(output, request.fields).dump()};
}

ToolResult Toolbox::do_apply(const json& args) {
  parse::RuleSet ruleset;
  if (args.contains("ruleset") && !args["ruleset"].is_null())
    ruleset = parse::RuleSet::from_json(args["ruleset"]);
  else if (last_ruleset_)
    ruleset = *last_ruleset_;
  else
    throw ValidationError(
        "no ruleset available: pass one or run parse_tool on a content page "
        "first");

  std::string url = optional_string(args, "url", "");
  if (!url.empty()) browser_.navigate(url);

  std::string html = optional_string(args, "html", "");
  if (html.empty()) html = browser_.get_html();

  model::ItemRecord record = parse::apply_ruleset(html, ruleset);
  record.url = url.empty() ? browser_.current_url() : url;
  collected_.push_back({record});
  return {parse::record_to_flat_json(record, task_.fields).dump()};
}

ToolResult Toolbox::do_merge(const json& args) {
  std::vector<std::vector<model::ItemRecord>> batches;
  if (args.contains("batches") && !args["batches"].is_null()) {
    if (!args["batches"].is_array())
      throw ValidationError(
          "argument \"batches\" must be an array of record arrays");
    for (const auto& bj : args["batches"]) {
      if (!bj.is_array())
        throw ValidationError(
            "argument \"batches\" must be an array of record arrays");
      std::vector<model::ItemRecord> batch;
      for (const auto& rj : bj)
        batch.push_back(parse::record_from_flat_json(rj));
      batches.push_back(std::move(batch));
    }
  } else {
    batches = collected_;
  }

  last_merge_ = merge::merge_tool(batches);
  ordered_json out = ordered_json::array();
  for (const auto& rec : *last_merge_)
    out.push_back(parse::record_to_flat_json(rec, task_.fields));
  return {out.dump()};
}

model::Dataset Toolbox::final_dataset() const {
  model::Dataset dataset;
  dataset.fields = task_.fields;

  // A broken dataset.json is the agent's failure, not ours: fall back to
  // whatever merge_tool last produced.
  try {
    std::string path = sandbox_.resolve(kDatasetFilename);
    if (std::filesystem::exists(path))
      return model::read_dataset(path, task_.fields);
  } catch (const Error&) {
  }
  if (last_merge_) dataset.items = *last_merge_;
  return dataset;
}

}  // namespace webscraper::tools
