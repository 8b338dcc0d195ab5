#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "webscraper/browser.hpp"
#include "webscraper/model.hpp"
#include "webscraper/parse.hpp"
#include "webscraper/provider.hpp"
#include "webscraper/sandbox.hpp"

namespace webscraper::tools {

// Writing this file in the workspace is how an agent without the custom
// tools emits its dataset; with them, the last merge result is used.
inline constexpr const char* kDatasetFilename = "dataset.json";

struct ToolResult {
  std::string content;
  bool is_error = false;
};

// Dispatch surface between the agent loop and the environment. Browser,
// shell, and file-editor tools exist in every mode; parse_tool,
// apply_ruleset, and merge_tool are registered only in prompt_tool mode
// and count as unknown tools elsewhere.
class Toolbox {
 public:
  Toolbox(const model::ScrapeTask& task, browser::Browser& browser,
          sandbox::Sandbox& sandbox, parse::ParseBackend& backend);

  // Declared tools for the task's mode, registration order.
  std::vector<provider::ToolSchema> schemas() const;

  // Executes one call. Recoverable problems (bad arguments, missing
  // elements, backend failures, sandbox refusals) come back as error
  // results for the model; ToolFatalError escapes to the agent loop.
  ToolResult dispatch(const std::string& name, const nlohmann::json& args);

  const std::vector<std::vector<model::ItemRecord>>& collected() const {
    return collected_;
  }
  const std::optional<std::vector<model::ItemRecord>>& last_merge() const {
    return last_merge_;
  }
  const std::optional<parse::RuleSet>& last_ruleset() const {
    return last_ruleset_;
  }

  // The run's final dataset: dataset.json from the sandbox when the agent
  // wrote one, else the last merge result, else empty.
  model::Dataset final_dataset() const;

 private:
  ToolResult run(const std::string& name, const nlohmann::json& args);

  ToolResult do_parse(const nlohmann::json& args);
  ToolResult do_apply(const nlohmann::json& args);
  ToolResult do_merge(const nlohmann::json& args);

  const model::ScrapeTask& task_;
  browser::Browser& browser_;
  sandbox::Sandbox& sandbox_;
  parse::ParseBackend& backend_;

  std::vector<std::vector<model::ItemRecord>> collected_;
  std::optional<std::vector<model::ItemRecord>> last_merge_;
  std::optional<parse::RuleSet> last_ruleset_;
};

}  // namespace webscraper::tools
