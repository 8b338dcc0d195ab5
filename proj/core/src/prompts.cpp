#include "webscraper/prompts.hpp"

#include <cstdlib>

namespace webscraper::prompts {

std::string assets_dir(const std::string& override_dir) {
  if (!override_dir.empty()) return override_dir;
  if (const char* env = std::getenv(kAssetsDirEnvVar); env && *env)
    return env;
  return "assets";
}

namespace {

std::string load_prompt(const std::string& dir, const char* name) {
  return model::read_file(dir + "/prompts/" + name);
}

void append_section(std::string* prompt, const std::string& section) {
  while (!prompt->empty() && prompt->back() == '\n') prompt->pop_back();
  *prompt += "\n\n" + section;
}

}  // namespace

std::string assemble_system_prompt(model::Mode mode,
                                   const std::string& override_dir) {
  std::string dir = assets_dir(override_dir);
  std::string prompt = load_prompt(dir, "default_system.txt");
  if (mode == model::Mode::kBaseline) return prompt;

  append_section(&prompt, load_prompt(dir, "crawler_guidance.txt"));
  if (mode == model::Mode::kPromptOnly)
    append_section(&prompt, load_prompt(dir, "tool_operations.txt"));
  return prompt;
}

}  // namespace webscraper::prompts
