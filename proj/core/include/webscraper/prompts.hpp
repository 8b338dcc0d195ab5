#pragma once

#include <string>

#include "webscraper/model.hpp"

namespace webscraper::prompts {

// First heading line of each optional prompt asset; stable so tests and
// transcript tooling can detect which sections a prompt carries.
inline constexpr const char* kGuidanceMarker = "## Structured crawl guidance";
inline constexpr const char* kToolOperationsMarker =
    "## Parse and merge operations";

inline constexpr const char* kAssetsDirEnvVar = "WEBSCRAPER_ASSETS_DIR";

// Prompt asset location: explicit argument, else $WEBSCRAPER_ASSETS_DIR,
// else ./assets.
std::string assets_dir(const std::string& override_dir = "");

// baseline: the default agent prompt alone. prompt_only: default +
// guidance + prose descriptions of the parse and merge operations.
// prompt_tool: default + guidance; parse/merge arrive as callable tools
// instead of prose. Throws IoError when an asset file is missing.
std::string assemble_system_prompt(model::Mode mode,
                                   const std::string& override_dir = "");

}  // namespace webscraper::prompts
