#pragma once

#include <vector>

#include "webscraper/model.hpp"

namespace webscraper::merge {

// Deduplicates by normalized URL, first-seen order. Later duplicates fill
// in fields the earlier record left null or empty; when both sides carry
// text, the strictly longer value wins, so the result depends only on the
// concatenated record sequence and merging is idempotent.
std::vector<model::ItemRecord> merge_tool(
    const std::vector<std::vector<model::ItemRecord>>& batches);

}  // namespace webscraper::merge
