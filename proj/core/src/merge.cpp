#include "webscraper/merge.hpp"

#include <map>
#include <optional>
#include <string>

#include "webscraper/url.hpp"

namespace webscraper::merge {

namespace {

bool is_blank(const std::optional<std::string>& v) {
  return !v || v->empty();
}

void consolidate(model::ItemRecord& into, const model::ItemRecord& later) {
  for (const auto& [field, value] : later.values) {
    auto it = into.values.find(field);
    if (it == into.values.end()) {
      into.values[field] = value;
      continue;
    }
    if (is_blank(it->second)) {
      if (!is_blank(value)) it->second = value;
      continue;
    }
    if (!is_blank(value) && value->size() > it->second->size())
      it->second = value;
  }
}

}  // namespace

std::vector<model::ItemRecord> merge_tool(
    const std::vector<std::vector<model::ItemRecord>>& batches) {
  std::vector<model::ItemRecord> out;
  std::map<std::string, size_t> by_url;
  for (const auto& batch : batches)
    for (const auto& rec : batch) {
      std::string key = url::normalize(rec.url);
      auto [it, fresh] = by_url.emplace(key, out.size());
      if (fresh)
        out.push_back(rec);
      else
        consolidate(out[it->second], rec);
    }
  return out;
}

}  // namespace webscraper::merge
