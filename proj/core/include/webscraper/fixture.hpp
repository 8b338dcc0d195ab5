#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>

#include "webscraper/model.hpp"
#include "webscraper/provider.hpp"

namespace webscraper::fixture {

enum class Variant {
  kLinkPagination,
  kButtonPagination,
  kLoadMore,
  kNoisyAds,
  kMultiPrice,
};

std::string variant_name(Variant v);
Variant variant_from_name(const std::string& name);

// Everything about a generated site is a pure function of this spec.
struct SiteSpec {
  std::int64_t seed = 1;
  int n_pages = 2;        // index pages (load_more: batches on one page)
  int items_per_page = 5;
  Variant variant = Variant::kLinkPagination;
  model::Language language = model::Language::kEnglish;

  void validate() const;  // n_pages >= 1, items_per_page >= 1

  static SiteSpec from_json_text(const std::string& text);
  std::string to_json_text() const;

  // Stable identifier like "link_pagination-english-s7", used for
  // artifact directories and stability site keys.
  std::string site_id() const;
};

struct GeneratedSite {
  SiteSpec spec;
  std::map<std::string, std::string> pages;  // path -> HTML (or fragment)
  // Golden URLs are site-relative paths; absolutize against the serving
  // host before comparing with an agent's dataset.
  model::GoldenSet golden;
  // Golden values beyond title/content, per URL path (multi_price: the
  // market price under the "price" key).
  std::map<std::string, std::map<std::string, std::string>> extra_golden;

  std::string index_path() const { return "/index.html"; }
};

GeneratedSite generate_site(const SiteSpec& spec);

// Golden set with URLs resolved against a base like "http://127.0.0.1:8801".
model::GoldenSet absolute_golden(const GeneratedSite& site,
                                 const std::string& base_url);

inline constexpr const char* kGoldenPath = "/__golden.json";
inline constexpr const char* kStatePath = "/__state.html";

// Serves a generated site on 127.0.0.1. The golden set (absolutized) is
// at /__golden.json; /__state.html echoes the request cookie and sets
// one, for exercising client cookie jars.
class FixtureServer {
 public:
  explicit FixtureServer(GeneratedSite site);
  ~FixtureServer();

  FixtureServer(const FixtureServer&) = delete;
  FixtureServer& operator=(const FixtureServer&) = delete;

  // port 0 picks a free port; returns the bound port. Throws IoError when
  // the port cannot be bound.
  int start(int port = 0);
  void stop();

  int port() const;
  std::string base_url() const;
  const GeneratedSite& site() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Scripted assistant turns that drive a run against this site the way a
// competent agent would for the task's mode: the prompt_tool choreography
// walks all five stages with real tool calls; prompt_only emits a nearly
// complete dataset by hand; baseline tries parse_tool (unregistered at
// that mode), then emits records with no content. Tool results are
// produced live by the toolbox, only the calls are scripted.
provider::ScriptedTrace build_demo_trace(const GeneratedSite& site,
                                         const std::string& base_url,
                                         const model::ScrapeTask& task);

}  // namespace webscraper::fixture
