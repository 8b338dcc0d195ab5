#include "webscraper/fixture.hpp"

#include <array>
#include <cstdio>
#include <random>
#include <set>
#include <thread>

#include "httplib.h"
#include "json.hpp"

#include "webscraper/errors.hpp"
#include "webscraper/html.hpp"
#include "webscraper/toolbox.hpp"

namespace webscraper::fixture {

using nlohmann::json;
using nlohmann::ordered_json;

std::string variant_name(Variant v) {
  switch (v) {
    case Variant::kLinkPagination: return "link_pagination";
    case Variant::kButtonPagination: return "button_pagination";
    case Variant::kLoadMore: return "load_more";
    case Variant::kNoisyAds: return "noisy_ads";
    case Variant::kMultiPrice: return "multi_price";
  }
  return "link_pagination";
}

Variant variant_from_name(const std::string& name) {
  if (name == "link_pagination") return Variant::kLinkPagination;
  if (name == "button_pagination") return Variant::kButtonPagination;
  if (name == "load_more") return Variant::kLoadMore;
  if (name == "noisy_ads") return Variant::kNoisyAds;
  if (name == "multi_price") return Variant::kMultiPrice;
  throw ValidationError("unknown fixture variant \"" + name + "\"");
}

void SiteSpec::validate() const {
  if (n_pages < 1)
    throw ValidationError("site spec: n_pages must be >= 1");
  if (items_per_page < 1)
    throw ValidationError("site spec: items_per_page must be >= 1");
}

SiteSpec SiteSpec::from_json_text(const std::string& text) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object())
    throw ParseError("site spec: malformed JSON object");
  SiteSpec s;
  try {
    s.seed = j.value("seed", s.seed);
    s.n_pages = j.value("n_pages", s.n_pages);
    s.items_per_page = j.value("items_per_page", s.items_per_page);
    if (j.contains("variant"))
      s.variant = variant_from_name(j["variant"].get<std::string>());
    if (j.contains("language"))
      s.language = model::language_from_name(j["language"].get<std::string>());
  } catch (const json::exception& e) {
    throw ParseError(std::string("site spec: ") + e.what());
  }
  s.validate();
  return s;
}

std::string SiteSpec::to_json_text() const {
  ordered_json j = {{"seed", seed},
                    {"n_pages", n_pages},
                    {"items_per_page", items_per_page},
                    {"variant", variant_name(variant)},
                    {"language", model::language_name(language)}};
  return j.dump(2) + "\n";
}

std::string SiteSpec::site_id() const {
  return variant_name(variant) + "-" + model::language_name(language) + "-s" +
         std::to_string(seed);
}

namespace {

struct Rng {
  std::mt19937 g;
  explicit Rng(std::int64_t seed)
      : g(static_cast<std::uint32_t>(seed & 0xffffffff)) {}
  int below(int n) { return static_cast<int>(g() % static_cast<std::uint32_t>(n)); }
};

// Deliberately avoids "market": multi_price hints must only hit the
// price labels.
const char* const kWordsEn[] = {
    "harbor", "council", "report",  "season",  "signal",  "border",
    "record", "garden",  "summit",  "export",  "review",  "policy",
    "travel", "bridge",  "winter",  "museum",  "launch",  "budget",
    "survey", "energy",  "transit", "planet",  "forest",  "editor",
    "filter", "anchor",  "tunnel",  "meadow",  "copper",  "orchard",
    "harvest", "lantern", "granite", "timber",  "current", "valley",
    "station", "archive", "compass", "quarry",
};
constexpr int kWordsEnCount = 40;

const char* const kAdWordsEn[] = {
    "deal",     "sale",    "bonus",   "offer",  "prize",  "voucher",
    "weekend",  "upgrade", "savings", "flash",  "mega",   "exclusive",
};
constexpr int kAdWordsEnCount = 12;

const char* const kSentencesZh[] = {
    "研究團隊公布最新的調查結果",
    "分析指出本季出口成長超出預期",
    "委員會決議將於下月召開公聽會",
    "博物館宣布推出全新的常設展覽",
    "氣象單位提醒民眾注意週末天氣變化",
    "地方政府計畫擴建沿海的自行車道",
    "學者認為新政策有助於產業轉型",
    "志工團體週末前往山區整理步道",
    "新啟用的圖書館吸引眾多讀者到訪",
    "農民市集本週末移師河濱公園舉行",
    "交通部門評估延長捷運營運時間",
    "出版社將於書展發表多部新作",
    "港口管理單位完成年度設備檢修",
    "社區大學開設秋季木工課程",
};
constexpr int kSentencesZhCount = 14;

const char* const kZhTitleHead[] = {"港區", "年度", "老街", "社區",
                                    "河岸", "山線", "跨海", "市集"};
const char* const kZhTitleTail[] = {
    "更新計畫進入新階段", "預算審查本週展開",   "再造工程正式動工",
    "農園招募春季志工",   "燈節吸引大批遊客",   "觀光列車啟動試營運",
    "大橋完成結構檢測",   "巡迴展覽移師北區"};

const char* const kAdLinesZh[] = {
    "限時優惠只到週末",
    "會員獨享加倍點數",
    "本月滿額贈好禮",
    "全館折扣立即選購",
};

bool is_english(const SiteSpec& spec) {
  return spec.language == model::Language::kEnglish;
}

std::string en_word(Rng& rng) { return kWordsEn[rng.below(kWordsEnCount)]; }

std::string capitalized(std::string w) {
  if (!w.empty()) w[0] = static_cast<char>(std::toupper(w[0]));
  return w;
}

std::string en_sentence(Rng& rng) {
  int n = 8 + rng.below(7);
  std::string s;
  for (int i = 0; i < n; ++i) {
    if (i) s += ' ';
    s += i == 0 ? capitalized(en_word(rng)) : en_word(rng);
  }
  return s + ".";
}

std::string make_title(const SiteSpec& spec, Rng& rng) {
  if (is_english(spec)) {
    int n = 3 + rng.below(3);
    std::string s;
    for (int i = 0; i < n; ++i) {
      if (i) s += ' ';
      s += capitalized(en_word(rng));
    }
    return s;
  }
  return std::string(kZhTitleHead[rng.below(8)]) + kZhTitleTail[rng.below(8)];
}

std::string make_paragraph(const SiteSpec& spec, Rng& rng) {
  if (is_english(spec)) {
    int n = 2 + rng.below(3);
    std::string s;
    for (int i = 0; i < n; ++i) {
      if (i) s += ' ';
      s += en_sentence(rng);
    }
    return s;
  }
  int n = 2 + rng.below(2);
  std::string s;
  for (int i = 0; i < n; ++i) {
    s += kSentencesZh[rng.below(kSentencesZhCount)];
    s += "。";
  }
  return s;
}

std::string make_date(Rng& rng) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "2024-%02d-%02d", 1 + rng.below(12),
                1 + rng.below(28));
  return buf;
}

std::string make_ad_line(const SiteSpec& spec, Rng& rng) {
  if (!is_english(spec)) return kAdLinesZh[rng.below(4)];
  int n = 5 + rng.below(4);
  std::string s;
  for (int i = 0; i < n; ++i) {
    if (i) s += ' ';
    std::string w = kAdWordsEn[rng.below(kAdWordsEnCount)];
    s += i == 0 ? capitalized(w) : w;
  }
  return s + "!";
}

std::string make_ad_href(Rng& rng) {
  return std::string("https://ads.example/") +
         kAdWordsEn[rng.below(kAdWordsEnCount)] + "-" +
         std::to_string(100 + rng.below(900));
}

std::string format_price(const SiteSpec& spec, int dollars, int cents) {
  char buf[24];
  if (is_english(spec))
    std::snprintf(buf, sizeof buf, "$%d.%02d", dollars, cents);
  else
    std::snprintf(buf, sizeof buf, "NT$%d", dollars * 30 + cents);
  return buf;
}

struct ItemData {
  std::string path;
  std::string title;
  std::string date;
  std::vector<std::string> paras;
  std::string golden_content;
  // multi_price row list in render order: (label, value); exactly one is
  // the market row.
  std::vector<std::pair<std::string, std::string>> price_rows;
  std::string market_price;
};

struct Strings {
  std::string site_name;
  std::string section;
  std::string home;
  std::string next;
  std::string prev;
  std::string load_more;
  std::string footer;
  std::string published;
  std::string page_word;
  std::string ad_cta;
  std::array<std::string, 3> price_labels;  // promo, discounted, market
};

Strings strings_for(const SiteSpec& spec) {
  bool shop = spec.variant == Variant::kMultiPrice;
  if (is_english(spec)) {
    return {shop ? "Granite Outfitters" : "Harborline Daily",
            shop ? "Catalogue" : "Latest stories",
            "Home",
            "Next page",
            "Previous page",
            "Load more stories",
            "Pages generated for offline integration work.",
            "Published",
            "Page",
            "See offer",
            {"Promotional price", "Discounted price", "Market price"}};
  }
  return {shop ? "山岩戶外用品" : "港灣日報",
          shop ? "商品目錄" : "最新消息",
          "回首頁",
          "下一頁",
          "上一頁",
          "載入更多",
          "本站頁面由產生器自動建立",
          "發布於",
          "第",
          "立即查看",
          {"促銷價", "折扣價", "市價"}};
}

std::string item_li(const ItemData& item) {
  return "<li class=\"story\"><a class=\"story-link\" href=\"" + item.path +
         "\">" + html::escape_text(item.title) +
         "</a> <span class=\"story-date\">" + item.date + "</span></li>\n";
}

std::string promo_li(const SiteSpec& spec, Rng& rng) {
  return "<li class=\"promo-item\"><a class=\"promo-link\" href=\"" +
         make_ad_href(rng) + "\">" +
         html::escape_text(make_ad_line(spec, rng)) + "</a></li>\n";
}

std::string promo_strip(const SiteSpec& spec, const Strings& str, Rng& rng) {
  return "<div class=\"promo-strip\"><p>" +
         html::escape_text(make_ad_line(spec, rng)) +
         "</p><a class=\"promo-link\" href=\"" + make_ad_href(rng) + "\">" +
         str.ad_cta + "</a></div>\n";
}

std::string page_head(const Strings& str, const SiteSpec& spec,
                      const std::string& title_text) {
  std::string lang = is_english(spec) ? "en" : "zh";
  return "<!DOCTYPE html>\n<html lang=\"" + lang +
         "\">\n<head>\n<meta charset=\"utf-8\">\n<title>" +
         html::escape_text(title_text) +
         "</title>\n</head>\n<body>\n<header>\n<div class=\"masthead\">" +
         html::escape_text(str.site_name) +
         "</div>\n<nav class=\"top-nav\"><a href=\"/index.html\">" + str.home +
         "</a></nav>\n</header>\n<main>\n";
}

std::string page_foot(const Strings& str) {
  return "</main>\n<footer><p>" + html::escape_text(str.footer) +
         "</p></footer>\n</body>\n</html>\n";
}

std::string index_path_for(int page) {
  return page == 1 ? "/index.html" : "/page_" + std::to_string(page) + ".html";
}

std::string build_index_page(const SiteSpec& spec, const Strings& str,
                             const std::vector<ItemData>& items, int page,
                             Rng& rng) {
  int per = spec.items_per_page;
  bool load_more = spec.variant == Variant::kLoadMore;
  int begin = load_more ? 0 : (page - 1) * per;

  std::string title = str.site_name + " - " + str.section;
  std::string out = page_head(str, spec, title);
  out += "<h2 class=\"section-head\">" + html::escape_text(str.section) +
         "</h2>\n<ul id=\"item-list\">\n";

  int ad_at = -1;
  if (spec.variant == Variant::kNoisyAds) ad_at = rng.below(per);
  for (int i = 0; i < per; ++i) {
    if (i == ad_at) out += promo_li(spec, rng);
    out += item_li(items[begin + i]);
  }
  if (spec.variant == Variant::kNoisyAds) out += promo_li(spec, rng);
  out += "</ul>\n";

  std::string pager_info = "<span class=\"pager-info\">" + str.page_word +
                           " " + std::to_string(page) + " / " +
                           std::to_string(spec.n_pages) + "</span>";
  if (load_more) {
    if (spec.n_pages > 1)
      out += "<button id=\"load-more\" data-load-more=\"/fragment_2.html\" "
             "data-target=\"item-list\">" +
             str.load_more + "</button>\n";
  } else if (spec.variant == Variant::kButtonPagination) {
    out += "<div class=\"pager\">" + pager_info;
    if (page < spec.n_pages)
      out += " <button class=\"pager-next\" data-href=\"" +
             index_path_for(page + 1) + "\">" + str.next + "</button>";
    out += "</div>\n";
  } else {
    out += "<nav class=\"pager\">";
    if (page > 1)
      out += "<a class=\"pager-prev\" href=\"" + index_path_for(page - 1) +
             "\">" + str.prev + "</a> ";
    out += pager_info;
    if (page < spec.n_pages)
      out += " <a class=\"pager-next\" href=\"" + index_path_for(page + 1) +
             "\">" + str.next + "</a>";
    out += "</nav>\n";
  }
  return out + page_foot(str);
}

std::string build_fragment(const std::vector<ItemData>& items, int batch,
                           int per, int n_batches) {
  std::string out = "<div class=\"batch\"";
  if (batch < n_batches)
    out += " data-next=\"/fragment_" + std::to_string(batch + 1) + ".html\"";
  out += ">\n";
  for (int i = (batch - 1) * per; i < batch * per; ++i)
    out += item_li(items[i]);
  return out + "</div>\n";
}

std::string build_content_page(const SiteSpec& spec, const Strings& str,
                               const ItemData& item, Rng& rng) {
  std::string out = page_head(str, spec, item.title + " | " + str.site_name);
  bool noisy = spec.variant == Variant::kNoisyAds;

  if (noisy) out += promo_strip(spec, str, rng);
  out += "<article class=\"story-wrap\">\n<h1 class=\"story-title\">" +
         html::escape_text(item.title) + "</h1>\n<div class=\"story-meta\">" +
         str.published + " " + item.date + "</div>\n";
  if (noisy) out += promo_strip(spec, str, rng);

  if (!item.price_rows.empty()) {
    out += "<section class=\"price-panel\">\n";
    for (const auto& [label, value] : item.price_rows)
      out += "<div class=\"price-row\"><span class=\"price-name\">" + label +
             "</span><span class=\"price-value\">" + value +
             "</span></div>\n";
    out += "</section>\n";
  }

  out += "<div class=\"story-body\">\n";
  for (const auto& para : item.paras)
    out += "<p>" + html::escape_text(para) + "</p>\n";
  out += "</div>\n</article>\n";
  if (noisy) out += promo_strip(spec, str, rng);
  return out + page_foot(str);
}

}  // namespace

GeneratedSite generate_site(const SiteSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  Strings str = strings_for(spec);

  int total = spec.n_pages * spec.items_per_page;
  std::vector<ItemData> items;
  std::set<std::string> used_titles;
  for (int i = 0; i < total; ++i) {
    ItemData item;
    item.path = "/item_" + std::to_string(i + 1) + ".html";
    item.title = make_title(spec, rng);
    for (int tries = 0; used_titles.count(item.title) && tries < 50; ++tries)
      item.title = make_title(spec, rng);
    if (used_titles.count(item.title))
      item.title += is_english(spec) ? " " + std::to_string(i + 1)
                                     : "（" + std::to_string(i + 1) + "）";
    used_titles.insert(item.title);
    item.date = make_date(rng);

    int paras = 3 + rng.below(3);
    for (int p = 0; p < paras; ++p)
      item.paras.push_back(make_paragraph(spec, rng));
    for (size_t p = 0; p < item.paras.size(); ++p) {
      if (p) item.golden_content += ' ';
      item.golden_content += item.paras[p];
    }

    if (spec.variant == Variant::kMultiPrice) {
      int market_d = 40 + rng.below(60);
      int disc_d = market_d - (5 + rng.below(15));
      int promo_d = disc_d - (3 + rng.below(10));
      int cents = std::array<int, 3>{0, 49, 99}[rng.below(3)];
      std::array<std::string, 3> values = {
          format_price(spec, promo_d, cents),
          format_price(spec, disc_d, cents),
          format_price(spec, market_d, cents)};
      item.market_price = values[2];
      std::array<int, 3> order = {0, 1, 2};
      for (int k = 2; k > 0; --k) std::swap(order[k], order[rng.below(k + 1)]);
      for (int k = 0; k < 3; ++k)
        item.price_rows.emplace_back(str.price_labels[order[k]],
                                     values[order[k]]);
    }
    items.push_back(std::move(item));
  }

  GeneratedSite site;
  site.spec = spec;

  for (const auto& item : items) {
    site.pages[item.path] = build_content_page(spec, str, item, rng);

    model::GoldenItem g;
    g.url = item.path;
    g.title = item.title;
    g.content = item.golden_content;
    site.golden.items.push_back(std::move(g));
    if (!item.market_price.empty())
      site.extra_golden[item.path] = {{"price", item.market_price}};
  }

  if (spec.variant == Variant::kLoadMore) {
    site.pages["/index.html"] = build_index_page(spec, str, items, 1, rng);
    for (int b = 2; b <= spec.n_pages; ++b)
      site.pages["/fragment_" + std::to_string(b) + ".html"] =
          build_fragment(items, b, spec.items_per_page, spec.n_pages);
  } else {
    for (int p = 1; p <= spec.n_pages; ++p)
      site.pages[index_path_for(p)] =
          build_index_page(spec, str, items, p, rng);
  }

  site.golden.site_id = spec.site_id();
  site.golden.language = spec.language;
  site.golden.validate();
  return site;
}

model::GoldenSet absolute_golden(const GeneratedSite& site,
                                 const std::string& base_url) {
  std::string base = base_url;
  while (!base.empty() && base.back() == '/') base.pop_back();
  model::GoldenSet out = site.golden;
  for (auto& item : out.items) item.url = base + item.url;
  return out;
}

// --- server ---

struct FixtureServer::Impl {
  GeneratedSite site;
  httplib::Server svr;
  std::thread thread;
  int port = 0;
};

FixtureServer::FixtureServer(GeneratedSite site)
    : impl_(std::make_unique<Impl>()) {
  impl_->site = std::move(site);
}

FixtureServer::~FixtureServer() { stop(); }

int FixtureServer::start(int port) {
  Impl* im = impl_.get();

  im->svr.Get(".*", [im](const httplib::Request& req, httplib::Response& res) {
    if (req.path == kGoldenPath) {
      std::string host = req.get_header_value("Host");
      if (host.empty()) host = "127.0.0.1:" + std::to_string(im->port);
      res.set_content(
          model::golden_to_json_text(absolute_golden(im->site, "http://" + host)),
          "application/json");
      return;
    }
    if (req.path == kStatePath) {
      res.set_header("Set-Cookie", "fixture_visits=1; Path=/");
      res.set_content("<html><body><p id=\"cookie-echo\">" +
                          html::escape_text(req.get_header_value("Cookie")) +
                          "</p></body></html>",
                      "text/html; charset=utf-8");
      return;
    }
    auto it = im->site.pages.find(req.path);
    if (it == im->site.pages.end()) {
      res.status = 404;
      res.set_content("not found", "text/plain");
      return;
    }
    res.set_content(it->second, "text/html; charset=utf-8");
  });

  if (port == 0) {
    im->port = im->svr.bind_to_any_port("127.0.0.1");
    if (im->port <= 0) throw IoError("fixture server: cannot bind a port");
  } else {
    if (!im->svr.bind_to_port("127.0.0.1", port))
      throw IoError("fixture server: cannot bind port " + std::to_string(port));
    im->port = port;
  }
  im->thread = std::thread([im] { im->svr.listen_after_bind(); });
  im->svr.wait_until_ready();
  return im->port;
}

void FixtureServer::stop() {
  if (!impl_) return;
  if (impl_->thread.joinable()) {
    impl_->svr.stop();
    impl_->thread.join();
  }
}

int FixtureServer::port() const { return impl_->port; }

std::string FixtureServer::base_url() const {
  return "http://127.0.0.1:" + std::to_string(impl_->port);
}

const GeneratedSite& FixtureServer::site() const { return impl_->site; }

// --- demo traces ---

namespace {

class TraceBuilder {
 public:
  provider::ContentBlock use(const std::string& name, nlohmann::json args) {
    return provider::ContentBlock::make_tool_use(
        "call_" + std::to_string(++calls_), name, std::move(args));
  }

  void turn(const std::string& text, provider::ContentBlock tool_use) {
    trace_.turns.push_back(
        {provider::ContentBlock::make_text(text), std::move(tool_use)});
  }

  void final_turn(const std::string& text) {
    trace_.turns.push_back({provider::ContentBlock::make_text(text)});
  }

  provider::ScriptedTrace take() { return std::move(trace_); }

 private:
  provider::ScriptedTrace trace_;
  int calls_ = 0;
};

ordered_json golden_as_records(const GeneratedSite& site,
                               const std::string& base_url,
                               const model::ScrapeTask& task,
                               bool null_content, int drop_last) {
  ordered_json arr = ordered_json::array();
  int n = static_cast<int>(site.golden.items.size()) - drop_last;
  for (int i = 0; i < n; ++i) {
    const auto& g = site.golden.items[i];
    ordered_json rec;
    rec["url"] = base_url + g.url;
    for (const auto& field : task.fields) {
      if (field == "title") {
        rec[field] = g.title;
      } else if (field == "content") {
        rec[field] = null_content ? ordered_json(nullptr)
                                  : ordered_json(g.content);
      } else if (field == "link" || field == "url") {
        rec[field] = base_url + g.url;
      } else {
        auto site_it = site.extra_golden.find(g.url);
        if (!null_content && site_it != site.extra_golden.end() &&
            site_it->second.count(field))
          rec[field] = site_it->second.at(field);
        else
          rec[field] = nullptr;
      }
    }
    arr.push_back(std::move(rec));
  }
  return arr;
}

}  // namespace

provider::ScriptedTrace build_demo_trace(const GeneratedSite& site,
                                         const std::string& base_url,
                                         const model::ScrapeTask& task) {
  std::string base = base_url;
  while (!base.empty() && base.back() == '/') base.pop_back();
  std::string index_url = base + site.index_path();
  TraceBuilder b;

  if (task.mode == model::Mode::kBaseline) {
    b.turn("Opening the target page.", b.use("navigate", {{"url", index_url}}));
    b.turn("Reading the page structure.", b.use("get_html", json::object()));
    b.turn("Trying a structured parse of the listing.",
           b.use("parse_tool", {{"page_kind", "index"}}));
    b.turn("No parser available here; saving the listing data I can see.",
           b.use("file_write",
                 {{"path", tools::kDatasetFilename},
                  {"content",
                   golden_as_records(site, base, task, true, 0).dump()}}));
    b.final_turn(
        "I collected the item list but could not extract article bodies.");
    return b.take();
  }

  if (task.mode == model::Mode::kPromptOnly) {
    b.turn("Opening the target page.", b.use("navigate", {{"url", index_url}}));
    b.turn("Reading the page structure.", b.use("get_html", json::object()));
    b.turn("Extracted the items by hand; saving the dataset.",
           b.use("file_write",
                 {{"path", tools::kDatasetFilename},
                  {"content",
                   golden_as_records(site, base, task, false, 1).dump()}}));
    b.final_turn("Dataset written; one item near the end may be missing.");
    return b.take();
  }

  b.turn("Stage 1 - opening the index page.",
         b.use("navigate", {{"url", index_url}}));
  b.turn("Stage 2 - parsing the listing.",
         b.use("parse_tool", {{"page_kind", "index"}}));

  if (site.spec.variant == Variant::kLoadMore) {
    for (int batch = 2; batch <= site.spec.n_pages; ++batch)
      b.turn("Stage 3 - loading more items.",
             b.use("click", {{"selector", "#load-more"}}));
    if (site.spec.n_pages > 1)
      b.turn("Stage 3 - re-parsing the grown listing.",
             b.use("parse_tool", {{"page_kind", "index"}}));
  } else {
    const char* next_selector =
        site.spec.variant == Variant::kButtonPagination ? "button.pager-next"
                                                        : "a.pager-next";
    for (int page = 2; page <= site.spec.n_pages; ++page) {
      b.turn("Stage 3 - moving to the next page.",
             b.use("click", {{"selector", next_selector}}));
      b.turn("Stage 3 - parsing this page.",
             b.use("parse_tool", {{"page_kind", "index"}}));
    }
  }

  std::string first_item = base + site.golden.items.front().url;
  b.turn("Stage 4 - opening one item page to derive extraction rules.",
         b.use("navigate", {{"url", first_item}}));
  b.turn("Stage 4 - deriving the content rule set.",
         b.use("parse_tool", {{"page_kind", "content"}}));
  b.turn("Stage 4 - extracting this page with the rules.",
         b.use("apply_ruleset", json::object()));
  for (size_t i = 1; i < site.golden.items.size(); ++i)
    b.turn("Stage 4 - applying the rules to the next item page.",
           b.use("apply_ruleset", {{"url", base + site.golden.items[i].url}}));

  b.turn("Stage 5 - merging all collected batches.",
         b.use("merge_tool", json::object()));
  b.final_turn("Dataset assembled from " +
               std::to_string(site.golden.items.size()) +
               " item pages; duplicates removed by URL.");
  return b.take();
}

}  // namespace webscraper::fixture
