#include "doctest.h"

#include <cstdio>
#include <filesystem>
#include <random>

#include "webscraper/errors.hpp"
#include "webscraper/html.hpp"
#include "webscraper/model.hpp"
#include "webscraper/selector.hpp"
#include "webscraper/url.hpp"

#include "support/temp_dir.hpp"

using namespace webscraper;

// ---------------------------------------------------------------- url

TEST_CASE("url parse accepts absolute http(s) and rejects the rest") {
  auto u = url::parse("https://www.bbc.com/news/us-canada?page=2#top");
  REQUIRE(u.has_value());
  CHECK(u->scheme == "https");
  CHECK(u->host == "www.bbc.com");
  CHECK(u->port == -1);
  CHECK(u->path == "/news/us-canada");
  CHECK(*u->query == "page=2");
  CHECK(*u->fragment == "top");

  CHECK_FALSE(url::parse("notaurl").has_value());
  CHECK_FALSE(url::parse("ftp://x.com/a").has_value());
  CHECK_FALSE(url::parse("/relative/path").has_value());
  CHECK_FALSE(url::parse("http://").has_value());
}

TEST_CASE("url resolve follows RFC 3986 reference cases") {
  auto base = *url::parse("http://example.com/a/b/c.html?q=1");
  auto r = [&](const std::string& ref) {
    return url::resolve(base, ref)->to_string();
  };
  CHECK(r("d.html") == "http://example.com/a/b/d.html");
  CHECK(r("../d.html") == "http://example.com/a/d.html");
  CHECK(r("/d.html") == "http://example.com/d.html");
  CHECK(r("//other.org/x") == "http://other.org/x");
  CHECK(r("https://other.org/x") == "https://other.org/x");
  CHECK(r("?p=2") == "http://example.com/a/b/c.html?p=2");
  CHECK(r("#frag") == "http://example.com/a/b/c.html?q=1#frag");
  CHECK(r("./") == "http://example.com/a/b/");
  CHECK(r("../../../up.html") == "http://example.com/up.html");
}

TEST_CASE("url normalize canonicalizes and is idempotent") {
  CHECK(url::normalize("HTTP://Example.COM:80/A/b?Q=x#frag") ==
        "http://example.com/A/b?Q=x");
  CHECK(url::normalize("https://Example.com:443/") == "https://example.com/");
  CHECK(url::normalize("https://example.com:8443/x") ==
        "https://example.com:8443/x");
  CHECK(url::normalize("http://example.com") == "http://example.com/");

  // Idempotence over a pile of seeded random-ish inputs.
  std::vector<std::string> urls = {
      "http://A.b/",
      "http://a.b:80/p?q#f",
      "HTTPS://X.Y.Z:443/P/Q/../R?a=b&c=d#z",
      "http://h/p1/p2/p3",
      "not a url at all",
  };
  for (const auto& s : urls) {
    std::string once = url::normalize(s);
    CHECK(url::normalize(once) == once);
  }
}

// ---------------------------------------------------------------- html

TEST_CASE("html parse builds a tree with attributes and text") {
  auto doc = html::Document::parse(
      "<!doctype html><html><body><div id=main class=\"box outer\">"
      "Hello <b>world</b>!</div></body></html>");
  int div = css::query_first(doc, "#main");
  REQUIRE(div >= 0);
  CHECK(doc.node(div).has_class("box"));
  CHECK(doc.node(div).has_class("outer"));
  CHECK(doc.text_content(div) == "Hello world !");
}

TEST_CASE("html parse handles void elements, comments and raw text") {
  auto doc = html::Document::parse(
      "<p>a<br>b</p><!-- note --><script>if (x < 3) y();</script><p>c</p>");
  auto ps = css::query_all(doc, "p");
  REQUIRE(ps.size() == 2);
  CHECK(doc.text_content(ps[0]) == "a b");
  CHECK(doc.text_content(ps[1]) == "c");
  // Script body survives verbatim but never leaks into text content.
  CHECK(doc.text_content(doc.root()).find("y()") == std::string::npos);
  CHECK(doc.serialize().find("if (x < 3) y();") != std::string::npos);
}

TEST_CASE("html parse recovers from missing end tags") {
  auto doc = html::Document::parse(
      "<ul><li>one<li>two<li>three</ul><p>para1<p>para2");
  CHECK(css::query_all(doc, "ul > li").size() == 3);
  auto ps = css::query_all(doc, "p");
  REQUIRE(ps.size() == 2);
  CHECK(doc.text_content(ps[0]) == "para1");
}

TEST_CASE("html entity decoding") {
  CHECK(html::decode_entities("a &amp; b &lt;c&gt; &quot;d&quot; &#65;&#x42;") ==
        "a & b <c> \"d\" AB");
  CHECK(html::decode_entities("x&nbsp;y") == "x y");
  CHECK(html::decode_entities("broken &tilde incomplete") ==
        "broken &tilde incomplete");
  // CJK numeric reference round-trips through UTF-8.
  CHECK(html::decode_entities("&#x53F0;") == "\xE5\x8F\xB0");
}

TEST_CASE("html serialize round-trips structure") {
  std::string src =
      "<div class=\"a\"><a href=\"/x?a=1&amp;b=2\">link</a><img src=\"i.png\">"
      "</div>";
  auto doc = html::Document::parse(src);
  auto re = html::Document::parse(doc.serialize());
  int a = css::query_first(re, "div.a > a");
  REQUIRE(a >= 0);
  CHECK(*re.node(a).attr("href") == "/x?a=1&b=2");
  CHECK(css::query_first(re, "div.a > img[src=\"i.png\"]") >= 0);
}

TEST_CASE("html tree mutation: graft and detach") {
  auto doc = html::Document::parse("<ul id=items><li>one</li></ul>");
  auto frag = html::Document::parse("<li>two</li><li>three</li>");
  int ul = css::query_first(doc, "#items");
  for (int child : frag.node(frag.root()).children)
    doc.graft(ul, frag, child);
  CHECK(css::query_all(doc, "#items > li").size() == 3);
  doc.detach(css::query_all(doc, "#items > li")[0]);
  CHECK(css::query_all(doc, "#items > li").size() == 2);
}

// ---------------------------------------------------------------- selector

TEST_CASE("selector matching: compounds and combinators") {
  auto doc = html::Document::parse(R"(
    <article class="post featured">
      <h1 class="headline">T</h1>
      <div class="body"><p>one</p><p>two</p><span data-k="v">s</span></div>
    </article>
    <div class="body"><p>outside</p></div>)");
  CHECK(css::query_all(doc, "p").size() == 3);
  CHECK(css::query_all(doc, "article p").size() == 2);
  CHECK(css::query_all(doc, "article > h1").size() == 1);
  CHECK(css::query_all(doc, "article > p").empty());
  CHECK(css::query_all(doc, ".post.featured").size() == 1);
  CHECK(css::query_all(doc, "[data-k]").size() == 1);
  CHECK(css::query_all(doc, "[data-k=\"v\"]").size() == 1);
  CHECK(css::query_all(doc, "[data-k=\"w\"]").empty());
  CHECK(css::query_all(doc, "h1, span").size() == 2);
  int p2 = css::query_first(doc, "div.body p:nth-of-type(2)");
  REQUIRE(p2 >= 0);
  CHECK(doc.text_content(p2) == "two");
}

TEST_CASE("selector scope excludes the scope element itself") {
  auto doc = html::Document::parse("<div id=a><div id=b></div></div>");
  int a = css::query_first(doc, "#a");
  CHECK(css::query_all(doc, "div", a).size() == 1);
}

TEST_CASE("selector parse errors") {
  CHECK_THROWS_AS(css::Selector::parse(""), ValidationError);
  CHECK_THROWS_AS(css::Selector::parse("."), ValidationError);
  CHECK_THROWS_AS(css::Selector::parse("div[unclosed"), ValidationError);
  CHECK_THROWS_AS(css::Selector::parse("p:hover"), ValidationError);
  CHECK_THROWS_AS(css::Selector::parse("p:nth-of-type(0)"), ValidationError);
}

// ---------------------------------------------------------------- model

namespace {

model::ScrapeTask demo_task() {
  model::ScrapeTask t;
  t.target_url = "https://www.bbc.com/news/us-canada";
  t.section_hint = "US-Canada section";
  t.page_scope = 2;
  t.fields = {"title", "link", "content"};
  return t;
}

}  // namespace

TEST_CASE("task json round-trip and defaults") {
  std::string text = R"({
    "target_url": "https://www.bbc.com/news/us-canada",
    "section_hint": "US-Canada section",
    "page_scope": 2,
    "fields": ["title", "link", "content"],
    "mode": "prompt_tool",
    "politeness_delay_ms": 200,
    "max_iterations": 40
  })";
  auto task = model::task_from_json_text(text);
  CHECK(task.page_scope == 2);
  CHECK(task.fields == std::vector<std::string>{"title", "link", "content"});
  CHECK(task.politeness_delay_ms == 200);
  CHECK(task.max_iterations == 40);
  CHECK(task.mode == model::Mode::kPromptTool);

  auto minimal = model::task_from_json_text(
      R"({"target_url":"http://h/x","fields":["title"]})");
  CHECK(minimal.page_scope == 1);
  CHECK(minimal.politeness_delay_ms == 2000);
  CHECK(minimal.max_iterations == 50);
}

TEST_CASE("task validation errors") {
  CHECK_THROWS_WITH_AS(
      model::task_from_json_text(R"({"fields":["title"]})"),
      doctest::Contains("target_url"), ValidationError);
  CHECK_THROWS_AS(model::task_from_json_text(
                      R"({"target_url":"http://h/x","fields":["title"],"page_scope":0})"),
                  ValidationError);
  CHECK_THROWS_AS(model::task_from_json_text(
                      R"({"target_url":"http://h/x","fields":[]})"),
                  ValidationError);
  CHECK_THROWS_AS(model::task_from_json_text(
                      R"({"target_url":"http://h/x","fields":["title","title"]})"),
                  ValidationError);
  CHECK_THROWS_AS(model::task_from_json_text(
                      R"({"target_url":"http://h/x","fields":["Title"]})"),
                  ValidationError);
  CHECK_THROWS_AS(model::task_from_json_text(
                      R"({"target_url":"notaurl","fields":["title"]})"),
                  ValidationError);
  CHECK_THROWS_AS(model::task_from_json_text("{nonsense"), ParseError);
}

TEST_CASE("assemble_user_prompt follows the template") {
  auto task = demo_task();
  std::string prompt = model::assemble_user_prompt(task);
  CHECK(prompt ==
        "Scrape the first two pages of US-Canada section from "
        "https://www.bbc.com/news/us-canada, extracting the title, link, "
        "content for each item.");
  // Deterministic: same task, byte-identical prompt.
  CHECK(model::assemble_user_prompt(task) == prompt);

  task.page_scope = 1;
  CHECK(model::assemble_user_prompt(task).find("the first page of") !=
        std::string::npos);

  model::ScrapeTask single;
  single.target_url = "http://shop.example/catalog";
  single.fields = {"price"};
  std::string p = model::assemble_user_prompt(single);
  CHECK(p == "Scrape the first page from http://shop.example/catalog, "
             "extracting the price for each item.");
}

TEST_CASE("dataset serialization round-trip, order and null handling") {
  test_support::TempDir tmp;
  model::Dataset d;
  d.fields = {"title", "content"};
  d.items.push_back({"http://h/a", {{"title", "A"}, {"content", "ca"}}, 1});
  d.items.push_back({"http://h/b", {{"title", "B"}, {"content", std::nullopt}}, 2});

  std::string path = tmp.path() + "/dataset.json";
  model::write_dataset(d, path);
  auto back = model::read_dataset(path, d.fields);
  CHECK(back == d);
  CHECK(back.items[0].url == "http://h/a");
  CHECK_FALSE(back.items[1].values.at("content").has_value());

  // Key order in the file: url first, then requested fields in order.
  std::string text = model::read_file(path);
  CHECK(text.find("\"url\"") < text.find("\"title\""));
  CHECK(text.find("\"title\"") < text.find("\"content\""));

  model::Dataset empty;
  empty.fields = {"title"};
  model::write_dataset(empty, path);
  CHECK(model::read_file(path) == "[]\n");
  CHECK(model::read_dataset(path, empty.fields).items.empty());
}

TEST_CASE("dataset with duplicate normalized URLs is refused") {
  model::Dataset d;
  d.fields = {"title"};
  d.items.push_back({"http://h/a", {{"title", "A"}}, 1});
  d.items.push_back({"HTTP://H:80/a", {{"title", "B"}}, 1});
  CHECK_THROWS_AS(model::dataset_to_json_text(d), ValidationError);
}

TEST_CASE("dataset rejects values outside the requested fields") {
  model::Dataset d;
  d.fields = {"title"};
  d.items.push_back({"http://h/a", {{"summary", "x"}}, 1});
  CHECK_THROWS_AS(d.validate(), ValidationError);
}

TEST_CASE("golden set load and validation") {
  auto g = model::golden_from_json_text(R"({
    "site_id": "fixture-1", "language": "english",
    "items": [
      {"url": "http://h/a", "title": "A", "content": "body a"},
      {"url": "http://h/b", "title": "B", "content": "body b"}
    ]})");
  CHECK(g.items.size() == 2);
  CHECK(g.language == model::Language::kEnglish);
  std::string text = model::golden_to_json_text(g);
  auto again = model::golden_from_json_text(text);
  CHECK(again.items.size() == 2);
  CHECK(again.items[1].title == "B");

  CHECK_THROWS_AS(model::golden_from_json_text(R"({
    "site_id": "x", "language": "english",
    "items": [{"url": "http://h/a", "title": "", "content": "c"}]})"),
                  ValidationError);
  CHECK_THROWS_AS(model::golden_from_json_text(R"({
    "site_id": "x", "language": "english",
    "items": [{"url": "http://h/a", "title": "t", "content": "c"},
              {"url": "http://h/a", "title": "t2", "content": "c2"}]})"),
                  ValidationError);
}

TEST_CASE("load_task reports unreadable files") {
  CHECK_THROWS_AS(model::load_task("/nonexistent/task.json"), IoError);
}
