#include "doctest.h"

#include <cmath>
#include <random>

#include "webscraper/errors.hpp"
#include "webscraper/eval.hpp"

#include "support/oracles.hpp"

using namespace webscraper;
using eval::Language;
using test_support::rouge_brute;

namespace {

std::vector<std::string> random_tokens(std::mt19937& rng, int max_len,
                                       int alphabet) {
  std::vector<std::string> out;
  int len = static_cast<int>(rng() % (max_len + 1));
  for (int i = 0; i < len; ++i)
    out.push_back("t" + std::to_string(rng() % alphabet));
  return out;
}

}  // namespace

// ------------------------------------------------------------- tokenize

TEST_CASE("english tokenization lowercases and splits on non-alnum") {
  CHECK(eval::tokenize("The cat, sat.", Language::kEnglish) ==
        std::vector<std::string>{"the", "cat", "sat"});
  CHECK(eval::tokenize("", Language::kEnglish).empty());
  CHECK(eval::tokenize("  --  ", Language::kEnglish).empty());
  CHECK(eval::tokenize("ABC-123_x", Language::kEnglish) ==
        std::vector<std::string>{"abc", "123", "x"});
}

TEST_CASE("chinese tokenization is per CJK character") {
  CHECK(eval::tokenize("台灣新聞", Language::kChinese) ==
        std::vector<std::string>{"台", "灣", "新", "聞"});
  // Hand segmentation under the stated rule: latin/digit runs stay whole.
  CHECK(eval::tokenize("BBC報導2024", Language::kChinese) ==
        std::vector<std::string>{"bbc", "報", "導", "2024"});
  // Fullwidth punctuation separates.
  CHECK(eval::tokenize("新聞，快訊", Language::kChinese) ==
        std::vector<std::string>{"新", "聞", "快", "訊"});
}

// ------------------------------------------------------------- rouge_l

TEST_CASE("rouge_l identity, disjoint and empty cases") {
  std::vector<std::string> x{"a", "b", "c"};
  auto id = eval::rouge_l(x, x);
  CHECK(id.recall == 1.0);
  CHECK(id.precision == 1.0);
  CHECK(id.f1 == 1.0);
  CHECK(id.lcs_len == 3);

  auto dis = eval::rouge_l({"a", "b"}, {"c", "d"});
  CHECK(dis.f1 == 0.0);
  CHECK(dis.recall == 0.0);
  CHECK(dis.precision == 0.0);
  CHECK(dis.lcs_len == 0);

  CHECK(eval::rouge_l({}, x).f1 == 0.0);
  CHECK(eval::rouge_l(x, {}).f1 == 0.0);
  CHECK(eval::rouge_l({}, {}).f1 == 0.0);
}

TEST_CASE("rouge_l matches the worked 6/5-token example") {
  std::vector<std::string> x{"the", "cat", "sat", "on", "the", "mat"};
  std::vector<std::string> y{"the", "cat", "on", "the", "mat"};
  auto s = eval::rouge_l(x, y);
  CHECK(s.lcs_len == 5);
  CHECK(s.recall == doctest::Approx(5.0 / 6.0).epsilon(1e-12));
  CHECK(s.precision == 1.0);
  CHECK(s.f1 == doctest::Approx(10.0 / 11.0).epsilon(1e-12));
  // Cross-check against the independent full-matrix oracle.
  auto oracle = rouge_brute(x, y);
  CHECK(s.lcs_len == oracle.lcs);
  CHECK(s.f1 == doctest::Approx(oracle.f1).epsilon(1e-12));
}

TEST_CASE("rouge_l agrees exactly with the brute-force oracle") {
  std::mt19937 rng(2024);
  for (int trial = 0; trial < 1000; ++trial) {
    auto x = random_tokens(rng, 30, 6);
    auto y = random_tokens(rng, 30, 6);
    auto got = eval::rouge_l(x, y);
    auto want = rouge_brute(x, y);
    REQUIRE(got.lcs_len == want.lcs);
    REQUIRE(std::abs(got.recall - want.recall) <= 1e-12);
    REQUIRE(std::abs(got.precision - want.precision) <= 1e-12);
    REQUIRE(std::abs(got.f1 - want.f1) <= 1e-12);
  }
}

TEST_CASE("rouge_l monotonicity and F1 bounds properties") {
  std::mt19937 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    auto x = random_tokens(rng, 20, 5);
    auto y = random_tokens(rng, 20, 5);
    auto base = eval::rouge_l(x, y);

    // Appending reference-matching tokens never decreases recall.
    if (!x.empty()) {
      auto y2 = y;
      y2.push_back(x.back());
      CHECK(eval::rouge_l(x, y2).recall >= base.recall);
    }
    // Appending junk never increases precision.
    auto y3 = y;
    y3.push_back("zzz_not_in_reference");
    CHECK(eval::rouge_l(x, y3).precision <= base.precision);

    // min(R,P) <= F <= max(R,P) whenever R+P > 0.
    if (base.recall + base.precision > 0) {
      CHECK(base.f1 >= std::min(base.recall, base.precision) - 1e-12);
      CHECK(base.f1 <= std::max(base.recall, base.precision) + 1e-12);
    }
  }
}

// ------------------------------------------------------------- judge_item

namespace {

model::GoldenItem golden_item(const std::string& url, const std::string& title,
                              const std::string& content) {
  return model::GoldenItem{url, title, content};
}

model::ItemRecord record(const std::string& url, const std::string& title,
                         const std::string& content) {
  model::ItemRecord r;
  r.url = url;
  r.values["title"] = title;
  r.values["content"] = content;
  return r;
}

std::string join(const std::vector<std::string>& tokens) {
  std::string out;
  for (const auto& t : tokens) {
    if (!out.empty()) out += ' ';
    out += t;
  }
  return out;
}

}  // namespace

TEST_CASE("judge_item: identical item is correct") {
  auto g = golden_item("http://h/a", "A Title", "some body text here");
  auto r = record("HTTP://h:80/a", "A Title", "some body text here");
  auto j = eval::judge_item(g, &r, Language::kEnglish);
  CHECK(j.url_match);
  CHECK(j.title_f1 == 1.0);
  CHECK(j.content_f1 == 1.0);
  CHECK(j.correct);
}

TEST_CASE("judge_item: threshold is inclusive at 0.8") {
  // Title tokens: reference 4 tokens fully inside a 6-token candidate
  // gives F1 == 0.8 exactly in double arithmetic (R=1, P=2/3).
  auto g = golden_item("http://h/a", "alpha beta gamma delta",
                       "common words everywhere");
  auto r = record("http://h/a", "alpha beta gamma delta pad pad2",
                  "common words everywhere");
  auto j = eval::judge_item(g, &r, Language::kEnglish);
  CHECK(j.title_f1 == 0.8);
  CHECK(j.correct);  // "at least 0.8" counts the boundary
}

TEST_CASE("judge_item: 0.799 fails, null fields score zero, url mismatch") {
  // R = P = 799/1000 -> F1 just below 0.8.
  std::vector<std::string> ref_tokens, cand_tokens;
  for (int i = 0; i < 1000; ++i) ref_tokens.push_back("w" + std::to_string(i));
  cand_tokens = ref_tokens;
  for (int i = 799; i < 1000; ++i) cand_tokens[i] = "sub" + std::to_string(i);
  auto g = golden_item("http://h/a", join(ref_tokens), "body text");
  auto r = record("http://h/a", join(cand_tokens), "body text");
  auto j = eval::judge_item(g, &r, Language::kEnglish);
  CHECK(j.title_f1 < 0.8);
  CHECK(j.title_f1 > 0.79);
  CHECK_FALSE(j.correct);

  // url match with one field below threshold: 0.85 / sub-0.8 combination.
  auto r2 = record("http://h/a", join(ref_tokens), "entirely different words");
  auto j2 = eval::judge_item(g, &r2, Language::kEnglish);
  CHECK(j2.url_match);
  CHECK(j2.title_f1 == 1.0);
  CHECK_FALSE(j2.correct);

  // null content scores 0.
  model::ItemRecord r3;
  r3.url = "http://h/a";
  r3.values["title"] = std::string("body");
  r3.values["content"] = std::nullopt;
  auto j3 = eval::judge_item(g, &r3, Language::kEnglish);
  CHECK(j3.content_f1 == 0.0);
  CHECK_FALSE(j3.correct);

  // absent record is simply incorrect.
  auto j4 = eval::judge_item(g, nullptr, Language::kEnglish);
  CHECK_FALSE(j4.url_match);
  CHECK_FALSE(j4.correct);
}

TEST_CASE("judge_item: appended ad sentence keeps content above 0.8") {
  // 50 reference tokens, candidate appends 22 junk tokens:
  // R=1, P=50/72, F ~= 0.8197 (verified against the oracle below).
  std::vector<std::string> ref_tokens, cand_tokens;
  for (int i = 0; i < 50; ++i) ref_tokens.push_back("w" + std::to_string(i));
  cand_tokens = ref_tokens;
  for (int i = 0; i < 22; ++i) cand_tokens.push_back("ad" + std::to_string(i));
  auto oracle = rouge_brute(ref_tokens, cand_tokens);
  REQUIRE(oracle.f1 >= 0.8);
  REQUIRE(oracle.f1 <= 0.83);

  auto g = golden_item("http://h/a", "title words", join(ref_tokens));
  auto r = record("http://h/a", "title words", join(cand_tokens));
  auto j = eval::judge_item(g, &r, Language::kEnglish);
  CHECK(j.content_f1 == doctest::Approx(oracle.f1).epsilon(1e-12));
  CHECK(j.correct);
}

TEST_CASE("judge_item: threshold monotonicity over randomized judgments") {
  std::mt19937 rng(99);
  std::vector<model::GoldenItem> goldens;
  std::vector<model::ItemRecord> records;
  for (int i = 0; i < 200; ++i) {
    auto ref = random_tokens(rng, 25, 4);
    if (ref.empty()) ref.push_back("x");
    auto cand = random_tokens(rng, 25, 4);
    goldens.push_back(golden_item("http://h/" + std::to_string(i), join(ref),
                                  join(ref)));
    records.push_back(record("http://h/" + std::to_string(i), join(cand),
                             join(cand)));
  }
  int prev_correct = -1;
  for (double tau : {0.0, 0.2, 0.4, 0.6, 0.8, 0.9, 1.0}) {
    int n = 0;
    for (size_t i = 0; i < goldens.size(); ++i)
      if (eval::judge_item(goldens[i], &records[i], Language::kEnglish, tau)
              .correct)
        ++n;
    if (prev_correct >= 0) CHECK(n <= prev_correct);
    prev_correct = n;
  }
}

// ------------------------------------------------------------- score_run

namespace {

model::GoldenSet make_golden(int n) {
  model::GoldenSet g;
  g.site_id = "site";
  g.language = model::Language::kEnglish;
  for (int i = 0; i < n; ++i)
    g.items.push_back({"http://h/item" + std::to_string(i),
                       "title " + std::to_string(i),
                       "content body number " + std::to_string(i)});
  return g;
}

model::Dataset dataset_from_golden(const model::GoldenSet& g) {
  model::Dataset d;
  d.fields = {"title", "content"};
  for (const auto& item : g.items)
    d.items.push_back(record(item.url, item.title, item.content));
  return d;
}

}  // namespace

TEST_CASE("score_run: perfect, empty, and fractional datasets") {
  auto g = make_golden(10);
  auto d = dataset_from_golden(g);
  auto full = eval::score_run(g, d, Language::kEnglish);
  CHECK(full.score.score == 1.0);
  CHECK(full.score.n_correct == 10);
  CHECK(full.score.over_extraction == 0);

  model::Dataset empty;
  empty.fields = {"title", "content"};
  CHECK(eval::score_run(g, empty, Language::kEnglish).score.score == 0.0);

  // 6 of 10 correct.
  auto partial = dataset_from_golden(g);
  for (int i = 6; i < 10; ++i)
    partial.items[i].values["content"] = std::string("wrong words entirely");
  auto s = eval::score_run(g, partial, Language::kEnglish);
  CHECK(s.score.score == doctest::Approx(0.6));
  CHECK(s.score.n_correct == 6);
}

TEST_CASE("score_run: over-extraction counted, never raises score") {
  auto g = make_golden(4);
  auto d = dataset_from_golden(g);
  d.items.push_back(record("http://h/extra1", "bonus", "stuff"));
  d.items.push_back(record("http://h/extra2", "bonus", "stuff"));
  auto s = eval::score_run(g, d, Language::kEnglish);
  CHECK(s.score.score == 1.0);
  CHECK(s.score.over_extraction == 2);
  CHECK(s.items.size() == 4);
}

TEST_CASE("score_run is permutation-invariant in dataset order") {
  auto g = make_golden(6);
  auto d = dataset_from_golden(g);
  auto reversed = d;
  std::reverse(reversed.items.begin(), reversed.items.end());
  auto a = eval::score_run(g, d, Language::kEnglish);
  auto b = eval::score_run(g, reversed, Language::kEnglish);
  CHECK(a.score.score == b.score.score);
  CHECK(a.score.n_correct == b.score.n_correct);
}

TEST_CASE("score_run rejects an empty golden set") {
  model::GoldenSet g;
  g.site_id = "empty";
  model::Dataset d;
  CHECK_THROWS_AS(eval::score_run(g, d, Language::kEnglish), ValidationError);
}

TEST_CASE("judgment report serializes site, score and per-item rows") {
  auto g = make_golden(2);
  auto d = dataset_from_golden(g);
  auto s = eval::score_run(g, d, Language::kEnglish, 0.8, 3);
  std::string text = eval::judgment_to_json_text(s);
  CHECK(text.find("\"site_id\": \"site\"") != std::string::npos);
  CHECK(text.find("\"run\": 3") != std::string::npos);
  CHECK(text.find("\"title_f1\"") != std::string::npos);
  CHECK(text.find("\"correct\": true") != std::string::npos);
}
