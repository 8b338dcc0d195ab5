#include "webscraper/eval.hpp"

#include <cstdint>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "webscraper/errors.hpp"
#include "webscraper/url.hpp"

namespace webscraper::eval {

namespace {

bool ascii_alnum(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
         (c >= '0' && c <= '9');
}

char ascii_lower(char c) { return c >= 'A' && c <= 'Z' ? c - 'A' + 'a' : c; }

bool is_cjk(std::uint32_t cp) {
  return (cp >= 0x4E00 && cp <= 0x9FFF) ||    // unified ideographs
         (cp >= 0x3400 && cp <= 0x4DBF) ||    // extension A
         (cp >= 0xF900 && cp <= 0xFAFF) ||    // compatibility ideographs
         (cp >= 0x20000 && cp <= 0x2FA1F);    // extensions B..F
}

// Minimal UTF-8 decoder; malformed bytes come back as U+FFFD with width 1.
std::uint32_t decode_utf8(const std::string& s, size_t i, size_t* width) {
  unsigned char c = s[i];
  if (c < 0x80) {
    *width = 1;
    return c;
  }
  int extra;
  std::uint32_t cp;
  if ((c & 0xE0) == 0xC0) {
    extra = 1;
    cp = c & 0x1F;
  } else if ((c & 0xF0) == 0xE0) {
    extra = 2;
    cp = c & 0x0F;
  } else if ((c & 0xF8) == 0xF0) {
    extra = 3;
    cp = c & 0x07;
  } else {
    *width = 1;
    return 0xFFFD;
  }
  if (i + extra >= s.size()) {
    *width = 1;
    return 0xFFFD;
  }
  for (int k = 1; k <= extra; ++k) {
    unsigned char cc = s[i + k];
    if ((cc & 0xC0) != 0x80) {
      *width = 1;
      return 0xFFFD;
    }
    cp = (cp << 6) | (cc & 0x3F);
  }
  *width = extra + 1;
  return cp;
}

void encode_utf8(std::uint32_t cp, std::string* out) {
  if (cp <= 0x7F) {
    out->push_back(static_cast<char>(cp));
  } else if (cp <= 0x7FF) {
    out->push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out->push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp <= 0xFFFF) {
    out->push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out->push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out->push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out->push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out->push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out->push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out->push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

std::vector<std::string> tokenize_english(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : text) {
    if (ascii_alnum(c)) {
      cur.push_back(ascii_lower(c));
    } else if (!cur.empty()) {
      out.push_back(cur);
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

std::vector<std::string> tokenize_chinese(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;  // pending ASCII alnum run
  size_t i = 0;
  while (i < text.size()) {
    size_t width = 1;
    std::uint32_t cp = decode_utf8(text, i, &width);
    if (cp < 0x80 && ascii_alnum(static_cast<char>(cp))) {
      cur.push_back(ascii_lower(static_cast<char>(cp)));
    } else {
      if (!cur.empty()) {
        out.push_back(cur);
        cur.clear();
      }
      if (is_cjk(cp)) {
        std::string tok;
        encode_utf8(cp, &tok);
        out.push_back(tok);
      }
      // anything else separates tokens
    }
    i += width;
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

}  // namespace

std::vector<std::string> tokenize(const std::string& text, Language language) {
  return language == Language::kEnglish ? tokenize_english(text)
                                        : tokenize_chinese(text);
}

RougeScore rouge_l(const std::vector<std::string>& reference,
                   const std::vector<std::string>& candidate) {
  RougeScore score;
  if (reference.empty() || candidate.empty()) return score;

  // Intern tokens so the DP compares ints.
  std::unordered_map<std::string, int> intern;
  auto id_of = [&](const std::string& t) {
    auto [it, inserted] = intern.emplace(t, static_cast<int>(intern.size()));
    return it->second;
  };
  std::vector<int> x(reference.size()), y(candidate.size());
  for (size_t i = 0; i < reference.size(); ++i) x[i] = id_of(reference[i]);
  for (size_t j = 0; j < candidate.size(); ++j) y[j] = id_of(candidate[j]);

  // Two-row DP over the shorter sequence for the inner dimension.
  const std::vector<int>& outer = x.size() >= y.size() ? x : y;
  const std::vector<int>& inner = x.size() >= y.size() ? y : x;
  std::vector<int> prev(inner.size() + 1, 0), cur(inner.size() + 1, 0);
  for (size_t i = 1; i <= outer.size(); ++i) {
    for (size_t j = 1; j <= inner.size(); ++j) {
      if (outer[i - 1] == inner[j - 1])
        cur[j] = prev[j - 1] + 1;
      else
        cur[j] = cur[j - 1] > prev[j] ? cur[j - 1] : prev[j];
    }
    std::swap(prev, cur);
  }
  score.lcs_len = prev[inner.size()];
  score.recall = static_cast<double>(score.lcs_len) / reference.size();
  score.precision = static_cast<double>(score.lcs_len) / candidate.size();
  if (score.recall + score.precision > 0)
    score.f1 = 2.0 * score.recall * score.precision /
               (score.recall + score.precision);
  return score;
}

ItemJudgment judge_item(const model::GoldenItem& golden,
                        const model::ItemRecord* extracted, Language language,
                        double tau) {
  ItemJudgment j;
  j.url = golden.url;
  if (extracted == nullptr) return j;
  j.url_match = url::normalize(golden.url) == url::normalize(extracted->url);

  auto field_f1 = [&](const std::string& key, const std::string& reference) {
    auto it = extracted->values.find(key);
    if (it == extracted->values.end() || !it->second.has_value()) return 0.0;
    return rouge_l(tokenize(reference, language), tokenize(*it->second, language))
        .f1;
  };
  j.title_f1 = field_f1("title", golden.title);
  j.content_f1 = field_f1("content", golden.content);
  j.correct = j.url_match && j.title_f1 >= tau && j.content_f1 >= tau;
  return j;
}

RunJudgment score_run(const model::GoldenSet& golden,
                      const model::Dataset& dataset, Language language,
                      double tau, int run_index) {
  if (golden.items.empty())
    throw ValidationError("score_run: golden set is empty");

  std::unordered_map<std::string, const model::ItemRecord*> by_url;
  for (const auto& item : dataset.items) {
    // First-seen wins; dataset invariants make collisions impossible anyway.
    by_url.emplace(url::normalize(item.url), &item);
  }

  RunJudgment out;
  out.score.site_id = golden.site_id;
  out.score.run = run_index;
  out.score.n_golden = static_cast<int>(golden.items.size());
  for (const auto& g : golden.items) {
    auto it = by_url.find(url::normalize(g.url));
    const model::ItemRecord* extracted =
        it == by_url.end() ? nullptr : it->second;
    ItemJudgment j = judge_item(g, extracted, language, tau);
    if (j.correct) ++out.score.n_correct;
    out.items.push_back(std::move(j));
  }
  out.score.score =
      static_cast<double>(out.score.n_correct) / out.score.n_golden;

  std::unordered_map<std::string, bool> golden_urls;
  for (const auto& g : golden.items) golden_urls[url::normalize(g.url)] = true;
  for (const auto& item : dataset.items)
    if (!golden_urls.count(url::normalize(item.url))) ++out.score.over_extraction;
  return out;
}

std::string judgment_to_json_text(const RunJudgment& judgment) {
  nlohmann::ordered_json j;
  j["site_id"] = judgment.score.site_id;
  j["run"] = judgment.score.run;
  j["score"] = judgment.score.score;
  j["n_golden"] = judgment.score.n_golden;
  j["n_correct"] = judgment.score.n_correct;
  j["over_extraction"] = judgment.score.over_extraction;
  nlohmann::ordered_json items = nlohmann::ordered_json::array();
  for (const auto& item : judgment.items) {
    nlohmann::ordered_json o;
    o["url"] = item.url;
    o["url_match"] = item.url_match;
    o["title_f1"] = item.title_f1;
    o["content_f1"] = item.content_f1;
    o["correct"] = item.correct;
    items.push_back(std::move(o));
  }
  j["items"] = std::move(items);
  return j.dump(2) + "\n";
}

void write_judgment(const RunJudgment& judgment, const std::string& path) {
  model::write_file(path, judgment_to_json_text(judgment));
}

}  // namespace webscraper::eval
