#pragma once

#include <optional>
#include <string>
#include <vector>

#include "webscraper/model.hpp"

namespace webscraper::eval {

using model::Language;

// Recall/precision/F1 over the longest common subsequence of two token
// sequences, with F1 defined as 0 when recall + precision is 0.
struct RougeScore {
  double recall = 0.0;
  double precision = 0.0;
  double f1 = 0.0;
  int lcs_len = 0;
};

// english: lowercase, split on non-alphanumeric runs (ASCII).
// chinese: one token per CJK codepoint, embedded ASCII alphanumeric runs
// kept whole and lowercased, everything else a separator.
std::vector<std::string> tokenize(const std::string& text, Language language);

// reference = golden text X, candidate = extracted text Y.
RougeScore rouge_l(const std::vector<std::string>& reference,
                   const std::vector<std::string>& candidate);

struct ItemJudgment {
  std::string url;  // golden URL
  bool url_match = false;
  double title_f1 = 0.0;
  double content_f1 = 0.0;
  bool correct = false;
};

// Binary correctness: normalized-URL exact match AND title and content both
// at or above tau (threshold inclusive). A missing item or null field
// scores 0.
ItemJudgment judge_item(const model::GoldenItem& golden,
                        const model::ItemRecord* extracted, Language language,
                        double tau = 0.8);

struct RunScore {
  std::string site_id;
  int run = 0;
  int n_golden = 0;
  int n_correct = 0;
  double score = 0.0;       // n_correct / n_golden
  int over_extraction = 0;  // extracted items matching no golden URL
};

struct RunJudgment {
  RunScore score;
  std::vector<ItemJudgment> items;  // one per golden item, golden order
};

// Matches golden items to dataset items by normalized URL and judges each.
// Extra extracted items never raise the score; they are counted as
// over-extraction. Throws ValidationError on an empty golden set.
RunJudgment score_run(const model::GoldenSet& golden,
                      const model::Dataset& dataset, Language language,
                      double tau = 0.8, int run_index = 0);

std::string judgment_to_json_text(const RunJudgment& judgment);
void write_judgment(const RunJudgment& judgment, const std::string& path);

}  // namespace webscraper::eval
