#pragma once

#include <map>
#include <string>
#include <vector>

#include "webscraper/model.hpp"

namespace webscraper::bench {

// One benchmarked site: either a live golden file, or a fixture spec from
// which the site, its golden set, and (absent a trace file) a scripted
// demo run are generated on a fresh local server.
struct BenchSite {
  std::string site_id;           // derived when empty
  std::string task_path;         // required
  std::string golden_path;       // required unless fixture_spec_path set
  std::string fixture_spec_path;
  std::string trace_path;        // scripted turns; empty + fixture = demo
};

struct BenchConfig {
  std::vector<BenchSite> sites;
  int runs_per_site = 30;
  model::Mode mode = model::Mode::kPromptTool;
  std::string output_dir = "bench_out";
  int jobs = 1;
  double tau = 0.8;
  // Overrides every task's politeness delay when >= 0 (tests use small
  // values to keep simulated timelines readable).
  int politeness_delay_ms = -1;
  std::string provider_endpoint;  // live runs without a trace

  void validate() const;
  static BenchConfig from_json_text(const std::string& text);
};

struct RunOutcome {
  int run = 0;
  double score = 0.0;
  std::string termination;
  std::string artifacts_dir;
};

struct SiteOutcome {
  std::string site_id;
  std::string mode;
  double mean_score = 0.0;
  std::vector<RunOutcome> runs;
};

// Artifacts land under output_dir/<site>/<mode>/run_<n>/ (dataset.json,
// transcript.jsonl, judgments.json, workspace/); per-site score arrays at
// <site>/<mode>/scores.json and the aggregate at summary.json.
struct BenchReport {
  std::vector<SiteOutcome> sites;

  std::string to_json_text() const;
  // site_id -> run scores, the shape the stability analyses consume.
  std::map<std::string, std::vector<double>> score_map() const;
};

// Runs every site runs_per_site times. Each run gets a fresh browser,
// sandbox, and clock; nothing leaks between runs. Distinct sites may run
// in parallel up to config.jobs; runs of one site stay sequential. A
// failing run is recorded with score 0 and the batch continues.
BenchReport run_bench(const BenchConfig& config);

}  // namespace webscraper::bench
