#include "webscraper/bench.hpp"

#include <filesystem>
#include <mutex>
#include <thread>

#include "json.hpp"

#include "webscraper/agent.hpp"
#include "webscraper/browser.hpp"
#include "webscraper/clock.hpp"
#include "webscraper/errors.hpp"
#include "webscraper/eval.hpp"
#include "webscraper/fixture.hpp"
#include "webscraper/sandbox.hpp"
#include "webscraper/toolbox.hpp"

namespace webscraper::bench {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

void BenchConfig::validate() const {
  if (sites.empty()) throw ValidationError("bench config: no sites");
  if (runs_per_site < 1)
    throw ValidationError("bench config: runs_per_site must be >= 1");
  if (jobs < 1) throw ValidationError("bench config: jobs must be >= 1");
  if (output_dir.empty())
    throw ValidationError("bench config: output_dir is empty");
  for (const auto& site : sites) {
    if (site.task_path.empty())
      throw ValidationError("bench config: site without a task file");
    if (site.golden_path.empty() && site.fixture_spec_path.empty())
      throw ValidationError(
          "bench config: site needs a golden file or a fixture spec");
    for (const std::string& p :
         {site.task_path, site.golden_path, site.fixture_spec_path,
          site.trace_path})
      if (!p.empty() && !fs::exists(p))
        throw ValidationError("bench config: missing file " + p);
  }
}

BenchConfig BenchConfig::from_json_text(const std::string& text) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object())
    throw ParseError("bench config: malformed JSON object");
  BenchConfig c;
  try {
    c.runs_per_site = j.value("runs_per_site", c.runs_per_site);
    if (j.contains("mode"))
      c.mode = model::mode_from_name(j["mode"].get<std::string>());
    c.output_dir = j.value("output_dir", c.output_dir);
    c.jobs = j.value("jobs", c.jobs);
    c.tau = j.value("tau", c.tau);
    c.politeness_delay_ms =
        j.value("politeness_delay_ms", c.politeness_delay_ms);
    c.provider_endpoint = j.value("provider_endpoint", c.provider_endpoint);
    for (const auto& sj : j.value("sites", json::array())) {
      BenchSite s;
      s.site_id = sj.value("site_id", "");
      s.task_path = sj.value("task", "");
      s.golden_path = sj.value("golden", "");
      s.fixture_spec_path = sj.value("fixture_spec", "");
      s.trace_path = sj.value("trace", "");
      c.sites.push_back(std::move(s));
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("bench config: ") + e.what());
  }
  return c;
}

namespace {

std::string derive_site_id(const BenchSite& site) {
  if (!site.site_id.empty()) return site.site_id;
  if (!site.fixture_spec_path.empty())
    return fixture::SiteSpec::from_json_text(
               model::read_file(site.fixture_spec_path))
        .site_id();
  return fs::path(site.task_path).stem().string();
}

SiteOutcome run_site(const BenchConfig& config, const BenchSite& site) {
  SiteOutcome outcome;
  outcome.site_id = derive_site_id(site);
  outcome.mode = model::mode_name(config.mode);

  model::ScrapeTask task =
      model::load_task(site.task_path);
  task.mode = config.mode;
  if (config.politeness_delay_ms >= 0)
    task.politeness_delay_ms = config.politeness_delay_ms;

  std::optional<fixture::GeneratedSite> generated;
  std::optional<fixture::FixtureServer> server;
  model::GoldenSet golden;
  if (!site.fixture_spec_path.empty()) {
    generated = fixture::generate_site(fixture::SiteSpec::from_json_text(
        model::read_file(site.fixture_spec_path)));
    server.emplace(*generated);
    server->start(0);
    task.target_url = server->base_url() + generated->index_path();
    golden = fixture::absolute_golden(*generated, server->base_url());
  } else {
    golden = model::load_golden(site.golden_path);
  }

  std::string mode_dir =
      config.output_dir + "/" + outcome.site_id + "/" + outcome.mode;

  for (int run = 1; run <= config.runs_per_site; ++run) {
    RunOutcome ro;
    ro.run = run;
    ro.artifacts_dir = mode_dir + "/run_" + std::to_string(run);
    fs::remove_all(ro.artifacts_dir);
    fs::create_directories(ro.artifacts_dir);
    try {
      provider::ScriptedTrace trace;
      if (!site.trace_path.empty())
        trace = provider::load_trace(site.trace_path);
      else if (generated)
        trace = fixture::build_demo_trace(*generated, server->base_url(), task);

      std::unique_ptr<provider::Provider> prov;
      std::unique_ptr<Clock> clock;
      if (!trace.turns.empty()) {
        prov = std::make_unique<provider::ScriptedProvider>(trace);
        clock = std::make_unique<SimClock>();
      } else {
        clock = std::make_unique<SystemClock>();
        prov = std::make_unique<provider::HttpProvider>(clock.get());
      }

      browser::FetchBrowser browser(*clock, task.politeness_delay_ms);
      sandbox::Sandbox sandbox(ro.artifacts_dir + "/workspace");
      parse::HeuristicBackend backend;
      tools::Toolbox toolbox(task, browser, sandbox, backend);

      agent::AgentConfig agent_config;
      agent_config.mode = task.mode;
      agent_config.max_iterations = task.max_iterations;
      agent_config.transcript_path = ro.artifacts_dir + "/transcript.jsonl";
      if (!config.provider_endpoint.empty())
        agent_config.provider.endpoint = config.provider_endpoint;

      agent::RunResult result =
          agent::run_task(task, *prov, toolbox, agent_config, *clock);
      model::write_dataset(result.dataset, ro.artifacts_dir + "/dataset.json");

      eval::RunJudgment judgment =
          eval::score_run(golden, result.dataset, golden.language, config.tau,
                          run);
      judgment.score.site_id = outcome.site_id;
      eval::write_judgment(judgment, ro.artifacts_dir + "/judgments.json");

      ro.score = judgment.score.score;
      ro.termination = agent::termination_name(result.transcript.termination);
    } catch (const Error& e) {
      ro.score = 0.0;
      ro.termination = std::string("error: ") + e.what();
    }
    outcome.runs.push_back(std::move(ro));
  }

  double sum = 0.0;
  for (const auto& r : outcome.runs) sum += r.score;
  outcome.mean_score = outcome.runs.empty() ? 0.0 : sum / outcome.runs.size();

  ordered_json scores = {{"site_id", outcome.site_id},
                         {"mode", outcome.mode},
                         {"scores", ordered_json::array()}};
  for (const auto& r : outcome.runs) scores["scores"].push_back(r.score);
  model::write_file(mode_dir + "/scores.json", scores.dump(2) + "\n");
  return outcome;
}

}  // namespace

std::string BenchReport::to_json_text() const {
  ordered_json j;
  j["sites"] = ordered_json::array();
  for (const auto& s : sites) {
    ordered_json sj = {{"site_id", s.site_id},
                       {"mode", s.mode},
                       {"mean_score", s.mean_score},
                       {"runs", ordered_json::array()}};
    for (const auto& r : s.runs)
      sj["runs"].push_back({{"run", r.run},
                            {"score", r.score},
                            {"termination", r.termination},
                            {"artifacts_dir", r.artifacts_dir}});
    j["sites"].push_back(std::move(sj));
  }
  return j.dump(2) + "\n";
}

std::map<std::string, std::vector<double>> BenchReport::score_map() const {
  std::map<std::string, std::vector<double>> out;
  for (const auto& s : sites)
    for (const auto& r : s.runs) out[s.site_id].push_back(r.score);
  return out;
}

BenchReport run_bench(const BenchConfig& config) {
  config.validate();
  fs::create_directories(config.output_dir);

  BenchReport report;
  report.sites.resize(config.sites.size());

  std::mutex mu;
  size_t next = 0;
  auto worker = [&] {
    for (;;) {
      size_t mine;
      {
        std::lock_guard<std::mutex> lock(mu);
        if (next >= config.sites.size()) return;
        mine = next++;
      }
      try {
        report.sites[mine] = run_site(config, config.sites[mine]);
      } catch (const std::exception& e) {
        SiteOutcome failed;
        failed.site_id = config.sites[mine].site_id.empty()
                             ? config.sites[mine].task_path
                             : config.sites[mine].site_id;
        failed.mode = model::mode_name(config.mode);
        for (int run = 1; run <= config.runs_per_site; ++run)
          failed.runs.push_back(
              {run, 0.0, std::string("error: ") + e.what(), ""});
        report.sites[mine] = std::move(failed);
      }
    }
  };

  int n_threads = std::min<int>(config.jobs,
                                static_cast<int>(config.sites.size()));
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  model::write_file(config.output_dir + "/summary.json",
                    report.to_json_text());
  return report;
}

}  // namespace webscraper::bench
