#include <cstdio>
#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "webscraper/agent.hpp"
#include "webscraper/bench.hpp"
#include "webscraper/browser.hpp"
#include "webscraper/clock.hpp"
#include "webscraper/errors.hpp"
#include "webscraper/eval.hpp"
#include "webscraper/fixture.hpp"
#include "webscraper/model.hpp"
#include "webscraper/parse.hpp"
#include "webscraper/provider.hpp"
#include "webscraper/sandbox.hpp"
#include "webscraper/stability.hpp"
#include "webscraper/toolbox.hpp"

namespace ws = webscraper;
namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

struct ScrapeOpts {
  std::string task_path;
  std::string mode;
  std::string fixture_spec;
  std::string scripted_trace;
  std::string provider_endpoint;
  std::string parse_backend = "heuristic";
  std::string webdriver;
  std::string out = "dataset.json";
  std::string transcript = "transcript.jsonl";
  std::string sandbox_root = "workspace";
  std::string assets_dir;
  int fixture_port = 0;
  int max_iterations = 0;
  int politeness_ms = -1;
  bool demo_trace = false;
  bool sim_clock = false;
  bool real_clock = false;
};

int cmd_scrape(const ScrapeOpts& o) {
  ws::model::ScrapeTask task = ws::model::load_task(o.task_path);
  if (!o.mode.empty()) task.mode = ws::model::mode_from_name(o.mode);
  if (o.max_iterations > 0) task.max_iterations = o.max_iterations;
  if (o.politeness_ms >= 0) task.politeness_delay_ms = o.politeness_ms;

  std::optional<ws::fixture::GeneratedSite> site;
  std::optional<ws::fixture::FixtureServer> server;
  if (!o.fixture_spec.empty()) {
    site = ws::fixture::generate_site(ws::fixture::SiteSpec::from_json_text(
        ws::model::read_file(o.fixture_spec)));
    server.emplace(*site);
    server->start(o.fixture_port);
    task.target_url = server->base_url() + site->index_path();
  }
  if (o.demo_trace && !site)
    throw ws::ValidationError("--demo-trace requires --fixture-spec");

  ws::provider::ScriptedTrace trace;
  bool scripted = false;
  if (!o.scripted_trace.empty()) {
    trace = ws::provider::load_trace(o.scripted_trace);
    scripted = true;
  } else if (o.demo_trace) {
    trace = ws::fixture::build_demo_trace(*site, server->base_url(), task);
    scripted = true;
  }

  std::unique_ptr<ws::Clock> clock;
  if (o.sim_clock || (scripted && !o.real_clock))
    clock = std::make_unique<ws::SimClock>();
  else
    clock = std::make_unique<ws::SystemClock>();

  std::unique_ptr<ws::provider::Provider> prov;
  if (scripted)
    prov = std::make_unique<ws::provider::ScriptedProvider>(trace);
  else
    prov = std::make_unique<ws::provider::HttpProvider>(clock.get());

  std::unique_ptr<ws::browser::Browser> browser;
  if (!o.webdriver.empty())
    browser = std::make_unique<ws::browser::WebDriverBrowser>(
        o.webdriver, *clock, task.politeness_delay_ms);
  else
    browser = std::make_unique<ws::browser::FetchBrowser>(
        *clock, task.politeness_delay_ms);

  ws::sandbox::Sandbox sandbox(o.sandbox_root);

  ws::provider::ProviderConfig provider_config;
  if (!o.provider_endpoint.empty())
    provider_config.endpoint = o.provider_endpoint;

  std::unique_ptr<ws::parse::ParseBackend> backend;
  if (o.parse_backend == "provider")
    backend = std::make_unique<ws::parse::ProviderParseBackend>(
        *prov, provider_config);
  else if (o.parse_backend == "heuristic")
    backend = std::make_unique<ws::parse::HeuristicBackend>();
  else
    throw ws::ValidationError("--parse-backend must be heuristic or provider");

  ws::tools::Toolbox toolbox(task, *browser, sandbox, *backend);

  ws::agent::AgentConfig config;
  config.mode = task.mode;
  config.max_iterations = task.max_iterations;
  config.transcript_path = o.transcript;
  config.assets_dir = o.assets_dir;
  config.provider = provider_config;

  ws::agent::RunResult result =
      ws::agent::run_task(task, *prov, toolbox, config, *clock);
  ws::model::write_dataset(result.dataset, o.out);

  std::string reason = ws::agent::termination_name(result.transcript.termination);
  std::cout << "termination=" << reason << " items=" << result.dataset.items.size()
            << " stage=" << result.stages.current_stage << " dataset=" << o.out
            << " transcript=" << o.transcript << "\n";

  switch (result.transcript.termination) {
    case ws::agent::Termination::kCompleted: return 0;
    case ws::agent::Termination::kProviderError: return 3;
    case ws::agent::Termination::kToolFatal: return 4;
    case ws::agent::Termination::kMaxIterations: return 5;
  }
  return 0;
}

struct EvalOpts {
  std::string golden_path;
  std::string dataset_path;
  std::string out;
  double tau = 0.8;
  int run = 0;
};

int cmd_eval(const EvalOpts& o) {
  ws::model::GoldenSet golden = ws::model::load_golden(o.golden_path);
  ws::model::Dataset dataset =
      ws::model::read_dataset(o.dataset_path, {"title", "content"});
  ws::eval::RunJudgment judgment =
      ws::eval::score_run(golden, dataset, golden.language, o.tau, o.run);
  judgment.score.site_id = golden.site_id;

  std::string text = ws::eval::judgment_to_json_text(judgment);
  std::cout << text;
  if (!o.out.empty()) ws::model::write_file(o.out, text);
  return 0;
}

struct BenchOpts {
  std::string config_path;
  std::string output_dir;
  std::string mode;
  int jobs = 0;
  int runs = 0;
  int politeness_ms = -2;
};

int cmd_bench(const BenchOpts& o) {
  ws::bench::BenchConfig config = ws::bench::BenchConfig::from_json_text(
      ws::model::read_file(o.config_path));
  if (!o.output_dir.empty()) config.output_dir = o.output_dir;
  if (!o.mode.empty()) config.mode = ws::model::mode_from_name(o.mode);
  if (o.jobs > 0) config.jobs = o.jobs;
  if (o.runs > 0) config.runs_per_site = o.runs;
  if (o.politeness_ms >= -1) config.politeness_delay_ms = o.politeness_ms;

  ws::bench::BenchReport report = ws::bench::run_bench(config);
  std::printf("%-32s %-12s %8s\n", "site", "mode", "mean");
  for (const auto& s : report.sites)
    std::printf("%-32s %-12s %8.4f\n", s.site_id.c_str(), s.mode.c_str(),
                s.mean_score);
  std::cout << "summary: " << config.output_dir << "/summary.json\n";
  return 0;
}

std::pair<std::string, std::vector<double>> load_scores_file(
    const std::string& path) {
  json j = json::parse(ws::model::read_file(path), nullptr, false);
  if (j.is_discarded())
    throw ws::ParseError("scores file " + path + ": malformed JSON");
  std::string id = fs::path(path).stem().string();
  std::vector<double> scores;
  if (j.is_array()) {
    for (const auto& v : j) scores.push_back(v.get<double>());
  } else if (j.is_object() && j.contains("scores")) {
    id = j.value("site_id", id);
    for (const auto& v : j["scores"]) scores.push_back(v.get<double>());
  } else {
    throw ws::ParseError("scores file " + path +
                         ": expected an array or {\"scores\": [...]}");
  }
  return {id, scores};
}

std::map<std::string, double> load_score_map(const std::string& path) {
  json j = json::parse(ws::model::read_file(path), nullptr, false);
  if (j.is_discarded())
    throw ws::ParseError("score map " + path + ": malformed JSON");
  std::map<std::string, double> out;
  if (j.is_object() && j.contains("sites") && j["sites"].is_array()) {
    for (const auto& s : j["sites"])
      out[s.at("site_id").get<std::string>()] =
          s.at("mean_score").get<double>();
    return out;
  }
  if (j.is_object()) {
    for (const auto& [key, value] : j.items())
      out[key] = value.get<double>();
    return out;
  }
  throw ws::ParseError("score map " + path + ": expected a JSON object");
}

int cmd_converge(const std::string& scores_path, int step,
                 const std::string& out) {
  auto [id, scores] = load_scores_file(scores_path);
  ws::stability::ConvergenceCurve curve =
      ws::stability::convergence_curve(scores, step, id);
  if (!out.empty()) ws::stability::emit_plot_data(curve, out);
  for (const auto& p : curve.points)
    std::printf("n=%d half_width=%.6f\n", p.n, p.half_width);
  return 0;
}

int cmd_cumavg(const std::string& scores_path, int interval,
               const std::string& out) {
  auto [id, scores] = load_scores_file(scores_path);
  auto points = ws::stability::cumulative_average(scores, interval);
  if (!out.empty()) ws::stability::emit_plot_data(points, out);
  for (const auto& [n, mean] : points)
    std::printf("n=%d cumulative_mean=%.6f\n", n, mean);
  return 0;
}

int cmd_temporal(const std::string& t0_path, const std::string& t7_path,
                 const std::string& out) {
  ws::stability::TemporalReport report = ws::stability::temporal_compare(
      load_score_map(t0_path), load_score_map(t7_path));
  if (!out.empty()) ws::stability::emit_plot_data(report, out);
  for (const auto& row : report.rows)
    std::printf("site=%s t=%.4f t7=%.4f delta=%.4f pass=%s\n",
                row.site.c_str(), row.score_t, row.score_t7, row.abs_delta,
                row.pass ? "true" : "false");
  std::printf("all_pass=%s\n", report.all_pass ? "true" : "false");
  return 0;
}

int cmd_fixture_generate(const std::string& spec_path,
                         const std::string& out_dir) {
  ws::fixture::GeneratedSite site = ws::fixture::generate_site(
      ws::fixture::SiteSpec::from_json_text(ws::model::read_file(spec_path)));
  fs::create_directories(out_dir);
  for (const auto& [path, html] : site.pages)
    ws::model::write_file(out_dir + path, html);
  ws::model::write_file(out_dir + "/golden.json",
                        ws::model::golden_to_json_text(site.golden));
  ws::model::write_file(out_dir + "/spec.json", site.spec.to_json_text());
  if (!site.extra_golden.empty()) {
    ordered_json extras;
    for (const auto& [url, fields] : site.extra_golden)
      for (const auto& [field, value] : fields) extras[url][field] = value;
    ws::model::write_file(out_dir + "/extra_golden.json",
                          extras.dump(2) + "\n");
  }
  std::cout << "generated " << site.pages.size() << " pages, "
            << site.golden.items.size() << " golden items in " << out_dir
            << "\n";
  return 0;
}

int cmd_fixture_serve(const std::string& spec_path, int port) {
  ws::fixture::GeneratedSite site = ws::fixture::generate_site(
      ws::fixture::SiteSpec::from_json_text(ws::model::read_file(spec_path)));
  ws::fixture::FixtureServer server(std::move(site));
  int bound = server.start(port);
  std::cout << "serving " << server.base_url() << " (golden at "
            << ws::fixture::kGoldenPath << ", port " << bound << ")\n";
  for (;;) std::this_thread::sleep_for(std::chrono::seconds(1));
}

int cmd_fixture_trace(const std::string& spec_path,
                      const std::string& task_path,
                      const std::string& base_url, const std::string& mode,
                      const std::string& out) {
  ws::fixture::GeneratedSite site = ws::fixture::generate_site(
      ws::fixture::SiteSpec::from_json_text(ws::model::read_file(spec_path)));
  ws::model::ScrapeTask task = ws::model::load_task(task_path);
  if (!mode.empty()) task.mode = ws::model::mode_from_name(mode);
  ws::provider::ScriptedTrace trace =
      ws::fixture::build_demo_trace(site, base_url, task);
  std::string text = trace.to_json_text();
  if (out.empty())
    std::cout << text;
  else
    ws::model::write_file(out, text);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tool-driven scraping agent: run, evaluate, benchmark"};
  app.require_subcommand(1);
  int rc = 0;

  ScrapeOpts so;
  CLI::App* scrape = app.add_subcommand(
      "scrape", "run one extraction task and write dataset + transcript");
  scrape->add_option("--task", so.task_path, "task JSON file")->required();
  scrape->add_option("--mode", so.mode,
                     "baseline | prompt_only | prompt_tool (overrides task)");
  scrape->add_option("--fixture-spec", so.fixture_spec,
                     "serve a generated fixture site and target it");
  scrape->add_option("--fixture-port", so.fixture_port,
                     "fixture port (0 = ephemeral)");
  scrape->add_flag("--demo-trace", so.demo_trace,
                   "drive the run with the fixture's scripted demo turns");
  scrape->add_option("--scripted-trace", so.scripted_trace,
                     "scripted assistant turns JSON file");
  scrape->add_option("--provider-endpoint", so.provider_endpoint,
                     "model provider completion URL");
  scrape->add_option("--parse-backend", so.parse_backend,
                     "heuristic | provider");
  scrape->add_option("--webdriver", so.webdriver,
                     "WebDriver endpoint (default: built-in fetch browser)");
  scrape->add_option("--out", so.out, "dataset output path");
  scrape->add_option("--transcript", so.transcript, "transcript output path");
  scrape->add_option("--sandbox-root", so.sandbox_root,
                     "agent workspace directory");
  scrape->add_option("--assets-dir", so.assets_dir, "prompt assets directory");
  scrape->add_option("--max-iterations", so.max_iterations,
                     "provider turn budget (overrides task)");
  scrape->add_option("--politeness-ms", so.politeness_ms,
                     "per-host request gap (overrides task)");
  scrape->add_flag("--sim-clock", so.sim_clock,
                   "simulated clock (default with scripted turns)");
  scrape->add_flag("--real-clock", so.real_clock,
                   "wall clock even with scripted turns");
  scrape->callback([&] { rc = cmd_scrape(so); });

  EvalOpts eo;
  CLI::App* eval_cmd =
      app.add_subcommand("eval", "judge a dataset against a golden set");
  eval_cmd->add_option("--golden", eo.golden_path, "golden set JSON file")
      ->required();
  eval_cmd->add_option("--dataset", eo.dataset_path, "dataset JSON file")
      ->required();
  eval_cmd->add_option("--tau", eo.tau, "correctness threshold (default 0.8)");
  eval_cmd->add_option("--run", eo.run, "run index recorded in the report");
  eval_cmd->add_option("--out", eo.out, "also write the report here");
  eval_cmd->callback([&] { rc = cmd_eval(eo); });

  BenchOpts bo;
  CLI::App* bench_cmd =
      app.add_subcommand("bench", "repeated runs over a site list");
  bench_cmd->add_option("--config", bo.config_path, "bench config JSON file")
      ->required();
  bench_cmd->add_option("--output-dir", bo.output_dir, "artifact directory");
  bench_cmd->add_option("--mode", bo.mode, "mode for every run");
  bench_cmd->add_option("--jobs", bo.jobs, "parallel sites");
  bench_cmd->add_option("--runs", bo.runs, "runs per site");
  bench_cmd->add_option("--politeness-ms", bo.politeness_ms,
                        "override politeness delay for every task");
  bench_cmd->callback([&] { rc = cmd_bench(bo); });

  CLI::App* stability_cmd =
      app.add_subcommand("stability", "convergence and temporal analyses");
  stability_cmd->require_subcommand(1);

  std::string conv_scores, conv_out;
  int conv_step = 5;
  CLI::App* converge = stability_cmd->add_subcommand(
      "converge", "CI half-width as runs accumulate");
  converge->add_option("--scores", conv_scores, "run scores JSON")->required();
  converge->add_option("--step", conv_step, "sample size step (default 5)");
  converge->add_option("--out", conv_out, "CSV output path");
  converge->callback([&] { rc = cmd_converge(conv_scores, conv_step, conv_out); });

  std::string cum_scores, cum_out;
  int cum_interval = 5;
  CLI::App* cumavg = stability_cmd->add_subcommand(
      "cumavg", "cumulative average score curve");
  cumavg->add_option("--scores", cum_scores, "run scores JSON")->required();
  cumavg->add_option("--interval", cum_interval, "sampling interval");
  cumavg->add_option("--out", cum_out, "CSV output path");
  cumavg->callback([&] { rc = cmd_cumavg(cum_scores, cum_interval, cum_out); });

  std::string t0_path, t7_path, temporal_out;
  CLI::App* temporal = stability_cmd->add_subcommand(
      "temporal", "compare two scoring sessions site by site");
  temporal->add_option("--t0", t0_path, "earlier site->score map JSON")
      ->required();
  temporal->add_option("--t7", t7_path, "later site->score map JSON")
      ->required();
  temporal->add_option("--out", temporal_out, "CSV output path");
  temporal->callback([&] { rc = cmd_temporal(t0_path, t7_path, temporal_out); });

  CLI::App* fixture_cmd =
      app.add_subcommand("fixture", "generate, serve, or trace fixture sites");
  fixture_cmd->require_subcommand(1);

  std::string gen_spec, gen_out;
  CLI::App* generate =
      fixture_cmd->add_subcommand("generate", "write site pages and golden");
  generate->add_option("--spec", gen_spec, "site spec JSON")->required();
  generate->add_option("--out", gen_out, "output directory")->required();
  generate->callback([&] { rc = cmd_fixture_generate(gen_spec, gen_out); });

  std::string serve_spec;
  int serve_port = 8801;
  CLI::App* serve = fixture_cmd->add_subcommand("serve", "serve a site");
  serve->add_option("--spec", serve_spec, "site spec JSON")->required();
  serve->add_option("--port", serve_port, "port (default 8801)");
  serve->callback([&] { rc = cmd_fixture_serve(serve_spec, serve_port); });

  std::string trace_spec, trace_task, trace_base, trace_mode, trace_out;
  CLI::App* trace_sub = fixture_cmd->add_subcommand(
      "trace", "emit the scripted demo turns for a site + task");
  trace_sub->add_option("--spec", trace_spec, "site spec JSON")->required();
  trace_sub->add_option("--task", trace_task, "task JSON file")->required();
  trace_sub->add_option("--base-url", trace_base, "base URL the turns target")
      ->required();
  trace_sub->add_option("--mode", trace_mode, "override the task's mode");
  trace_sub->add_option("--out", trace_out, "trace output path");
  trace_sub->callback([&] {
    rc = cmd_fixture_trace(trace_spec, trace_task, trace_base, trace_mode,
                           trace_out);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const ws::ProviderError& e) {
    std::cerr << "provider error: " << e.what() << "\n";
    return 3;
  } catch (const ws::ToolFatalError& e) {
    std::cerr << "fatal tool error: " << e.what() << "\n";
    return 4;
  } catch (const ws::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return rc;
}
