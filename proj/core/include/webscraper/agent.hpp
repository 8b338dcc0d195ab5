#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "webscraper/clock.hpp"
#include "webscraper/model.hpp"
#include "webscraper/parse.hpp"
#include "webscraper/provider.hpp"
#include "webscraper/toolbox.hpp"

namespace webscraper::agent {

struct AgentConfig {
  model::Mode mode = model::Mode::kPromptTool;
  int max_iterations = 50;
  std::string transcript_path;  // empty: keep the transcript in memory only
  std::string assets_dir;       // prompt asset override, empty for default
  provider::ProviderConfig provider;

  void validate() const;  // max_iterations >= 1
};

enum class Termination { kCompleted, kMaxIterations, kProviderError, kToolFatal };

std::string termination_name(Termination t);

// Coarse progress tracker fed by observed tool traffic; audit plumbing,
// not control flow. Stages: 1 locate, 2 index, 3 paginate, 4 detail
// rules, 5 merge/emit.
struct StageState {
  int current_stage = 1;
  std::vector<model::ItemRecord> index_records;
  int pages_done = 0;
  std::optional<parse::RuleSet> ruleset;

  void advance_to(int stage);  // never moves backwards
};

struct TranscriptEvent {
  std::int64_t at_ms = 0;
  std::string kind;  // start | assistant | tool | end
  nlohmann::ordered_json payload;

  nlohmann::ordered_json to_json() const;
};

// Full record of one run: every message with wall-clock, the termination
// reason, and the dataset the run ended with. Serializes to JSON lines,
// one event per line; byte-identical across runs under a simulated clock
// and a scripted provider.
struct Transcript {
  std::vector<TranscriptEvent> events;
  Termination termination = Termination::kCompleted;

  std::string to_jsonl() const;

  int assistant_turns() const;
  // Sanity checks used by tests: every tool_use answered exactly once.
  bool tool_calls_balanced() const;
};

struct RunResult {
  model::Dataset dataset;
  Transcript transcript;
  StageState stages;
};

// One Observe-Reason-Act turn: a single provider completion, every
// tool_use in the reply dispatched in order, and their results appended
// as one tool message. Returns true when the assistant stopped calling
// tools (the run is complete).
bool step(const model::ScrapeTask& task, provider::Provider& provider,
          tools::Toolbox& toolbox, const AgentConfig& config,
          const std::string& system_prompt,
          std::vector<provider::Message>* conversation, StageState* stages,
          Transcript* transcript, Clock& clock);

// Runs the loop for at most config.max_iterations turns. Provider errors
// and fatal tool errors terminate the run with whatever dataset the
// toolbox has accumulated.
RunResult run_task(const model::ScrapeTask& task,
                   provider::Provider& provider, tools::Toolbox& toolbox,
                   const AgentConfig& config, Clock& clock);

}  // namespace webscraper::agent
