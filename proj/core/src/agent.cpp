#include "webscraper/agent.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "webscraper/errors.hpp"
#include "webscraper/prompts.hpp"

namespace webscraper::agent {

using nlohmann::ordered_json;
using provider::BlockKind;
using provider::ContentBlock;
using provider::Message;
using provider::Role;

void AgentConfig::validate() const {
  if (max_iterations < 1)
    throw ValidationError("agent config: max_iterations must be >= 1");
  provider.validate();
}

std::string termination_name(Termination t) {
  switch (t) {
    case Termination::kCompleted: return "completed";
    case Termination::kMaxIterations: return "max_iterations";
    case Termination::kProviderError: return "provider_error";
    case Termination::kToolFatal: return "tool_fatal";
  }
  return "completed";
}

void StageState::advance_to(int stage) {
  current_stage = std::max(current_stage, stage);
}

ordered_json TranscriptEvent::to_json() const {
  ordered_json j;
  j["t"] = at_ms;
  j["event"] = kind;
  for (const auto& [key, value] : payload.items()) j[key] = value;
  return j;
}

std::string Transcript::to_jsonl() const {
  std::string out;
  for (const auto& e : events) {
    out += e.to_json().dump();
    out += '\n';
  }
  return out;
}

int Transcript::assistant_turns() const {
  int n = 0;
  for (const auto& e : events)
    if (e.kind == "assistant") ++n;
  return n;
}

bool Transcript::tool_calls_balanced() const {
  std::multiset<std::string> pending;
  for (const auto& e : events) {
    if (e.kind == "assistant") {
      if (!pending.empty()) return false;
      for (const auto& block : e.payload.at("message").at("content"))
        if (block.at("type") == "tool_use")
          pending.insert(block.at("id").get<std::string>());
    } else if (e.kind == "tool") {
      for (const auto& block : e.payload.at("message").at("content")) {
        if (block.at("type") != "tool_result") return false;
        auto it = pending.find(block.at("tool_use_id").get<std::string>());
        if (it == pending.end()) return false;
        pending.erase(it);
      }
      if (!pending.empty()) return false;
    }
  }
  return pending.empty();
}

namespace {

void add_event(Transcript* transcript, Clock& clock, const std::string& kind,
               ordered_json payload) {
  transcript->events.push_back(
      {clock.now_ms(), kind, std::move(payload)});
}

void track_stages(const model::ScrapeTask& task, const tools::Toolbox& toolbox,
                  const ContentBlock& use, bool ok, size_t batches_before,
                  StageState* stages) {
  if (!ok) return;
  if (use.tool_name == "parse_tool") {
    std::string kind = use.arguments.value("page_kind", "");
    if (kind == "index") {
      if (toolbox.collected().size() > batches_before) {
        const auto& batch = toolbox.collected().back();
        stages->index_records.insert(stages->index_records.end(),
                                     batch.begin(), batch.end());
      }
      stages->pages_done =
          std::min(stages->pages_done + 1, std::max(task.page_scope, 1));
      stages->advance_to(stages->pages_done > 1 ? 3 : 2);
    } else if (kind == "content") {
      stages->ruleset = toolbox.last_ruleset();
      stages->advance_to(4);
    }
  } else if (use.tool_name == "apply_ruleset") {
    if (toolbox.last_ruleset()) stages->ruleset = toolbox.last_ruleset();
    stages->advance_to(4);
  } else if (use.tool_name == "merge_tool") {
    stages->advance_to(5);
  }
}

}  // namespace

bool step(const model::ScrapeTask& task, provider::Provider& provider,
          tools::Toolbox& toolbox, const AgentConfig& config,
          const std::string& system_prompt,
          std::vector<Message>* conversation, StageState* stages,
          Transcript* transcript, Clock& clock) {
  Message reply = provider.complete(system_prompt, *conversation,
                                    toolbox.schemas(), config.provider);
  conversation->push_back(reply);
  add_event(transcript, clock, "assistant",
            {{"message", provider::encode_message(reply)}});

  std::vector<const ContentBlock*> uses;
  for (const auto& block : reply.blocks)
    if (block.kind == BlockKind::kToolUse) uses.push_back(&block);
  if (uses.empty()) return true;

  Message tool_msg;
  tool_msg.role = Role::kTool;
  std::optional<ToolFatalError> fatal;
  for (const ContentBlock* use : uses) {
    if (fatal) {
      tool_msg.blocks.push_back(ContentBlock::make_tool_result(
          use->call_id, "not executed: browser session lost", true));
      continue;
    }
    size_t batches_before = toolbox.collected().size();
    try {
      tools::ToolResult r = toolbox.dispatch(use->tool_name, use->arguments);
      tool_msg.blocks.push_back(ContentBlock::make_tool_result(
          use->call_id, r.content, r.is_error));
      track_stages(task, toolbox, *use, !r.is_error, batches_before, stages);
    } catch (const ToolFatalError& e) {
      fatal = e;
      tool_msg.blocks.push_back(
          ContentBlock::make_tool_result(use->call_id, e.what(), true));
    }
  }
  conversation->push_back(tool_msg);
  add_event(transcript, clock, "tool",
            {{"message", provider::encode_message(tool_msg)}});
  if (fatal) throw *fatal;
  return false;
}

RunResult run_task(const model::ScrapeTask& task,
                   provider::Provider& provider, tools::Toolbox& toolbox,
                   const AgentConfig& config, Clock& clock) {
  task.validate();
  config.validate();

  std::string system_prompt =
      prompts::assemble_system_prompt(config.mode, config.assets_dir);
  std::string user_prompt = model::assemble_user_prompt(task);

  RunResult result;
  add_event(&result.transcript, clock, "start",
            {{"mode", model::mode_name(config.mode)},
             {"max_iterations", config.max_iterations},
             {"user_prompt", user_prompt}});

  std::vector<Message> conversation;
  Message ask;
  ask.role = Role::kUser;
  ask.blocks.push_back(ContentBlock::make_text(user_prompt));
  conversation.push_back(ask);

  Termination termination = Termination::kMaxIterations;
  for (int turn = 0; turn < config.max_iterations; ++turn) {
    bool completed = false;
    try {
      completed = step(task, provider, toolbox, config, system_prompt,
                       &conversation, &result.stages, &result.transcript,
                       clock);
    } catch (const ProviderError&) {
      termination = Termination::kProviderError;
      break;
    } catch (const ToolFatalError&) {
      termination = Termination::kToolFatal;
      break;
    }
    if (completed) {
      termination = Termination::kCompleted;
      break;
    }
  }

  result.dataset = toolbox.final_dataset();
  result.dataset.task_id = task.target_url;
  result.dataset.created_at = format_iso8601_ms(clock.now_ms());
  if (termination == Termination::kCompleted && !result.dataset.items.empty())
    result.stages.advance_to(5);

  result.transcript.termination = termination;
  add_event(&result.transcript, clock, "end",
            {{"termination", termination_name(termination)},
             {"items", result.dataset.items.size()},
             {"stage", result.stages.current_stage}});

  if (!config.transcript_path.empty())
    model::write_file(config.transcript_path, result.transcript.to_jsonl());
  return result;
}

}  // namespace webscraper::agent
