#pragma once

#include <string>
#include <vector>

#include "json.hpp"

#include "webscraper/clock.hpp"

namespace webscraper::provider {

enum class Role { kUser, kAssistant, kTool };

enum class BlockKind { kText, kImage, kToolUse, kToolResult };

std::string role_name(Role role);
Role role_from_name(const std::string& name);

struct ContentBlock {
  BlockKind kind = BlockKind::kText;
  std::string text;  // text payload, or tool_result output

  // image
  std::string media_type;
  std::string image_data;  // raw bytes, base64 only on the wire

  // tool_use / tool_result
  std::string call_id;
  std::string tool_name;
  nlohmann::json arguments;  // tool_use input object
  bool is_error = false;

  static ContentBlock make_text(std::string text);
  static ContentBlock make_image(std::string media_type, std::string bytes);
  static ContentBlock make_tool_use(std::string call_id, std::string tool_name,
                                    nlohmann::json arguments);
  static ContentBlock make_tool_result(std::string call_id, std::string output,
                                       bool is_error = false);

  bool operator==(const ContentBlock& other) const;
};

struct Message {
  Role role = Role::kUser;
  std::vector<ContentBlock> blocks;

  bool operator==(const Message& other) const {
    return role == other.role && blocks == other.blocks;
  }
};

// Declared tool parameter. type is one of string, integer, boolean,
// object; "object" admits any structured JSON value.
struct ToolParam {
  std::string name;
  std::string type;
  std::string description;
  bool required = true;
};

struct ToolSchema {
  std::string name;
  std::string description;
  std::vector<ToolParam> params;
};

struct ProviderConfig {
  std::string endpoint = "http://localhost:8899/v1/complete";
  std::string model = "agent-model";
  double temperature = 0.0;
  int max_tokens = 4096;
  int timeout_ms = 30000;

  void validate() const;  // temperature >= 0, max_tokens/timeout positive
};

// Name of the environment variable holding the API key, sent as the
// x-api-key header when present.
inline constexpr const char* kApiKeyEnvVar = "WEBSCRAPER_API_KEY";

struct ScriptedTrace {
  // turns[i] is the assistant reply served at turn index i.
  std::vector<std::vector<ContentBlock>> turns;

  // Non-empty, every turn non-empty, final turn free of tool_use.
  void validate() const;

  static ScriptedTrace from_json_text(const std::string& text);
  std::string to_json_text() const;
};

ScriptedTrace load_trace(const std::string& path);

// Throws ValidationError unless the history is a legal alternation:
// starts with user, tool messages hold only tool_result blocks answering
// exactly the preceding assistant's tool_use ids, and the final message
// leaves the floor to the assistant.
void validate_conversation(const std::vector<Message>& conversation);

// Checks tool_use blocks against declared schemas. Unknown tool names
// pass through untouched (the toolbox turns them into error results).
// Violations for declared tools throw ProviderError(kSchema).
void validate_tool_uses(const Message& message,
                        const std::vector<ToolSchema>& tools);

// --- wire codec ---

nlohmann::ordered_json encode_message(const Message& message);
Message decode_message(const nlohmann::json& body);

nlohmann::ordered_json encode_request(const std::string& system_prompt,
                                      const std::vector<Message>& conversation,
                                      const std::vector<ToolSchema>& tools,
                                      const ProviderConfig& config);

// Parses one assistant reply body. Unknown block kinds raise
// ProviderError(kSchema) with the raw text preserved.
Message decode_response(const std::string& body_text);

std::string base64_encode(const std::string& bytes);
std::string base64_decode(const std::string& text);

// --- providers ---

class Provider {
 public:
  virtual ~Provider() = default;
  virtual Message complete(const std::string& system_prompt,
                           const std::vector<Message>& conversation,
                           const std::vector<ToolSchema>& tools,
                           const ProviderConfig& config) = 0;
};

// Replays canned assistant turns. The turn index is the number of
// assistant messages already in the conversation, so replies are a pure
// function of the inputs.
class ScriptedProvider : public Provider {
 public:
  explicit ScriptedProvider(ScriptedTrace trace);

  Message complete(const std::string& system_prompt,
                   const std::vector<Message>& conversation,
                   const std::vector<ToolSchema>& tools,
                   const ProviderConfig& config) override;

 private:
  ScriptedTrace trace_;
};

// Blocking HTTP client for the JSON wire format above. Retries transport
// failures (connect errors, 5xx) at most 3 times with 1s/2s/4s backoff;
// timeouts and schema errors are surfaced immediately.
class HttpProvider : public Provider {
 public:
  explicit HttpProvider(Clock* clock = nullptr);  // non-owning, may be null

  Message complete(const std::string& system_prompt,
                   const std::vector<Message>& conversation,
                   const std::vector<ToolSchema>& tools,
                   const ProviderConfig& config) override;

 private:
  Clock* clock_;
  SystemClock fallback_clock_;
};

}  // namespace webscraper::provider
