#include "webscraper/provider.hpp"

#include <array>
#include <cstdlib>
#include <set>
#include <string>

#include "httplib.h"

#include "webscraper/errors.hpp"
#include "webscraper/model.hpp"
#include "webscraper/url.hpp"

namespace webscraper::provider {

using nlohmann::json;
using nlohmann::ordered_json;

std::string role_name(Role role) {
  switch (role) {
    case Role::kUser: return "user";
    case Role::kAssistant: return "assistant";
    case Role::kTool: return "tool";
  }
  return "user";
}

Role role_from_name(const std::string& name) {
  if (name == "user") return Role::kUser;
  if (name == "assistant") return Role::kAssistant;
  if (name == "tool") return Role::kTool;
  throw ValidationError("unknown message role '" + name + "'");
}

ContentBlock ContentBlock::make_text(std::string text) {
  ContentBlock b;
  b.kind = BlockKind::kText;
  b.text = std::move(text);
  return b;
}

ContentBlock ContentBlock::make_image(std::string media_type,
                                      std::string bytes) {
  ContentBlock b;
  b.kind = BlockKind::kImage;
  b.media_type = std::move(media_type);
  b.image_data = std::move(bytes);
  return b;
}

ContentBlock ContentBlock::make_tool_use(std::string call_id,
                                         std::string tool_name,
                                         json arguments) {
  ContentBlock b;
  b.kind = BlockKind::kToolUse;
  b.call_id = std::move(call_id);
  b.tool_name = std::move(tool_name);
  b.arguments = std::move(arguments);
  return b;
}

ContentBlock ContentBlock::make_tool_result(std::string call_id,
                                            std::string output,
                                            bool is_error) {
  ContentBlock b;
  b.kind = BlockKind::kToolResult;
  b.call_id = std::move(call_id);
  b.text = std::move(output);
  b.is_error = is_error;
  return b;
}

bool ContentBlock::operator==(const ContentBlock& other) const {
  return kind == other.kind && text == other.text &&
         media_type == other.media_type && image_data == other.image_data &&
         call_id == other.call_id && tool_name == other.tool_name &&
         arguments == other.arguments && is_error == other.is_error;
}

void ProviderConfig::validate() const {
  if (temperature < 0.0)
    throw ValidationError("temperature must be >= 0");
  if (max_tokens <= 0) throw ValidationError("max_tokens must be positive");
  if (timeout_ms <= 0) throw ValidationError("timeout_ms must be positive");
}

// --- base64 ---

namespace {

constexpr char kB64Alphabet[] =
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

}  // namespace

std::string base64_encode(const std::string& bytes) {
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  size_t i = 0;
  while (i + 3 <= bytes.size()) {
    unsigned v = (static_cast<unsigned char>(bytes[i]) << 16) |
                 (static_cast<unsigned char>(bytes[i + 1]) << 8) |
                 static_cast<unsigned char>(bytes[i + 2]);
    out += kB64Alphabet[(v >> 18) & 63];
    out += kB64Alphabet[(v >> 12) & 63];
    out += kB64Alphabet[(v >> 6) & 63];
    out += kB64Alphabet[v & 63];
    i += 3;
  }
  size_t rest = bytes.size() - i;
  if (rest == 1) {
    unsigned v = static_cast<unsigned char>(bytes[i]) << 16;
    out += kB64Alphabet[(v >> 18) & 63];
    out += kB64Alphabet[(v >> 12) & 63];
    out += "==";
  } else if (rest == 2) {
    unsigned v = (static_cast<unsigned char>(bytes[i]) << 16) |
                 (static_cast<unsigned char>(bytes[i + 1]) << 8);
    out += kB64Alphabet[(v >> 18) & 63];
    out += kB64Alphabet[(v >> 12) & 63];
    out += kB64Alphabet[(v >> 6) & 63];
    out += '=';
  }
  return out;
}

std::string base64_decode(const std::string& text) {
  static const auto value_of = [] {
    std::array<int, 256> t{};
    t.fill(-1);
    for (int i = 0; i < 64; ++i)
      t[static_cast<unsigned char>(kB64Alphabet[i])] = i;
    return t;
  }();

  std::string out;
  unsigned buffer = 0;
  int bits = 0;
  for (char c : text) {
    if (c == '=' || c == '\n' || c == '\r') continue;
    int v = value_of[static_cast<unsigned char>(c)];
    if (v < 0) throw ValidationError("invalid base64 character");
    buffer = (buffer << 6) | static_cast<unsigned>(v);
    bits += 6;
    if (bits >= 8) {
      bits -= 8;
      out += static_cast<char>((buffer >> bits) & 0xFF);
    }
  }
  return out;
}

// --- conversation legality ---

void validate_conversation(const std::vector<Message>& conversation) {
  if (conversation.empty())
    throw ValidationError("conversation is empty; the first turn must come "
                          "from the user");

  std::set<std::string> pending;  // tool_use ids awaiting results
  for (size_t i = 0; i < conversation.size(); ++i) {
    const Message& m = conversation[i];
    const std::string at = "message " + std::to_string(i);
    if (m.blocks.empty())
      throw ValidationError(at + " has no content blocks");

    switch (m.role) {
      case Role::kUser: {
        if (i == 0) break;
        if (conversation[i - 1].role != Role::kAssistant || !pending.empty())
          throw ValidationError(at + ": a user turn may only follow a "
                                     "completed assistant turn");
        break;
      }
      case Role::kAssistant: {
        if (i == 0)
          throw ValidationError("conversation must start with a user turn");
        if (!pending.empty())
          throw ValidationError(at + ": assistant turn while tool calls " +
                                *pending.begin() + " are unanswered");
        if (conversation[i - 1].role == Role::kAssistant)
          throw ValidationError(at + ": two assistant turns in a row");
        break;
      }
      case Role::kTool: {
        if (i == 0 || conversation[i - 1].role != Role::kAssistant ||
            pending.empty())
          throw ValidationError(at + ": tool results without a preceding "
                                     "assistant tool call");
        break;
      }
    }

    for (const ContentBlock& b : m.blocks) {
      switch (m.role) {
        case Role::kUser:
          if (b.kind != BlockKind::kText && b.kind != BlockKind::kImage)
            throw ValidationError(at + ": user blocks must be text or image");
          break;
        case Role::kAssistant:
          if (b.kind != BlockKind::kText && b.kind != BlockKind::kToolUse)
            throw ValidationError(
                at + ": assistant blocks must be text or tool_use");
          if (b.kind == BlockKind::kToolUse) {
            if (b.call_id.empty())
              throw ValidationError(at + ": tool_use with empty id");
            if (!pending.insert(b.call_id).second)
              throw ValidationError(at + ": duplicate tool_use id '" +
                                    b.call_id + "'");
          }
          break;
        case Role::kTool:
          if (b.kind != BlockKind::kToolResult)
            throw ValidationError(
                at + ": tool messages may contain only tool_result blocks");
          if (!pending.erase(b.call_id))
            throw ValidationError(at + ": tool_result for unknown or "
                                       "already-answered id '" +
                                  b.call_id + "'");
          break;
      }
    }

    if (m.role == Role::kTool && !pending.empty())
      throw ValidationError(at + ": tool call " + *pending.begin() +
                            " left unanswered");
  }

  if (conversation.back().role == Role::kAssistant)
    throw ValidationError(
        "conversation already ends with an assistant turn; nothing to do");
  if (!pending.empty())
    throw ValidationError("pending tool call " + *pending.begin() +
                          " has no tool_result yet");
}

void validate_tool_uses(const Message& message,
                        const std::vector<ToolSchema>& tools) {
  for (const ContentBlock& b : message.blocks) {
    if (b.kind != BlockKind::kToolUse) continue;
    const ToolSchema* schema = nullptr;
    for (const auto& t : tools)
      if (t.name == b.tool_name) {
        schema = &t;
        break;
      }
    if (!schema) continue;  // undeclared: deferred to tool dispatch

    const std::string raw = b.arguments.is_null() ? "" : b.arguments.dump();
    if (!b.arguments.is_object())
      throw ProviderError(ProviderErrorKind::kSchema,
                          "arguments for tool '" + b.tool_name +
                              "' must be a JSON object",
                          raw);
    for (const auto& p : schema->params) {
      if (!p.required) continue;
      if (!b.arguments.contains(p.name))
        throw ProviderError(ProviderErrorKind::kSchema,
                            "missing required argument '" + p.name +
                                "' for tool '" + b.tool_name + "'",
                            raw);
    }
    for (const auto& [key, value] : b.arguments.items()) {
      const ToolParam* param = nullptr;
      for (const auto& p : schema->params)
        if (p.name == key) {
          param = &p;
          break;
        }
      if (!param)
        throw ProviderError(ProviderErrorKind::kSchema,
                            "unknown argument '" + key + "' for tool '" +
                                b.tool_name + "'",
                            raw);
      bool ok = true;
      if (param->type == "string") ok = value.is_string();
      else if (param->type == "integer") ok = value.is_number_integer();
      else if (param->type == "boolean") ok = value.is_boolean();
      else if (param->type == "object")
        ok = value.is_object() || value.is_array();
      if (!ok)
        throw ProviderError(ProviderErrorKind::kSchema,
                            "argument '" + key + "' for tool '" +
                                b.tool_name + "' must be of type " +
                                param->type,
                            raw);
    }
  }
}

// --- wire codec ---

namespace {

ordered_json encode_block(const ContentBlock& b) {
  switch (b.kind) {
    case BlockKind::kText:
      return {{"type", "text"}, {"text", b.text}};
    case BlockKind::kImage:
      return {{"type", "image"},
              {"source",
               {{"type", "base64"},
                {"media_type", b.media_type},
                {"data", base64_encode(b.image_data)}}}};
    case BlockKind::kToolUse:
      return {{"type", "tool_use"},
              {"id", b.call_id},
              {"name", b.tool_name},
              {"input", b.arguments.is_null() ? json::object() : b.arguments}};
    case BlockKind::kToolResult:
      return {{"type", "tool_result"},
              {"tool_use_id", b.call_id},
              {"content", b.text},
              {"is_error", b.is_error}};
  }
  return {};
}

ContentBlock decode_block(const json& j) {
  const std::string type = j.at("type").get<std::string>();
  if (type == "text")
    return ContentBlock::make_text(j.at("text").get<std::string>());
  if (type == "image") {
    const json& source = j.at("source");
    return ContentBlock::make_image(
        source.at("media_type").get<std::string>(),
        base64_decode(source.at("data").get<std::string>()));
  }
  if (type == "tool_use") {
    json input = j.contains("input") ? j.at("input") : json::object();
    return ContentBlock::make_tool_use(j.at("id").get<std::string>(),
                                       j.at("name").get<std::string>(),
                                       std::move(input));
  }
  if (type == "tool_result")
    return ContentBlock::make_tool_result(
        j.at("tool_use_id").get<std::string>(),
        j.at("content").get<std::string>(),
        j.value("is_error", false));
  throw ProviderError(ProviderErrorKind::kSchema,
                      "unknown content block type '" + type + "'");
}

}  // namespace

ordered_json encode_message(const Message& message) {
  ordered_json content = ordered_json::array();
  for (const auto& b : message.blocks) content.push_back(encode_block(b));
  return {{"role", role_name(message.role)}, {"content", std::move(content)}};
}

Message decode_message(const json& body) {
  Message m;
  m.role = role_from_name(body.at("role").get<std::string>());
  const json& content = body.at("content");
  if (!content.is_array())
    throw ProviderError(ProviderErrorKind::kSchema,
                        "message content must be an array");
  for (const auto& j : content) m.blocks.push_back(decode_block(j));
  return m;
}

ordered_json encode_request(const std::string& system_prompt,
                            const std::vector<Message>& conversation,
                            const std::vector<ToolSchema>& tools,
                            const ProviderConfig& config) {
  ordered_json messages = ordered_json::array();
  for (const auto& m : conversation) messages.push_back(encode_message(m));

  ordered_json tool_list = ordered_json::array();
  for (const auto& t : tools) {
    ordered_json properties = ordered_json::object();
    ordered_json required = ordered_json::array();
    for (const auto& p : t.params) {
      properties[p.name] = {{"type", p.type}, {"description", p.description}};
      if (p.required) required.push_back(p.name);
    }
    tool_list.push_back({{"name", t.name},
                         {"description", t.description},
                         {"input_schema",
                          {{"type", "object"},
                           {"properties", std::move(properties)},
                           {"required", std::move(required)}}}});
  }

  return {{"model", config.model},
          {"system", system_prompt},
          {"messages", std::move(messages)},
          {"tools", std::move(tool_list)},
          {"temperature", config.temperature},
          {"max_tokens", config.max_tokens}};
}

Message decode_response(const std::string& body_text) {
  json body;
  try {
    body = json::parse(body_text);
  } catch (const json::exception& e) {
    throw ProviderError(ProviderErrorKind::kSchema,
                        std::string("response is not valid JSON: ") + e.what(),
                        body_text);
  }
  try {
    Message m = decode_message(body);
    if (m.role != Role::kAssistant)
      throw ProviderError(ProviderErrorKind::kSchema,
                          "response role must be assistant");
    return m;
  } catch (const ProviderError& e) {
    throw ProviderError(e.kind(), e.what(), body_text);
  } catch (const json::exception& e) {
    throw ProviderError(ProviderErrorKind::kSchema,
                        std::string("malformed response body: ") + e.what(),
                        body_text);
  } catch (const ValidationError& e) {
    throw ProviderError(ProviderErrorKind::kSchema, e.what(), body_text);
  }
}

// --- scripted trace ---

void ScriptedTrace::validate() const {
  if (turns.empty()) throw ValidationError("scripted trace has no turns");
  for (size_t i = 0; i < turns.size(); ++i)
    if (turns[i].empty())
      throw ValidationError("scripted trace turn " + std::to_string(i) +
                            " is empty");
  for (const auto& b : turns.back())
    if (b.kind == BlockKind::kToolUse)
      throw ValidationError(
          "the final scripted turn must not contain tool_use blocks");
}

ScriptedTrace ScriptedTrace::from_json_text(const std::string& text) {
  json body;
  try {
    body = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("trace is not valid JSON: ") + e.what());
  }
  ScriptedTrace trace;
  try {
    for (const auto& turn : body.at("turns")) {
      std::vector<ContentBlock> blocks;
      for (const auto& j : turn) blocks.push_back(decode_block(j));
      trace.turns.push_back(std::move(blocks));
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed trace: ") + e.what());
  }
  trace.validate();
  return trace;
}

std::string ScriptedTrace::to_json_text() const {
  ordered_json turns_json = ordered_json::array();
  for (const auto& turn : turns) {
    ordered_json blocks = ordered_json::array();
    for (const auto& b : turn) blocks.push_back(encode_block(b));
    turns_json.push_back(std::move(blocks));
  }
  ordered_json body = {{"turns", std::move(turns_json)}};
  return body.dump(2) + "\n";
}

ScriptedTrace load_trace(const std::string& path) {
  return ScriptedTrace::from_json_text(model::read_file(path));
}

// --- providers ---

ScriptedProvider::ScriptedProvider(ScriptedTrace trace)
    : trace_(std::move(trace)) {
  trace_.validate();
}

Message ScriptedProvider::complete(const std::string& /*system_prompt*/,
                                   const std::vector<Message>& conversation,
                                   const std::vector<ToolSchema>& tools,
                                   const ProviderConfig& config) {
  config.validate();
  validate_conversation(conversation);

  size_t index = 0;
  for (const auto& m : conversation)
    if (m.role == Role::kAssistant) ++index;

  if (index >= trace_.turns.size())
    throw ProviderError(ProviderErrorKind::kExhausted,
                        "trace exhausted at turn " + std::to_string(index));

  Message reply;
  reply.role = Role::kAssistant;
  reply.blocks = trace_.turns[index];
  validate_tool_uses(reply, tools);
  return reply;
}

HttpProvider::HttpProvider(Clock* clock) : clock_(clock) {}

Message HttpProvider::complete(const std::string& system_prompt,
                               const std::vector<Message>& conversation,
                               const std::vector<ToolSchema>& tools,
                               const ProviderConfig& config) {
  config.validate();
  validate_conversation(conversation);

  auto parsed = url::parse(config.endpoint);
  if (!parsed)
    throw ValidationError("endpoint is not a valid http(s) URL: " +
                          config.endpoint);
  const url::Url& endpoint = *parsed;
  std::string base = endpoint.scheme + "://" + endpoint.host;
  if (endpoint.port >= 0) base += ":" + std::to_string(endpoint.port);
  std::string path = endpoint.path.empty() ? "/" : endpoint.path;
  if (endpoint.query) path += "?" + *endpoint.query;

  const std::string body =
      encode_request(system_prompt, conversation, tools, config).dump();

  httplib::Headers headers;
  if (const char* key = std::getenv(kApiKeyEnvVar))
    headers.emplace("x-api-key", key);

  Clock& clock = clock_ ? *clock_ : fallback_clock_;
  const int64_t backoff_ms[] = {1000, 2000, 4000};
  const int max_attempts = 4;

  std::string last_failure;
  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    httplib::Client client(base);
    client.set_connection_timeout(config.timeout_ms / 1000,
                                  (config.timeout_ms % 1000) * 1000);
    client.set_read_timeout(config.timeout_ms / 1000,
                            (config.timeout_ms % 1000) * 1000);
    client.set_write_timeout(config.timeout_ms / 1000,
                             (config.timeout_ms % 1000) * 1000);

    auto res = client.Post(path, headers, body, "application/json");
    if (!res) {
      if (res.error() == httplib::Error::ConnectionTimeout)
        throw ProviderError(ProviderErrorKind::kTimeout,
                            "request to " + config.endpoint + " timed out");
      last_failure = httplib::to_string(res.error());
    } else if (res->status >= 500) {
      last_failure = "server returned status " + std::to_string(res->status);
    } else if (res->status != 200) {
      throw ProviderError(ProviderErrorKind::kSchema,
                          "request rejected with status " +
                              std::to_string(res->status),
                          res->body);
    } else {
      Message reply = decode_response(res->body);
      validate_tool_uses(reply, tools);
      return reply;
    }

    if (attempt < max_attempts - 1) clock.sleep_ms(backoff_ms[attempt]);
  }
  throw ProviderError(ProviderErrorKind::kTransport,
                      "giving up on " + config.endpoint + " after " +
                          std::to_string(max_attempts) +
                          " attempts: " + last_failure);
}

}  // namespace webscraper::provider
