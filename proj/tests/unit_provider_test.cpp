#include "doctest.h"

#include <atomic>
#include <cstdlib>
#include <random>
#include <thread>

#include "httplib.h"
#include "json.hpp"

#include "webscraper/clock.hpp"
#include "webscraper/errors.hpp"
#include "webscraper/model.hpp"
#include "webscraper/provider.hpp"

using namespace webscraper;
using namespace webscraper::provider;
using nlohmann::json;

namespace {

std::string fixture_path(const std::string& name) {
  return std::string(WEBSCRAPER_TEST_FIXTURES_DIR) + "/provider/" + name;
}

Message user_text(const std::string& text) {
  Message m;
  m.role = Role::kUser;
  m.blocks.push_back(ContentBlock::make_text(text));
  return m;
}

Message assistant_blocks(std::vector<ContentBlock> blocks) {
  Message m;
  m.role = Role::kAssistant;
  m.blocks = std::move(blocks);
  return m;
}

Message tool_results(std::vector<ContentBlock> blocks) {
  Message m;
  m.role = Role::kTool;
  m.blocks = std::move(blocks);
  return m;
}

struct TestServer {
  httplib::Server server;
  int port = 0;
  std::thread thread;

  TestServer() {
    port = server.bind_to_any_port("127.0.0.1");
    thread = std::thread([this] { server.listen_after_bind(); });
    server.wait_until_ready();
  }
  ~TestServer() {
    server.stop();
    thread.join();
  }
  std::string endpoint(const std::string& path = "/v1/complete") const {
    return "http://127.0.0.1:" + std::to_string(port) + path;
  }
};

std::string canned_reply_body() {
  return R"({"role":"assistant","content":[{"type":"text","text":"all done"}]})";
}

}  // namespace

// ------------------------------------------------------------- base64

TEST_CASE("base64 round-trips arbitrary bytes") {
  CHECK(base64_encode("Man") == "TWFu");
  CHECK(base64_encode("Ma") == "TWE=");
  CHECK(base64_encode("M") == "TQ==");
  CHECK(base64_decode("TWFu") == "Man");
  CHECK(base64_decode(base64_encode("")) == "");

  std::mt19937 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    std::string bytes;
    int len = static_cast<int>(rng() % 40);
    for (int i = 0; i < len; ++i)
      bytes += static_cast<char>(rng() % 256);
    CHECK(base64_decode(base64_encode(bytes)) == bytes);
  }
  CHECK_THROWS_AS(base64_decode("a!b"), ValidationError);
}

// --------------------------------------------------------------- codec

TEST_CASE("encode_request lays out the wire body") {
  std::vector<Message> convo{user_text("scrape two pages")};
  ToolSchema parse;
  parse.name = "parse_tool";
  parse.description = "Parse a page.";
  parse.params = {{"kind", "string", "index or content", true},
                  {"html", "string", "raw html", false}};
  ProviderConfig config;
  config.model = "agent-model";

  auto body = encode_request("be careful", convo, {parse}, config);
  CHECK(body["model"] == "agent-model");
  CHECK(body["system"] == "be careful");
  CHECK(body["temperature"] == 0.0);
  CHECK(body["max_tokens"] == 4096);
  REQUIRE(body["messages"].size() == 1);
  CHECK(body["messages"][0]["role"] == "user");
  CHECK(body["messages"][0]["content"][0]["type"] == "text");
  REQUIRE(body["tools"].size() == 1);
  const auto& schema = body["tools"][0]["input_schema"];
  CHECK(schema["type"] == "object");
  CHECK(schema["properties"]["kind"]["type"] == "string");
  CHECK(schema["required"] == json::array({"kind"}));
}

TEST_CASE("tool_result carries an explicit error marker") {
  auto block = ContentBlock::make_tool_result("call_1", "boom", true);
  auto encoded = encode_message(tool_results({block}));
  CHECK(encoded["content"][0]["is_error"] == true);
  CHECK(encoded["content"][0]["tool_use_id"] == "call_1");

  auto ok = encode_message(
      tool_results({ContentBlock::make_tool_result("call_2", "fine")}));
  CHECK(ok["content"][0]["is_error"] == false);
}

TEST_CASE("images ride the wire as base64 with a media type") {
  std::string bytes = "\x89PNG\r\n\x1a\n binary";
  auto m = user_text("look");
  m.blocks.push_back(ContentBlock::make_image("image/png", bytes));
  auto encoded = encode_message(m);
  const auto& source = encoded["content"][1]["source"];
  CHECK(source["media_type"] == "image/png");
  CHECK(base64_decode(source["data"].get<std::string>()) == bytes);
  CHECK(decode_message(encoded) == m);
}

TEST_CASE("decode(encode(m)) is the identity on random messages") {
  std::mt19937 rng(17);
  auto random_text = [&] {
    std::string s;
    int len = static_cast<int>(rng() % 12);
    for (int i = 0; i < len; ++i)
      s += static_cast<char>('a' + rng() % 26);
    return s;
  };
  for (int trial = 0; trial < 200; ++trial) {
    Message m;
    int pick = static_cast<int>(rng() % 3);
    m.role = pick == 0 ? Role::kUser
                       : (pick == 1 ? Role::kAssistant : Role::kTool);
    int blocks = 1 + static_cast<int>(rng() % 4);
    for (int i = 0; i < blocks; ++i) {
      switch (m.role == Role::kTool ? 3 : rng() % (m.role == Role::kUser ? 2 : 3)) {
        case 0:
          m.blocks.push_back(ContentBlock::make_text(random_text()));
          break;
        case 1:
          if (m.role == Role::kUser) {
            m.blocks.push_back(
                ContentBlock::make_image("image/png", random_text()));
          } else {
            m.blocks.push_back(ContentBlock::make_text(random_text()));
          }
          break;
        case 2:
          m.blocks.push_back(ContentBlock::make_tool_use(
              "id_" + random_text(), "tool_" + random_text(),
              json{{"s", random_text()},
                   {"i", static_cast<int>(rng() % 100)},
                   {"b", rng() % 2 == 0},
                   {"o", json{{"nested", random_text()}}}}));
          break;
        default:
          m.blocks.push_back(ContentBlock::make_tool_result(
              "id_" + random_text(), random_text(), rng() % 2 == 0));
          break;
      }
    }
    REQUIRE(decode_message(encode_message(m)) == m);
  }
}

TEST_CASE("a recorded reply decodes to the expected message") {
  auto text = model::read_file(fixture_path("response_good.json"));
  Message m = decode_response(text);

  Message want;
  want.role = Role::kAssistant;
  want.blocks.push_back(ContentBlock::make_text(
      "I will open the index page first and look at its structure."));
  want.blocks.push_back(ContentBlock::make_tool_use(
      "toolu_014ghEmsbMfvjcDh5GKwMvbA", "navigate",
      json{{"url", "http://127.0.0.1:8801/index.html"}}));
  CHECK(m == want);
}

TEST_CASE("a recorded malformed reply raises a schema error with the raw body") {
  auto text = model::read_file(fixture_path("response_malformed.json"));
  try {
    decode_response(text);
    FAIL("expected ProviderError");
  } catch (const ProviderError& e) {
    CHECK(e.kind() == ProviderErrorKind::kSchema);
    CHECK(std::string(e.what()).find("reflection") != std::string::npos);
    CHECK(e.raw_payload().find("scratchpad") != std::string::npos);
  }

  try {
    decode_response("not json at all {");
    FAIL("expected ProviderError");
  } catch (const ProviderError& e) {
    CHECK(e.kind() == ProviderErrorKind::kSchema);
    CHECK(e.raw_payload() == "not json at all {");
  }
}

// ------------------------------------------------- conversation legality

TEST_CASE("legal conversations validate") {
  CHECK_NOTHROW(validate_conversation({user_text("hi")}));
  CHECK_NOTHROW(validate_conversation(
      {user_text("hi"),
       assistant_blocks({ContentBlock::make_text("hello")}),
       user_text("go on")}));
  CHECK_NOTHROW(validate_conversation(
      {user_text("hi"),
       assistant_blocks({ContentBlock::make_tool_use("c1", "navigate",
                                                     json::object())}),
       tool_results({ContentBlock::make_tool_result("c1", "ok")})}));
}

TEST_CASE("illegal conversations are rejected") {
  CHECK_THROWS_AS(validate_conversation({}), ValidationError);

  Message empty_user;
  empty_user.role = Role::kUser;
  CHECK_THROWS_AS(validate_conversation({empty_user}), ValidationError);

  CHECK_THROWS_AS(validate_conversation(
                      {assistant_blocks({ContentBlock::make_text("x")})}),
                  ValidationError);

  // pending tool_use answered by a user turn
  CHECK_THROWS_AS(
      validate_conversation(
          {user_text("hi"),
           assistant_blocks({ContentBlock::make_tool_use("c1", "navigate",
                                                         json::object())}),
           user_text("??")}),
      ValidationError);

  // tool message with a stray text block
  Message bad_tool;
  bad_tool.role = Role::kTool;
  bad_tool.blocks = {ContentBlock::make_text("not a result")};
  CHECK_THROWS_AS(
      validate_conversation(
          {user_text("hi"),
           assistant_blocks({ContentBlock::make_tool_use("c1", "navigate",
                                                         json::object())}),
           bad_tool}),
      ValidationError);

  // result for an id nobody issued
  CHECK_THROWS_AS(
      validate_conversation(
          {user_text("hi"),
           assistant_blocks({ContentBlock::make_tool_use("c1", "navigate",
                                                         json::object())}),
           tool_results({ContentBlock::make_tool_result("zzz", "ok")})}),
      ValidationError);

  // partial coverage of issued calls
  CHECK_THROWS_AS(
      validate_conversation(
          {user_text("hi"),
           assistant_blocks(
               {ContentBlock::make_tool_use("c1", "navigate", json::object()),
                ContentBlock::make_tool_use("c2", "get_html",
                                            json::object())}),
           tool_results({ContentBlock::make_tool_result("c1", "ok")})}),
      ValidationError);

  // duplicate call id in one turn
  CHECK_THROWS_AS(
      validate_conversation(
          {user_text("hi"),
           assistant_blocks(
               {ContentBlock::make_tool_use("c1", "navigate", json::object()),
                ContentBlock::make_tool_use("c1", "get_html",
                                            json::object())})}),
      ValidationError);

  // ends on the assistant: nothing for complete to do
  CHECK_THROWS_AS(
      validate_conversation(
          {user_text("hi"),
           assistant_blocks({ContentBlock::make_text("answer")})}),
      ValidationError);

  // two user turns in a row
  CHECK_THROWS_AS(validate_conversation({user_text("a"), user_text("b")}),
                  ValidationError);
}

// ----------------------------------------------------- schema validation

TEST_CASE("tool_use arguments validate against declared schemas") {
  ToolSchema parse;
  parse.name = "parse_tool";
  parse.params = {{"kind", "string", "", true},
                  {"html", "string", "", false},
                  {"page", "integer", "", false},
                  {"fresh", "boolean", "", false},
                  {"hints", "object", "", false}};
  std::vector<ToolSchema> tools{parse};

  auto use = [&](json args) {
    return assistant_blocks(
        {ContentBlock::make_tool_use("c1", "parse_tool", std::move(args))});
  };

  CHECK_NOTHROW(validate_tool_uses(use({{"kind", "index"}}), tools));
  CHECK_NOTHROW(validate_tool_uses(
      use({{"kind", "content"},
           {"html", "<p>x</p>"},
           {"page", 2},
           {"fresh", true},
           {"hints", json{{"price", "market"}}}}),
      tools));
  // "object" admits arrays too
  CHECK_NOTHROW(validate_tool_uses(
      use({{"kind", "index"}, {"hints", json::array({1, 2})}}), tools));

  auto expect_schema_error = [&](json args, const char* needle) {
    try {
      validate_tool_uses(use(std::move(args)), tools);
      FAIL_CHECK("expected schema error for ", needle);
    } catch (const ProviderError& e) {
      CHECK(e.kind() == ProviderErrorKind::kSchema);
      CHECK(std::string(e.what()).find(needle) != std::string::npos);
      CHECK_FALSE(e.raw_payload().empty());
    }
  };
  expect_schema_error(json{{"html", "<p>"}}, "kind");
  expect_schema_error(json{{"kind", 7}}, "string");
  expect_schema_error(json{{"kind", "index"}, {"page", "two"}}, "integer");
  expect_schema_error(json{{"kind", "index"}, {"wat", 1}}, "unknown");
  expect_schema_error(json::array({1}), "object");

  // undeclared tools pass through for the toolbox to reject
  auto unknown = assistant_blocks(
      {ContentBlock::make_tool_use("c9", "fly_to_moon", json{{"speed", 9}})});
  CHECK_NOTHROW(validate_tool_uses(unknown, tools));
}

// ----------------------------------------------------- scripted provider

namespace {

ScriptedTrace two_turn_trace() {
  ScriptedTrace trace;
  trace.turns.push_back(
      {ContentBlock::make_text("opening the page"),
       ContentBlock::make_tool_use("call_0", "parse_tool",
                                   json{{"kind", "index"}})});
  trace.turns.push_back({ContentBlock::make_text("done")});
  return trace;
}

}  // namespace

TEST_CASE("scripted provider replays turns keyed by assistant count") {
  ScriptedProvider stub(two_turn_trace());
  ProviderConfig config;
  std::vector<ToolSchema> tools{
      {"parse_tool", "", {{"kind", "string", "", true}}}};

  std::vector<Message> convo{user_text("go")};
  Message first = stub.complete("sys", convo, tools, config);
  REQUIRE(first.blocks.size() == 2);
  CHECK(first.blocks[1].kind == BlockKind::kToolUse);
  CHECK(first.blocks[1].tool_name == "parse_tool");
  CHECK(first.blocks[1].arguments == json{{"kind", "index"}});

  // pure: identical input, identical output
  CHECK(stub.complete("sys", convo, tools, config) == first);

  convo.push_back(first);
  convo.push_back(
      tool_results({ContentBlock::make_tool_result("call_0", "parsed")}));
  Message second = stub.complete("sys", convo, tools, config);
  CHECK(second.blocks[0].text == "done");

  convo.push_back(second);
  convo.push_back(user_text("more"));
  try {
    stub.complete("sys", convo, tools, config);
    FAIL("expected exhaustion");
  } catch (const ProviderError& e) {
    CHECK(e.kind() == ProviderErrorKind::kExhausted);
    CHECK(std::string(e.what()).find("trace exhausted") != std::string::npos);
  }
}

TEST_CASE("trace invariants and JSON round-trip") {
  ScriptedTrace empty;
  CHECK_THROWS_AS(empty.validate(), ValidationError);

  ScriptedTrace dangling;
  dangling.turns.push_back({ContentBlock::make_tool_use("c", "navigate",
                                                        json::object())});
  CHECK_THROWS_AS(dangling.validate(), ValidationError);

  auto trace = two_turn_trace();
  auto reparsed = ScriptedTrace::from_json_text(trace.to_json_text());
  REQUIRE(reparsed.turns.size() == trace.turns.size());
  CHECK(reparsed.turns[0] == trace.turns[0]);
  CHECK(reparsed.turns[1] == trace.turns[1]);

  auto from_file = load_trace(fixture_path("trace_minimal.json"));
  REQUIRE(from_file.turns.size() == 2);
  CHECK(from_file.turns[0][0].tool_name == "parse_tool");

  CHECK_THROWS_AS(ScriptedTrace::from_json_text("{"), ParseError);
  CHECK_THROWS_AS(ScriptedTrace::from_json_text(R"({"turns": "x"})"),
                  ParseError);
}

// --------------------------------------------------------- http provider

TEST_CASE("http provider posts the conversation and decodes the reply") {
  TestServer ts;
  std::string seen_body, seen_key;
  ts.server.Post("/v1/complete", [&](const httplib::Request& req,
                                     httplib::Response& res) {
    seen_body = req.body;
    seen_key = req.get_header_value("x-api-key");
    res.set_content(canned_reply_body(), "application/json");
  });

  setenv(kApiKeyEnvVar, "sk-test-123", 1);
  SimClock clock;
  HttpProvider http(&clock);
  ProviderConfig config;
  config.endpoint = ts.endpoint();

  Message reply = http.complete("sys prompt", {user_text("hello")}, {},
                                config);
  unsetenv(kApiKeyEnvVar);

  REQUIRE(reply.blocks.size() == 1);
  CHECK(reply.blocks[0].text == "all done");
  CHECK(seen_key == "sk-test-123");

  auto body = json::parse(seen_body);
  CHECK(body["system"] == "sys prompt");
  CHECK(body["temperature"] == 0.0);
  CHECK(body["messages"][0]["content"][0]["text"] == "hello");
  CHECK(clock.now_ms() == 0);  // no retries, no sleeps
}

TEST_CASE("http provider retries 5xx with 1s/2s backoff") {
  TestServer ts;
  std::atomic<int> hits{0};
  ts.server.Post("/v1/complete", [&](const httplib::Request&,
                                     httplib::Response& res) {
    if (++hits <= 2) {
      res.status = 503;
      res.set_content("overloaded", "text/plain");
    } else {
      res.set_content(canned_reply_body(), "application/json");
    }
  });

  SimClock clock;
  HttpProvider http(&clock);
  ProviderConfig config;
  config.endpoint = ts.endpoint();

  Message reply = http.complete("s", {user_text("x")}, {}, config);
  CHECK(reply.blocks[0].text == "all done");
  CHECK(hits == 3);
  CHECK(clock.now_ms() == 3000);
}

TEST_CASE("http provider gives up after four transport attempts") {
  TestServer ts;
  std::atomic<int> hits{0};
  ts.server.Post("/v1/complete", [&](const httplib::Request&,
                                     httplib::Response& res) {
    ++hits;
    res.status = 500;
  });

  SimClock clock;
  HttpProvider http(&clock);
  ProviderConfig config;
  config.endpoint = ts.endpoint();

  try {
    http.complete("s", {user_text("x")}, {}, config);
    FAIL("expected transport error");
  } catch (const ProviderError& e) {
    CHECK(e.kind() == ProviderErrorKind::kTransport);
  }
  CHECK(hits == 4);
  CHECK(clock.now_ms() == 7000);  // 1s + 2s + 4s
}

TEST_CASE("http provider does not retry rejections or malformed bodies") {
  TestServer ts;
  std::atomic<int> hits{0};
  std::atomic<int> mode{0};
  ts.server.Post("/v1/complete", [&](const httplib::Request&,
                                     httplib::Response& res) {
    ++hits;
    if (mode == 0) {
      res.status = 400;
      res.set_content(R"({"error":"bad request"})", "application/json");
    } else {
      res.set_content(R"({"role":"assistant","content":"oops"})",
                      "application/json");
    }
  });

  SimClock clock;
  HttpProvider http(&clock);
  ProviderConfig config;
  config.endpoint = ts.endpoint();

  try {
    http.complete("s", {user_text("x")}, {}, config);
    FAIL("expected schema error");
  } catch (const ProviderError& e) {
    CHECK(e.kind() == ProviderErrorKind::kSchema);
    CHECK(e.raw_payload().find("bad request") != std::string::npos);
  }
  CHECK(hits == 1);

  mode = 1;
  try {
    http.complete("s", {user_text("x")}, {}, config);
    FAIL("expected schema error");
  } catch (const ProviderError& e) {
    CHECK(e.kind() == ProviderErrorKind::kSchema);
  }
  CHECK(hits == 2);
  CHECK(clock.now_ms() == 0);
}

TEST_CASE("connection failures burn the full retry budget") {
  SimClock clock;
  HttpProvider http(&clock);
  ProviderConfig config;
  config.endpoint = "http://127.0.0.1:1/v1/complete";
  config.timeout_ms = 500;

  try {
    http.complete("s", {user_text("x")}, {}, config);
    FAIL("expected transport error");
  } catch (const ProviderError& e) {
    CHECK(e.kind() == ProviderErrorKind::kTransport);
  }
  CHECK(clock.now_ms() == 7000);
}

TEST_CASE("declared-tool schema violations from the wire are fatal") {
  TestServer ts;
  ts.server.Post("/v1/complete", [&](const httplib::Request&,
                                     httplib::Response& res) {
    res.set_content(
        R"({"role":"assistant","content":[
             {"type":"tool_use","id":"c1","name":"parse_tool",
              "input":{"kind": 42}}]})",
        "application/json");
  });

  SimClock clock;
  HttpProvider http(&clock);
  ProviderConfig config;
  config.endpoint = ts.endpoint();
  std::vector<ToolSchema> tools{
      {"parse_tool", "", {{"kind", "string", "", true}}}};

  CHECK_THROWS_AS(http.complete("s", {user_text("x")}, tools, config),
                  ProviderError);
}
