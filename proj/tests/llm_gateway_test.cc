// Copyright 2026 The egta-sim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include <doctest.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "egta/errors.hpp"
#include "egta/llm_gateway.hpp"
#include "test_support.hpp"

namespace egta {
namespace {

using nlohmann::json;

GatewayConfig StubConfig(const std::filesystem::path& fixture) {
  GatewayConfig c;
  c.backend = GatewayBackend::kStub;
  c.fixture = fixture;
  c.backoff_ms = 0;
  return c;
}

ChatRequest UserRequest(const std::string& text) {
  ChatRequest r;
  r.model = "stub";
  r.messages = {{ChatRole::kUser, text}};
  return r;
}

TEST_CASE("stub: sequential replies cycle and fingerprinted replies match exactly") {
  const auto dir = test::TempDir("stub_seq");
  const ChatRequest keyed = UserRequest("describe the model");
  const json fixture = json::array({json{{"fingerprint", Fingerprint(keyed)}, {"response", "keyed"}}, "a", "b"});
  test::WriteText(dir / "f.json", fixture.dump());
  LlmGateway gw(StubConfig(dir / "f.json"));
  CHECK(gw.Complete(UserRequest("x")) == "a");
  CHECK(gw.Complete(keyed) == "keyed");
  CHECK(gw.Complete(UserRequest("y")) == "b");
  CHECK(gw.Complete(UserRequest("z")) == "a");
  CHECK(gw.http_requests() == 0);
  CHECK(gw.log().size() == 4);
}

TEST_CASE("stub: error entries surface as transport errors after retries") {
  const auto dir = test::TempDir("stub_err");
  test::WriteText(dir / "f.json", R"([{"error": "scripted outage"}])");
  GatewayConfig c = StubConfig(dir / "f.json");
  c.max_retries = 2;
  LlmGateway gw(c);
  try {
    gw.Complete(UserRequest("x"));
    FAIL("expected a transport error");
  } catch (const TransportError& e) {
    CHECK(std::string(e.what()).find("after 3 attempts") != std::string::npos);
    CHECK(std::string(e.what()).find("scripted outage") != std::string::npos);
  }
  REQUIRE(gw.log().size() == 1);
  CHECK(gw.log()[0].attempts == 3);
}

TEST_CASE("stub: batch results come back in request order") {
  const auto dir = test::TempDir("stub_batch");
  test::WriteText(dir / "f.json", R"(["one", {"error": "down"}, "three"])");
  GatewayConfig c = StubConfig(dir / "f.json");
  c.max_retries = 0;
  LlmGateway gw(c);
  const auto out = gw.CompleteBatch({UserRequest("1"), UserRequest("2"), UserRequest("3")},
                                    {RequestTag{1, 1, "t", "d"}, RequestTag{1, 2, "t", "d"}, RequestTag{1, 3, "t", "d"}});
  REQUIRE(out.size() == 3);
  CHECK(*out[0].text == "one");
  CHECK_FALSE(out[1].text.has_value());
  CHECK(out[1].error.find("down") != std::string::npos);
  CHECK(*out[2].text == "three");
  CHECK_THROWS_AS(gw.CompleteBatch({UserRequest("1")}, {}), ConfigError);
}

TEST_CASE("stub: missing or malformed fixtures are rejected") {
  const auto dir = test::TempDir("stub_bad");
  CHECK_THROWS_AS(LlmGateway(StubConfig(dir / "absent.json")), IoError);
  test::WriteText(dir / "bad.json", "{not json");
  CHECK_THROWS_AS(LlmGateway(StubConfig(dir / "bad.json")), ConfigError);
  test::WriteText(dir / "obj.json", R"({"response": "x"})");
  CHECK_THROWS_AS(LlmGateway(StubConfig(dir / "obj.json")), ConfigError);
  test::WriteText(dir / "fp.json", R"([{"fingerprint": "0000000000000000", "response": "x"}])");
  LlmGateway gw(StubConfig(dir / "fp.json"));
  CHECK_THROWS_AS(gw.Complete(UserRequest("unmatched")), TransportError);
}

TEST_CASE("fingerprint depends on roles and content only") {
  ChatRequest a = UserRequest("hello");
  ChatRequest b = a;
  b.model = "other";
  b.temperature = 0.7;
  CHECK(Fingerprint(a) == Fingerprint(b));
  b.messages[0].role = ChatRole::kSystem;
  CHECK(Fingerprint(a) != Fingerprint(b));
  CHECK(Fingerprint(a).size() == 16);
}

TEST_CASE("config validation") {
  GatewayConfig c;
  CHECK_THROWS_AS(c.Validate(), ConfigError);
  c.fixture = "x.json";
  CHECK_NOTHROW(c.Validate());
  c.max_in_flight = 0;
  CHECK_THROWS_AS(c.Validate(), ConfigError);
  c = GatewayConfig{};
  c.backend = GatewayBackend::kHttp;
  CHECK_THROWS_AS(c.Validate(), ConfigError);
  c.endpoint = "not a url";
  CHECK_THROWS_AS(LlmGateway{c}, ConfigError);
}

TEST_CASE("the api key is read from the environment") {
  ::setenv(kApiKeyEnv, "test-key", 1);
  GatewayConfig c;
  c.ApplyEnvironment();
  CHECK(c.api_key == "test-key");
  ::unsetenv(kApiKeyEnv);
}

TEST_CASE("render_prompt substitutes variables and reports missing ones") {
  CHECK(RenderPrompt("Year {year}: {water} units", {{"year", "3"}, {"water", "45"}}) == "Year 3: 45 units");
  CHECK(RenderPrompt("literal {braces} stay? no: {} and { x }", {{"braces", "B"}}) == "literal B stay? no: {} and { x }");
  CHECK(RenderPrompt(R"({"fields": 3})", {}) == R"({"fields": 3})");
  CHECK_THROWS_AS(RenderPrompt("{a} {b}", {{"a", "1"}}), TemplateError);
}

TEST_CASE("extract_structured prefers fenced json, then bare json, then an integer") {
  CHECK(ExtractStructured("text ```json\n{\"a\": 1}\n``` more {\"b\": 2}") == json{{"a", 1}});
  CHECK(ExtractStructured("plan: {\"fields\": 4} ok") == json{{"fields", 4}});
  CHECK(ExtractStructured("I will plant 7 fields") == json(7));
  CHECK(ExtractStructured("go -3") == json(-3));
  CHECK(ExtractStructured("model R1 says 5") == json(5));
  CHECK(ExtractStructured("[1, 2]") == json::array({1, 2}));
  CHECK_THROWS_AS(ExtractStructured("nothing numeric"), SchemaError);
  CHECK_THROWS_AS(ExtractStructured(""), SchemaError);
}

TEST_CASE("request log is written as json lines") {
  const auto dir = test::TempDir("stub_log");
  test::WriteText(dir / "f.json", R"(["r1", "r2"])");
  LlmGateway gw(StubConfig(dir / "f.json"));
  gw.Complete(UserRequest("q1"), {1, 2, "generative", "decision"});
  gw.Complete(UserRequest("q2"), {1, 3, "generative", "decision"});
  gw.WriteLog(dir / "log.jsonl");
  const std::string text = test::ReadText(dir / "log.jsonl");
  CHECK(std::count(text.begin(), text.end(), '\n') == 2);
  const json first = json::parse(text.substr(0, text.find('\n')));
  CHECK(first["response"] == "r1");
  CHECK(first["household"] == 2);
  CHECK(text.find("test-key") == std::string::npos);
}

class FakeServer {
 public:
  FakeServer() {
    server_.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
      const int now = ++active_;
      {
        std::lock_guard lock(mu_);
        peak_ = std::max(peak_, now);
        auth_ = req.get_header_value("Authorization");
      }
      std::this_thread::sleep_for(std::chrono::milliseconds(delay_ms_));
      --active_;
      ++calls_;
      if (fail_) {
        res.status = 500;
        res.set_content("boom", "text/plain");
        return;
      }
      const json body = json::parse(req.body);
      const std::string echo = body["messages"].back()["content"].get<std::string>();
      json reply{{"choices", json::array({{{"message", {{"role", "assistant"}, {"content", "echo:" + echo}}}}})}};
      res.set_content(reply.dump(), "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~FakeServer() {
    server_.stop();
    thread_.join();
  }
  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_) + "/v1/chat/completions"; }
  int peak() {
    std::lock_guard lock(mu_);
    return peak_;
  }
  std::string auth() {
    std::lock_guard lock(mu_);
    return auth_;
  }
  int calls() const { return calls_.load(); }
  void set_fail(bool f) { fail_ = f; }
  void set_delay(int ms) { delay_ms_ = ms; }

 private:
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  std::atomic<int> active_{0};
  std::atomic<int> calls_{0};
  std::atomic<bool> fail_{false};
  std::atomic<int> delay_ms_{0};
  std::mutex mu_;
  int peak_ = 0;
  std::string auth_;
};

GatewayConfig HttpConfig(const std::string& url) {
  GatewayConfig c;
  c.backend = GatewayBackend::kHttp;
  c.endpoint = url;
  c.model = "test-model";
  c.timeout_seconds = 5;
  c.backoff_ms = 1;
  return c;
}

TEST_CASE("http: returns the first choice content and sends the bearer key") {
  FakeServer server;
  GatewayConfig c = HttpConfig(server.url());
  c.api_key = "secret";
  LlmGateway gw(c);
  CHECK(gw.Complete(UserRequest("hi")) == "echo:hi");
  CHECK(server.auth() == "Bearer secret");
  CHECK(gw.http_requests() == 1);
}

TEST_CASE("http: server errors are retried then reported") {
  FakeServer server;
  server.set_fail(true);
  GatewayConfig c = HttpConfig(server.url());
  c.max_retries = 1;
  LlmGateway gw(c);
  CHECK_THROWS_AS(gw.Complete(UserRequest("hi")), TransportError);
  CHECK(server.calls() == 2);
  CHECK(gw.http_requests() == 2);
}

TEST_CASE("http: unreachable endpoint is a transport error") {
  GatewayConfig c = HttpConfig("http://127.0.0.1:1/v1/chat/completions");
  c.max_retries = 0;
  c.timeout_seconds = 1;
  LlmGateway gw(c);
  CHECK_THROWS_AS(gw.Complete(UserRequest("hi")), TransportError);
}

TEST_CASE("http: batches stay within the in-flight bound and keep order") {
  FakeServer server;
  server.set_delay(50);
  GatewayConfig c = HttpConfig(server.url());
  c.max_in_flight = 3;
  LlmGateway gw(c);
  std::vector<ChatRequest> reqs;
  std::vector<RequestTag> tags;
  for (int i = 0; i < 7; ++i) {
    reqs.push_back(UserRequest("q" + std::to_string(i)));
    tags.push_back({1, i + 1, "t", "d"});
  }
  const auto out = gw.CompleteBatch(reqs, tags);
  for (int i = 0; i < 7; ++i) CHECK(*out[i].text == "echo:q" + std::to_string(i));
  CHECK(server.peak() <= 3);
  CHECK(server.peak() >= 2);
  const auto log = gw.log();
  REQUIRE(log.size() == 7);
  CHECK(log[4].tag.household == 5);
}

}  // namespace
}  // namespace egta
