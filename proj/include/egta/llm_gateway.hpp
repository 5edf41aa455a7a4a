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

#ifndef EGTA_LLM_GATEWAY_HPP_
#define EGTA_LLM_GATEWAY_HPP_

// Access to a chat-completion endpoint (OpenAI wire format) or to a scripted
// stub that replays a JSON fixture, so every pipeline can run offline.
//
// Fixture format: a JSON array of {"response": "...", "fingerprint": "..."}.
// Entries with a fingerprint are served whenever a request with that
// fingerprint arrives; the others are served in order, wrapping around.
// An entry may carry "error" instead of "response" to simulate a transport
// failure.

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace egta {

enum class ChatRole { kSystem, kUser };
std::string_view RoleName(ChatRole role);

struct ChatMessage {
  ChatRole role = ChatRole::kUser;
  std::string content;
};

struct ChatRequest {
  std::string model;
  std::vector<ChatMessage> messages;
  double temperature = 0.0;
  int max_tokens = 512;
};

enum class GatewayBackend { kStub, kHttp };

inline constexpr const char* kEndpointEnv = "EGTA_LLM_ENDPOINT";
inline constexpr const char* kApiKeyEnv = "EGTA_LLM_API_KEY";
inline constexpr const char* kModelEnv = "EGTA_LLM_MODEL";

struct GatewayConfig {
  GatewayBackend backend = GatewayBackend::kStub;
  std::string endpoint;  // full URL of the chat-completions route
  std::string api_key;
  std::string model = "stub";
  double timeout_seconds = 60.0;
  int max_retries = 2;
  int backoff_ms = 250;  // doubled after every failed attempt
  int max_in_flight = 4;
  double temperature = 0.0;
  int max_tokens = 512;
  std::filesystem::path fixture;

  // Fills endpoint and model from the environment when unset; the API key
  // always comes from the environment.
  void ApplyEnvironment();
  void Validate() const;
};

// Hex FNV-1a 64 of the rendered messages ("role\ncontent\n" per message).
std::string Fingerprint(const ChatRequest& request);

struct RequestTag {
  int year = 0;
  int household = 0;
  std::string pipeline;
  std::string purpose;
};

struct RequestLogEntry {
  RequestTag tag;
  std::string fingerprint;
  ChatRequest request;
  std::string response;
  std::string error;
  int attempts = 0;
};

nlohmann::json LogEntryJson(const RequestLogEntry& entry);

struct CompletionResult {
  std::optional<std::string> text;
  std::string error;  // set when text is empty
};

class ChatBackend {
 public:
  virtual ~ChatBackend() = default;
  // Throws TransportError on failure.
  virtual std::string Send(const ChatRequest& request) = 0;
};

class LlmGateway {
 public:
  // Loads the stub fixture or prepares the HTTP client. Throws ConfigError
  // on an invalid config and IoError when the fixture cannot be read.
  explicit LlmGateway(GatewayConfig config);
  ~LlmGateway();
  LlmGateway(const LlmGateway&) = delete;
  LlmGateway& operator=(const LlmGateway&) = delete;

  const GatewayConfig& config() const { return config_; }

  // Sends with up to max_retries retries and exponential backoff; throws
  // TransportError once retries are exhausted. Every call is logged.
  std::string Complete(const ChatRequest& request, const RequestTag& tag = {});

  // Results come back in request order. The stub is consumed in that order;
  // the HTTP backend keeps at most max_in_flight requests open at once.
  std::vector<CompletionResult> CompleteBatch(const std::vector<ChatRequest>& requests,
                                              const std::vector<RequestTag>& tags);

  // Fills model, temperature and max_tokens from the config.
  ChatRequest MakeRequest(std::vector<ChatMessage> messages) const;

  std::vector<RequestLogEntry> log() const;
  void WriteLog(const std::filesystem::path& path) const;
  long http_requests() const { return http_requests_.load(); }

 private:
  RequestLogEntry Attempt(const ChatRequest& request, const RequestTag& tag);

  GatewayConfig config_;
  std::unique_ptr<ChatBackend> backend_;
  std::atomic<long> http_requests_{0};
  mutable std::mutex log_mutex_;
  std::vector<RequestLogEntry> log_;
};

// Backend that replays a fixture; thread-safe.
class StubBackend : public ChatBackend {
 public:
  explicit StubBackend(const nlohmann::json& fixture);
  static std::unique_ptr<StubBackend> FromFile(const std::filesystem::path& path);
  std::string Send(const ChatRequest& request) override;

 private:
  struct Entry {
    std::optional<std::string> response;
    std::string error;
  };
  std::map<std::string, Entry> by_fingerprint_;
  std::vector<Entry> sequence_;
  std::size_t next_ = 0;
  std::mutex mutex_;
};

// Replaces every {name} placeholder; text in braces that is not an
// identifier is left alone. Throws TemplateError naming every placeholder
// missing from `variables`.
std::string RenderPrompt(std::string_view templ, const std::map<std::string, std::string>& variables);

// First fenced or bare JSON value in the text, else the first integer token.
// Throws SchemaError when neither is present.
nlohmann::json ExtractStructured(std::string_view text);

}  // namespace egta

#endif  // EGTA_LLM_GATEWAY_HPP_
