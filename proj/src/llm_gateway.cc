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

#include "egta/llm_gateway.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <future>
#include <regex>
#include <set>
#include <thread>

#include <fmt/format.h>
#include <httplib.h>

#include "egta/errors.hpp"

namespace egta {
namespace {

using nlohmann::json;

bool IsIdentStart(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool IsIdentChar(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

struct ParsedUrl {
  std::string scheme_host_port;
  std::string path;
};

ParsedUrl ParseUrl(const std::string& url) {
  static const std::regex kUrl(R"(^(https?://[^/]+)(/.*)?$)");
  std::smatch m;
  if (!std::regex_match(url, m, kUrl)) throw ConfigError(fmt::format("gateway: malformed endpoint URL '{}'", url));
  return {m[1].str(), m[2].matched ? m[2].str() : "/"};
}

class HttpBackend : public ChatBackend {
 public:
  explicit HttpBackend(const GatewayConfig& config) : config_(config), url_(ParseUrl(config.endpoint)) {
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
    if (url_.scheme_host_port.starts_with("https")) {
      throw ConfigError("gateway: https endpoints need a build with OpenSSL");
    }
#endif
  }

  std::string Send(const ChatRequest& request) override {
    json body{{"model", request.model}, {"temperature", request.temperature}, {"max_tokens", request.max_tokens}};
    json messages = json::array();
    for (const ChatMessage& m : request.messages) messages.push_back({{"role", RoleName(m.role)}, {"content", m.content}});
    body["messages"] = std::move(messages);

    httplib::Client client(url_.scheme_host_port);
    const auto secs = static_cast<time_t>(config_.timeout_seconds);
    const auto usecs = static_cast<time_t>((config_.timeout_seconds - static_cast<double>(secs)) * 1e6);
    client.set_connection_timeout(secs, usecs);
    client.set_read_timeout(secs, usecs);
    client.set_write_timeout(secs, usecs);
    httplib::Headers headers;
    if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);

    auto res = client.Post(url_.path, headers, body.dump(), "application/json");
    if (!res) throw TransportError(fmt::format("POST {}: {}", config_.endpoint, httplib::to_string(res.error())));
    if (res->status != 200) throw TransportError(fmt::format("POST {}: HTTP {}", config_.endpoint, res->status));
    const json reply = json::parse(res->body, nullptr, false);
    if (reply.is_discarded()) throw TransportError("chat completion reply is not JSON");
    try {
      return reply.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const json::exception&) {
      throw TransportError("chat completion reply has no choices[0].message.content");
    }
  }

 private:
  GatewayConfig config_;
  ParsedUrl url_;
};

// Index one past the bracket that closes the one at `open`, or npos.
std::size_t MatchBracket(std::string_view s, std::size_t open) {
  int depth = 0;
  bool in_string = false;
  for (std::size_t i = open; i < s.size(); ++i) {
    const char c = s[i];
    if (in_string) {
      if (c == '\\') ++i;
      else if (c == '"') in_string = false;
      continue;
    }
    if (c == '"') in_string = true;
    else if (c == '{' || c == '[') ++depth;
    else if (c == '}' || c == ']') {
      if (--depth == 0) return i + 1;
    }
  }
  return std::string_view::npos;
}

std::optional<json> FirstBareJson(std::string_view s) {
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '{' && s[i] != '[') continue;
    const std::size_t end = MatchBracket(s, i);
    if (end == std::string_view::npos) continue;
    json v = json::parse(s.substr(i, end - i), nullptr, false);
    if (!v.is_discarded()) return v;
  }
  return std::nullopt;
}

std::optional<json> FirstFencedJson(std::string_view s) {
  std::size_t pos = 0;
  while ((pos = s.find("```", pos)) != std::string_view::npos) {
    std::size_t start = pos + 3;
    while (start < s.size() && IsIdentChar(s[start])) ++start;  // language tag
    const std::size_t close = s.find("```", start);
    if (close == std::string_view::npos) return std::nullopt;
    json v = json::parse(s.substr(start, close - start), nullptr, false);
    if (!v.is_discarded()) return v;
    if (auto inner = FirstBareJson(s.substr(start, close - start))) return inner;
    pos = close + 3;
  }
  return std::nullopt;
}

std::optional<long long> FirstInteger(std::string_view s) {
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (!std::isdigit(static_cast<unsigned char>(s[i]))) continue;
    if (i > 0 && std::isalpha(static_cast<unsigned char>(s[i - 1]))) {
      while (i + 1 < s.size() && std::isdigit(static_cast<unsigned char>(s[i + 1]))) ++i;
      continue;
    }
    std::size_t j = i;
    while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) ++j;
    const bool negative = i > 0 && s[i - 1] == '-' && (i == 1 || !std::isalnum(static_cast<unsigned char>(s[i - 2])));
    try {
      const long long v = std::stoll(std::string(s.substr(i, j - i)));
      return negative ? -v : v;
    } catch (const std::out_of_range&) {
      return std::nullopt;
    }
  }
  return std::nullopt;
}

}  // namespace

std::string_view RoleName(ChatRole role) { return role == ChatRole::kSystem ? "system" : "user"; }

void GatewayConfig::ApplyEnvironment() {
  if (const char* v = std::getenv(kEndpointEnv); v && *v && endpoint.empty()) endpoint = v;
  if (const char* v = std::getenv(kModelEnv); v && *v && (model.empty() || model == "stub")) model = v;
  if (const char* v = std::getenv(kApiKeyEnv); v && *v) api_key = v;
}

void GatewayConfig::Validate() const {
  if (max_retries < 0) throw ConfigError("gateway: max_retries must be >= 0");
  if (max_in_flight < 1) throw ConfigError("gateway: max_in_flight must be >= 1");
  if (!(timeout_seconds > 0)) throw ConfigError("gateway: timeout must be > 0");
  if (backoff_ms < 0) throw ConfigError("gateway: backoff_ms must be >= 0");
  if (!(temperature >= 0)) throw ConfigError("gateway: temperature must be >= 0");
  if (max_tokens < 1) throw ConfigError("gateway: max_tokens must be >= 1");
  if (backend == GatewayBackend::kHttp && endpoint.empty()) {
    throw ConfigError(fmt::format("gateway: http backend needs an endpoint (config or {})", kEndpointEnv));
  }
  if (backend == GatewayBackend::kStub && fixture.empty()) throw ConfigError("gateway: stub backend needs a fixture");
}

std::string Fingerprint(const ChatRequest& request) {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](std::string_view s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 1099511628211ULL;
    }
  };
  for (const ChatMessage& m : request.messages) {
    mix(RoleName(m.role));
    mix("\n");
    mix(m.content);
    mix("\n");
  }
  return fmt::format("{:016x}", h);
}

json LogEntryJson(const RequestLogEntry& e) {
  json messages = json::array();
  for (const ChatMessage& m : e.request.messages) messages.push_back({{"role", RoleName(m.role)}, {"content", m.content}});
  json j{{"year", e.tag.year},         {"household", e.tag.household}, {"pipeline", e.tag.pipeline},
         {"purpose", e.tag.purpose},   {"fingerprint", e.fingerprint}, {"model", e.request.model},
         {"messages", std::move(messages)}, {"attempts", e.attempts}};
  if (e.error.empty()) j["response"] = e.response;
  else j["error"] = e.error;
  return j;
}

StubBackend::StubBackend(const json& fixture) {
  if (!fixture.is_array()) throw ConfigError("stub fixture must be a JSON array");
  for (const json& item : fixture) {
    Entry e;
    if (item.is_string()) {
      e.response = item.get<std::string>();
      sequence_.push_back(std::move(e));
      continue;
    }
    if (!item.is_object()) throw ConfigError("stub fixture entries must be objects or strings");
    if (item.contains("response") && item["response"].is_string()) e.response = item["response"].get<std::string>();
    else if (item.contains("error") && item["error"].is_string()) e.error = item["error"].get<std::string>();
    else throw ConfigError("stub fixture entry needs a 'response' or 'error' string");
    if (item.contains("fingerprint") && item["fingerprint"].is_string()) {
      by_fingerprint_[item["fingerprint"].get<std::string>()] = std::move(e);
    } else {
      sequence_.push_back(std::move(e));
    }
  }
}

std::unique_ptr<StubBackend> StubBackend::FromFile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(fmt::format("cannot open stub fixture {}", path.string()));
  const json fixture = json::parse(in, nullptr, false);
  if (fixture.is_discarded()) throw ConfigError(fmt::format("stub fixture {} is not valid JSON", path.string()));
  return std::make_unique<StubBackend>(fixture);
}

std::string StubBackend::Send(const ChatRequest& request) {
  std::lock_guard lock(mutex_);
  const Entry* e = nullptr;
  if (auto it = by_fingerprint_.find(Fingerprint(request)); it != by_fingerprint_.end()) {
    e = &it->second;
  } else {
    if (sequence_.empty()) throw TransportError("stub fixture has no sequential entries");
    e = &sequence_[next_];
    next_ = (next_ + 1) % sequence_.size();
  }
  if (!e->response) throw TransportError(fmt::format("stub: {}", e->error));
  return *e->response;
}

LlmGateway::LlmGateway(GatewayConfig config) : config_(std::move(config)) {
  config_.Validate();
  if (config_.backend == GatewayBackend::kStub) backend_ = StubBackend::FromFile(config_.fixture);
  else backend_ = std::make_unique<HttpBackend>(config_);
}

LlmGateway::~LlmGateway() = default;

ChatRequest LlmGateway::MakeRequest(std::vector<ChatMessage> messages) const {
  return ChatRequest{config_.model, std::move(messages), config_.temperature, config_.max_tokens};
}

RequestLogEntry LlmGateway::Attempt(const ChatRequest& request, const RequestTag& tag) {
  RequestLogEntry entry{tag, Fingerprint(request), request, {}, {}, 0};
  for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
    if (attempt > 0 && config_.backoff_ms > 0) {
      std::this_thread::sleep_for(std::chrono::milliseconds(static_cast<long>(config_.backoff_ms) << (attempt - 1)));
    }
    ++entry.attempts;
    if (config_.backend == GatewayBackend::kHttp) ++http_requests_;
    try {
      entry.response = backend_->Send(request);
      entry.error.clear();
      return entry;
    } catch (const TransportError& e) {
      entry.error = e.what();
    }
  }
  return entry;
}

std::string LlmGateway::Complete(const ChatRequest& request, const RequestTag& tag) {
  RequestLogEntry entry = Attempt(request, tag);
  {
    std::lock_guard lock(log_mutex_);
    log_.push_back(entry);
  }
  if (!entry.error.empty()) {
    throw TransportError(fmt::format("after {} attempts: {}", entry.attempts, entry.error));
  }
  return entry.response;
}

std::vector<CompletionResult> LlmGateway::CompleteBatch(const std::vector<ChatRequest>& requests,
                                                        const std::vector<RequestTag>& tags) {
  if (tags.size() != requests.size()) throw ConfigError("gateway: one tag per request required");
  std::vector<RequestLogEntry> entries(requests.size());
  if (config_.backend == GatewayBackend::kStub) {
    for (std::size_t i = 0; i < requests.size(); ++i) entries[i] = Attempt(requests[i], tags[i]);
  } else {
    const std::size_t window = static_cast<std::size_t>(config_.max_in_flight);
    for (std::size_t begin = 0; begin < requests.size(); begin += window) {
      const std::size_t end = std::min(requests.size(), begin + window);
      std::vector<std::future<RequestLogEntry>> inflight;
      for (std::size_t i = begin; i < end; ++i) {
        inflight.push_back(std::async(std::launch::async, [this, &requests, &tags, i] { return Attempt(requests[i], tags[i]); }));
      }
      for (std::size_t i = begin; i < end; ++i) entries[i] = inflight[i - begin].get();
    }
  }
  std::vector<CompletionResult> out(requests.size());
  std::lock_guard lock(log_mutex_);
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (entries[i].error.empty()) out[i].text = entries[i].response;
    else out[i].error = fmt::format("after {} attempts: {}", entries[i].attempts, entries[i].error);
    log_.push_back(std::move(entries[i]));
  }
  return out;
}

std::vector<RequestLogEntry> LlmGateway::log() const {
  std::lock_guard lock(log_mutex_);
  return log_;
}

void LlmGateway::WriteLog(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(fmt::format("cannot write request log {}", path.string()));
  for (const RequestLogEntry& e : log()) out << LogEntryJson(e).dump() << '\n';
  if (!out) throw IoError(fmt::format("error writing request log {}", path.string()));
}

std::string RenderPrompt(std::string_view templ, const std::map<std::string, std::string>& variables) {
  std::string out;
  std::set<std::string> missing;
  for (std::size_t i = 0; i < templ.size(); ++i) {
    if (templ[i] == '{' && i + 1 < templ.size() && IsIdentStart(templ[i + 1])) {
      std::size_t j = i + 1;
      while (j < templ.size() && IsIdentChar(templ[j])) ++j;
      if (j < templ.size() && templ[j] == '}') {
        const std::string name(templ.substr(i + 1, j - i - 1));
        if (auto it = variables.find(name); it != variables.end()) out += it->second;
        else missing.insert(name);
        i = j;
        continue;
      }
    }
    out.push_back(templ[i]);
  }
  if (!missing.empty()) {
    std::string names;
    for (const auto& n : missing) names += (names.empty() ? "" : ", ") + n;
    throw TemplateError(fmt::format("prompt template has unresolved placeholders: {}", names));
  }
  return out;
}

json ExtractStructured(std::string_view text) {
  if (auto v = FirstFencedJson(text)) return *v;
  if (auto v = FirstBareJson(text)) return *v;
  if (auto v = FirstInteger(text)) return json(*v);
  throw SchemaError("reply holds no JSON value or integer", std::string(text));
}

}  // namespace egta
