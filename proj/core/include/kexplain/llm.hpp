#pragma once

// Chat-completion access for every agent role.
//
// A ChatProvider is the transport (HTTP endpoint, scripted mock, cassette
// replay). The Gateway wraps a provider with the policy every caller shares:
// request validation, the context-window check, and retry with exponential
// backoff on transient failures.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "kexplain/errors.hpp"

namespace kexplain::llm {

enum class Role { user, assistant };
enum class ReasoningEffort { low, medium, high };

const char* to_string(Role r);
const char* to_string(ReasoningEffort e);

struct Message {
  Role role = Role::user;
  std::string content;
  bool operator==(const Message&) const = default;
};

struct ChatRequest {
  std::string system_prompt;
  std::vector<Message> messages;
  // nullopt selects the provider's default temperature.
  std::optional<double> temperature;
  ReasoningEffort reasoning_effort = ReasoningEffort::high;
  int max_output_tokens = 16384;

  bool operator==(const ChatRequest&) const = default;
};

struct TokenUsage {
  int prompt = 0;
  int completion = 0;
  bool operator==(const TokenUsage&) const = default;
};

struct ChatResponse {
  std::string content;
  TokenUsage token_usage;
  std::string provider_tag;
  bool refusal = false;
  bool operator==(const ChatResponse&) const = default;
};

/// Throws PreconditionError when `messages` is empty, the first message is
/// not from the user, the temperature is negative or the token cap is not
/// positive.
void validate_request(const ChatRequest& request);

/// Canonical serialization of the semantic part of a request: system prompt,
/// messages and temperature. max_output_tokens is deliberately not part of it.
std::string canonical_request_text(const ChatRequest& request);

/// Hex SHA-256 of canonical_request_text(); stable across processes.
std::string request_hash(const ChatRequest& request);

/// Rough prompt-size estimate (4 bytes per token, rounded up).
int estimate_prompt_tokens(const ChatRequest& request);

nlohmann::json request_to_json(const ChatRequest& request);
ChatRequest request_from_json(const nlohmann::json& j);
nlohmann::json response_to_json(const ChatResponse& response);
ChatResponse response_from_json(const nlohmann::json& j);

// ---------------------------------------------------------------------------
// Errors

class GatewayError : public Error {
 public:
  using Error::Error;
};

/// Transport-level failure; `status` is the HTTP status or 0 when no
/// response arrived at all.
class TransportError : public GatewayError {
 public:
  TransportError(int status, const std::string& detail);
  int status() const { return status_; }
  bool transient() const;

 private:
  int status_;
};

class RateLimited : public GatewayError {
 public:
  explicit RateLimited(std::chrono::milliseconds retry_after);
  std::chrono::milliseconds retry_after() const { return retry_after_; }

 private:
  std::chrono::milliseconds retry_after_;
};

class ContextOverflow : public GatewayError {
 public:
  ContextOverflow(int prompt_tokens, int limit);
  int prompt_tokens() const { return prompt_tokens_; }
  int limit() const { return limit_; }

 private:
  int prompt_tokens_;
  int limit_;
};

class Refusal : public GatewayError {
 public:
  using GatewayError::GatewayError;
};

class ScriptExhausted : public GatewayError {
 public:
  explicit ScriptExhausted(std::size_t calls);
};

class CassetteMiss : public GatewayError {
 public:
  explicit CassetteMiss(std::string hash);
  const std::string& hash() const { return hash_; }

 private:
  std::string hash_;
};

// ---------------------------------------------------------------------------
// Providers

class ChatProvider {
 public:
  virtual ~ChatProvider() = default;
  virtual ChatResponse complete(const ChatRequest& request) = 0;
  virtual std::string tag() const = 0;
};

/// Returns a fixed sequence of responses, one per call, in call order.
/// Thread safe; calls beyond the script throw ScriptExhausted and still
/// count in calls().
class ScriptedProvider : public ChatProvider {
 public:
  /// A scripted step either yields a response text or throws the stored
  /// error when reached.
  using Step = std::function<std::string(const ChatRequest&)>;

  explicit ScriptedProvider(std::vector<std::string> responses, std::string tag = "scripted");
  explicit ScriptedProvider(std::vector<Step> steps, std::string tag = "scripted");

  ChatResponse complete(const ChatRequest& request) override;
  std::string tag() const override { return tag_; }

  std::size_t calls() const;
  std::vector<ChatRequest> requests() const;

 private:
  mutable std::mutex mu_;
  std::vector<Step> steps_;
  std::vector<ChatRequest> seen_;
  std::string tag_;
};

/// Delegates every call to a function; used for rule-based mocks.
class FunctionProvider : public ChatProvider {
 public:
  using Fn = std::function<std::string(const ChatRequest&)>;
  explicit FunctionProvider(Fn fn, std::string tag = "function");
  ChatResponse complete(const ChatRequest& request) override;
  std::string tag() const override { return tag_; }

 private:
  Fn fn_;
  std::string tag_;
};

struct CassetteEntry {
  std::string request_hash;
  ChatRequest request;
  ChatResponse response;
};

/// Request-hash keyed store of recorded responses. Thread safe.
class Cassette {
 public:
  Cassette() = default;
  Cassette(const Cassette& other);
  Cassette& operator=(const Cassette& other);

  static Cassette load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;

  static Cassette from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;

  std::optional<ChatResponse> find(const std::string& hash) const;
  void append(const ChatRequest& request, const ChatResponse& response);
  std::size_t size() const;

 private:
  mutable std::mutex mu_;
  std::vector<CassetteEntry> entries_;
};

/// Pure lookup into a cassette; misses throw CassetteMiss.
class ReplayProvider : public ChatProvider {
 public:
  explicit ReplayProvider(std::shared_ptr<const Cassette> cassette);
  ChatResponse complete(const ChatRequest& request) override;
  std::string tag() const override { return "replay"; }

 private:
  std::shared_ptr<const Cassette> cassette_;
};

/// Forwards to a live provider and appends every exchange to a cassette.
/// When `path` is set, the cassette is saved after each exchange so a run
/// that aborts still leaves the completed calls on disk.
class RecordingProvider : public ChatProvider {
 public:
  RecordingProvider(std::shared_ptr<ChatProvider> live, std::shared_ptr<Cassette> cassette,
                    std::optional<std::filesystem::path> path = std::nullopt);
  ChatResponse complete(const ChatRequest& request) override;
  std::string tag() const override { return live_->tag(); }

 private:
  std::shared_ptr<ChatProvider> live_;
  std::shared_ptr<Cassette> cassette_;
  std::optional<std::filesystem::path> path_;
  std::mutex save_mu_;
};

ChatResponse record(ChatProvider& live, Cassette& cassette, const ChatRequest& request);
ChatResponse replay(const Cassette& cassette, const ChatRequest& request);

// ---------------------------------------------------------------------------
// HTTP provider (OpenAI-compatible /chat/completions)

struct HttpProviderConfig {
  std::string endpoint = "https://api.openai.com/v1";
  std::string model = "gpt-oss-120b";
  // Name of the environment variable holding the credential. Credentials are
  // never read from configuration files.
  std::string api_key_env = "KEXPLAIN_API_KEY";
  std::optional<double> default_temperature;
  std::chrono::seconds timeout{600};
};

class HttpProvider : public ChatProvider {
 public:
  explicit HttpProvider(HttpProviderConfig config);
  ChatResponse complete(const ChatRequest& request) override;
  std::string tag() const override { return "http:" + config_.model; }

  /// Request body sent to the endpoint; exposed for tests.
  nlohmann::json build_body(const ChatRequest& request) const;
  /// Parses a /chat/completions response body.
  static ChatResponse parse_body(const std::string& body, const std::string& tag);

 private:
  HttpProviderConfig config_;
  std::string api_key_;
};

// ---------------------------------------------------------------------------
// Gateway

struct GatewayOptions {
  int context_limit_tokens = 128000;
  int max_retries = 4;
  std::chrono::milliseconds initial_backoff{500};
  std::chrono::milliseconds max_backoff{30000};
  // Replaced in tests to avoid real sleeping.
  std::function<void(std::chrono::milliseconds)> sleep;
};

class Gateway {
 public:
  explicit Gateway(std::shared_ptr<ChatProvider> provider, GatewayOptions options = {});

  /// Validates the request, rejects it with ContextOverflow before any
  /// provider call when it exceeds the context limit, and retries transient
  /// transport failures and rate limits with exponential backoff.
  ChatResponse complete(const ChatRequest& request) const;

  ChatProvider& provider() const { return *provider_; }
  const GatewayOptions& options() const { return options_; }

 private:
  std::shared_ptr<ChatProvider> provider_;
  GatewayOptions options_;
};

}  // namespace kexplain::llm
