#include "kexplain/llm.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <thread>

#include "kexplain/ingest.hpp"

using nlohmann::json;

namespace kexplain::llm {

const char* to_string(Role r) { return r == Role::user ? "user" : "assistant"; }

const char* to_string(ReasoningEffort e) {
  switch (e) {
    case ReasoningEffort::low: return "low";
    case ReasoningEffort::medium: return "medium";
    case ReasoningEffort::high: return "high";
  }
  return "high";
}

namespace {

Role role_from_string(const std::string& s) {
  if (s == "user") return Role::user;
  if (s == "assistant") return Role::assistant;
  throw Error("unknown chat role '" + s + "'");
}

ReasoningEffort effort_from_string(const std::string& s) {
  if (s == "low") return ReasoningEffort::low;
  if (s == "medium") return ReasoningEffort::medium;
  if (s == "high") return ReasoningEffort::high;
  throw Error("unknown reasoning effort '" + s + "'");
}

std::string sha256_hex(const std::string& data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 digest failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0xf]);
  }
  return out;
}

}  // namespace

void validate_request(const ChatRequest& request) {
  if (request.messages.empty()) throw PreconditionError("chat request has no messages");
  if (request.messages.front().role != Role::user) {
    throw PreconditionError("first chat message must come from the user");
  }
  if (request.temperature && *request.temperature < 0.0) {
    throw PreconditionError("temperature must be >= 0");
  }
  if (request.max_output_tokens <= 0) throw PreconditionError("max_output_tokens must be positive");
}

std::string canonical_request_text(const ChatRequest& request) {
  json j;
  j["system_prompt"] = request.system_prompt;
  j["messages"] = json::array();
  for (const auto& m : request.messages) {
    j["messages"].push_back({{"role", to_string(m.role)}, {"content", m.content}});
  }
  j["temperature"] = request.temperature ? json(*request.temperature) : json(nullptr);
  return j.dump();
}

std::string request_hash(const ChatRequest& request) {
  return sha256_hex(canonical_request_text(request));
}

int estimate_prompt_tokens(const ChatRequest& request) {
  std::size_t bytes = request.system_prompt.size();
  for (const auto& m : request.messages) bytes += m.content.size();
  return static_cast<int>((bytes + 3) / 4);
}

json request_to_json(const ChatRequest& r) {
  json j;
  j["system_prompt"] = r.system_prompt;
  j["messages"] = json::array();
  for (const auto& m : r.messages) {
    j["messages"].push_back({{"role", to_string(m.role)}, {"content", m.content}});
  }
  j["temperature"] = r.temperature ? json(*r.temperature) : json(nullptr);
  j["reasoning_effort"] = to_string(r.reasoning_effort);
  j["max_output_tokens"] = r.max_output_tokens;
  return j;
}

ChatRequest request_from_json(const json& j) {
  ChatRequest r;
  r.system_prompt = j.at("system_prompt").get<std::string>();
  for (const auto& m : j.at("messages")) {
    r.messages.push_back({role_from_string(m.at("role").get<std::string>()),
                          m.at("content").get<std::string>()});
  }
  if (j.contains("temperature") && !j["temperature"].is_null()) {
    r.temperature = j["temperature"].get<double>();
  }
  if (j.contains("reasoning_effort")) {
    r.reasoning_effort = effort_from_string(j["reasoning_effort"].get<std::string>());
  }
  if (j.contains("max_output_tokens")) r.max_output_tokens = j["max_output_tokens"].get<int>();
  return r;
}

json response_to_json(const ChatResponse& r) {
  return {{"content", r.content},
          {"token_usage", {{"prompt", r.token_usage.prompt}, {"completion", r.token_usage.completion}}},
          {"provider_tag", r.provider_tag},
          {"refusal", r.refusal}};
}

ChatResponse response_from_json(const json& j) {
  ChatResponse r;
  r.content = j.at("content").get<std::string>();
  if (j.contains("token_usage")) {
    r.token_usage.prompt = j["token_usage"].value("prompt", 0);
    r.token_usage.completion = j["token_usage"].value("completion", 0);
  }
  r.provider_tag = j.value("provider_tag", "");
  r.refusal = j.value("refusal", false);
  return r;
}

// ---------------------------------------------------------------------------

TransportError::TransportError(int status, const std::string& detail)
    : GatewayError("LLM transport error (status " + std::to_string(status) + "): " + detail),
      status_(status) {}

bool TransportError::transient() const {
  return status_ == 0 || status_ == 408 || status_ == 409 || status_ >= 500;
}

RateLimited::RateLimited(std::chrono::milliseconds retry_after)
    : GatewayError("LLM endpoint rate limited; retry after " +
                   std::to_string(retry_after.count()) + " ms"),
      retry_after_(retry_after) {}

ContextOverflow::ContextOverflow(int prompt_tokens, int limit)
    : GatewayError("prompt of ~" + std::to_string(prompt_tokens) +
                   " tokens exceeds the context limit of " + std::to_string(limit)),
      prompt_tokens_(prompt_tokens),
      limit_(limit) {}

ScriptExhausted::ScriptExhausted(std::size_t calls)
    : GatewayError("scripted provider exhausted after " + std::to_string(calls) + " responses") {}

CassetteMiss::CassetteMiss(std::string hash)
    : GatewayError("no cassette entry for request " + hash), hash_(std::move(hash)) {}

// ---------------------------------------------------------------------------

namespace {

ChatResponse text_response(std::string content, const std::string& tag, const ChatRequest& req) {
  ChatResponse r;
  r.token_usage.prompt = estimate_prompt_tokens(req);
  r.token_usage.completion = static_cast<int>((content.size() + 3) / 4);
  r.content = std::move(content);
  r.provider_tag = tag;
  r.refusal = r.content.empty();
  return r;
}

}  // namespace

ScriptedProvider::ScriptedProvider(std::vector<std::string> responses, std::string tag)
    : tag_(std::move(tag)) {
  for (auto& r : responses) {
    steps_.push_back([text = std::move(r)](const ChatRequest&) { return text; });
  }
}

ScriptedProvider::ScriptedProvider(std::vector<Step> steps, std::string tag)
    : steps_(std::move(steps)), tag_(std::move(tag)) {}

ChatResponse ScriptedProvider::complete(const ChatRequest& request) {
  Step step;
  {
    std::lock_guard lock(mu_);
    std::size_t index = seen_.size();
    seen_.push_back(request);
    if (index >= steps_.size()) throw ScriptExhausted(steps_.size());
    step = steps_[index];
  }
  return text_response(step(request), tag_, request);
}

std::size_t ScriptedProvider::calls() const {
  std::lock_guard lock(mu_);
  return seen_.size();
}

std::vector<ChatRequest> ScriptedProvider::requests() const {
  std::lock_guard lock(mu_);
  return seen_;
}

FunctionProvider::FunctionProvider(Fn fn, std::string tag) : fn_(std::move(fn)), tag_(std::move(tag)) {}

ChatResponse FunctionProvider::complete(const ChatRequest& request) {
  return text_response(fn_(request), tag_, request);
}

// ---------------------------------------------------------------------------

Cassette::Cassette(const Cassette& other) {
  std::lock_guard lock(other.mu_);
  entries_ = other.entries_;
}

Cassette& Cassette::operator=(const Cassette& other) {
  if (this == &other) return *this;
  std::vector<CassetteEntry> copy;
  {
    std::lock_guard lock(other.mu_);
    copy = other.entries_;
  }
  std::lock_guard lock(mu_);
  entries_ = std::move(copy);
  return *this;
}

Cassette Cassette::load(const std::filesystem::path& path) {
  json j;
  try {
    j = json::parse(read_text_file(path));
  } catch (const json::parse_error& e) {
    throw Error("cassette " + path.string() + " is not valid JSON: " + e.what());
  }
  return from_json(j);
}

void Cassette::save(const std::filesystem::path& path) const {
  write_text_file(path, to_json().dump(2) + "\n");
}

Cassette Cassette::from_json(const json& j) {
  if (!j.is_array()) throw Error("cassette must be a JSON array");
  Cassette c;
  for (const auto& e : j) {
    CassetteEntry entry;
    entry.request = request_from_json(e.at("request"));
    entry.response = response_from_json(e.at("response"));
    entry.request_hash = e.value("request_hash", request_hash(entry.request));
    c.entries_.push_back(std::move(entry));
  }
  return c;
}

json Cassette::to_json() const {
  std::lock_guard lock(mu_);
  json j = json::array();
  for (const auto& e : entries_) {
    j.push_back({{"request_hash", e.request_hash},
                 {"request", request_to_json(e.request)},
                 {"response", response_to_json(e.response)}});
  }
  return j;
}

std::optional<ChatResponse> Cassette::find(const std::string& hash) const {
  std::lock_guard lock(mu_);
  auto it = std::find_if(entries_.begin(), entries_.end(),
                         [&](const CassetteEntry& e) { return e.request_hash == hash; });
  if (it == entries_.end()) return std::nullopt;
  return it->response;
}

void Cassette::append(const ChatRequest& request, const ChatResponse& response) {
  std::string hash = request_hash(request);
  std::lock_guard lock(mu_);
  entries_.push_back({std::move(hash), request, response});
}

std::size_t Cassette::size() const {
  std::lock_guard lock(mu_);
  return entries_.size();
}

ChatResponse record(ChatProvider& live, Cassette& cassette, const ChatRequest& request) {
  ChatResponse response = live.complete(request);
  cassette.append(request, response);
  return response;
}

ChatResponse replay(const Cassette& cassette, const ChatRequest& request) {
  std::string hash = request_hash(request);
  if (auto r = cassette.find(hash)) return *r;
  throw CassetteMiss(hash);
}

ReplayProvider::ReplayProvider(std::shared_ptr<const Cassette> cassette)
    : cassette_(std::move(cassette)) {}

ChatResponse ReplayProvider::complete(const ChatRequest& request) {
  return replay(*cassette_, request);
}

RecordingProvider::RecordingProvider(std::shared_ptr<ChatProvider> live,
                                     std::shared_ptr<Cassette> cassette,
                                     std::optional<std::filesystem::path> path)
    : live_(std::move(live)), cassette_(std::move(cassette)), path_(std::move(path)) {}

ChatResponse RecordingProvider::complete(const ChatRequest& request) {
  ChatResponse response = record(*live_, *cassette_, request);
  if (path_) {
    std::lock_guard lock(save_mu_);
    cassette_->save(*path_);
  }
  return response;
}

// ---------------------------------------------------------------------------

Gateway::Gateway(std::shared_ptr<ChatProvider> provider, GatewayOptions options)
    : provider_(std::move(provider)), options_(std::move(options)) {
  if (!provider_) throw PreconditionError("gateway requires a provider");
  if (!options_.sleep) {
    options_.sleep = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
  }
}

ChatResponse Gateway::complete(const ChatRequest& request) const {
  validate_request(request);
  const int tokens = estimate_prompt_tokens(request);
  if (tokens > options_.context_limit_tokens) {
    throw ContextOverflow(tokens, options_.context_limit_tokens);
  }
  auto backoff = options_.initial_backoff;
  for (int attempt = 0;; ++attempt) {
    try {
      ChatResponse response = provider_->complete(request);
      if (response.refusal) {
        throw Refusal("model refused or returned no content (" + response.provider_tag + ")");
      }
      return response;
    } catch (const TransportError& e) {
      if (!e.transient() || attempt >= options_.max_retries) throw;
      options_.sleep(backoff);
    } catch (const RateLimited& e) {
      if (attempt >= options_.max_retries) throw;
      options_.sleep(std::max(backoff, e.retry_after()));
    }
    backoff = std::min(backoff * 2, options_.max_backoff);
  }
}

}  // namespace kexplain::llm
