#include <httplib.h>

#include <cstdlib>
#include <regex>

#include "kexplain/llm.hpp"

using nlohmann::json;

namespace kexplain::llm {

namespace {

struct Endpoint {
  std::string origin;     // scheme://host[:port]
  std::string base_path;  // e.g. /v1
};

Endpoint split_endpoint(const std::string& url) {
  static const std::regex re(R"(^(https?://[^/]+)(/.*)?$)");
  std::smatch m;
  if (!std::regex_match(url, m, re)) throw Error("invalid LLM endpoint URL '" + url + "'");
  std::string path = m[2].matched ? m[2].str() : "";
  while (!path.empty() && path.back() == '/') path.pop_back();
  return {m[1].str(), path};
}

}  // namespace

HttpProvider::HttpProvider(HttpProviderConfig config) : config_(std::move(config)) {
  if (!config_.api_key_env.empty()) {
    if (const char* key = std::getenv(config_.api_key_env.c_str())) api_key_ = key;
  }
}

json HttpProvider::build_body(const ChatRequest& request) const {
  json body;
  body["model"] = config_.model;
  body["messages"] = json::array();
  if (!request.system_prompt.empty()) {
    body["messages"].push_back({{"role", "system"}, {"content", request.system_prompt}});
  }
  for (const auto& m : request.messages) {
    body["messages"].push_back({{"role", to_string(m.role)}, {"content", m.content}});
  }
  if (auto t = request.temperature ? request.temperature : config_.default_temperature) {
    body["temperature"] = *t;
  }
  body["reasoning_effort"] = to_string(request.reasoning_effort);
  body["max_completion_tokens"] = request.max_output_tokens;
  return body;
}

ChatResponse HttpProvider::parse_body(const std::string& body, const std::string& tag) {
  json j;
  try {
    j = json::parse(body);
  } catch (const json::parse_error& e) {
    throw TransportError(200, std::string("unparseable response body: ") + e.what());
  }
  ChatResponse r;
  r.provider_tag = tag;
  try {
    const json& message = j.at("choices").at(0).at("message");
    if (message.contains("content") && message["content"].is_string()) {
      r.content = message["content"].get<std::string>();
    }
    if (message.contains("refusal") && message["refusal"].is_string() &&
        !message["refusal"].get<std::string>().empty()) {
      r.refusal = true;
    }
  } catch (const json::exception& e) {
    throw TransportError(200, std::string("malformed completion: ") + e.what());
  }
  if (j.contains("usage")) {
    r.token_usage.prompt = j["usage"].value("prompt_tokens", 0);
    r.token_usage.completion = j["usage"].value("completion_tokens", 0);
  }
  if (r.content.empty()) r.refusal = true;
  return r;
}

ChatResponse HttpProvider::complete(const ChatRequest& request) {
  Endpoint ep = split_endpoint(config_.endpoint);
  httplib::Client client(ep.origin);
  client.set_connection_timeout(std::chrono::seconds(30));
  client.set_read_timeout(config_.timeout);
  client.set_write_timeout(std::chrono::seconds(60));
  httplib::Headers headers;
  if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);

  auto result = client.Post(ep.base_path + "/chat/completions", headers,
                            build_body(request).dump(), "application/json");
  if (!result) throw TransportError(0, httplib::to_string(result.error()));
  if (result->status == 429) {
    long seconds = 1;
    if (result->has_header("Retry-After")) {
      seconds = std::strtol(result->get_header_value("Retry-After").c_str(), nullptr, 10);
    }
    throw RateLimited(std::chrono::milliseconds(std::max(1L, seconds) * 1000));
  }
  if (result->status < 200 || result->status >= 300) {
    throw TransportError(result->status, result->body.substr(0, 500));
  }
  return parse_body(result->body, tag());
}

}  // namespace kexplain::llm
