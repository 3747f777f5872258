#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "kexplain/llm.hpp"
#include "kexplain/model.hpp"

namespace kexplain::testing {

inline std::filesystem::path fixture(const std::string& rel) {
  return std::filesystem::path(KEXPLAIN_FIXTURES) / rel;
}

/// Agent role addressed by a request, recognised from the opening words of
/// its prompt template.
inline std::string role_of(const llm::ChatRequest& req) {
  static const std::vector<std::pair<std::string, std::string>> openings = {
      {"Describe the following source file", "describe"},
      {"We are building an understanding", "select_file"},
      {"Refine the running summary", "summarize"},
      {"Before looking at any profile data", "hypothesize"},
      {"We are analyzing profiles", "select_profiles"},
      {"Select the profiler metrics", "select_metrics"},
      {"Produce a detailed performance analysis", "analyze"},
      {"DrGPU, a rule-based", "drgpu"},
      {"Combine the performance analyses", "aggregate"},
      {"Compare the final performance explanation", "review"},
      {"Answer the multiple-choice question", "mcq"},
      {"Optimize the performance", "opt"},
      {"Classify the optimization techniques", "label"},
  };
  const std::string& text = req.messages.front().content;
  for (const auto& [prefix, role] : openings) {
    if (text.rfind(prefix, 0) == 0) return role;
  }
  return "unknown";
}

/// Routes each request to a per-role reply function; roles without a
/// handler get `fallback`.
class RoleRouter {
 public:
  using Fn = std::function<std::string(const llm::ChatRequest&)>;

  RoleRouter& on(const std::string& role, Fn fn) {
    handlers_[role] = std::move(fn);
    return *this;
  }
  RoleRouter& on(const std::string& role, std::string reply) {
    handlers_[role] = [reply](const llm::ChatRequest&) { return reply; };
    return *this;
  }

  std::string operator()(const llm::ChatRequest& req) {
    std::string role = role_of(req);
    ++calls_[role];
    if (auto it = handlers_.find(role); it != handlers_.end()) return it->second(req);
    return fallback_;
  }

  int calls(const std::string& role) const {
    auto it = calls_.find(role);
    return it == calls_.end() ? 0 : it->second;
  }

  std::string fallback_ = "no structured output";

 private:
  std::map<std::string, Fn> handlers_;
  std::map<std::string, int> calls_;
};

inline std::shared_ptr<llm::Gateway> gateway_for(std::shared_ptr<llm::ChatProvider> provider) {
  llm::GatewayOptions opts;
  opts.sleep = [](std::chrono::milliseconds) {};
  return std::make_shared<llm::Gateway>(std::move(provider), opts);
}

inline std::shared_ptr<llm::Gateway> router_gateway(std::shared_ptr<RoleRouter> router) {
  return gateway_for(std::make_shared<llm::FunctionProvider>(
      [router](const llm::ChatRequest& r) { return (*router)(r); }));
}

inline MetricValue num_metric(const std::string& name, double v, std::optional<std::string> unit = std::nullopt) {
  MetricValue m;
  m.name = name;
  m.value = v;
  m.unit = std::move(unit);
  m.kind = infer_metric_kind(m.unit, true);
  m.unchecked = m.kind == MetricKind::percent && (v < 0.0 || v > 100.0);
  return m;
}

/// Bundle with one numeric knob `block_size` and profiles `p1..pn`.
inline ProfileBundle small_bundle(int profiles, int sources = 1) {
  ProfileBundle b;
  b.manifest.app_name = "app";
  b.manifest.kernel_name = "kern";
  b.manifest.knobs = {{"block_size", KnobType::numeric, "threads"}};
  b.manifest.defaults = {{"block_size", 128.0}, {kGpuArchKey, std::string("sm_90")}};
  for (int i = 1; i <= profiles; ++i) {
    KernelProfile p;
    p.id = "p" + std::to_string(i);
    p.app_name = "app";
    p.kernel_name = "kern";
    p.config.profile_id = p.id;
    p.config.gpu_arch = "sm_90";
    p.config.knobs["block_size"] = 32.0 * i;
    p.metrics = {num_metric("dram__throughput", 1.5 * i, "%"), num_metric("gpu__time_duration.sum", 10.0 + i, "us"),
                 num_metric("sm__warps_active", 20.0 + i, "%")};
    b.profiles.push_back(p);
  }
  for (int i = 1; i <= sources; ++i) {
    b.sources.push_back({"src/f" + std::to_string(i) + ".cu", "__global__ void k" + std::to_string(i) + "() {}\n"});
  }
  return b;
}

inline std::string json_block(const std::string& body) { return "Reasoning.\n\n```json\n" + body + "\n```\n"; }

}  // namespace kexplain::testing
