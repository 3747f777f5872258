#pragma once

// End-to-end explanation run: source inspection, profile inspection,
// aggregation and review. Every role invocation is appended to a trace that
// can be written to disk as it happens.

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "kexplain/drgpu.hpp"
#include "kexplain/llm.hpp"
#include "kexplain/model.hpp"
#include "kexplain/roles.hpp"

namespace kexplain {

struct RoleToggles {
  bool metric_selector = true;
  bool profile_selector = true;
  bool drgpu_evaluator = false;
  bool reviewer = true;
};

/// Names accepted by `--enable` / `--disable`, in pipeline order.
const std::vector<std::string>& role_toggle_names();
/// Throws Error for an unknown name.
void set_role_toggle(RoleToggles& toggles, const std::string& name, bool enabled);

struct ProviderConfig {
  // "http", "scripted" (JSON array of reply texts in `responses`) or
  // "replay" (cassette file in `cassette`).
  std::string kind = "http";
  llm::HttpProviderConfig http;
  std::optional<std::filesystem::path> responses;
  std::optional<std::filesystem::path> cassette;
  int context_limit_tokens = 128000;
  int max_retries = 4;
};

struct PipelineConfig {
  RoleToggles roles;
  std::optional<int> max_passes;  // unset: max(4, 2 * |profiles|)
  int extra_passes = 0;           // passes allowed after full coverage
  roles::PromptSettings prompts;
  drgpu::AdapterConfig drgpu;
  std::optional<std::filesystem::path> assets_dir;
  ProviderConfig provider;

  int effective_max_passes(std::size_t profile_count) const;
};

/// Reads a configuration file; relative paths inside it resolve against the
/// file's directory. Unknown keys are rejected.
PipelineConfig load_pipeline_config(const std::filesystem::path& path);
PipelineConfig pipeline_config_from_json(const nlohmann::json& j,
                                         const std::filesystem::path& base_dir = {});
nlohmann::json pipeline_config_to_json(const PipelineConfig& config);

std::shared_ptr<llm::ChatProvider> make_provider(const ProviderConfig& config);
llm::GatewayOptions gateway_options(const ProviderConfig& config);

struct TraceEntry {
  int index = 0;
  std::string role;
  nlohmann::json data;
};

/// Ordered record of role invocations. With a directory, each entry is
/// written as `NNN-<role>.json` immediately, so an aborted run leaves the
/// completed prefix on disk.
class Trace {
 public:
  Trace() = default;
  explicit Trace(std::filesystem::path dir);

  template <class T>
  void record(const roles::RoleOutput<T>& out, nlohmann::json parsed) {
    append(out.role_name, out.request, out.raw_text, std::move(parsed), out.degraded, out.notes);
  }
  void append(const std::string& role, const std::optional<llm::ChatRequest>& request,
              const std::string& raw_text, nlohmann::json parsed, bool degraded,
              const std::vector<std::string>& notes);

  const std::vector<TraceEntry>& entries() const { return entries_; }
  /// "<index> <role>" for every degraded entry.
  const std::vector<std::string>& degraded() const { return degraded_; }
  std::size_t llm_calls() const { return llm_calls_; }

 private:
  std::optional<std::filesystem::path> dir_;
  std::vector<TraceEntry> entries_;
  std::vector<std::string> degraded_;
  std::size_t llm_calls_ = 0;
};

struct SourceStageResult {
  AlgorithmSummary summary;
  HypothesisSet hypotheses;
  std::map<std::string, std::string> descriptions;
};

struct ProfileStageResult {
  std::vector<AnalysisPass> passes;
  std::vector<std::string> warnings;
  bool cap_exceeded = false;
};

struct RunContext {
  const llm::Gateway& gateway;
  const PipelineConfig& config;
  Trace& trace;
};

SourceStageResult run_source_stage(const ProfileBundle& bundle, const RunContext& ctx);

ProfileStageResult run_profile_stage(const ProfileBundle& bundle, const AlgorithmSummary& summary,
                                     const HypothesisSet& hypotheses, const RunContext& ctx);

struct RunResult {
  ExplanationReport report;
  std::optional<ReviewReport> review;
  AlgorithmSummary summary;
  HypothesisSet hypotheses;  // with review verdicts applied
  std::vector<AnalysisPass> passes;
  bool cap_exceeded = false;
  std::vector<std::string> degraded_roles;

  bool degraded() const { return cap_exceeded || !degraded_roles.empty(); }
};

RunResult run_full(const ProfileBundle& bundle, const RunContext& ctx);

/// Writes report.md, review.md (when reviewed), findings.json and
/// run-config.json. The trace directory is written by the Trace itself.
void write_run_dir(const RunResult& result, const ProfileBundle& bundle, const PipelineConfig& config,
                   const std::filesystem::path& dir);

}  // namespace kexplain
