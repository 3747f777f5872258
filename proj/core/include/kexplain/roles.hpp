#pragma once

// Agent roles. Each role renders one prompt template, calls the gateway once
// (or not at all when bypassed or disabled) and turns the reply into a typed
// value. Every selector output is clamped to the valid set and every parse
// failure has a deterministic fallback, so a role never fails because of
// what the model wrote. Gateway errors propagate.

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "kexplain/assets.hpp"
#include "kexplain/llm.hpp"
#include "kexplain/model.hpp"

namespace kexplain::roles {

struct PromptSettings {
  // Total characters of source code shown to the analyzer; longer files are
  // cut and marked as truncated.
  std::size_t source_budget_chars = 60000;
  std::size_t max_profiles_per_pass = 8;
  llm::ReasoningEffort reasoning_effort = llm::ReasoningEffort::high;
  int max_output_tokens = 16384;
  // Selector and reviewer roles use this; analysis roles use the provider
  // default.
  double selector_temperature = 0.0;
};

struct RoleEnv {
  const llm::Gateway* gateway = nullptr;
  assets::Library library;
  PromptSettings settings;
};

template <class T>
struct RoleOutput {
  std::string role_name;
  std::optional<llm::ChatRequest> request;  // absent when no model call was made
  std::string raw_text;
  T parsed{};
  bool degraded = false;  // structured parse failed, fallback applied
  std::vector<std::string> notes;

  bool called_llm() const { return request.has_value(); }
};

// --- Source Code Inspection ---------------------------------------------

/// At most 200 words. Throws PreconditionError for an empty file before any
/// model call.
RoleOutput<std::string> describe_source_file(const SourceFile& file, const RoleEnv& env);

/// Chooses the next file to read. The result is always an unreviewed path;
/// a reviewed or unknown choice is replaced by the lexicographically first
/// unreviewed path.
RoleOutput<std::string> select_source_file(const std::map<std::string, std::string>& descriptions,
                                           const std::set<std::string>& reviewed,
                                           const AlgorithmSummary& summary, const RoleEnv& env);

RoleOutput<AlgorithmSummary> summarize_algorithm(const AlgorithmSummary& current,
                                                 const SourceFile& file, const RoleEnv& env);

/// Updates the running hypothesis set. Ids of existing hypotheses never
/// change; new hypotheses get fresh `H<n>` ids; every status stays pending.
RoleOutput<HypothesisSet> hypothesize_performance(const HypothesisSet& hypotheses,
                                                  const AlgorithmSummary& summary,
                                                  const SourceFile& file, const RoleEnv& env);

// --- Profile Inspection ---------------------------------------------------

struct ProfileSelectionRequest {
  const ProfileBundle* bundle = nullptr;
  const AlgorithmSummary* summary = nullptr;
  const HypothesisSet* hypotheses = nullptr;
  const std::vector<AnalysisPass>* prior_passes = nullptr;
  std::set<std::string> analyzed;
  std::vector<std::string> rank_order;  // rank_profiles_by_default_distance ids
  bool enabled = true;
};

/// Non-empty list of valid profile ids containing at least one unanalyzed
/// profile whenever one remains. Bypassed (no model call) for one-profile
/// bundles; when disabled, returns the next unanalyzed profile in rank order.
RoleOutput<std::vector<std::string>> select_profiles(const ProfileSelectionRequest& req,
                                                     const RoleEnv& env);

/// Union of metric names over the profiles, in first-appearance order.
std::vector<std::string> available_metrics(const std::vector<const KernelProfile*>& profiles);

/// Non-empty subset of available_metrics(); all names when disabled.
RoleOutput<std::vector<std::string>> select_metrics(const std::vector<const KernelProfile*>& profiles,
                                                    const AlgorithmSummary& summary,
                                                    const HypothesisSet& hypotheses, bool enabled,
                                                    const RoleEnv& env);

struct AnalysisRequest {
  int pass_index = 1;
  const ProfileBundle* bundle = nullptr;
  std::vector<const KernelProfile*> profiles;
  std::vector<std::string> metric_names;
  const AlgorithmSummary* summary = nullptr;
  const HypothesisSet* hypotheses = nullptr;
  std::string guidelines;
};

/// Citations in the reply are parsed and resolved against the selection:
/// a citation whose profile or metric was not in view is kept but marked
/// unresolved.
RoleOutput<AnalysisPass> analyze_profiles(const AnalysisRequest& req, const RoleEnv& env);

/// Marks each citation resolved iff its profile is selected, its metric is
/// selected, and that profile has the metric.
void resolve_citations(std::vector<MetricCitation>& citations, const ProfileBundle& bundle,
                       const std::vector<std::string>& profile_ids,
                       const std::vector<std::string>& metric_names);

struct DrGpuInput {
  std::optional<std::string> report;  // textified adapter output
  std::string failure;                // adapter failure reason when no report
};

/// Identity when disabled; unchanged plus a warning note on adapter failure.
RoleOutput<AnalysisPass> evaluate_drgpu(const AnalysisPass& pass, const DrGpuInput& drgpu,
                                        bool enabled, const RoleEnv& env);

// --- Aggregation and review ------------------------------------------------

RoleOutput<ExplanationReport> aggregate_analyses(const std::vector<AnalysisPass>& passes,
                                                 const AlgorithmSummary& summary,
                                                 const std::string& guidelines,
                                                 const RoleEnv& env);

/// One verdict per hypothesis, in hypothesis order. Hypotheses the reply
/// does not judge (or judges unparseably) are inconclusive. No model call
/// for an empty hypothesis set.
RoleOutput<ReviewReport> review_explanation(const ExplanationReport& report,
                                            const HypothesisSet& hypotheses, const RoleEnv& env);

HypothesisSet apply_review(const HypothesisSet& hypotheses, const ReviewReport& review);

// --- Helpers shared with the evaluation harness ---------------------------

std::vector<Suggestion> parse_suggestions(const nlohmann::json& arr);
std::string render_metric_table(const std::vector<const KernelProfile*>& profiles,
                                const std::vector<std::string>& metric_names);
std::string render_sources(const std::vector<SourceFile>& sources, std::size_t budget_chars);
std::string render_hypotheses(const HypothesisSet& hypotheses);
std::string render_run_config(const KernelProfile& profile, const BundleManifest& manifest);

}  // namespace kexplain::roles
