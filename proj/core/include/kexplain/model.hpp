#pragma once

// Canonical data types shared by ingestion, the explanation pipeline and the
// evaluation harness. Nothing in this header performs I/O.

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

namespace kexplain {

enum class MetricKind { counter, ratio, percent, text };

const char* to_string(MetricKind kind);
std::optional<MetricKind> metric_kind_from_string(const std::string& s);

/// A metric value is numeric whenever the profiler text parsed as a number;
/// otherwise the raw text is kept verbatim.
using MetricData = std::variant<double, std::string>;

struct MetricValue {
  std::string name;
  MetricData value;
  std::optional<std::string> unit;
  MetricKind kind = MetricKind::counter;
  // Set by ingestion when a percent metric falls outside [0, 100]. Profilers
  // report burst ratios above 100%, so the value is kept and only flagged.
  bool unchecked = false;

  bool is_numeric() const { return std::holds_alternative<double>(value); }
  double number() const { return std::get<double>(value); }
  /// Value as it would appear in a CSV cell.
  std::string value_text() const;

  bool operator==(const MetricValue&) const = default;
};

using KnobValue = std::variant<double, std::string>;
std::string knob_value_text(const KnobValue& v);

enum class KnobType { numeric, categorical };

struct KnobSpec {
  std::string name;
  KnobType type = KnobType::numeric;
  std::optional<std::string> unit;

  bool operator==(const KnobSpec&) const = default;
};

struct RunConfig {
  std::string profile_id;
  std::string gpu_arch;
  std::map<std::string, KnobValue> knobs;

  bool operator==(const RunConfig&) const = default;
};

struct LineRecord {
  std::string file;
  int line = 1;
  std::map<std::string, double> metrics;
  // True when `file` does not name a source file of the bundle (system
  // headers, generated code).
  bool external = false;

  bool operator==(const LineRecord&) const = default;
};

struct KernelProfile {
  std::string id;
  std::string kernel_name;
  std::string app_name;
  RunConfig config;
  std::vector<MetricValue> metrics;  // profiler order
  std::optional<std::vector<LineRecord>> line_records;

  const MetricValue* find_metric(const std::string& name) const;
  bool operator==(const KernelProfile&) const = default;
};

struct SourceFile {
  std::string path;
  std::string content;

  /// Non-blank, non-comment-only line count.
  std::size_t sloc() const;
  bool operator==(const SourceFile&) const = default;
};

struct BundleManifest {
  std::string app_name;
  std::string kernel_name;
  std::vector<KnobSpec> knobs;
  std::map<std::string, KnobValue> defaults;

  const KnobSpec* find_knob(const std::string& name) const;
  bool operator==(const BundleManifest&) const = default;
};

/// Key in `BundleManifest::defaults` naming the default GPU architecture.
inline constexpr const char* kGpuArchKey = "gpu_arch";

struct ProfileBundle {
  BundleManifest manifest;
  std::vector<KernelProfile> profiles;
  std::vector<SourceFile> sources;
  std::optional<std::string> guidelines;

  const KernelProfile* find_profile(const std::string& id) const;
  const SourceFile* find_source(const std::string& path) const;
  std::vector<std::string> profile_ids() const;
  std::vector<std::string> source_paths() const;
  bool operator==(const ProfileBundle&) const = default;
};

struct AlgorithmSummary {
  std::string text;
  std::set<std::string> files_covered;

  bool operator==(const AlgorithmSummary&) const = default;
};

struct CodeRef {
  std::string file;
  int first_line = 1;
  int last_line = 1;

  bool operator==(const CodeRef&) const = default;
};

enum class HypothesisStatus { pending, confirmed, refuted, inconclusive };

const char* to_string(HypothesisStatus s);
std::optional<HypothesisStatus> hypothesis_status_from_string(const std::string& s);

struct PerformanceHypothesis {
  std::string id;
  std::string statement;
  std::vector<CodeRef> code_refs;
  HypothesisStatus status = HypothesisStatus::pending;

  bool operator==(const PerformanceHypothesis&) const = default;
};

using HypothesisSet = std::vector<PerformanceHypothesis>;

struct MetricCitation {
  std::string profile_id;
  std::string metric_name;
  std::string quoted_value;
  // False when the citation could not be resolved against the data the
  // citing pass had in view. Unresolved citations are kept for review.
  bool resolved = true;

  bool operator==(const MetricCitation&) const = default;
};

struct Suggestion {
  std::string title;
  std::string rationale;
  std::vector<CodeRef> code_refs;

  bool operator==(const Suggestion&) const = default;
};

struct AnalysisPass {
  int pass_index = 1;
  std::vector<std::string> selected_profile_ids;
  std::vector<std::string> selected_metric_names;
  std::string analysis_text;
  std::vector<MetricCitation> citations;
  std::vector<Suggestion> suggestions;
  std::vector<std::string> notes;  // e.g. DrGPU adoption record

  bool operator==(const AnalysisPass&) const = default;
};

struct ExplanationReport {
  std::string summary_section;
  std::vector<std::string> bottleneck_sections;
  std::optional<std::string> knob_analysis;
  std::vector<Suggestion> suggestions;
  std::vector<MetricCitation> citations;
  std::vector<int> provenance;
  std::vector<std::string> warnings;  // surfaced in the report header

  bool operator==(const ExplanationReport&) const = default;
};

struct HypothesisVerdict {
  std::string hypothesis_id;
  HypothesisStatus verdict = HypothesisStatus::inconclusive;
  std::string rationale;

  bool operator==(const HypothesisVerdict&) const = default;
};

struct ReviewReport {
  std::vector<HypothesisVerdict> verdicts;
  bool operator==(const ReviewReport&) const = default;
};

enum class EvalTask { mcq, opt };
enum class OutcomeStatus { valid, build_fail, test_fail, retry_exhausted };

const char* to_string(EvalTask t);
const char* to_string(OutcomeStatus s);

struct EvalOutcome {
  EvalTask task = EvalTask::opt;
  int attempt_index = 1;
  OutcomeStatus status = OutcomeStatus::valid;
  std::optional<double> score;    // mcq only
  std::optional<double> speedup;  // opt, iff valid
  int retries_used = 0;
  std::optional<std::vector<std::string>> technique_labels;

  bool operator==(const EvalOutcome&) const = default;
};

/// Checks every type invariant of a bundle. Each entry names the offending
/// entity and the rule it breaks; an empty result means the bundle is valid.
std::vector<std::string> validate_bundle(const ProfileBundle& bundle);

/// Parses a profiler number: thousands separators are stripped, `n/a` and
/// anything else non-numeric yields nullopt.
std::optional<double> parse_profiler_number(const std::string& text);

/// Kind assigned to a metric from its unit and parsed value.
MetricKind infer_metric_kind(const std::optional<std::string>& unit, bool numeric);

/// Builds a MetricValue from raw CSV cells, applying the numeric-parse and
/// percent-range rules.
MetricValue make_metric(std::string name, std::optional<std::string> unit,
                        const std::string& raw_value);

}  // namespace kexplain
