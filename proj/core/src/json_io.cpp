#include "kexplain/json_io.hpp"

#include "kexplain/errors.hpp"

using nlohmann::json;

namespace kexplain {

namespace {

HypothesisStatus status_from(const json& j) {
  auto s = hypothesis_status_from_string(j.get<std::string>());
  if (!s) throw Error("unknown hypothesis status '" + j.get<std::string>() + "'");
  return *s;
}

OutcomeStatus outcome_status_from(const std::string& s) {
  if (s == "valid") return OutcomeStatus::valid;
  if (s == "build_fail") return OutcomeStatus::build_fail;
  if (s == "test_fail") return OutcomeStatus::test_fail;
  if (s == "retry_exhausted") return OutcomeStatus::retry_exhausted;
  throw Error("unknown outcome status '" + s + "'");
}

}  // namespace

void to_json(json& j, const CodeRef& v) {
  j = {{"file", v.file}, {"first_line", v.first_line}, {"last_line", v.last_line}};
}
void from_json(const json& j, CodeRef& v) {
  v.file = j.at("file").get<std::string>();
  v.first_line = j.at("first_line").get<int>();
  v.last_line = j.value("last_line", v.first_line);
}

void to_json(json& j, const PerformanceHypothesis& v) {
  j = {{"id", v.id}, {"statement", v.statement}, {"code_refs", v.code_refs},
       {"status", to_string(v.status)}};
}
void from_json(const json& j, PerformanceHypothesis& v) {
  v.id = j.at("id").get<std::string>();
  v.statement = j.at("statement").get<std::string>();
  v.code_refs = j.value("code_refs", std::vector<CodeRef>{});
  v.status = status_from(j.at("status"));
}

void to_json(json& j, const AlgorithmSummary& v) {
  j = {{"text", v.text}, {"files_covered", v.files_covered}};
}
void from_json(const json& j, AlgorithmSummary& v) {
  v.text = j.at("text").get<std::string>();
  v.files_covered = j.at("files_covered").get<std::set<std::string>>();
}

void to_json(json& j, const MetricCitation& v) {
  j = {{"profile_id", v.profile_id}, {"metric_name", v.metric_name},
       {"quoted_value", v.quoted_value}, {"resolved", v.resolved}};
}
void from_json(const json& j, MetricCitation& v) {
  v.profile_id = j.at("profile_id").get<std::string>();
  v.metric_name = j.at("metric_name").get<std::string>();
  v.quoted_value = j.at("quoted_value").get<std::string>();
  v.resolved = j.value("resolved", true);
}

void to_json(json& j, const Suggestion& v) {
  j = {{"title", v.title}, {"rationale", v.rationale}, {"code_refs", v.code_refs}};
}
void from_json(const json& j, Suggestion& v) {
  v.title = j.at("title").get<std::string>();
  v.rationale = j.value("rationale", "");
  v.code_refs = j.value("code_refs", std::vector<CodeRef>{});
}

void to_json(json& j, const AnalysisPass& v) {
  j = {{"pass_index", v.pass_index},
       {"selected_profile_ids", v.selected_profile_ids},
       {"selected_metric_names", v.selected_metric_names},
       {"analysis_text", v.analysis_text},
       {"citations", v.citations},
       {"suggestions", v.suggestions},
       {"notes", v.notes}};
}
void from_json(const json& j, AnalysisPass& v) {
  v.pass_index = j.at("pass_index").get<int>();
  v.selected_profile_ids = j.at("selected_profile_ids").get<std::vector<std::string>>();
  v.selected_metric_names = j.at("selected_metric_names").get<std::vector<std::string>>();
  v.analysis_text = j.at("analysis_text").get<std::string>();
  v.citations = j.value("citations", std::vector<MetricCitation>{});
  v.suggestions = j.value("suggestions", std::vector<Suggestion>{});
  v.notes = j.value("notes", std::vector<std::string>{});
}

void to_json(json& j, const ExplanationReport& v) {
  j = {{"summary_section", v.summary_section},
       {"bottleneck_sections", v.bottleneck_sections},
       {"knob_analysis", v.knob_analysis ? json(*v.knob_analysis) : json(nullptr)},
       {"suggestions", v.suggestions},
       {"citations", v.citations},
       {"provenance", v.provenance},
       {"warnings", v.warnings}};
}
void from_json(const json& j, ExplanationReport& v) {
  v.summary_section = j.at("summary_section").get<std::string>();
  v.bottleneck_sections = j.at("bottleneck_sections").get<std::vector<std::string>>();
  if (j.contains("knob_analysis") && !j["knob_analysis"].is_null()) {
    v.knob_analysis = j["knob_analysis"].get<std::string>();
  }
  v.suggestions = j.value("suggestions", std::vector<Suggestion>{});
  v.citations = j.value("citations", std::vector<MetricCitation>{});
  v.provenance = j.value("provenance", std::vector<int>{});
  v.warnings = j.value("warnings", std::vector<std::string>{});
}

void to_json(json& j, const HypothesisVerdict& v) {
  j = {{"hypothesis_id", v.hypothesis_id}, {"verdict", to_string(v.verdict)},
       {"rationale", v.rationale}};
}
void from_json(const json& j, HypothesisVerdict& v) {
  v.hypothesis_id = j.at("hypothesis_id").get<std::string>();
  v.verdict = status_from(j.at("verdict"));
  v.rationale = j.value("rationale", "");
}

void to_json(json& j, const ReviewReport& v) { j = {{"verdicts", v.verdicts}}; }
void from_json(const json& j, ReviewReport& v) {
  v.verdicts = j.at("verdicts").get<std::vector<HypothesisVerdict>>();
}

void to_json(json& j, const EvalOutcome& v) {
  j = {{"task", to_string(v.task)},
       {"attempt_index", v.attempt_index},
       {"status", to_string(v.status)},
       {"score", v.score ? json(*v.score) : json(nullptr)},
       {"speedup", v.speedup ? json(*v.speedup) : json(nullptr)},
       {"retries_used", v.retries_used}};
  if (v.technique_labels) j["technique_labels"] = *v.technique_labels;
}
void from_json(const json& j, EvalOutcome& v) {
  v.task = j.at("task").get<std::string>() == "mcq" ? EvalTask::mcq : EvalTask::opt;
  v.attempt_index = j.at("attempt_index").get<int>();
  v.status = outcome_status_from(j.at("status").get<std::string>());
  if (j.contains("score") && !j["score"].is_null()) v.score = j["score"].get<double>();
  if (j.contains("speedup") && !j["speedup"].is_null()) v.speedup = j["speedup"].get<double>();
  v.retries_used = j.value("retries_used", 0);
  if (j.contains("technique_labels")) {
    v.technique_labels = j["technique_labels"].get<std::vector<std::string>>();
  }
}

}  // namespace kexplain
