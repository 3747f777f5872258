#pragma once

// nlohmann/json conversions for the pipeline and evaluation types. Bundle
// (de)serialization follows the interchange schema and lives in ingest.hpp.

#include <nlohmann/json.hpp>

#include "kexplain/model.hpp"

namespace kexplain {

void to_json(nlohmann::json& j, const CodeRef& v);
void from_json(const nlohmann::json& j, CodeRef& v);
void to_json(nlohmann::json& j, const PerformanceHypothesis& v);
void from_json(const nlohmann::json& j, PerformanceHypothesis& v);
void to_json(nlohmann::json& j, const AlgorithmSummary& v);
void from_json(const nlohmann::json& j, AlgorithmSummary& v);
void to_json(nlohmann::json& j, const MetricCitation& v);
void from_json(const nlohmann::json& j, MetricCitation& v);
void to_json(nlohmann::json& j, const Suggestion& v);
void from_json(const nlohmann::json& j, Suggestion& v);
void to_json(nlohmann::json& j, const AnalysisPass& v);
void from_json(const nlohmann::json& j, AnalysisPass& v);
void to_json(nlohmann::json& j, const ExplanationReport& v);
void from_json(const nlohmann::json& j, ExplanationReport& v);
void to_json(nlohmann::json& j, const HypothesisVerdict& v);
void from_json(const nlohmann::json& j, HypothesisVerdict& v);
void to_json(nlohmann::json& j, const ReviewReport& v);
void from_json(const nlohmann::json& j, ReviewReport& v);
void to_json(nlohmann::json& j, const EvalOutcome& v);
void from_json(const nlohmann::json& j, EvalOutcome& v);

}  // namespace kexplain
