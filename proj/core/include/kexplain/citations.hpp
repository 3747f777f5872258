#pragma once

// Grounding check for inline metric citations: every cited value is looked up
// in the bundle, without any model involvement.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "kexplain/model.hpp"

namespace kexplain {

enum class FindingKind { ok, unknown_profile, unknown_metric, value_mismatch };

const char* to_string(FindingKind k);

struct CitationFinding {
  MetricCitation citation;
  FindingKind kind = FindingKind::ok;
  std::optional<double> cited;    // numeric part of the quoted value
  std::optional<double> actual;
  // |cited - actual| / |actual|, or the absolute difference when actual is 0.
  // Absent when the quoted value has no number.
  std::optional<double> relative_error;
};

/// Relative error above which a numeric citation is a value_mismatch.
inline constexpr double kCitationTolerance = 0.01;

/// Leading number of a quoted value such as "1.77%", "1,024" or "3.2 GB/s".
std::optional<double> parse_cited_number(std::string_view quoted);

std::vector<CitationFinding> validate_citations(const std::vector<MetricCitation>& citations,
                                                const ProfileBundle& bundle);
/// Parses the citations out of report text first.
std::vector<CitationFinding> validate_citations(std::string_view report_text,
                                                const ProfileBundle& bundle);

bool has_value_mismatch(const std::vector<CitationFinding>& findings);

nlohmann::json findings_to_json(const std::vector<CitationFinding>& findings);

}  // namespace kexplain
