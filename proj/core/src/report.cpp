#include "kexplain/report.hpp"

#include <cctype>
#include <sstream>

#include "kexplain/structured.hpp"

namespace kexplain {

namespace {

std::string code_refs_text(const std::vector<CodeRef>& refs) {
  std::string out;
  for (std::size_t i = 0; i < refs.size(); ++i) {
    if (i) out += ", ";
    out += "`" + refs[i].file + ":" + std::to_string(refs[i].first_line);
    if (refs[i].last_line != refs[i].first_line) out += "-" + std::to_string(refs[i].last_line);
    out += "`";
  }
  return out;
}

std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

}  // namespace

std::string render_report_markdown(const ExplanationReport& report, const BundleManifest& manifest) {
  std::ostringstream out;
  out << "# Performance explanation: " << manifest.kernel_name;
  if (!manifest.app_name.empty()) out << " (" << manifest.app_name << ")";
  out << "\n\n";
  for (const auto& w : report.warnings) out << "> **Warning:** " << w << "\n";
  if (!report.warnings.empty()) out << "\n";

  out << "## Summary\n\n" << trim_copy(report.summary_section) << "\n\n";

  out << "## Bottlenecks\n\n";
  if (report.bottleneck_sections.empty()) out << "No bottlenecks were identified.\n\n";
  for (std::size_t i = 0; i < report.bottleneck_sections.size(); ++i) {
    out << "### Bottleneck " << (i + 1) << "\n\n" << trim_copy(report.bottleneck_sections[i]) << "\n\n";
  }

  if (report.knob_analysis) {
    out << "## Tuning knobs\n\n" << trim_copy(*report.knob_analysis) << "\n\n";
  }

  out << "## Suggestions\n\n";
  if (report.suggestions.empty()) out << "None.\n\n";
  for (std::size_t i = 0; i < report.suggestions.size(); ++i) {
    const auto& s = report.suggestions[i];
    out << (i + 1) << ". **" << s.title << "**";
    if (!s.rationale.empty()) out << ": " << trim_copy(s.rationale);
    if (!s.code_refs.empty()) out << " (" << code_refs_text(s.code_refs) << ")";
    out << "\n";
  }
  if (!report.suggestions.empty()) out << "\n";

  out << "## Citations\n\n";
  if (report.citations.empty()) out << "None.\n";
  for (const auto& c : report.citations) out << "- " << format_citation(c) << "\n";
  out << "\n## Provenance\n\nAggregated from analysis pass" << (report.provenance.size() == 1 ? " " : "es ");
  for (std::size_t i = 0; i < report.provenance.size(); ++i) {
    if (i) out << ", ";
    out << report.provenance[i];
  }
  out << ".\n";
  return out.str();
}

std::string render_review_markdown(const ReviewReport& review, const HypothesisSet& hypotheses) {
  std::ostringstream out;
  out << "# Explanation review\n\n";
  if (review.verdicts.empty()) out << "No hypotheses were recorded.\n";
  for (const auto& v : review.verdicts) {
    std::string statement;
    for (const auto& h : hypotheses) {
      if (h.id == v.hypothesis_id) statement = h.statement;
    }
    out << "## " << v.hypothesis_id;
    if (!statement.empty()) out << ": " << statement;
    out << "\n\n**Verdict:** " << to_string(v.verdict) << "\n";
    if (!v.rationale.empty()) out << "\n" << trim_copy(v.rationale) << "\n";
    out << "\n";
  }
  return out.str();
}

bool report_has_suggestions(std::string_view markdown) {
  std::istringstream in{std::string(markdown)};
  std::string line;
  bool in_section = false;
  while (std::getline(in, line)) {
    std::string t = trim_copy(line);
    if (t.rfind('#', 0) == 0) {
      std::size_t i = t.find_first_not_of('#');
      in_section = i != std::string::npos && lower(trim_copy(t.substr(i))).rfind("suggestion", 0) == 0;
      if (!in_section) {
        in_section = lower(t).find("optimization suggestion") != std::string::npos;
      }
      continue;
    }
    if (!in_section || t.empty()) continue;
    bool bullet = t[0] == '-' || t[0] == '*';
    bool numbered = std::isdigit(static_cast<unsigned char>(t[0])) && t.find('.') != std::string::npos;
    if (bullet || numbered) return true;
  }
  return false;
}

}  // namespace kexplain
