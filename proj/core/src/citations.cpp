#include "kexplain/citations.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <map>
#include <cmath>

#include "kexplain/structured.hpp"

using nlohmann::json;

namespace kexplain {

const char* to_string(FindingKind k) {
  switch (k) {
    case FindingKind::ok: return "ok";
    case FindingKind::unknown_profile: return "unknown_profile";
    case FindingKind::unknown_metric: return "unknown_metric";
    case FindingKind::value_mismatch: return "value_mismatch";
  }
  return "ok";
}

std::optional<double> parse_cited_number(std::string_view quoted) {
  std::string s = trim_copy(quoted);
  std::string digits;
  std::size_t i = 0;
  if (i < s.size() && (s[i] == '+' || s[i] == '-')) digits.push_back(s[i++]);
  bool any_digit = false;
  for (; i < s.size(); ++i) {
    char c = s[i];
    if (c == ',') continue;  // thousands separator
    bool exponent_sign = (c == '+' || c == '-') && !digits.empty() &&
                         (digits.back() == 'e' || digits.back() == 'E');
    bool exponent = (c == 'e' || c == 'E') && any_digit && i + 1 < s.size() &&
                    (std::isdigit(static_cast<unsigned char>(s[i + 1])) || s[i + 1] == '-' ||
                     s[i + 1] == '+');
    if (std::isdigit(static_cast<unsigned char>(c))) {
      any_digit = true;
    } else if (c != '.' && !exponent && !exponent_sign) {
      break;
    }
    digits.push_back(c);
  }
  if (!any_digit) return std::nullopt;
  const char* first = digits.data();
  if (*first == '+') ++first;
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(first, digits.data() + digits.size(), v);
  if (ec != std::errc() || ptr == first) return std::nullopt;
  return v;
}

std::vector<CitationFinding> validate_citations(const std::vector<MetricCitation>& citations,
                                                const ProfileBundle& bundle) {
  std::vector<CitationFinding> out;
  out.reserve(citations.size());
  for (const auto& c : citations) {
    CitationFinding f;
    f.citation = c;
    const KernelProfile* p = bundle.find_profile(c.profile_id);
    const MetricValue* m = p ? p->find_metric(c.metric_name) : nullptr;
    if (!p) {
      f.kind = FindingKind::unknown_profile;
    } else if (!m) {
      f.kind = FindingKind::unknown_metric;
    } else if (m->is_numeric()) {
      f.actual = m->number();
      f.cited = parse_cited_number(c.quoted_value);
      if (!f.cited) {
        f.kind = FindingKind::value_mismatch;
      } else {
        double diff = std::abs(*f.cited - *f.actual);
        f.relative_error = *f.actual == 0.0 ? diff : diff / std::abs(*f.actual);
        f.kind = *f.relative_error > kCitationTolerance ? FindingKind::value_mismatch : FindingKind::ok;
      }
    }
    out.push_back(std::move(f));
  }
  return out;
}

std::vector<CitationFinding> validate_citations(std::string_view report_text, const ProfileBundle& bundle) {
  return validate_citations(parse_citations(report_text), bundle);
}

bool has_value_mismatch(const std::vector<CitationFinding>& findings) {
  return std::any_of(findings.begin(), findings.end(),
                     [](const CitationFinding& f) { return f.kind == FindingKind::value_mismatch; });
}

json findings_to_json(const std::vector<CitationFinding>& findings) {
  auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
  json list = json::array();
  std::map<std::string, int> counts = {
      {"ok", 0}, {"unknown_profile", 0}, {"unknown_metric", 0}, {"value_mismatch", 0}};
  for (const auto& f : findings) {
    ++counts[to_string(f.kind)];
    list.push_back({{"profile", f.citation.profile_id},
                    {"metric", f.citation.metric_name},
                    {"quoted_value", f.citation.quoted_value},
                    {"finding", to_string(f.kind)},
                    {"cited", opt(f.cited)},
                    {"actual", opt(f.actual)},
                    {"relative_error", opt(f.relative_error)}});
  }
  return {{"findings", list}, {"counts", counts}};
}

}  // namespace kexplain
