#include "kexplain/model.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace kexplain {

const char* to_string(MetricKind kind) {
  switch (kind) {
    case MetricKind::counter: return "counter";
    case MetricKind::ratio: return "ratio";
    case MetricKind::percent: return "percent";
    case MetricKind::text: return "text";
  }
  return "counter";
}

std::optional<MetricKind> metric_kind_from_string(const std::string& s) {
  if (s == "counter") return MetricKind::counter;
  if (s == "ratio") return MetricKind::ratio;
  if (s == "percent") return MetricKind::percent;
  if (s == "text") return MetricKind::text;
  return std::nullopt;
}

const char* to_string(HypothesisStatus s) {
  switch (s) {
    case HypothesisStatus::pending: return "pending";
    case HypothesisStatus::confirmed: return "confirmed";
    case HypothesisStatus::refuted: return "refuted";
    case HypothesisStatus::inconclusive: return "inconclusive";
  }
  return "pending";
}

std::optional<HypothesisStatus> hypothesis_status_from_string(const std::string& s) {
  std::string lower(s);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "pending") return HypothesisStatus::pending;
  if (lower == "confirmed") return HypothesisStatus::confirmed;
  if (lower == "refuted") return HypothesisStatus::refuted;
  if (lower == "inconclusive") return HypothesisStatus::inconclusive;
  return std::nullopt;
}

const char* to_string(EvalTask t) { return t == EvalTask::mcq ? "mcq" : "opt"; }

const char* to_string(OutcomeStatus s) {
  switch (s) {
    case OutcomeStatus::valid: return "valid";
    case OutcomeStatus::build_fail: return "build_fail";
    case OutcomeStatus::test_fail: return "test_fail";
    case OutcomeStatus::retry_exhausted: return "retry_exhausted";
  }
  return "valid";
}

namespace {

// Shortest text that round-trips through strtod.
std::string format_double(double v) {
  char buf[64];
  for (int precision = 1; precision <= 17; ++precision) {
    std::snprintf(buf, sizeof buf, "%.*g", precision, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

std::string MetricValue::value_text() const {
  if (is_numeric()) return format_double(number());
  return std::get<std::string>(value);
}

std::string knob_value_text(const KnobValue& v) {
  if (std::holds_alternative<double>(v)) return format_double(std::get<double>(v));
  return std::get<std::string>(v);
}

const MetricValue* KernelProfile::find_metric(const std::string& name) const {
  auto it = std::find_if(metrics.begin(), metrics.end(),
                         [&](const MetricValue& m) { return m.name == name; });
  return it == metrics.end() ? nullptr : &*it;
}

std::size_t SourceFile::sloc() const {
  std::size_t count = 0;
  std::istringstream in(content);
  std::string line;
  bool in_block = false;
  while (std::getline(in, line)) {
    std::string t = trim(line);
    if (in_block) {
      auto end = t.find("*/");
      if (end == std::string::npos) continue;
      in_block = false;
      t = trim(t.substr(end + 2));
    }
    if (t.empty() || t.rfind("//", 0) == 0) continue;
    if (t.rfind("/*", 0) == 0) {
      auto end = t.find("*/", 2);
      if (end == std::string::npos) {
        in_block = true;
        continue;
      }
      if (trim(t.substr(end + 2)).empty()) continue;
    }
    ++count;
  }
  return count;
}

const KnobSpec* BundleManifest::find_knob(const std::string& name) const {
  auto it = std::find_if(knobs.begin(), knobs.end(),
                         [&](const KnobSpec& k) { return k.name == name; });
  return it == knobs.end() ? nullptr : &*it;
}

const KernelProfile* ProfileBundle::find_profile(const std::string& id) const {
  auto it = std::find_if(profiles.begin(), profiles.end(),
                         [&](const KernelProfile& p) { return p.id == id; });
  return it == profiles.end() ? nullptr : &*it;
}

const SourceFile* ProfileBundle::find_source(const std::string& path) const {
  auto it = std::find_if(sources.begin(), sources.end(),
                         [&](const SourceFile& s) { return s.path == path; });
  return it == sources.end() ? nullptr : &*it;
}

std::vector<std::string> ProfileBundle::profile_ids() const {
  std::vector<std::string> ids;
  ids.reserve(profiles.size());
  for (const auto& p : profiles) ids.push_back(p.id);
  return ids;
}

std::vector<std::string> ProfileBundle::source_paths() const {
  std::vector<std::string> paths;
  paths.reserve(sources.size());
  for (const auto& s : sources) paths.push_back(s.path);
  return paths;
}

std::optional<double> parse_profiler_number(const std::string& text) {
  std::string t = trim(text);
  if (t.empty()) return std::nullopt;
  std::string cleaned;
  cleaned.reserve(t.size());
  for (char c : t) {
    if (c != ',') cleaned.push_back(c);
  }
  // from_chars rejects a leading '+', strtod-style inputs keep it.
  std::string_view sv(cleaned);
  if (!sv.empty() && sv.front() == '+') sv.remove_prefix(1);
  double v = 0;
  auto [ptr, ec] = std::from_chars(sv.data(), sv.data() + sv.size(), v);
  if (ec != std::errc() || ptr != sv.data() + sv.size()) return std::nullopt;
  if (!std::isfinite(v)) return std::nullopt;
  return v;
}

MetricKind infer_metric_kind(const std::optional<std::string>& unit, bool numeric) {
  if (!numeric) return MetricKind::text;
  if (!unit) return MetricKind::counter;
  const std::string& u = *unit;
  if (u == "%") return MetricKind::percent;
  if (u == "ratio" || u == "x" || u.find('/') != std::string::npos) return MetricKind::ratio;
  return MetricKind::counter;
}

MetricValue make_metric(std::string name, std::optional<std::string> unit,
                        const std::string& raw_value) {
  MetricValue m;
  m.name = std::move(name);
  if (unit && unit->empty()) unit.reset();
  m.unit = std::move(unit);
  if (auto number = parse_profiler_number(raw_value)) {
    m.value = *number;
  } else {
    m.value = raw_value;
  }
  m.kind = infer_metric_kind(m.unit, m.is_numeric());
  if (m.kind == MetricKind::percent && (m.number() < 0.0 || m.number() > 100.0)) {
    m.unchecked = true;
  }
  return m;
}

std::vector<std::string> validate_bundle(const ProfileBundle& bundle) {
  std::vector<std::string> out;
  const auto& manifest = bundle.manifest;

  if (bundle.profiles.empty()) out.push_back("bundle: contains no profiles");
  if (bundle.sources.empty()) out.push_back("bundle: contains no source files");

  std::set<std::string> knob_names;
  for (const auto& k : manifest.knobs) {
    if (k.name.empty()) out.push_back("manifest: knob with empty name");
    if (!knob_names.insert(k.name).second) {
      out.push_back("manifest: knob '" + k.name + "' declared twice");
    }
  }
  for (const auto& k : manifest.knobs) {
    auto it = manifest.defaults.find(k.name);
    if (it == manifest.defaults.end()) {
      out.push_back("manifest: no default for knob '" + k.name + "'");
    } else if (k.type == KnobType::numeric && !std::holds_alternative<double>(it->second)) {
      out.push_back("manifest: default for numeric knob '" + k.name + "' is not a number");
    }
  }
  for (const auto& [name, value] : manifest.defaults) {
    if (name != kGpuArchKey && !knob_names.count(name)) {
      out.push_back("manifest: default given for undeclared knob '" + name + "'");
    }
  }

  std::set<std::string> source_paths;
  for (const auto& s : bundle.sources) {
    if (s.path.empty()) out.push_back("source: file with empty path");
    if (!source_paths.insert(s.path).second) {
      out.push_back("source '" + s.path + "': path not unique");
    }
    if (s.content.empty()) out.push_back("source '" + s.path + "': content is empty");
  }

  std::set<std::string> ids;
  for (const auto& p : bundle.profiles) {
    const std::string who = "profile '" + p.id + "'";
    if (p.id.empty()) out.push_back("profile: empty id");
    if (!ids.insert(p.id).second) out.push_back(who + ": profile_id not unique");
    if (p.id != p.config.profile_id) {
      out.push_back(who + ": config.profile_id '" + p.config.profile_id + "' differs from id");
    }
    if (p.metrics.empty()) out.push_back(who + ": metric table is empty");
    std::set<std::string> metric_names;
    for (const auto& m : p.metrics) {
      if (m.name.empty()) out.push_back(who + ": metric with empty name");
      if (!metric_names.insert(m.name).second) {
        out.push_back(who + ": metric '" + m.name + "' not unique");
      }
      if (m.kind == MetricKind::percent) {
        if (!m.is_numeric()) {
          out.push_back(who + ": percent metric '" + m.name + "' is not numeric");
        } else if ((m.number() < 0.0 || m.number() > 100.0) && !m.unchecked) {
          out.push_back(who + ": percent metric '" + m.name +
                        "' outside [0, 100] without unchecked flag");
        }
      }
      if (m.kind == MetricKind::text && m.is_numeric()) {
        out.push_back(who + ": text metric '" + m.name + "' holds a number");
      }
    }
    for (const auto& [knob, value] : p.config.knobs) {
      const KnobSpec* spec = manifest.find_knob(knob);
      if (!spec) {
        out.push_back(who + ": knob '" + knob + "' not declared in manifest");
      } else if (spec->type == KnobType::numeric && !std::holds_alternative<double>(value)) {
        out.push_back(who + ": numeric knob '" + knob + "' has non-numeric value");
      }
    }
    if (p.line_records) {
      for (const auto& r : *p.line_records) {
        if (r.line < 1) {
          out.push_back(who + ": line record " + r.file + ":" + std::to_string(r.line) +
                        " has non-positive line");
        }
        if (!r.external && !source_paths.count(r.file)) {
          out.push_back(who + ": line record file '" + r.file +
                        "' is not a bundle source and not marked external");
        }
      }
    }
  }
  return out;
}

}  // namespace kexplain
