#include "kexplain/ranking.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace kexplain {

MissingDefault::MissingDefault(std::string knob)
    : Error("manifest has no default for knob '" + knob + "'"), knob_(std::move(knob)) {}

namespace {

const KnobValue& value_or_default(const KernelProfile& p, const std::string& knob,
                                  const KnobValue& fallback) {
  auto it = p.config.knobs.find(knob);
  return it == p.config.knobs.end() ? fallback : it->second;
}

double as_number(const KnobValue& v, const std::string& knob, const std::string& who) {
  if (const double* d = std::get_if<double>(&v)) return *d;
  throw PreconditionError("numeric knob '" + knob + "' has non-numeric value in " + who);
}

}  // namespace

std::vector<RankedProfile> rank_profiles_by_default_distance(const ProfileBundle& bundle) {
  const BundleManifest& m = bundle.manifest;
  for (const auto& k : m.knobs) {
    if (!m.defaults.count(k.name)) throw MissingDefault(k.name);
  }

  std::optional<std::string> default_arch;
  if (auto it = m.defaults.find(kGpuArchKey); it != m.defaults.end()) {
    default_arch = knob_value_text(it->second);
  } else {
    for (const auto& p : bundle.profiles) {
      if (p.config.gpu_arch != bundle.profiles.front().config.gpu_arch) throw MissingDefault(kGpuArchKey);
    }
  }

  std::map<std::string, double> range;
  for (const auto& k : m.knobs) {
    if (k.type != KnobType::numeric) continue;
    const KnobValue& def = m.defaults.at(k.name);
    as_number(def, k.name, "defaults");
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const auto& p : bundle.profiles) {
      double v = as_number(value_or_default(p, k.name, def), k.name, "profile " + p.id);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    range[k.name] = (bundle.profiles.empty() || hi == lo) ? 1.0 : hi - lo;
  }

  std::vector<RankedProfile> out;
  out.reserve(bundle.profiles.size());
  for (const auto& p : bundle.profiles) {
    RankedProfile r;
    r.profile_id = p.id;
    for (const auto& k : m.knobs) {
      const KnobValue& def = m.defaults.at(k.name);
      const KnobValue& v = value_or_default(p, k.name, def);
      double d;
      if (k.type == KnobType::numeric) {
        d = std::abs(as_number(v, k.name, p.id) - as_number(def, k.name, "defaults")) / range.at(k.name);
      } else {
        d = knob_value_text(v) == knob_value_text(def) ? 0.0 : 1.0;
      }
      r.contributions.emplace_back(k.name, d);
      r.distance += d;
    }
    if (default_arch) {
      double d = p.config.gpu_arch == *default_arch ? 0.0 : 1.0;
      r.contributions.emplace_back(kGpuArchKey, d);
      r.distance += d;
    }
    out.push_back(std::move(r));
  }
  std::sort(out.begin(), out.end(), [](const RankedProfile& a, const RankedProfile& b) {
    if (a.distance != b.distance) return a.distance < b.distance;
    return a.profile_id < b.profile_id;
  });
  return out;
}

std::vector<std::string> ranked_ids(const std::vector<RankedProfile>& ranking) {
  std::vector<std::string> ids;
  ids.reserve(ranking.size());
  for (const auto& r : ranking) ids.push_back(r.profile_id);
  return ids;
}

}  // namespace kexplain
