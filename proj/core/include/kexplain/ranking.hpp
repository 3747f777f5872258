#pragma once

// Ordering of profiles by how far their run configuration sits from the
// bundle defaults. Used to subset large bundles and as the fallback order of
// the profile selector.

#include <string>
#include <vector>

#include "kexplain/errors.hpp"
#include "kexplain/model.hpp"

namespace kexplain {

class MissingDefault : public Error {
 public:
  explicit MissingDefault(std::string knob);
  const std::string& knob() const { return knob_; }

 private:
  std::string knob_;
};

struct RankedProfile {
  std::string profile_id;
  double distance = 0.0;
  // Per-knob contributions in manifest order; gpu_arch last when it counts.
  std::vector<std::pair<std::string, double>> contributions;
};

/// Ascending total distance, ties broken by profile id.
///
/// A numeric knob contributes |v - default| / (max - min), the range taken
/// over the bundle's profiles (1 when every profile has the same value). A
/// categorical knob contributes 0 or 1. gpu_arch is a categorical knob
/// compared with `defaults["gpu_arch"]`; a bundle without that default may
/// only omit it when all profiles share one architecture. Profiles that do
/// not set a knob run at its default.
std::vector<RankedProfile> rank_profiles_by_default_distance(const ProfileBundle& bundle);

std::vector<std::string> ranked_ids(const std::vector<RankedProfile>& ranking);

}  // namespace kexplain
