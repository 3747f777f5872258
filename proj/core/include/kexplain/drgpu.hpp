#pragma once

// Integration with the DrGPU stall-tree analyzer. DrGPU itself is an
// external command; this module runs it through a configurable adapter and
// renders its tree output as plain text.
//
// Tree JSON accepted from the adapter:
//   { "label": str, "stall_fraction": number in [0, 1],
//     "children": [node...]?, "suggestions": [str...]? }

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "kexplain/errors.hpp"
#include "kexplain/model.hpp"

namespace kexplain::drgpu {

class TreeSchema : public Error {
 public:
  TreeSchema(const std::string& path, const std::string& reason);
};

class AdapterFailure : public Error {
 public:
  using Error::Error;
};

struct StallNode {
  std::string label;
  double stall_fraction = 0.0;
  std::vector<StallNode> children;
  std::vector<std::string> suggestions;
};

StallNode parse_tree(const nlohmann::json& j);

/// Deterministic depth-first rendering. Siblings appear in descending stall
/// order (label breaks ties), fractions print as percentages with one
/// decimal, and suggestions are listed under the node that carries them.
std::string textify(const StallNode& root);
std::string textify(const nlohmann::json& tree);

struct AdapterConfig {
  std::string command;
  // `{metrics_csv}` and `{lines_csv}` are replaced with file paths.
  std::vector<std::string> args{"{metrics_csv}", "{lines_csv}"};

  bool configured() const { return !command.empty(); }
};

/// Writes the profile's CSVs to a scratch directory, runs the adapter and
/// parses its stdout. Throws AdapterFailure on a nonzero exit, unparseable
/// output or a schema violation.
StallNode run_adapter(const AdapterConfig& config, const KernelProfile& profile);

/// Text report covering every profile (one section per profile), or
/// AdapterFailure when any adapter invocation fails.
std::string report_for(const AdapterConfig& config, const std::vector<const KernelProfile*>& profiles);

}  // namespace kexplain::drgpu
