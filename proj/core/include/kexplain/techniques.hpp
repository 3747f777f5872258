#pragma once

// Labels the optimization techniques of a successful attempt with entries of
// a closed taxonomy (the `taxonomy.txt` asset, one label per line).

#include <string>
#include <vector>

#include "kexplain/roles.hpp"

namespace kexplain {

std::vector<std::string> parse_taxonomy(const std::string& text);

/// Labels outside the taxonomy are dropped (matching ignores case); an empty
/// diff yields no labels without a model call; an unparseable reply yields
/// no labels and a degraded output.
roles::RoleOutput<std::vector<std::string>> label_techniques(const std::string& code_diff,
                                                             const std::string& self_report,
                                                             const roles::RoleEnv& env);

}  // namespace kexplain
