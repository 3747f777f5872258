// Minimal stand-in for DrGPU: builds a one-level stall tree from the
// "stall" metrics of a profile and attaches canned suggestions.
//
// usage: drgpu_stub METRICS_CSV [LINES_CSV] [--fail]

#include <iostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "kexplain/ingest.hpp"

using nlohmann::json;

namespace {

std::vector<std::string> suggestions_for(const std::string& metric) {
  auto has = [&](const char* s) { return metric.find(s) != std::string::npos; };
  if (has("barrier")) return {"Remove unnecessary __syncthreads() barriers"};
  if (has("long_scoreboard")) return {"Improve global memory coalescing", "Cache reused data in shared memory"};
  if (has("short_scoreboard") || has("mio")) return {"Reduce shared memory bank conflicts"};
  if (has("branch") || has("divergence")) return {"Reduce warp divergence"};
  if (has("math") || has("pipe")) return {"Use cheaper arithmetic (strength reduction)"};
  return {};
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  for (const auto& a : args) {
    if (a == "--fail") {
      std::cerr << "drgpu_stub: failure requested\n";
      return 3;
    }
  }
  if (args.empty()) {
    std::cerr << "usage: drgpu_stub METRICS_CSV [LINES_CSV] [--fail]\n";
    return 2;
  }
  try {
    auto metrics = kexplain::parse_metrics_csv(kexplain::read_text_file(args[0]));
    double total = 0.0;
    std::vector<std::pair<std::string, double>> stalls;
    for (const auto& m : metrics) {
      if (m.name.find("stall") == std::string::npos || !m.is_numeric() || m.number() <= 0.0) continue;
      stalls.emplace_back(m.name, m.number());
      total += m.number();
    }
    json root = {{"label", "all stall cycles"}, {"stall_fraction", 1.0}, {"children", json::array()}};
    for (const auto& [name, value] : stalls) {
      json child = {{"label", name}, {"stall_fraction", value / total}};
      auto s = suggestions_for(name);
      if (!s.empty()) child["suggestions"] = s;
      root["children"].push_back(child);
    }
    std::cout << root.dump(2) << "\n";
  } catch (const std::exception& e) {
    std::cerr << "drgpu_stub: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
