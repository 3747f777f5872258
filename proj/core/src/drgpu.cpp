#include "kexplain/drgpu.hpp"

#include <algorithm>
#include <cstdio>

#include "kexplain/ingest.hpp"
#include "kexplain/process.hpp"

using nlohmann::json;

namespace kexplain::drgpu {

TreeSchema::TreeSchema(const std::string& path, const std::string& reason)
    : Error("DrGPU tree schema violation at " + path + ": " + reason) {}

namespace {

StallNode parse_node(const json& j, const std::string& path) {
  if (!j.is_object()) throw TreeSchema(path, "node must be an object");
  StallNode n;
  auto label = j.find("label");
  if (label == j.end() || !label->is_string()) throw TreeSchema(path, "missing string 'label'");
  n.label = label->get<std::string>();
  auto frac = j.find("stall_fraction");
  if (frac == j.end() || !frac->is_number()) {
    throw TreeSchema(path, "missing numeric 'stall_fraction'");
  }
  n.stall_fraction = frac->get<double>();
  if (n.stall_fraction < 0.0 || n.stall_fraction > 1.0) {
    throw TreeSchema(path, "stall_fraction outside [0, 1]");
  }
  if (auto c = j.find("children"); c != j.end()) {
    if (!c->is_array()) throw TreeSchema(path + "/children", "expected an array");
    for (std::size_t i = 0; i < c->size(); ++i) {
      n.children.push_back(parse_node((*c)[i], path + "/children/" + std::to_string(i)));
    }
  }
  if (auto s = j.find("suggestions"); s != j.end()) {
    if (!s->is_array()) throw TreeSchema(path + "/suggestions", "expected an array");
    for (const auto& item : *s) {
      if (!item.is_string()) throw TreeSchema(path + "/suggestions", "expected strings");
      n.suggestions.push_back(item.get<std::string>());
    }
  }
  return n;
}

std::string percent(double fraction) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f%%", fraction * 100.0);
  return buf;
}

void render(const StallNode& n, int depth, std::string& out) {
  const std::string indent(static_cast<std::size_t>(depth) * 2, ' ');
  out += indent + "- " + n.label + ": " + percent(n.stall_fraction) + " of stall cycles\n";
  for (const auto& s : n.suggestions) out += indent + "  * Suggestion: " + s + "\n";
  std::vector<const StallNode*> kids;
  for (const auto& c : n.children) kids.push_back(&c);
  std::stable_sort(kids.begin(), kids.end(), [](const StallNode* a, const StallNode* b) {
    if (a->stall_fraction != b->stall_fraction) return a->stall_fraction > b->stall_fraction;
    return a->label < b->label;
  });
  for (const auto* c : kids) render(*c, depth + 1, out);
}

}  // namespace

StallNode parse_tree(const json& j) { return parse_node(j, "/"); }

std::string textify(const StallNode& root) {
  std::string out = "DrGPU stall analysis\n\n";
  render(root, 0, out);
  return out;
}

std::string textify(const json& tree) { return textify(parse_tree(tree)); }

StallNode run_adapter(const AdapterConfig& config, const KernelProfile& profile) {
  if (!config.configured()) throw AdapterFailure("no DrGPU adapter command configured");
  TempDir scratch("kexplain-drgpu");
  const auto metrics_csv = scratch.path() / (profile.id + ".metrics.csv");
  const auto lines_csv = scratch.path() / (profile.id + ".lines.csv");
  write_text_file(metrics_csv, serialize_metrics_csv(profile.metrics));
  write_text_file(lines_csv, serialize_line_csv(profile.line_records.value_or(std::vector<LineRecord>{})));

  std::vector<std::string> argv{config.command};
  for (std::string arg : config.args) {
    for (const auto& [key, value] : {std::pair{std::string("{metrics_csv}"), metrics_csv.string()},
                                     std::pair{std::string("{lines_csv}"), lines_csv.string()}}) {
      for (auto pos = arg.find(key); pos != std::string::npos; pos = arg.find(key, pos + value.size())) {
        arg.replace(pos, key.size(), value);
      }
    }
    argv.push_back(std::move(arg));
  }
  ProcessResult r = run_shell(join_command(argv));
  if (r.exit_code != 0) {
    throw AdapterFailure("DrGPU adapter exited with status " + std::to_string(r.exit_code) +
                         (r.err.empty() ? "" : ": " + r.err.substr(0, 400)));
  }
  json tree = json::parse(r.out, nullptr, false);
  if (tree.is_discarded()) throw AdapterFailure("DrGPU adapter output is not JSON");
  try {
    return parse_tree(tree);
  } catch (const TreeSchema& e) {
    throw AdapterFailure(e.what());
  }
}

std::string report_for(const AdapterConfig& config, const std::vector<const KernelProfile*>& profiles) {
  std::string out;
  for (const auto* p : profiles) {
    if (!out.empty()) out += "\n";
    out += "Profile " + p->id + ":\n" + textify(run_adapter(config, *p));
  }
  return out;
}

}  // namespace kexplain::drgpu
