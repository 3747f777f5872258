#include "kexplain/techniques.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

#include "kexplain/structured.hpp"

using nlohmann::json;

namespace kexplain {

namespace {

std::string fold(std::string s) {
  s = trim_copy(s);
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

}  // namespace

std::vector<std::string> parse_taxonomy(const std::string& text) {
  std::vector<std::string> labels;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) {
    std::string t = trim_copy(line);
    if (t.empty() || t[0] == '#') continue;
    if (std::find(labels.begin(), labels.end(), t) == labels.end()) labels.push_back(t);
  }
  return labels;
}

roles::RoleOutput<std::vector<std::string>> label_techniques(const std::string& code_diff,
                                                             const std::string& self_report,
                                                             const roles::RoleEnv& env) {
  roles::RoleOutput<std::vector<std::string>> out;
  out.role_name = "technique_labeler";
  if (trim_copy(code_diff).empty()) return out;
  if (!env.gateway) throw PreconditionError("label_techniques needs a gateway");

  const std::vector<std::string> taxonomy = parse_taxonomy(env.library.text("taxonomy.txt"));
  std::string listing;
  for (const auto& l : taxonomy) listing += "- " + l + "\n";

  llm::ChatRequest req;
  req.system_prompt = env.library.text("prompts/system.txt");
  req.messages.push_back({llm::Role::user, assets::render(env.library.text("prompts/label_techniques.txt"),
                                                          {{"taxonomy", listing},
                                                           {"diff", code_diff},
                                                           {"self_report", self_report.empty() ? "(none)" : self_report}})});
  req.temperature = env.settings.selector_temperature;
  req.reasoning_effort = env.settings.reasoning_effort;
  req.max_output_tokens = env.settings.max_output_tokens;
  out.request = req;
  out.raw_text = env.gateway->complete(req).content;

  auto parsed = last_json_block(out.raw_text);
  if (!parsed || !parsed->is_object() || !parsed->contains("labels") || !(*parsed)["labels"].is_array()) {
    out.degraded = true;
    out.notes.push_back("unparseable labels");
    return out;
  }
  for (const auto& l : (*parsed)["labels"]) {
    if (!l.is_string()) continue;
    std::string want = fold(l.get<std::string>());
    auto it = std::find_if(taxonomy.begin(), taxonomy.end(), [&](const std::string& t) { return fold(t) == want; });
    if (it == taxonomy.end()) {
      out.notes.push_back("dropped label outside the taxonomy: " + l.get<std::string>());
      continue;
    }
    if (std::find(out.parsed.begin(), out.parsed.end(), *it) == out.parsed.end()) out.parsed.push_back(*it);
  }
  return out;
}

}  // namespace kexplain
