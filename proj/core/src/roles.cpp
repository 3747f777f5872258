#include "kexplain/roles.hpp"

#include <algorithm>
#include <sstream>

#include "kexplain/structured.hpp"

using nlohmann::json;

namespace kexplain::roles {

namespace {

constexpr const char* kNone = "(none)";

llm::ChatRequest make_request(const RoleEnv& env, const std::string& user,
                              std::optional<double> temperature) {
  llm::ChatRequest req;
  req.system_prompt = env.library.text("prompts/system.txt");
  req.messages.push_back({llm::Role::user, user});
  req.temperature = temperature;
  req.reasoning_effort = env.settings.reasoning_effort;
  req.max_output_tokens = env.settings.max_output_tokens;
  return req;
}

template <class T>
void call(RoleOutput<T>& out, const RoleEnv& env, const std::string& tmpl_name,
          const std::map<std::string, std::string>& values, std::optional<double> temperature) {
  if (!env.gateway) throw PreconditionError("role '" + out.role_name + "' needs a gateway");
  std::string user = assets::render(env.library.text(tmpl_name), values);
  out.request = make_request(env, user, temperature);
  out.raw_text = env.gateway->complete(*out.request).content;
}

std::optional<double> selector_temp(const RoleEnv& env) { return env.settings.selector_temperature; }

std::string or_none(const std::string& s) { return s.empty() ? kNone : s; }

std::string join(const std::vector<std::string>& parts, const std::string& sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

std::vector<CodeRef> parse_code_refs(const json& arr) {
  std::vector<CodeRef> refs;
  if (!arr.is_array()) return refs;
  for (const auto& r : arr) {
    if (!r.is_object() || !r.contains("file") || !r["file"].is_string()) continue;
    CodeRef ref;
    ref.file = r["file"].get<std::string>();
    auto line_of = [&](const char* a, const char* b) -> std::optional<int> {
      for (const char* key : {a, b}) {
        if (r.contains(key) && r[key].is_number_integer()) return r[key].get<int>();
      }
      return std::nullopt;
    };
    auto first = line_of("first_line", "start");
    auto last = line_of("last_line", "end");
    if (!first) first = last;
    if (!first || *first < 1) continue;
    ref.first_line = *first;
    ref.last_line = std::max(*first, last.value_or(*first));
    refs.push_back(std::move(ref));
  }
  return refs;
}

std::optional<std::vector<std::string>> string_list(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key) || !j[key].is_array()) return std::nullopt;
  std::vector<std::string> out;
  for (const auto& v : j[key]) {
    if (v.is_string()) out.push_back(v.get<std::string>());
  }
  return out;
}

std::string render_summary(const AlgorithmSummary& s) { return or_none(s.text); }

}  // namespace

// ---------------------------------------------------------------------------
// Shared renderers

std::vector<Suggestion> parse_suggestions(const json& arr) {
  std::vector<Suggestion> out;
  if (!arr.is_array()) return out;
  for (const auto& item : arr) {
    if (!item.is_object() || !item.contains("title") || !item["title"].is_string()) continue;
    Suggestion s;
    s.title = trim_copy(item["title"].get<std::string>());
    if (s.title.empty()) continue;
    if (item.contains("rationale") && item["rationale"].is_string()) {
      s.rationale = item["rationale"].get<std::string>();
    }
    if (item.contains("code_refs")) s.code_refs = parse_code_refs(item["code_refs"]);
    out.push_back(std::move(s));
  }
  return out;
}

std::string render_metric_table(const std::vector<const KernelProfile*>& profiles,
                                const std::vector<std::string>& metric_names) {
  std::ostringstream out;
  for (const auto* p : profiles) {
    out << "Profile " << p->id << ":\n";
    out << "| metric | unit | value |\n|---|---|---|\n";
    for (const auto& name : metric_names) {
      const MetricValue* m = p->find_metric(name);
      if (!m) continue;
      out << "| " << m->name << " | " << m->unit.value_or("") << " | " << m->value_text() << " |\n";
    }
    out << "\n";
  }
  return out.str();
}

std::string render_sources(const std::vector<SourceFile>& sources, std::size_t budget_chars) {
  std::ostringstream out;
  std::size_t remaining = budget_chars;
  for (const auto& s : sources) {
    out << "File " << s.path << ":\n```\n";
    if (s.content.size() <= remaining) {
      out << s.content;
      remaining -= s.content.size();
    } else {
      out << s.content.substr(0, remaining);
      out << "\n... [truncated: " << (s.content.size() - remaining) << " more characters]";
      remaining = 0;
    }
    if (!s.content.empty() && s.content.back() != '\n') out << "\n";
    out << "```\n\n";
  }
  return out.str();
}

std::string render_hypotheses(const HypothesisSet& hypotheses) {
  if (hypotheses.empty()) return kNone;
  std::ostringstream out;
  for (const auto& h : hypotheses) {
    out << "- " << h.id << ": " << h.statement;
    if (!h.code_refs.empty()) {
      out << " (";
      for (std::size_t i = 0; i < h.code_refs.size(); ++i) {
        const auto& r = h.code_refs[i];
        if (i) out << ", ";
        out << r.file << ":" << r.first_line;
        if (r.last_line != r.first_line) out << "-" << r.last_line;
      }
      out << ")";
    }
    out << "\n";
  }
  return out.str();
}

std::string render_run_config(const KernelProfile& profile, const BundleManifest& manifest) {
  std::ostringstream out;
  out << profile.id << ": gpu_arch=" << or_none(profile.config.gpu_arch);
  for (const auto& k : manifest.knobs) {
    auto it = profile.config.knobs.find(k.name);
    std::string value;
    if (it != profile.config.knobs.end()) {
      value = knob_value_text(it->second);
    } else if (auto d = manifest.defaults.find(k.name); d != manifest.defaults.end()) {
      value = knob_value_text(d->second) + " (default)";
    } else {
      value = "?";
    }
    out << ", " << k.name << "=" << value;
    if (k.unit) out << " " << *k.unit;
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// Source Code Inspection

RoleOutput<std::string> describe_source_file(const SourceFile& file, const RoleEnv& env) {
  if (file.content.empty()) {
    throw PreconditionError("cannot describe empty source file '" + file.path + "'");
  }
  RoleOutput<std::string> out;
  out.role_name = "file_describer";
  call(out, env, "prompts/describe_file.txt",
       {{"path", file.path}, {"sloc", std::to_string(file.sloc())}, {"content", file.content}},
       std::nullopt);
  out.parsed = truncate_words(strip_last_json_block(out.raw_text), 200);
  if (out.parsed.empty()) {
    out.degraded = true;
    out.parsed = "Source file " + file.path + " (" + std::to_string(file.sloc()) + " SLoC).";
  }
  return out;
}

RoleOutput<std::string> select_source_file(const std::map<std::string, std::string>& descriptions,
                                           const std::set<std::string>& reviewed,
                                           const AlgorithmSummary& summary, const RoleEnv& env) {
  std::vector<std::string> unreviewed;
  for (const auto& [path, desc] : descriptions) {
    if (!reviewed.count(path)) unreviewed.push_back(path);
  }
  if (unreviewed.empty()) throw PreconditionError("select_source_file: every file was reviewed");

  RoleOutput<std::string> out;
  out.role_name = "file_selector";
  std::ostringstream candidates;
  for (const auto& path : unreviewed) {
    candidates << "- " << path << ": " << descriptions.at(path) << "\n";
  }
  call(out, env, "prompts/select_file.txt",
       {{"summary", render_summary(summary)},
        {"reviewed", reviewed.empty() ? kNone : join({reviewed.begin(), reviewed.end()}, ", ")},
        {"candidates", candidates.str()}},
       selector_temp(env));

  auto parsed = last_json_block(out.raw_text);
  std::optional<std::string> choice;
  if (parsed && parsed->is_object() && parsed->contains("file") && (*parsed)["file"].is_string()) {
    choice = trim_copy((*parsed)["file"].get<std::string>());
  }
  if (!choice) {
    out.degraded = true;
    out.parsed = unreviewed.front();
    out.notes.push_back("unparseable selection; fell back to " + out.parsed);
  } else if (std::find(unreviewed.begin(), unreviewed.end(), *choice) == unreviewed.end()) {
    out.parsed = unreviewed.front();
    out.notes.push_back("clamped choice '" + *choice + "' to unreviewed file " + out.parsed);
  } else {
    out.parsed = *choice;
  }
  return out;
}

RoleOutput<AlgorithmSummary> summarize_algorithm(const AlgorithmSummary& current,
                                                 const SourceFile& file, const RoleEnv& env) {
  RoleOutput<AlgorithmSummary> out;
  out.role_name = "algorithm_summarizer";
  call(out, env, "prompts/summarize.txt",
       {{"summary", render_summary(current)}, {"path", file.path}, {"content", file.content}},
       std::nullopt);
  out.parsed.files_covered = current.files_covered;
  out.parsed.files_covered.insert(file.path);
  std::string text = strip_last_json_block(out.raw_text);
  if (text.empty()) {
    out.degraded = true;
    text = current.text.empty() ? "Reviewed " + file.path + "." : current.text;
  }
  out.parsed.text = std::move(text);
  return out;
}

RoleOutput<HypothesisSet> hypothesize_performance(const HypothesisSet& hypotheses,
                                                  const AlgorithmSummary& summary,
                                                  const SourceFile& file, const RoleEnv& env) {
  RoleOutput<HypothesisSet> out;
  out.role_name = "performance_hypothesizer";
  out.parsed = hypotheses;
  call(out, env, "prompts/hypothesize.txt",
       {{"summary", render_summary(summary)},
        {"hypotheses", render_hypotheses(hypotheses)},
        {"path", file.path},
        {"content", file.content}},
       std::nullopt);

  auto parsed = last_json_block(out.raw_text);
  const json* list = nullptr;
  if (parsed && parsed->is_object() && parsed->contains("hypotheses") &&
      (*parsed)["hypotheses"].is_array()) {
    list = &(*parsed)["hypotheses"];
  } else if (parsed && parsed->is_array()) {
    list = &*parsed;
  }
  if (!list) {
    out.degraded = true;
    out.notes.push_back("unparseable hypotheses; set left unchanged");
    return out;
  }

  int next_id = 0;
  for (const auto& h : hypotheses) {
    if (h.id.size() > 1 && h.id[0] == 'H') {
      try {
        next_id = std::max(next_id, std::stoi(h.id.substr(1)));
      } catch (const std::exception&) {
      }
    }
  }
  for (const auto& item : *list) {
    if (!item.is_object() || !item.contains("statement") || !item["statement"].is_string()) continue;
    std::string statement = trim_copy(item["statement"].get<std::string>());
    if (statement.empty()) continue;
    std::vector<CodeRef> refs = parse_code_refs(item.value("code_refs", json::array()));
    std::string id = item.contains("id") && item["id"].is_string() ? item["id"].get<std::string>() : "";
    auto existing = std::find_if(out.parsed.begin(), out.parsed.end(),
                                 [&](const PerformanceHypothesis& h) { return h.id == id; });
    if (!id.empty() && existing != out.parsed.end()) {
      existing->statement = std::move(statement);
      if (!refs.empty()) existing->code_refs = std::move(refs);
      continue;
    }
    PerformanceHypothesis h;
    h.id = "H" + std::to_string(++next_id);
    h.statement = std::move(statement);
    h.code_refs = std::move(refs);
    out.parsed.push_back(std::move(h));
  }
  for (auto& h : out.parsed) h.status = HypothesisStatus::pending;
  return out;
}

// ---------------------------------------------------------------------------
// Profile Inspection

RoleOutput<std::vector<std::string>> select_profiles(const ProfileSelectionRequest& req,
                                                     const RoleEnv& env) {
  if (!req.bundle || req.bundle->profiles.empty()) {
    throw PreconditionError("select_profiles needs a bundle with profiles");
  }
  const ProfileBundle& bundle = *req.bundle;
  RoleOutput<std::vector<std::string>> out;
  out.role_name = "profile_selector";

  std::vector<std::string> order = req.rank_order.empty() ? bundle.profile_ids() : req.rank_order;
  std::vector<std::string> unanalyzed;
  for (const auto& id : order) {
    if (!req.analyzed.count(id)) unanalyzed.push_back(id);
  }

  if (bundle.profiles.size() == 1) {
    out.parsed = {bundle.profiles.front().id};
    out.notes.push_back("bypassed: single-profile bundle");
    return out;
  }
  if (!req.enabled) {
    out.parsed = {unanalyzed.empty() ? order.front() : unanalyzed.front()};
    out.notes.push_back("profile selector disabled; next profile by default-distance rank");
    return out;
  }

  std::ostringstream profiles;
  for (const auto& id : order) {
    const KernelProfile* p = bundle.find_profile(id);
    profiles << "- " << render_run_config(*p, bundle.manifest)
             << (req.analyzed.count(id) ? " [analyzed]" : " [not analyzed]") << "\n";
  }
  std::ostringstream prior;
  if (req.prior_passes && !req.prior_passes->empty()) {
    for (const auto& pass : *req.prior_passes) {
      prior << "Pass " << pass.pass_index << " (" << join(pass.selected_profile_ids, ", ") << "): "
            << truncate_words(pass.analysis_text, 120) << "\n";
    }
  } else {
    prior << kNone;
  }
  call(out, env, "prompts/select_profiles.txt",
       {{"kernel", bundle.manifest.kernel_name},
        {"summary", req.summary ? render_summary(*req.summary) : kNone},
        {"hypotheses", req.hypotheses ? render_hypotheses(*req.hypotheses) : kNone},
        {"profiles", profiles.str()},
        {"prior_passes", prior.str()},
        {"max_profiles", std::to_string(env.settings.max_profiles_per_pass)}},
       selector_temp(env));

  auto parsed = last_json_block(out.raw_text);
  auto chosen = parsed ? string_list(*parsed, "profiles") : std::nullopt;
  if (!chosen && parsed && parsed->is_array()) chosen = string_list(json{{"p", *parsed}}, "p");
  if (!chosen) {
    out.degraded = true;
    out.parsed = {unanalyzed.empty() ? order.front() : unanalyzed.front()};
    out.notes.push_back("unparseable selection; fell back to rank order");
    return out;
  }

  std::vector<std::string> valid;
  for (auto id : *chosen) {
    id = trim_copy(id);
    if (!bundle.find_profile(id)) {
      out.notes.push_back("dropped unknown profile '" + id + "'");
      continue;
    }
    if (std::find(valid.begin(), valid.end(), id) == valid.end()) valid.push_back(id);
  }
  const std::size_t cap = std::max<std::size_t>(1, env.settings.max_profiles_per_pass);
  if (!unanalyzed.empty()) {
    auto fresh = std::find_if(valid.begin(), valid.end(),
                              [&](const std::string& id) { return !req.analyzed.count(id); });
    if (fresh == valid.end()) {
      valid.insert(valid.begin(), unanalyzed.front());
      out.notes.push_back("injected unanalyzed profile " + unanalyzed.front());
    } else if (static_cast<std::size_t>(fresh - valid.begin()) >= cap) {
      std::rotate(valid.begin(), fresh, fresh + 1);
    }
  }
  if (valid.empty()) valid.push_back(order.front());
  if (valid.size() > cap) {
    out.notes.push_back("truncated selection to " + std::to_string(cap) + " profiles");
    valid.resize(cap);
  }
  out.parsed = std::move(valid);
  return out;
}

std::vector<std::string> available_metrics(const std::vector<const KernelProfile*>& profiles) {
  std::vector<std::string> names;
  std::set<std::string> seen;
  for (const auto* p : profiles) {
    for (const auto& m : p->metrics) {
      if (seen.insert(m.name).second) names.push_back(m.name);
    }
  }
  return names;
}

RoleOutput<std::vector<std::string>> select_metrics(const std::vector<const KernelProfile*>& profiles,
                                                    const AlgorithmSummary& summary,
                                                    const HypothesisSet& hypotheses, bool enabled,
                                                    const RoleEnv& env) {
  RoleOutput<std::vector<std::string>> out;
  out.role_name = "metric_selector";
  const std::vector<std::string> available = available_metrics(profiles);
  if (available.empty()) throw PreconditionError("select_metrics: selected profiles have no metrics");
  if (!enabled) {
    out.parsed = available;
    out.notes.push_back("metric selector disabled; using all metrics");
    return out;
  }

  std::ostringstream metrics;
  std::set<std::string> listed;
  for (const auto* p : profiles) {
    for (const auto& m : p->metrics) {
      if (!listed.insert(m.name).second) continue;
      metrics << "- " << m.name;
      if (m.unit) metrics << " [" << *m.unit << "]";
      metrics << "\n";
    }
  }
  std::vector<std::string> ids;
  for (const auto* p : profiles) ids.push_back(p->id);
  call(out, env, "prompts/select_metrics.txt",
       {{"summary", render_summary(summary)},
        {"hypotheses", render_hypotheses(hypotheses)},
        {"profiles", join(ids, ", ")},
        {"metrics", metrics.str()}},
       selector_temp(env));

  auto parsed = last_json_block(out.raw_text);
  auto chosen = parsed ? string_list(*parsed, "metrics") : std::nullopt;
  if (!chosen) {
    out.degraded = true;
    out.parsed = available;
    out.notes.push_back("unparseable selection; using all metrics");
    return out;
  }
  std::set<std::string> allowed(available.begin(), available.end());
  std::set<std::string> taken;
  for (auto name : *chosen) {
    name = trim_copy(name);
    if (!allowed.count(name)) {
      out.notes.push_back("dropped unknown metric '" + name + "'");
      continue;
    }
    if (taken.insert(name).second) out.parsed.push_back(name);
  }
  if (out.parsed.empty()) {
    out.degraded = true;
    out.parsed = available;
    out.notes.push_back("empty selection after clamp; using all metrics");
  }
  return out;
}

void resolve_citations(std::vector<MetricCitation>& citations, const ProfileBundle& bundle,
                       const std::vector<std::string>& profile_ids,
                       const std::vector<std::string>& metric_names) {
  std::set<std::string> ids(profile_ids.begin(), profile_ids.end());
  std::set<std::string> names(metric_names.begin(), metric_names.end());
  for (auto& c : citations) {
    const KernelProfile* p = bundle.find_profile(c.profile_id);
    c.resolved = p && ids.count(c.profile_id) && names.count(c.metric_name) &&
                 p->find_metric(c.metric_name) != nullptr;
  }
}

RoleOutput<AnalysisPass> analyze_profiles(const AnalysisRequest& req, const RoleEnv& env) {
  if (!req.bundle) throw PreconditionError("analyze_profiles needs a bundle");
  if (req.profiles.empty()) throw PreconditionError("analyze_profiles needs selected profiles");
  if (req.metric_names.empty()) throw PreconditionError("analyze_profiles needs a metric selection");

  RoleOutput<AnalysisPass> out;
  out.role_name = "profile_analyzer";
  AnalysisPass& pass = out.parsed;
  pass.pass_index = req.pass_index;
  for (const auto* p : req.profiles) pass.selected_profile_ids.push_back(p->id);
  pass.selected_metric_names = req.metric_names;

  std::ostringstream configs;
  for (const auto* p : req.profiles) configs << "- " << render_run_config(*p, req.bundle->manifest) << "\n";
  call(out, env, "prompts/analyze.txt",
       {{"kernel", req.bundle->manifest.kernel_name + " (" + req.bundle->manifest.app_name + ")"},
        {"guidelines", req.guidelines},
        {"summary", req.summary ? render_summary(*req.summary) : kNone},
        {"hypotheses", req.hypotheses ? render_hypotheses(*req.hypotheses) : kNone},
        {"configs", configs.str()},
        {"profile_ids", join(pass.selected_profile_ids, ", ")},
        {"metrics", render_metric_table(req.profiles, req.metric_names)},
        {"sources", render_sources(req.bundle->sources, env.settings.source_budget_chars)}},
       std::nullopt);

  pass.analysis_text = strip_last_json_block(out.raw_text);
  pass.citations = parse_citations(pass.analysis_text);
  resolve_citations(pass.citations, *req.bundle, pass.selected_profile_ids, pass.selected_metric_names);
  for (const auto& c : pass.citations) {
    if (!c.resolved) {
      out.notes.push_back("unresolved citation " + format_citation(c));
    }
  }

  auto parsed = last_json_block(out.raw_text);
  if (parsed && parsed->is_object() && parsed->contains("suggestions")) {
    pass.suggestions = parse_suggestions((*parsed)["suggestions"]);
  } else if (parsed) {
    out.degraded = true;
    out.notes.push_back("JSON block without a suggestions list");
  } else {
    bool has_fence_attempt = out.raw_text.find("```json") != std::string::npos;
    if (has_fence_attempt) {
      out.degraded = true;
      out.notes.push_back("malformed suggestions block");
    }
  }
  if (pass.analysis_text.empty()) {
    out.degraded = true;
    pass.analysis_text = "(the analyzer returned no analysis text)";
  }
  return out;
}

RoleOutput<AnalysisPass> evaluate_drgpu(const AnalysisPass& pass, const DrGpuInput& drgpu,
                                        bool enabled, const RoleEnv& env) {
  RoleOutput<AnalysisPass> out;
  out.role_name = "drgpu_evaluator";
  out.parsed = pass;
  if (!enabled) return out;
  if (!drgpu.report) {
    std::string warning = "DrGPU adapter failed: " + drgpu.failure;
    out.parsed.notes.push_back("warning: " + warning);
    out.notes.push_back(warning);
    return out;
  }

  call(out, env, "prompts/drgpu_evaluate.txt",
       {{"analysis", pass.analysis_text}, {"drgpu_report", *drgpu.report}}, std::nullopt);
  auto parsed = last_json_block(out.raw_text);
  if (!parsed || !parsed->is_object()) {
    out.degraded = true;
    out.parsed.notes.push_back("DrGPU suggestions not evaluated: unparseable reply");
    return out;
  }
  auto adopted = parse_suggestions(parsed->value("adopted", json::array()));
  for (const auto& s : adopted) {
    bool dup = std::any_of(out.parsed.suggestions.begin(), out.parsed.suggestions.end(),
                           [&](const Suggestion& e) { return e.title == s.title; });
    out.parsed.notes.push_back("DrGPU suggestion adopted: " + s.title);
    if (!dup) out.parsed.suggestions.push_back(s);
  }
  if (parsed->contains("rejected") && (*parsed)["rejected"].is_array()) {
    for (const auto& r : (*parsed)["rejected"]) {
      if (!r.is_object() || !r.contains("title") || !r["title"].is_string()) continue;
      std::string note = "DrGPU suggestion rejected: " + r["title"].get<std::string>();
      if (r.contains("reason") && r["reason"].is_string()) {
        note += " (" + r["reason"].get<std::string>() + ")";
      }
      out.parsed.notes.push_back(note);
    }
  }
  if (parsed->contains("analysis_addendum") && (*parsed)["analysis_addendum"].is_string()) {
    std::string addendum = trim_copy((*parsed)["analysis_addendum"].get<std::string>());
    if (!addendum.empty()) {
      out.parsed.analysis_text += "\n\n#### DrGPU findings\n\n" + addendum;
      // Left unresolved; the caller holds the bundle and re-resolves.
      auto extra = parse_citations(addendum);
      out.parsed.citations.insert(out.parsed.citations.end(), extra.begin(), extra.end());
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Aggregation and review

namespace {

std::vector<Suggestion> union_suggestions(const std::vector<AnalysisPass>& passes) {
  std::vector<Suggestion> out;
  for (const auto& p : passes) {
    for (const auto& s : p.suggestions) {
      bool dup = std::any_of(out.begin(), out.end(), [&](const Suggestion& e) { return e.title == s.title; });
      if (!dup) out.push_back(s);
    }
  }
  return out;
}

std::vector<MetricCitation> union_resolved_citations(const std::vector<AnalysisPass>& passes) {
  std::vector<MetricCitation> out;
  for (const auto& p : passes) {
    for (const auto& c : p.citations) {
      if (!c.resolved) continue;
      if (std::find(out.begin(), out.end(), c) == out.end()) out.push_back(c);
    }
  }
  return out;
}

}  // namespace

RoleOutput<ExplanationReport> aggregate_analyses(const std::vector<AnalysisPass>& passes,
                                                 const AlgorithmSummary& summary,
                                                 const std::string& guidelines,
                                                 const RoleEnv& env) {
  if (passes.empty()) throw PreconditionError("aggregate_analyses needs at least one pass");
  RoleOutput<ExplanationReport> out;
  out.role_name = "analysis_aggregator";

  std::ostringstream analyses;
  for (const auto& p : passes) {
    analyses << "### Pass " << p.pass_index << " (profiles: " << join(p.selected_profile_ids, ", ")
             << ")\n\n"
             << p.analysis_text << "\n\n";
    if (!p.suggestions.empty()) {
      analyses << "Suggestions from this pass:\n";
      for (const auto& s : p.suggestions) analyses << "- " << s.title << ": " << s.rationale << "\n";
      analyses << "\n";
    }
  }
  call(out, env, "prompts/aggregate.txt",
       {{"guidelines", guidelines}, {"summary", render_summary(summary)}, {"analyses", analyses.str()}},
       std::nullopt);

  ExplanationReport& report = out.parsed;
  for (const auto& p : passes) report.provenance.push_back(p.pass_index);
  report.citations = union_resolved_citations(passes);

  auto parsed = last_json_block(out.raw_text);
  bool ok = parsed && parsed->is_object() && parsed->contains("summary") &&
            (*parsed)["summary"].is_string();
  if (ok) {
    report.summary_section = trim_copy((*parsed)["summary"].get<std::string>());
    if (auto b = string_list(*parsed, "bottlenecks")) {
      for (auto& s : *b) {
        s = trim_copy(s);
        if (!s.empty()) report.bottleneck_sections.push_back(std::move(s));
      }
    }
    if (parsed->contains("knob_analysis") && (*parsed)["knob_analysis"].is_string()) {
      std::string k = trim_copy((*parsed)["knob_analysis"].get<std::string>());
      if (!k.empty()) report.knob_analysis = std::move(k);
    }
    report.suggestions = parse_suggestions(parsed->value("suggestions", json::array()));
  } else {
    out.degraded = true;
    out.notes.push_back("unparseable aggregate; report assembled from pass analyses");
    std::string prose = strip_last_json_block(out.raw_text);
    report.summary_section = prose.empty() ? "The aggregated summary could not be parsed; the "
                                             "per-pass analyses follow."
                                           : prose;
    for (const auto& p : passes) report.bottleneck_sections.push_back(p.analysis_text);
  }
  if (report.suggestions.empty()) {
    report.suggestions = union_suggestions(passes);
    if (!report.suggestions.empty() && ok) {
      out.notes.push_back("aggregate listed no suggestions; carried over pass suggestions");
    }
  }
  return out;
}

RoleOutput<ReviewReport> review_explanation(const ExplanationReport& report,
                                            const HypothesisSet& hypotheses, const RoleEnv& env) {
  RoleOutput<ReviewReport> out;
  out.role_name = "explanation_reviewer";
  if (hypotheses.empty()) return out;

  std::ostringstream text;
  text << report.summary_section << "\n\n";
  for (const auto& b : report.bottleneck_sections) text << b << "\n\n";
  if (report.knob_analysis) text << *report.knob_analysis << "\n\n";
  for (const auto& s : report.suggestions) text << "- " << s.title << ": " << s.rationale << "\n";
  call(out, env, "prompts/review.txt",
       {{"hypotheses", render_hypotheses(hypotheses)}, {"report", text.str()}}, selector_temp(env));

  std::map<std::string, std::pair<HypothesisStatus, std::string>> verdicts;
  auto parsed = last_json_block(out.raw_text);
  const json* list = nullptr;
  if (parsed && parsed->is_object() && parsed->contains("verdicts") && (*parsed)["verdicts"].is_array()) {
    list = &(*parsed)["verdicts"];
  }
  if (!list) {
    out.degraded = true;
    out.notes.push_back("unparseable review; all hypotheses inconclusive");
  } else {
    for (const auto& v : *list) {
      if (!v.is_object() || !v.contains("id") || !v["id"].is_string()) continue;
      if (!v.contains("verdict") || !v["verdict"].is_string()) continue;
      auto status = hypothesis_status_from_string(v["verdict"].get<std::string>());
      if (!status || *status == HypothesisStatus::pending) continue;
      std::string rationale = v.contains("rationale") && v["rationale"].is_string()
                                  ? v["rationale"].get<std::string>()
                                  : "";
      verdicts.emplace(v["id"].get<std::string>(), std::make_pair(*status, rationale));
    }
  }
  for (const auto& h : hypotheses) {
    HypothesisVerdict v;
    v.hypothesis_id = h.id;
    if (auto it = verdicts.find(h.id); it != verdicts.end()) {
      v.verdict = it->second.first;
      v.rationale = it->second.second;
    } else {
      v.verdict = HypothesisStatus::inconclusive;
      v.rationale = "no parseable verdict";
      if (list) out.notes.push_back("no parseable verdict for " + h.id);
    }
    out.parsed.verdicts.push_back(std::move(v));
  }
  return out;
}

HypothesisSet apply_review(const HypothesisSet& hypotheses, const ReviewReport& review) {
  HypothesisSet out = hypotheses;
  for (auto& h : out) {
    for (const auto& v : review.verdicts) {
      if (v.hypothesis_id == h.id) h.status = v.verdict;
    }
  }
  return out;
}

}  // namespace kexplain::roles
