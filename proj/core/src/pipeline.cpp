#include "kexplain/pipeline.hpp"

#include <algorithm>
#include <cstdio>

#include "kexplain/citations.hpp"
#include "kexplain/ingest.hpp"
#include "kexplain/json_io.hpp"
#include "kexplain/ranking.hpp"
#include "kexplain/report.hpp"

using nlohmann::json;
namespace fs = std::filesystem;

namespace kexplain {

const std::vector<std::string>& role_toggle_names() {
  static const std::vector<std::string> names = {"profile_selector", "metric_selector",
                                                 "drgpu_evaluator", "reviewer"};
  return names;
}

void set_role_toggle(RoleToggles& toggles, const std::string& name, bool enabled) {
  if (name == "metric_selector") {
    toggles.metric_selector = enabled;
  } else if (name == "profile_selector") {
    toggles.profile_selector = enabled;
  } else if (name == "drgpu_evaluator") {
    toggles.drgpu_evaluator = enabled;
  } else if (name == "reviewer") {
    toggles.reviewer = enabled;
  } else {
    throw Error("unknown role toggle '" + name + "'");
  }
}

int PipelineConfig::effective_max_passes(std::size_t profile_count) const {
  if (max_passes) return *max_passes;
  return std::max(4, static_cast<int>(2 * profile_count));
}

// ---------------------------------------------------------------------------
// Configuration

namespace {

void reject_unknown(const json& j, const std::vector<std::string>& known, const std::string& where) {
  for (const auto& [key, value] : j.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw Error("unknown configuration key '" + where + key + "'");
    }
  }
}

fs::path resolve(const fs::path& base, const std::string& p) {
  fs::path path(p);
  return path.is_relative() && !base.empty() ? base / path : path;
}

llm::ReasoningEffort effort(const std::string& s) {
  if (s == "low") return llm::ReasoningEffort::low;
  if (s == "medium") return llm::ReasoningEffort::medium;
  if (s == "high") return llm::ReasoningEffort::high;
  throw Error("reasoning_effort must be low, medium or high, got '" + s + "'");
}

template <class T>
T get(const json& j, const char* key, const std::string& where) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw Error("configuration key '" + where + key + "' has the wrong type");
  }
}

}  // namespace

PipelineConfig pipeline_config_from_json(const json& j, const fs::path& base_dir) {
  if (!j.is_object()) throw Error("pipeline configuration must be a JSON object");
  reject_unknown(j,
                 {"roles", "max_passes", "extra_passes", "source_budget_chars", "max_profiles_per_pass",
                  "reasoning_effort", "max_output_tokens", "selector_temperature", "assets_dir", "drgpu",
                  "provider"},
                 "");
  PipelineConfig c;
  if (j.contains("roles")) {
    const json& r = j["roles"];
    if (!r.is_object()) throw Error("configuration key 'roles' must be an object");
    for (const auto& [name, value] : r.items()) {
      if (!value.is_boolean()) throw Error("role toggle '" + name + "' must be true or false");
      set_role_toggle(c.roles, name, value.get<bool>());
    }
  }
  if (j.contains("max_passes") && !j["max_passes"].is_null()) {
    c.max_passes = get<int>(j, "max_passes", "");
    if (*c.max_passes < 1) throw Error("max_passes must be at least 1");
  }
  if (j.contains("extra_passes")) {
    c.extra_passes = get<int>(j, "extra_passes", "");
    if (c.extra_passes < 0) throw Error("extra_passes must be >= 0");
  }
  if (j.contains("source_budget_chars")) {
    c.prompts.source_budget_chars = get<std::size_t>(j, "source_budget_chars", "");
  }
  if (j.contains("max_profiles_per_pass")) {
    c.prompts.max_profiles_per_pass = get<std::size_t>(j, "max_profiles_per_pass", "");
    if (c.prompts.max_profiles_per_pass == 0) throw Error("max_profiles_per_pass must be at least 1");
  }
  if (j.contains("reasoning_effort")) {
    c.prompts.reasoning_effort = effort(get<std::string>(j, "reasoning_effort", ""));
  }
  if (j.contains("max_output_tokens")) c.prompts.max_output_tokens = get<int>(j, "max_output_tokens", "");
  if (j.contains("selector_temperature")) {
    c.prompts.selector_temperature = get<double>(j, "selector_temperature", "");
  }
  if (j.contains("assets_dir") && !j["assets_dir"].is_null()) {
    c.assets_dir = resolve(base_dir, get<std::string>(j, "assets_dir", ""));
  }
  if (j.contains("drgpu")) {
    const json& d = j["drgpu"];
    reject_unknown(d, {"command", "args"}, "drgpu.");
    if (d.contains("command")) c.drgpu.command = get<std::string>(d, "command", "drgpu.");
    if (d.contains("args")) c.drgpu.args = get<std::vector<std::string>>(d, "args", "drgpu.");
  }
  if (j.contains("provider")) {
    const json& p = j["provider"];
    reject_unknown(p,
                   {"kind", "endpoint", "model", "api_key_env", "temperature", "timeout_s", "responses",
                    "cassette", "context_limit_tokens", "max_retries"},
                   "provider.");
    ProviderConfig& pc = c.provider;
    if (p.contains("kind")) pc.kind = get<std::string>(p, "kind", "provider.");
    if (pc.kind != "http" && pc.kind != "scripted" && pc.kind != "replay") {
      throw Error("provider.kind must be http, scripted or replay");
    }
    if (p.contains("endpoint")) pc.http.endpoint = get<std::string>(p, "endpoint", "provider.");
    if (p.contains("model")) pc.http.model = get<std::string>(p, "model", "provider.");
    if (p.contains("api_key_env")) pc.http.api_key_env = get<std::string>(p, "api_key_env", "provider.");
    if (p.contains("temperature") && !p["temperature"].is_null()) {
      pc.http.default_temperature = get<double>(p, "temperature", "provider.");
    }
    if (p.contains("timeout_s")) pc.http.timeout = std::chrono::seconds(get<int>(p, "timeout_s", "provider."));
    if (p.contains("responses") && !p["responses"].is_null()) {
      pc.responses = resolve(base_dir, get<std::string>(p, "responses", "provider."));
    }
    if (p.contains("cassette") && !p["cassette"].is_null()) {
      pc.cassette = resolve(base_dir, get<std::string>(p, "cassette", "provider."));
    }
    if (p.contains("context_limit_tokens")) {
      pc.context_limit_tokens = get<int>(p, "context_limit_tokens", "provider.");
    }
    if (p.contains("max_retries")) pc.max_retries = get<int>(p, "max_retries", "provider.");
  }
  return c;
}

PipelineConfig load_pipeline_config(const fs::path& path) {
  json j;
  try {
    j = json::parse(read_text_file(path));
  } catch (const json::parse_error& e) {
    throw Error("configuration " + path.string() + " is not valid JSON: " + e.what());
  }
  return pipeline_config_from_json(j, path.parent_path());
}

json pipeline_config_to_json(const PipelineConfig& c) {
  auto opt_path = [](const std::optional<fs::path>& p) { return p ? json(p->generic_string()) : json(nullptr); };
  json provider = {{"kind", c.provider.kind},
                   {"endpoint", c.provider.http.endpoint},
                   {"model", c.provider.http.model},
                   {"api_key_env", c.provider.http.api_key_env},
                   {"temperature", c.provider.http.default_temperature
                                       ? json(*c.provider.http.default_temperature)
                                       : json(nullptr)},
                   {"timeout_s", c.provider.http.timeout.count()},
                   {"responses", opt_path(c.provider.responses)},
                   {"cassette", opt_path(c.provider.cassette)},
                   {"context_limit_tokens", c.provider.context_limit_tokens},
                   {"max_retries", c.provider.max_retries}};
  return {{"roles",
           {{"profile_selector", c.roles.profile_selector},
            {"metric_selector", c.roles.metric_selector},
            {"drgpu_evaluator", c.roles.drgpu_evaluator},
            {"reviewer", c.roles.reviewer}}},
          {"max_passes", c.max_passes ? json(*c.max_passes) : json(nullptr)},
          {"extra_passes", c.extra_passes},
          {"source_budget_chars", c.prompts.source_budget_chars},
          {"max_profiles_per_pass", c.prompts.max_profiles_per_pass},
          {"reasoning_effort", llm::to_string(c.prompts.reasoning_effort)},
          {"max_output_tokens", c.prompts.max_output_tokens},
          {"selector_temperature", c.prompts.selector_temperature},
          {"assets_dir", opt_path(c.assets_dir)},
          {"drgpu", {{"command", c.drgpu.command}, {"args", c.drgpu.args}}},
          {"provider", provider}};
}

std::shared_ptr<llm::ChatProvider> make_provider(const ProviderConfig& config) {
  if (config.kind == "http") return std::make_shared<llm::HttpProvider>(config.http);
  if (config.kind == "replay") {
    if (!config.cassette) throw Error("replay provider needs a cassette path");
    return std::make_shared<llm::ReplayProvider>(
        std::make_shared<const llm::Cassette>(llm::Cassette::load(*config.cassette)));
  }
  if (config.kind == "scripted") {
    if (!config.responses) throw Error("scripted provider needs a responses file");
    json j;
    try {
      j = json::parse(read_text_file(*config.responses));
    } catch (const json::parse_error& e) {
      throw Error("responses file " + config.responses->string() + " is not valid JSON: " + e.what());
    }
    if (!j.is_array()) throw Error("responses file must hold a JSON array of strings");
    std::vector<std::string> replies;
    for (const auto& r : j) {
      if (!r.is_string()) throw Error("responses file must hold a JSON array of strings");
      replies.push_back(r.get<std::string>());
    }
    return std::make_shared<llm::ScriptedProvider>(std::move(replies));
  }
  throw Error("unknown provider kind '" + config.kind + "'");
}

llm::GatewayOptions gateway_options(const ProviderConfig& config) {
  llm::GatewayOptions o;
  o.context_limit_tokens = config.context_limit_tokens;
  o.max_retries = config.max_retries;
  return o;
}

// ---------------------------------------------------------------------------
// Trace

Trace::Trace(fs::path dir) : dir_(std::move(dir)) { fs::create_directories(*dir_); }

void Trace::append(const std::string& role, const std::optional<llm::ChatRequest>& request,
                   const std::string& raw_text, json parsed, bool degraded,
                   const std::vector<std::string>& notes) {
  TraceEntry e;
  e.index = static_cast<int>(entries_.size()) + 1;
  e.role = role;
  e.data = {{"index", e.index},
            {"role", role},
            {"called_llm", request.has_value()},
            {"request_hash", request ? json(llm::request_hash(*request)) : json(nullptr)},
            {"request", request ? llm::request_to_json(*request) : json(nullptr)},
            {"raw_text", raw_text},
            {"parsed", std::move(parsed)},
            {"degraded", degraded},
            {"notes", notes}};
  if (request) ++llm_calls_;
  char name[16];
  std::snprintf(name, sizeof name, "%03d", e.index);
  if (degraded) degraded_.push_back(std::string(name) + " " + role);
  if (dir_) write_text_file(*dir_ / (std::string(name) + "-" + role + ".json"), e.data.dump(2) + "\n");
  entries_.push_back(std::move(e));
}

// ---------------------------------------------------------------------------
// Stages

namespace {

roles::RoleEnv role_env(const RunContext& ctx) {
  roles::RoleEnv env;
  env.gateway = &ctx.gateway;
  env.library = assets::Library(ctx.config.assets_dir);
  env.settings = ctx.config.prompts;
  return env;
}

json hypotheses_json(const HypothesisSet& h) { return json(h); }

}  // namespace

SourceStageResult run_source_stage(const ProfileBundle& bundle, const RunContext& ctx) {
  const roles::RoleEnv env = role_env(ctx);
  SourceStageResult result;
  std::vector<SourceFile> files = bundle.sources;
  std::sort(files.begin(), files.end(), [](const SourceFile& a, const SourceFile& b) { return a.path < b.path; });

  std::set<std::string> reviewed;
  for (const auto& f : files) {
    if (f.content.empty()) {
      // Nothing to read; counts as covered without a model call.
      result.descriptions[f.path] = "(empty file)";
      reviewed.insert(f.path);
      result.summary.files_covered.insert(f.path);
      continue;
    }
    auto d = roles::describe_source_file(f, env);
    ctx.trace.record(d, json{{"path", f.path}, {"description", d.parsed}});
    result.descriptions[f.path] = d.parsed;
  }

  while (reviewed.size() < files.size()) {
    std::string path;
    if (files.size() == 1) {
      path = files.front().path;
    } else {
      auto s = roles::select_source_file(result.descriptions, reviewed, result.summary, env);
      ctx.trace.record(s, json{{"file", s.parsed}});
      path = s.parsed;
    }
    const SourceFile& file = *std::find_if(files.begin(), files.end(),
                                           [&](const SourceFile& f) { return f.path == path; });

    auto sum = roles::summarize_algorithm(result.summary, file, env);
    ctx.trace.record(sum, json(sum.parsed));
    result.summary = sum.parsed;

    auto hyp = roles::hypothesize_performance(result.hypotheses, result.summary, file, env);
    ctx.trace.record(hyp, hypotheses_json(hyp.parsed));
    result.hypotheses = hyp.parsed;

    reviewed.insert(path);
  }
  return result;
}

ProfileStageResult run_profile_stage(const ProfileBundle& bundle, const AlgorithmSummary& summary,
                                     const HypothesisSet& hypotheses, const RunContext& ctx) {
  const roles::RoleEnv env = role_env(ctx);
  const PipelineConfig& config = ctx.config;
  ProfileStageResult result;
  if (bundle.profiles.empty()) {
    result.warnings.push_back("the bundle has no profiles; no analysis passes were run");
    return result;
  }

  std::vector<std::string> rank;
  try {
    rank = ranked_ids(rank_profiles_by_default_distance(bundle));
  } catch (const Error& e) {
    rank = bundle.profile_ids();
    result.warnings.push_back(std::string("profile ranking unavailable (") + e.what() +
                              "); using bundle order");
  }

  const std::string guidelines = bundle.guidelines ? *bundle.guidelines : env.library.text("guidelines.md");
  const int cap = config.effective_max_passes(bundle.profiles.size());
  std::set<std::string> analyzed;
  int extra_left = config.extra_passes;

  for (int pass_index = 1; pass_index <= cap; ++pass_index) {
    const bool covered = analyzed.size() == bundle.profiles.size();
    if (covered) {
      if (extra_left == 0) break;
      --extra_left;
    }

    roles::ProfileSelectionRequest req;
    req.bundle = &bundle;
    req.summary = &summary;
    req.hypotheses = &hypotheses;
    req.prior_passes = &result.passes;
    req.analyzed = analyzed;
    req.rank_order = rank;
    req.enabled = config.roles.profile_selector;
    auto sel = roles::select_profiles(req, env);
    ctx.trace.record(sel, json{{"profiles", sel.parsed}});

    std::vector<const KernelProfile*> profiles;
    for (const auto& id : sel.parsed) profiles.push_back(bundle.find_profile(id));

    AnalysisPass pass;
    if (roles::available_metrics(profiles).empty()) {
      pass.pass_index = pass_index;
      pass.selected_profile_ids = sel.parsed;
      pass.analysis_text = "No metrics were recorded for the selected profiles.";
      result.warnings.push_back("pass " + std::to_string(pass_index) +
                                ": selected profiles carry no metrics; analysis skipped");
    } else {
      auto met = roles::select_metrics(profiles, summary, hypotheses, config.roles.metric_selector, env);
      ctx.trace.record(met, json{{"metrics", met.parsed}});

      roles::AnalysisRequest areq;
      areq.pass_index = pass_index;
      areq.bundle = &bundle;
      areq.profiles = profiles;
      areq.metric_names = met.parsed;
      areq.summary = &summary;
      areq.hypotheses = &hypotheses;
      areq.guidelines = guidelines;
      auto ana = roles::analyze_profiles(areq, env);
      ctx.trace.record(ana, json(ana.parsed));
      pass = std::move(ana.parsed);

      if (config.roles.drgpu_evaluator) {
        roles::DrGpuInput input;
        if (!config.drgpu.configured()) {
          input.failure = "no DrGPU adapter configured";
        } else {
          try {
            input.report = drgpu::report_for(config.drgpu, profiles);
          } catch (const Error& e) {
            input.failure = e.what();
          }
        }
        auto dr = roles::evaluate_drgpu(pass, input, true, env);
        roles::resolve_citations(dr.parsed.citations, bundle, dr.parsed.selected_profile_ids,
                                 dr.parsed.selected_metric_names);
        ctx.trace.record(dr, json(dr.parsed));
        if (!input.report) result.warnings.push_back("pass " + std::to_string(pass_index) + ": DrGPU adapter failed: " + input.failure);
        pass = std::move(dr.parsed);
      }
    }
    for (const auto& id : pass.selected_profile_ids) analyzed.insert(id);
    result.passes.push_back(std::move(pass));
  }

  if (analyzed.size() < bundle.profiles.size()) {
    result.cap_exceeded = true;
    std::string missing;
    for (const auto& id : rank) {
      if (analyzed.count(id)) continue;
      if (!missing.empty()) missing += ", ";
      missing += id;
    }
    result.warnings.push_back("PassCapExceeded: analyzed " + std::to_string(analyzed.size()) + " of " +
                              std::to_string(bundle.profiles.size()) + " profiles within " +
                              std::to_string(cap) + " passes; not analyzed: " + missing);
  }
  return result;
}

RunResult run_full(const ProfileBundle& bundle, const RunContext& ctx) {
  const roles::RoleEnv env = role_env(ctx);
  RunResult result;

  SourceStageResult source = run_source_stage(bundle, ctx);
  result.summary = source.summary;
  result.hypotheses = source.hypotheses;

  ProfileStageResult profile = run_profile_stage(bundle, source.summary, source.hypotheses, ctx);
  result.passes = profile.passes;
  result.cap_exceeded = profile.cap_exceeded;

  if (!result.passes.empty()) {
    const std::string guidelines = bundle.guidelines ? *bundle.guidelines : env.library.text("guidelines.md");
    auto agg = roles::aggregate_analyses(result.passes, source.summary, guidelines, env);
    ctx.trace.record(agg, json(agg.parsed));
    result.report = std::move(agg.parsed);
  } else {
    result.report.summary_section = "No analysis passes were run.";
  }

  if (ctx.config.roles.reviewer) {
    auto rev = roles::review_explanation(result.report, source.hypotheses, env);
    ctx.trace.record(rev, json(rev.parsed));
    result.hypotheses = roles::apply_review(source.hypotheses, rev.parsed);
    result.review = std::move(rev.parsed);
  }

  result.degraded_roles = ctx.trace.degraded();
  result.report.warnings = profile.warnings;
  for (const auto& d : result.degraded_roles) {
    result.report.warnings.push_back("degraded output from role " + d.substr(4) + " (trace " + d.substr(0, 3) +
                                     ")");
  }
  return result;
}

void write_run_dir(const RunResult& result, const ProfileBundle& bundle, const PipelineConfig& config,
                   const fs::path& dir) {
  fs::create_directories(dir);
  const std::string report_md = render_report_markdown(result.report, bundle.manifest);
  write_text_file(dir / "report.md", report_md);
  if (result.review) {
    write_text_file(dir / "review.md", render_review_markdown(*result.review, result.hypotheses));
  } else {
    fs::remove(dir / "review.md");
  }
  write_text_file(dir / "findings.json",
                  findings_to_json(validate_citations(report_md, bundle)).dump(2) + "\n");
  write_text_file(dir / "run-config.json", pipeline_config_to_json(config).dump(2) + "\n");
}

}  // namespace kexplain
