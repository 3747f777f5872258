#include <filesystem>
#include <iomanip>
#include <iostream>

#include "common.hpp"
#include "kexplain/ingest.hpp"
#include "kexplain/mcq.hpp"
#include "kexplain/metrics.hpp"
#include "kexplain/opt.hpp"

using nlohmann::json;
namespace fs = std::filesystem;

namespace kexplain::cli {

namespace {

/// "none", "code", "code+data", or a path to a report file.
std::string load_context(const std::string& spec, const ProfileBundle& bundle, const PipelineConfig& config) {
  if (spec == "none" || spec == "code" || spec == "code+data") {
    return build_eval_context(spec, bundle, "", config.prompts.source_budget_chars);
  }
  return build_eval_context("report", bundle, read_text_file(spec), config.prompts.source_budget_chars);
}

std::string number_or_undefined(const std::optional<double>& v) {
  if (!v) return "undefined";
  std::ostringstream s;
  s << std::setprecision(6) << *v;
  return s.str();
}

struct McqArgs {
  std::string bundle_dir;
  std::string questions;
  std::string context = "none";
  int attempts = 20;
  int jobs = 1;
  std::uint64_t seed = 0;
  std::string out;
  ProviderFlags provider;
};

int run_eval_mcq(const McqArgs& args) {
  PipelineConfig config = resolve_config(args.provider);
  ProfileBundle bundle = load_bundle(args.bundle_dir);

  std::vector<McqQuestion> questions;
  try {
    questions = parse_mcq_questions(json::parse(read_text_file(args.questions)));
  } catch (const json::parse_error& e) {
    throw Error("questions file is not valid JSON: " + std::string(e.what()));
  }
  McqValidation v = validate_mcq_questions(questions);
  for (const auto& w : v.warnings) std::cerr << "warning: " << w << "\n";
  if (!v.ok()) {
    for (const auto& e : v.errors) std::cerr << "error: " << e << "\n";
    return kError;
  }

  auto gateway = make_gateway(config, args.provider);
  McqOptions options;
  options.attempts = args.attempts;
  options.jobs = args.jobs;
  options.seed = args.seed;
  options.library = assets::Library(config.assets_dir);
  McqResult result = run_mcq(questions, load_context(args.context, bundle, config), *gateway, options);

  int invalid = 0;
  for (const auto& a : result.attempts) {
    if (a.valid) continue;
    ++invalid;
    std::cerr << "warning: attempt " << a.index << " excluded: " << a.error << "\n";
  }
  json j = to_json(result);
  j["context"] = args.context;
  j["seed"] = args.seed;
  if (!args.out.empty()) write_json_file(args.out, j);
  std::cout << "score@1: " << number_or_undefined(result.score_at_1) << " (" << (args.attempts - invalid) << " of "
            << args.attempts << " attempts valid)\n";
  return invalid > 0 || !result.score_at_1 ? kDegraded : kOk;
}

struct OptArgs {
  std::string bundle_dir;
  std::vector<std::string> reports;
  std::string executor;
  std::string source;
  int attempts = 20;
  int retries = 3;
  int jobs = 1;
  bool label = false;
  std::string out;
  ProviderFlags provider;
};

const SourceFile& pick_source(const ProfileBundle& bundle, const std::string& flag, const std::string& exec_name) {
  if (!flag.empty()) {
    if (const SourceFile* s = bundle.find_source(flag)) return *s;
    throw Error("--source names a file that is not in the bundle: " + flag);
  }
  for (const auto& s : bundle.sources) {
    if (s.path == exec_name || fs::path(s.path).filename() == fs::path(exec_name).filename()) return s;
  }
  if (bundle.sources.size() == 1) return bundle.sources.front();
  throw Error("cannot tell which source file to optimize; pass --source");
}

int run_eval_opt(const OptArgs& args) {
  PipelineConfig config = resolve_config(args.provider);
  ProfileBundle bundle = load_bundle(args.bundle_dir);
  CommandExecutor executor(load_executor_config(args.executor));
  const SourceFile& kernel = pick_source(bundle, args.source, load_executor_config(args.executor).source_name);
  auto gateway = make_gateway(config, args.provider);

  OptOptions options;
  options.attempts = args.attempts;
  options.max_retries = args.retries;
  options.jobs = args.jobs;
  options.label_techniques = args.label;
  options.library = assets::Library(config.assets_dir);

  json reports = json::array();
  std::vector<std::vector<EvalOutcome>> per_report;
  for (const auto& spec : args.reports) {
    OptResult r;
    try {
      r = run_opt(load_context(spec, bundle, config), kernel, *gateway, executor, options);
    } catch (const ExecutorFailure& e) {
      std::cerr << "error: baseline measurement failed: " << e.what() << "\n";
      return kError;
    }
    json rj = to_json(r);
    rj["context"] = spec;
    rj["summary"] = to_json(summarize_report(r.outcomes()));
    reports.push_back(rj);
    per_report.push_back(r.outcomes());
  }
  SettingSummary setting = summarize_results(per_report);
  json j = {{"task", "opt"}, {"source", kernel.path}, {"reports", reports}, {"setting", to_json(setting)}};
  if (!args.out.empty()) write_json_file(args.out, j);

  for (std::size_t i = 0; i < setting.reports.size(); ++i) {
    const auto& r = setting.reports[i];
    std::cout << args.reports[i] << ": pass@1 " << number_or_undefined(r.pass_at_1) << ", speedup@1 "
              << number_or_undefined(r.speedup_at_1) << ", max speedup " << number_or_undefined(r.max_speedup)
              << "\n";
  }
  if (setting.reports.size() > 1) {
    std::cout << "setting: harmonic speedup@1 " << number_or_undefined(setting.harmonic_speedup_at_1)
              << ", max speedup " << number_or_undefined(setting.max_speedup) << "\n";
  }
  return kOk;
}

}  // namespace

void register_eval(CLI::App& app, int& exit_code) {
  auto mcq = std::make_shared<McqArgs>();
  CLI::App* m = app.add_subcommand("eval-mcq", "Score a model on multiple-choice questions about a kernel");
  m->add_option("bundle_dir", mcq->bundle_dir, "Profile bundle (directory or JSON file)")->required()->check(CLI::ExistingPath);
  m->add_option("questions", mcq->questions, "Questions file (JSON)")->required()->check(CLI::ExistingFile);
  m->add_option("--context", mcq->context, "Context: a report file, code, code+data or none")->capture_default_str();
  m->add_option("--attempts", mcq->attempts, "Independent attempts")->capture_default_str()->check(CLI::PositiveNumber);
  m->add_option("--jobs", mcq->jobs, "Attempts run concurrently")->capture_default_str()->check(CLI::PositiveNumber);
  m->add_option("--seed", mcq->seed, "Seed for the choice shuffling")->capture_default_str();
  m->add_option("--out", mcq->out, "Results file (JSON)");
  add_provider_flags(*m, mcq->provider);
  m->callback([mcq, &exit_code] { exit_code = run_eval_mcq(*mcq); });

  auto opt = std::make_shared<OptArgs>();
  CLI::App* o = app.add_subcommand("eval-opt", "Measure how well a model optimizes a kernel given reports");
  o->add_option("bundle_dir", opt->bundle_dir, "Profile bundle (directory or JSON file)")->required()->check(CLI::ExistingPath);
  o->add_option("reports", opt->reports,
                "One or more contexts: report files, code, code+data or none; several reports form one setting")
      ->required();
  o->add_option("--executor", opt->executor, "Executor configuration (exec.toml)")->required()->check(CLI::ExistingFile);
  o->add_option("--source", opt->source, "Bundle source file to optimize");
  o->add_option("--attempts", opt->attempts, "Attempts per report")->capture_default_str()->check(CLI::PositiveNumber);
  o->add_option("--retries", opt->retries, "Retries after a build or test failure")
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  o->add_option("--jobs", opt->jobs, "Attempts run concurrently")->capture_default_str()->check(CLI::PositiveNumber);
  o->add_flag("--label-techniques", opt->label, "Label the techniques of successful attempts");
  o->add_option("--out", opt->out, "Results file (JSON)");
  add_provider_flags(*o, opt->provider);
  o->callback([opt, &exit_code] { exit_code = run_eval_opt(*opt); });
}

}  // namespace kexplain::cli
