#include <filesystem>
#include <iostream>

#include "common.hpp"
#include "kexplain/ingest.hpp"
#include "kexplain/ranking.hpp"

namespace fs = std::filesystem;

namespace kexplain::cli {

namespace {

struct ExplainArgs {
  std::string bundle_dir;
  std::string out_dir = "kexplain-run";
  std::string profiles;
  std::vector<std::string> enable;
  std::vector<std::string> disable;
  int max_passes = 0;
  ProviderFlags provider;
};

std::string toggle_list() {
  std::string s;
  for (const auto& n : role_toggle_names()) s += (s.empty() ? "" : ", ") + n;
  return s;
}

/// `--profiles 4` keeps the four profiles closest to the defaults;
/// `--profiles a,b` keeps the named ones.
ProfileBundle select_profiles_flag(const ProfileBundle& bundle, const std::string& spec) {
  if (spec.empty()) return bundle;
  bool numeric = spec.find_first_not_of("0123456789") == std::string::npos;
  std::vector<std::string> ids;
  if (numeric) {
    std::size_t k = std::stoul(spec);
    if (k == 0) throw Error("--profiles needs at least one profile");
    ids = ranked_ids(rank_profiles_by_default_distance(bundle));
    if (k < ids.size()) ids.resize(k);
  } else {
    std::size_t start = 0;
    while (start <= spec.size()) {
      std::size_t end = spec.find(',', start);
      if (end == std::string::npos) end = spec.size();
      std::string id = spec.substr(start, end - start);
      if (!id.empty()) {
        if (!bundle.find_profile(id)) throw Error("--profiles names unknown profile '" + id + "'");
        ids.push_back(id);
      }
      start = end + 1;
    }
  }
  return subset_profiles(bundle, ids);
}

int run_explain(const ExplainArgs& args) {
  PipelineConfig config = resolve_config(args.provider);
  for (const auto& r : args.enable) set_role_toggle(config.roles, r, true);
  for (const auto& r : args.disable) set_role_toggle(config.roles, r, false);
  if (args.max_passes > 0) config.max_passes = args.max_passes;

  ProfileBundle bundle = select_profiles_flag(load_bundle(args.bundle_dir), args.profiles);
  auto gateway = make_gateway(config, args.provider);

  const fs::path out(args.out_dir);
  fs::remove_all(out / "trace");
  Trace trace(out / "trace");
  RunContext ctx{*gateway, config, trace};
  RunResult result;
  try {
    result = run_full(bundle, ctx);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n"
              << "partial trace (" << trace.entries().size() << " entries) kept in " << (out / "trace").string()
              << "\n";
    return kError;
  }
  write_run_dir(result, bundle, config, out);

  for (const auto& w : result.report.warnings) std::cerr << "warning: " << w << "\n";
  std::cout << "report: " << (out / "report.md").string() << "\n";
  if (result.review) std::cout << "review: " << (out / "review.md").string() << "\n";
  std::cout << "passes: " << result.passes.size() << ", model calls: " << trace.llm_calls() << "\n";
  return result.degraded() ? kDegraded : kOk;
}

}  // namespace

void register_explain(CLI::App& app, int& exit_code) {
  auto args = std::make_shared<ExplainArgs>();
  CLI::App* cmd = app.add_subcommand("explain", "Generate a performance explanation report for a profile bundle");
  cmd->add_option("bundle_dir", args->bundle_dir, "Profile bundle (directory or JSON file)")->required()->check(CLI::ExistingPath);
  cmd->add_option("--out-dir,-o", args->out_dir, "Run directory to write")->capture_default_str();
  cmd->add_option("--profiles", args->profiles,
                  "Profiles to load: a count k (the k closest to the defaults) or comma-separated ids");
  cmd->add_option("--enable", args->enable, "Enable an optional role: " + toggle_list())
      ->check(CLI::IsMember(role_toggle_names()));
  cmd->add_option("--disable", args->disable, "Disable an optional role: " + toggle_list())
      ->check(CLI::IsMember(role_toggle_names()));
  cmd->add_option("--max-passes", args->max_passes, "Cap on analysis passes (default max(4, 2 x profiles))")
      ->check(CLI::PositiveNumber);
  add_provider_flags(*cmd, args->provider);
  cmd->footer("Role toggles: " + toggle_list() + ".");
  cmd->callback([args, &exit_code] { exit_code = run_explain(*args); });
}

}  // namespace kexplain::cli
