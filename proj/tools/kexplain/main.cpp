#include <iostream>

#include "common.hpp"

namespace {

const char* kFooter = R"(Agent roles, in pipeline order:
  file_describer, file_selector, algorithm_summarizer,
  performance_hypothesizer                      always on
  profile_selector                              toggle, on by default
  metric_selector                               toggle, on by default
  profile_analyzer                              always on
  drgpu_evaluator                               toggle, off by default
  analysis_aggregator                           always on
  reviewer                                      toggle, on by default
Toggle with `explain --enable ROLE` / `--disable ROLE`.

Exit codes: 0 success, 1 error, 2 degraded result.
The http provider reads its credential from the environment variable named
by `provider.api_key_env` (default KEXPLAIN_API_KEY).)";

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Explain GPU kernel performance from profiles and source code with LLM agents"};
  app.require_subcommand(1);
  app.footer(kFooter);

  int exit_code = kexplain::cli::kOk;
  kexplain::cli::register_explain(app, exit_code);
  kexplain::cli::register_eval(app, exit_code);
  kexplain::cli::register_inspect(app, exit_code);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kexplain::cli::kOk : kexplain::cli::kError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kexplain::cli::kError;
  }
  return exit_code;
}
