#pragma once

// Code optimization task. For each attempt the model rewrites a kernel
// source; an executor builds, tests and times the result, and failures are
// fed back for a bounded number of retries.

#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "kexplain/assets.hpp"
#include "kexplain/errors.hpp"
#include "kexplain/llm.hpp"
#include "kexplain/model.hpp"

namespace kexplain {

class ExecutorFailure : public Error {
 public:
  using Error::Error;
};

struct StepResult {
  bool ok = false;
  std::string log;
};

/// Number of timing runs averaged by ExecutorSession::time().
inline constexpr int kTimingRuns = 3;

double mean_of_runs(const std::vector<double>& seconds);

/// One isolated workspace. Enforces build -> test -> time: test needs a
/// successful build of the current code, time needs a passing test.
class ExecutorSession {
 public:
  virtual ~ExecutorSession() = default;

  StepResult build(const std::string& source);
  StepResult test();
  /// Mean of kTimingRuns timing runs, in seconds.
  double time();

 protected:
  virtual StepResult do_build(const std::string& source) = 0;
  virtual StepResult do_test() = 0;
  /// Seconds for one timing run.
  virtual double do_time_run() = 0;
  /// Runs per time() call; an adapter whose command already averages
  /// returns 1.
  virtual int timing_runs() const { return kTimingRuns; }

 private:
  enum class State { fresh, built, tested } state_ = State::fresh;
};

class OptExecutor {
 public:
  virtual ~OptExecutor() = default;
  /// A fresh session; `label` names it ("baseline", "attempt-3").
  virtual std::unique_ptr<ExecutorSession> open(const std::string& label) = 0;
};

/// Executor driven by shell command templates. `{workspace}` and `{source}`
/// are replaced with the workspace directory and the kernel source path in
/// it; commands run inside the workspace. `template_dir`, when set, is
/// copied into every workspace before the source is written. time_cmd must
/// print the elapsed seconds as its last output line.
struct CommandExecutorConfig {
  std::string build_cmd;
  std::string test_cmd;
  std::string time_cmd;
  std::string source_name = "kernel.cu";
  std::optional<std::filesystem::path> template_dir;
  // True when time_cmd already reports the mean of three runs.
  bool time_cmd_reports_mean = false;
  // Parent of the per-session workspaces; system temp dir when unset.
  std::optional<std::filesystem::path> work_root;
  bool keep_workspaces = false;
};

/// Reads exec.toml. Relative paths resolve against the file's directory.
CommandExecutorConfig load_executor_config(const std::filesystem::path& path);

class CommandExecutor : public OptExecutor {
 public:
  explicit CommandExecutor(CommandExecutorConfig config);
  std::unique_ptr<ExecutorSession> open(const std::string& label) override;

 private:
  CommandExecutorConfig config_;
};

/// Line diff in unified style (without hunk headers); empty when equal.
std::string line_diff(const std::string& before, const std::string& after);

struct OptTry {
  std::string stage;  // "build", "test" or "ok"
  std::string log;
};

struct OptAttempt {
  EvalOutcome outcome;
  std::optional<double> time_seconds;
  std::vector<OptTry> tries;
  std::string final_code;   // last code the model produced
  std::string self_report;  // prose of the last reply
};

struct OptOptions {
  int attempts = 20;
  int max_retries = 3;
  int jobs = 1;
  bool label_techniques = false;
  std::optional<double> temperature;
  assets::Library library;
};

struct OptResult {
  double baseline_seconds = 0.0;
  std::vector<OptAttempt> attempts;
  std::vector<EvalOutcome> outcomes() const;
};

/// Measures the baseline (ExecutorFailure if it does not build, pass or
/// time), then runs the attempts. speedup = baseline / new time.
OptResult run_opt(const std::string& context_report, const SourceFile& kernel_source,
                  const llm::Gateway& gateway, OptExecutor& executor, const OptOptions& options);

/// Optimization prompt instruction; asks the model to find optimizations on
/// its own when the report carries no suggestions.
std::string opt_instruction(const std::string& context_report);

nlohmann::json to_json(const OptResult& result);

}  // namespace kexplain
