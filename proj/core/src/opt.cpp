#include "kexplain/opt.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <future>
#include <set>
#include <sstream>

#include "kexplain/ingest.hpp"
#include "kexplain/json_io.hpp"
#include "kexplain/minitoml.hpp"
#include "kexplain/process.hpp"
#include "kexplain/report.hpp"
#include "kexplain/structured.hpp"
#include "kexplain/techniques.hpp"

using nlohmann::json;
namespace fs = std::filesystem;

namespace kexplain {

double mean_of_runs(const std::vector<double>& seconds) {
  if (seconds.empty()) throw ExecutorFailure("no timing runs");
  long double sum = 0.0L;
  for (double s : seconds) {
    if (!(s > 0.0) || !std::isfinite(s)) throw ExecutorFailure("timing run reported a non-positive time");
    sum += s;
  }
  return static_cast<double>(sum / seconds.size());
}

StepResult ExecutorSession::build(const std::string& source) {
  state_ = State::fresh;
  StepResult r = do_build(source);
  if (r.ok) state_ = State::built;
  return r;
}

StepResult ExecutorSession::test() {
  if (state_ == State::fresh) throw PreconditionError("executor test() called without a successful build");
  StepResult r = do_test();
  state_ = r.ok ? State::tested : State::built;
  return r;
}

double ExecutorSession::time() {
  if (state_ != State::tested) throw PreconditionError("executor time() called before a passing test");
  std::vector<double> runs;
  for (int i = 0; i < timing_runs(); ++i) runs.push_back(do_time_run());
  return mean_of_runs(runs);
}

// ---------------------------------------------------------------------------
// Command executor

namespace {

std::string toml_string(const toml::Table& t, const std::string& key, bool required) {
  auto it = t.find(key);
  if (it == t.end()) {
    if (required) throw Error("executor config lacks '" + key + "'");
    return {};
  }
  if (auto s = std::get_if<std::string>(&it->second.data)) return *s;
  throw Error("executor config key '" + key + "' must be a string");
}

std::string substitute(std::string cmd, const fs::path& workspace, const fs::path& source) {
  auto replace = [&](const std::string& from, const std::string& to) {
    for (std::size_t pos = 0; (pos = cmd.find(from, pos)) != std::string::npos; pos += to.size()) {
      cmd.replace(pos, from.size(), to);
    }
  };
  replace("{workspace}", shell_quote(workspace.string()));
  replace("{source}", shell_quote(source.string()));
  return cmd;
}

std::string tail(const std::string& log, std::size_t max_chars = 4000) {
  return log.size() <= max_chars ? log : "[...]\n" + log.substr(log.size() - max_chars);
}

class CommandSession : public ExecutorSession {
 public:
  CommandSession(const CommandExecutorConfig& config, const std::string& label)
      : config_(config), dir_("kexplain-" + label) {
    workspace_ = dir_.path() / "ws";
    if (config_.work_root) {
      fs::create_directories(*config_.work_root);
      workspace_ = *config_.work_root / (label + "-" + dir_.path().filename().string());
    }
    fs::create_directories(workspace_);
    if (config_.template_dir) {
      fs::copy(*config_.template_dir, workspace_, fs::copy_options::recursive | fs::copy_options::overwrite_existing);
    }
    source_ = workspace_ / config_.source_name;
  }

  ~CommandSession() override {
    if (config_.work_root && !config_.keep_workspaces) {
      std::error_code ec;
      fs::remove_all(workspace_, ec);
    }
  }

 protected:
  StepResult do_build(const std::string& source) override {
    fs::create_directories(source_.parent_path());
    write_text_file(source_, source);
    return run(config_.build_cmd);
  }

  StepResult do_test() override { return run(config_.test_cmd); }

  double do_time_run() override {
    ProcessResult r = run_shell(substitute(config_.time_cmd, workspace_, source_), workspace_);
    if (r.exit_code != 0) {
      throw ExecutorFailure("time command failed (exit " + std::to_string(r.exit_code) + "): " + tail(r.err, 500));
    }
    std::string last;
    std::istringstream in(r.out);
    for (std::string line; std::getline(in, line);) {
      if (!trim_copy(line).empty()) last = trim_copy(line);
    }
    try {
      std::size_t used = 0;
      double v = std::stod(last, &used);
      if (used != last.size()) throw std::invalid_argument(last);
      return v;
    } catch (const std::exception&) {
      throw ExecutorFailure("time command printed '" + last + "' instead of seconds");
    }
  }

  int timing_runs() const override { return config_.time_cmd_reports_mean ? 1 : kTimingRuns; }

 private:
  StepResult run(const std::string& tmpl) {
    if (tmpl.empty()) return {true, ""};
    ProcessResult r = run_shell(substitute(tmpl, workspace_, source_), workspace_, true);
    return {r.exit_code == 0, tail(r.out)};
  }

  const CommandExecutorConfig& config_;
  TempDir dir_;
  fs::path workspace_;
  fs::path source_;
};

}  // namespace

CommandExecutorConfig load_executor_config(const fs::path& path) {
  toml::Table t = toml::parse(read_text_file(path));
  static const std::set<std::string> known = {"build_cmd",   "test_cmd",  "time_cmd",      "source_name",
                                              "template_dir", "work_root", "keep_workspaces", "time_cmd_reports_mean"};
  for (const auto& [key, value] : t) {
    if (!known.count(key)) throw Error("executor config has unknown key '" + key + "'");
  }
  CommandExecutorConfig c;
  c.build_cmd = toml_string(t, "build_cmd", true);
  c.test_cmd = toml_string(t, "test_cmd", true);
  c.time_cmd = toml_string(t, "time_cmd", true);
  if (auto s = toml_string(t, "source_name", false); !s.empty()) c.source_name = s;
  const fs::path base = path.parent_path();
  auto resolve = [&](const std::string& p) { return fs::path(p).is_relative() ? base / p : fs::path(p); };
  if (auto s = toml_string(t, "template_dir", false); !s.empty()) c.template_dir = resolve(s);
  if (auto s = toml_string(t, "work_root", false); !s.empty()) c.work_root = resolve(s);
  for (auto [key, field] : {std::pair{"time_cmd_reports_mean", &c.time_cmd_reports_mean},
                            std::pair{"keep_workspaces", &c.keep_workspaces}}) {
    if (auto it = t.find(key); it != t.end()) {
      const bool* b = std::get_if<bool>(&it->second.data);
      if (!b) throw Error(std::string("executor config key '") + key + "' must be a boolean");
      *field = *b;
    }
  }
  if (c.template_dir && !fs::is_directory(*c.template_dir)) {
    throw Error("executor template_dir " + c.template_dir->string() + " is not a directory");
  }
  return c;
}

CommandExecutor::CommandExecutor(CommandExecutorConfig config) : config_(std::move(config)) {
  if (config_.time_cmd.empty()) throw PreconditionError("command executor needs a time_cmd");
}

std::unique_ptr<ExecutorSession> CommandExecutor::open(const std::string& label) {
  return std::make_unique<CommandSession>(config_, label);
}

// ---------------------------------------------------------------------------
// Diff

std::string line_diff(const std::string& before, const std::string& after) {
  auto split = [](const std::string& s) {
    std::vector<std::string> lines;
    std::istringstream in(s);
    for (std::string l; std::getline(in, l);) lines.push_back(l);
    return lines;
  };
  const auto a = split(before);
  const auto b = split(after);
  const std::size_t n = a.size(), m = b.size();
  // lcs[i][j]: LCS length of a[i..] and b[j..]
  std::vector<std::vector<int>> lcs(n + 1, std::vector<int>(m + 1, 0));
  for (std::size_t i = n; i-- > 0;) {
    for (std::size_t j = m; j-- > 0;) {
      lcs[i][j] = a[i] == b[j] ? lcs[i + 1][j + 1] + 1 : std::max(lcs[i + 1][j], lcs[i][j + 1]);
    }
  }
  std::string out;
  bool changed = false;
  std::size_t i = 0, j = 0;
  while (i < n || j < m) {
    if (i < n && j < m && a[i] == b[j]) {
      out += " " + a[i] + "\n";
      ++i, ++j;
    } else if (i < n && (j == m || lcs[i + 1][j] >= lcs[i][j + 1])) {
      out += "-" + a[i++] + "\n";
      changed = true;
    } else {
      out += "+" + b[j++] + "\n";
      changed = true;
    }
  }
  return changed ? out : std::string();
}

// ---------------------------------------------------------------------------
// Attempts

std::string opt_instruction(const std::string& context_report) {
  if (report_has_suggestions(context_report)) {
    return "Implement the optimization suggestions from the performance report in the context below.";
  }
  return "The context does not contain optimization suggestions. Identify optimizations yourself "
         "and implement them.";
}

namespace {

std::string without_fenced_blocks(const std::string& text) {
  std::string out;
  std::size_t pos = 0;
  for (const auto& b : fenced_blocks(text)) {
    out += text.substr(pos, b.begin - pos);
    pos = b.end;
  }
  out += text.substr(std::min(pos, text.size()));
  return trim_copy(out);
}

OptAttempt run_attempt(const std::string& context, const SourceFile& kernel, const llm::Gateway& gateway,
                       OptExecutor& executor, const OptOptions& options, double baseline, int index) {
  OptAttempt a;
  a.outcome.task = EvalTask::opt;
  a.outcome.attempt_index = index;
  auto session = executor.open("attempt-" + std::to_string(index));

  llm::ChatRequest req;
  req.system_prompt = options.library.text("prompts/system.txt");
  req.temperature = options.temperature;
  req.messages.push_back({llm::Role::user, assets::render(options.library.text("prompts/opt.txt"),
                                                          {{"path", kernel.path},
                                                           {"instruction", opt_instruction(context)},
                                                           {"context", context},
                                                           {"source", kernel.content}})});
  const std::string retry_tmpl = options.library.text("prompts/opt_retry.txt");

  for (int t = 0; t <= options.max_retries; ++t) {
    const std::string reply = gateway.complete(req).content;
    auto code = last_code_block(reply);
    OptTry attempt_try;
    if (!code) {
      attempt_try = {"build", "the reply contained no fenced code block"};
    } else {
      a.final_code = *code;
      a.self_report = without_fenced_blocks(reply);
      StepResult b = session->build(*code);
      if (!b.ok) {
        attempt_try = {"build", b.log};
      } else if (StepResult r = session->test(); !r.ok) {
        attempt_try = {"test", r.log};
      } else {
        double seconds = session->time();
        a.tries.push_back({"ok", ""});
        a.time_seconds = seconds;
        a.outcome.status = OutcomeStatus::valid;
        a.outcome.speedup = baseline / seconds;
        a.outcome.retries_used = t;
        return a;
      }
    }
    a.tries.push_back(attempt_try);
    if (t == options.max_retries) break;
    req.messages.push_back({llm::Role::assistant, reply});
    req.messages.push_back({llm::Role::user, assets::render(retry_tmpl, {{"stage", attempt_try.stage},
                                                                         {"log", attempt_try.log}})});
  }
  a.outcome.status = OutcomeStatus::retry_exhausted;
  a.outcome.retries_used = options.max_retries;
  return a;
}

}  // namespace

std::vector<EvalOutcome> OptResult::outcomes() const {
  std::vector<EvalOutcome> out;
  for (const auto& a : attempts) out.push_back(a.outcome);
  return out;
}

OptResult run_opt(const std::string& context_report, const SourceFile& kernel_source,
                  const llm::Gateway& gateway, OptExecutor& executor, const OptOptions& options) {
  if (options.attempts < 1) throw PreconditionError("attempts must be at least 1");
  if (options.max_retries < 0) throw PreconditionError("max_retries must be >= 0");

  OptResult result;
  {
    auto base = executor.open("baseline");
    StepResult b = base->build(kernel_source.content);
    if (!b.ok) throw ExecutorFailure("baseline source does not build:\n" + b.log);
    StepResult t = base->test();
    if (!t.ok) throw ExecutorFailure("baseline source fails its test:\n" + t.log);
    result.baseline_seconds = base->time();
  }

  result.attempts.resize(options.attempts);
  const int jobs = std::max(1, options.jobs);
  for (int start = 0; start < options.attempts; start += jobs) {
    std::vector<std::future<OptAttempt>> batch;
    for (int i = start; i < std::min(options.attempts, start + jobs); ++i) {
      batch.push_back(std::async(jobs == 1 ? std::launch::deferred : std::launch::async, [&, i] {
        return run_attempt(context_report, kernel_source, gateway, executor, options, result.baseline_seconds, i + 1);
      }));
    }
    for (std::size_t b = 0; b < batch.size(); ++b) result.attempts[start + b] = batch[b].get();
  }

  if (options.label_techniques) {
    roles::RoleEnv env;
    env.gateway = &gateway;
    env.library = options.library;
    for (auto& a : result.attempts) {
      if (a.outcome.status != OutcomeStatus::valid) continue;
      auto labels = label_techniques(line_diff(kernel_source.content, a.final_code), a.self_report, env);
      a.outcome.technique_labels = labels.parsed;
    }
  }
  return result;
}

json to_json(const OptResult& result) {
  json attempts = json::array();
  for (const auto& a : result.attempts) {
    json tries = json::array();
    for (const auto& t : a.tries) tries.push_back({{"stage", t.stage}, {"log", t.log}});
    json o = a.outcome;
    o["time_seconds"] = a.time_seconds ? json(*a.time_seconds) : json(nullptr);
    o["tries"] = tries;
    attempts.push_back(o);
  }
  return {{"task", "opt"}, {"baseline_seconds", result.baseline_seconds}, {"attempts", attempts}};
}

}  // namespace kexplain
