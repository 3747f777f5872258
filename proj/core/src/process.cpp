#include "kexplain/process.hpp"

#include <sys/wait.h>
#include <unistd.h>

#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <random>

#include "kexplain/errors.hpp"
#include "kexplain/ingest.hpp"

namespace fs = std::filesystem;

namespace kexplain {

std::string shell_quote(const std::string& arg) {
  std::string out = "'";
  for (char c : arg) {
    if (c == '\'') {
      out += "'\\''";
    } else {
      out.push_back(c);
    }
  }
  out.push_back('\'');
  return out;
}

std::string join_command(const std::vector<std::string>& argv) {
  std::string out;
  for (std::size_t i = 0; i < argv.size(); ++i) {
    if (i) out.push_back(' ');
    out += shell_quote(argv[i]);
  }
  return out;
}

TempDir::TempDir(const std::string& prefix) {
  static std::atomic<unsigned> counter{0};
  std::random_device rd;
  for (int tries = 0; tries < 100; ++tries) {
    auto candidate = fs::temp_directory_path() /
                     (prefix + "-" + std::to_string(::getpid()) + "-" +
                      std::to_string(counter++) + "-" + std::to_string(rd() % 100000));
    std::error_code ec;
    if (fs::create_directory(candidate, ec)) {
      path_ = candidate;
      return;
    }
  }
  throw Error("cannot create temporary directory");
}

TempDir::~TempDir() {
  if (path_.empty()) return;
  std::error_code ec;
  fs::remove_all(path_, ec);
}

TempDir::TempDir(TempDir&& other) noexcept : path_(std::move(other.path_)) { other.path_.clear(); }

ProcessResult run_shell(const std::string& command, const std::optional<fs::path>& cwd,
                        bool merge_stderr) {
  TempDir scratch("kexplain-proc");
  const fs::path err_path = scratch.path() / "stderr";
  std::string full;
  if (cwd) full = "cd " + shell_quote(cwd->string()) + " && ";
  full += "{ " + command + "\n}";
  full += merge_stderr ? " 2>&1" : " 2>" + shell_quote(err_path.string());

  ProcessResult result;
  FILE* pipe = ::popen(full.c_str(), "r");
  if (!pipe) throw Error("cannot start command: " + command);
  char buf[4096];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) result.out.append(buf, n);
  int status = ::pclose(pipe);
  if (status == -1) {
    result.exit_code = -1;
  } else if (WIFEXITED(status)) {
    result.exit_code = WEXITSTATUS(status);
  } else {
    result.exit_code = 128 + (WIFSIGNALED(status) ? WTERMSIG(status) : 0);
  }
  if (!merge_stderr && fs::exists(err_path)) result.err = read_text_file(err_path);
  return result;
}

}  // namespace kexplain
