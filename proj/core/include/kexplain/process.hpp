#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace kexplain {

struct ProcessResult {
  int exit_code = -1;
  std::string out;  // stdout, or stdout+stderr when merged
  std::string err;
};

/// Runs `command` through /bin/sh, optionally inside `cwd`. stderr is either
/// captured separately or merged into `out`.
ProcessResult run_shell(const std::string& command,
                        const std::optional<std::filesystem::path>& cwd = std::nullopt,
                        bool merge_stderr = false);

/// POSIX single-quote escaping.
std::string shell_quote(const std::string& arg);

std::string join_command(const std::vector<std::string>& argv);

/// Fresh directory under the system temp dir; removed by the destructor.
class TempDir {
 public:
  explicit TempDir(const std::string& prefix = "kexplain");
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  TempDir(TempDir&& other) noexcept;
  TempDir& operator=(TempDir&&) = delete;

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace kexplain
