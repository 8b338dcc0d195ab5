#pragma once

#include <cstddef>
#include <string>

namespace webscraper::sandbox {

inline constexpr std::size_t kOutputCap = 64 * 1024;
inline constexpr const char* kTruncationMarker = "\n[output truncated]";

struct ExecResult {
  std::string stdout_text;
  std::string stderr_text;
  int exit_code = 0;
  bool timed_out = false;
  bool truncated = false;
};

// Working-directory jail for the bash and file-editor tools. Relative
// paths resolve against the root; anything escaping it is refused.
class Sandbox {
 public:
  explicit Sandbox(std::string root);

  const std::string& root() const { return root_; }

  // Runs `command` under /bin/sh -c with cwd at the root. Streams are
  // captured up to kOutputCap bytes each; overruns are truncated with a
  // marker. A timeout kills the process and keeps partial output.
  ExecResult shell_exec(const std::string& command, int timeout_ms = 10000);

  std::string file_read(const std::string& path);
  void file_write(const std::string& path, const std::string& content);
  // Replaces exactly one occurrence; any other match count is an error
  // naming the count.
  void file_str_replace(const std::string& path, const std::string& old_str,
                        const std::string& new_str);

  // Containment check: returns the absolute resolved path or throws
  // SecurityError.
  std::string resolve(const std::string& path) const;

 private:
  std::string root_;
};

}  // namespace webscraper::sandbox
