#include "webscraper/sandbox.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <filesystem>

#include "webscraper/errors.hpp"
#include "webscraper/model.hpp"

namespace webscraper::sandbox {

namespace fs = std::filesystem;

Sandbox::Sandbox(std::string root) {
  fs::path p(root);
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) throw IoError("cannot create sandbox root " + root);
  root_ = fs::weakly_canonical(p).string();
}

std::string Sandbox::resolve(const std::string& path) const {
  if (path.empty()) throw ValidationError("empty path");
  fs::path joined = fs::path(path).is_absolute()
                        ? fs::path(path)
                        : fs::path(root_) / path;
  std::string resolved = fs::weakly_canonical(joined).string();
  if (resolved != root_ &&
      resolved.compare(0, root_.size() + 1, root_ + "/") != 0)
    throw SecurityError("path escapes the sandbox: " + path);
  return resolved;
}

std::string Sandbox::file_read(const std::string& path) {
  return model::read_file(resolve(path));
}

void Sandbox::file_write(const std::string& path, const std::string& content) {
  std::string resolved = resolve(path);
  fs::path parent = fs::path(resolved).parent_path();
  std::error_code ec;
  fs::create_directories(parent, ec);
  model::write_file(resolved, content);
}

void Sandbox::file_str_replace(const std::string& path,
                               const std::string& old_str,
                               const std::string& new_str) {
  if (old_str.empty()) throw ValidationError("old string must be non-empty");
  std::string resolved = resolve(path);
  std::string content = model::read_file(resolved);

  size_t count = 0;
  for (size_t at = content.find(old_str); at != std::string::npos;
       at = content.find(old_str, at + old_str.size()))
    ++count;
  if (count != 1)
    throw ValidationError("str_replace needs exactly one occurrence, found " +
                          std::to_string(count) + " matches");

  content.replace(content.find(old_str), old_str.size(), new_str);
  model::write_file(resolved, content);
}

namespace {

// Reads from fd into out until EOF, honoring the byte cap; excess bytes
// are drained and dropped so the child never blocks on a full pipe.
struct CappedReader {
  int fd;
  std::string* out;
  bool open = true;
  bool truncated = false;

  void drain() {
    char buf[4096];
    while (true) {
      ssize_t n = read(fd, buf, sizeof(buf));
      if (n > 0) {
        size_t room = kOutputCap > out->size() ? kOutputCap - out->size() : 0;
        size_t take = std::min<size_t>(room, static_cast<size_t>(n));
        out->append(buf, take);
        if (take < static_cast<size_t>(n)) truncated = true;
        continue;
      }
      if (n == 0) {
        open = false;
        return;
      }
      if (errno == EAGAIN || errno == EWOULDBLOCK) return;
      open = false;
      return;
    }
  }
};

void set_nonblocking(int fd) {
  fcntl(fd, F_SETFL, fcntl(fd, F_GETFL, 0) | O_NONBLOCK);
}

}  // namespace

ExecResult Sandbox::shell_exec(const std::string& command, int timeout_ms) {
  if (command.empty()) throw ValidationError("command must be non-empty");
  if (timeout_ms <= 0) throw ValidationError("timeout must be positive");

  int out_pipe[2], err_pipe[2];
  if (pipe(out_pipe) != 0 || pipe(err_pipe) != 0)
    throw IoError("pipe creation failed");

  pid_t pid = fork();
  if (pid < 0) throw IoError("fork failed");
  if (pid == 0) {
    dup2(out_pipe[1], STDOUT_FILENO);
    dup2(err_pipe[1], STDERR_FILENO);
    close(out_pipe[0]);
    close(out_pipe[1]);
    close(err_pipe[0]);
    close(err_pipe[1]);
    if (chdir(root_.c_str()) != 0) _exit(127);
    execl("/bin/sh", "sh", "-c", command.c_str(), nullptr);
    _exit(127);
  }

  close(out_pipe[1]);
  close(err_pipe[1]);
  set_nonblocking(out_pipe[0]);
  set_nonblocking(err_pipe[0]);

  ExecResult result;
  CappedReader readers[2] = {{out_pipe[0], &result.stdout_text},
                             {err_pipe[0], &result.stderr_text}};

  auto deadline = std::chrono::steady_clock::now() +
                  std::chrono::milliseconds(timeout_ms);
  while (readers[0].open || readers[1].open) {
    auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
                    deadline - std::chrono::steady_clock::now())
                    .count();
    if (left <= 0) {
      kill(pid, SIGKILL);
      result.timed_out = true;
      break;
    }
    pollfd fds[2];
    nfds_t n = 0;
    for (auto& r : readers)
      if (r.open) fds[n++] = {r.fd, POLLIN, 0};
    int rc = poll(fds, n, static_cast<int>(std::min<long long>(left, 200)));
    if (rc < 0 && errno != EINTR) break;
    for (auto& r : readers)
      if (r.open) r.drain();
  }
  for (auto& r : readers) {
    if (result.timed_out && r.open) r.drain();  // keep partial output
    close(r.fd);
  }

  int status = 0;
  waitpid(pid, &status, 0);
  if (result.timed_out)
    result.exit_code = -1;
  else if (WIFEXITED(status))
    result.exit_code = WEXITSTATUS(status);
  else
    result.exit_code = 128 + (WIFSIGNALED(status) ? WTERMSIG(status) : 0);

  result.truncated = readers[0].truncated || readers[1].truncated;
  if (readers[0].truncated) result.stdout_text += kTruncationMarker;
  if (readers[1].truncated) result.stderr_text += kTruncationMarker;
  return result;
}

}  // namespace webscraper::sandbox
