#include "itest/subprocess.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <cstring>

extern char** environ;

namespace itest {
namespace {

using Clock = std::chrono::steady_clock;

class Pipe {
 public:
  Pipe() {
    if (pipe2(fds_, O_CLOEXEC) != 0) fds_[0] = fds_[1] = -1;
  }
  ~Pipe() {
    close_read();
    close_write();
  }
  Pipe(const Pipe&) = delete;
  Pipe& operator=(const Pipe&) = delete;

  bool ok() const { return fds_[0] >= 0; }
  int read_end() const { return fds_[0]; }
  int write_end() const { return fds_[1]; }
  void close_read() { close_fd(fds_[0]); }
  void close_write() { close_fd(fds_[1]); }

 private:
  static void close_fd(int& fd) {
    if (fd >= 0) ::close(fd);
    fd = -1;
  }
  int fds_[2];
};

std::vector<char*> c_strings(const std::vector<std::string>& items) {
  std::vector<char*> out;
  out.reserve(items.size() + 1);
  for (const auto& s : items) out.push_back(const_cast<char*>(s.c_str()));
  out.push_back(nullptr);
  return out;
}

}  // namespace

ProcessResult run_process(const ProcessOptions& options) {
  ProcessResult result;
  auto started_at = Clock::now();
  Pipe out_pipe, err_pipe;
  if (!out_pipe.ok() || !err_pipe.ok() || options.argv.empty()) {
    result.spawn_error = options.argv.empty() ? "empty command" : std::strerror(errno);
    return result;
  }

  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  posix_spawn_file_actions_addopen(&actions, 0, "/dev/null", O_RDONLY, 0);
  posix_spawn_file_actions_adddup2(&actions, out_pipe.write_end(), 1);
  posix_spawn_file_actions_adddup2(&actions, err_pipe.write_end(), 2);
  if (!options.working_directory.empty()) {
    posix_spawn_file_actions_addchdir_np(&actions, options.working_directory.c_str());
  }
  posix_spawnattr_t attr;
  posix_spawnattr_init(&attr);
  posix_spawnattr_setflags(&attr, POSIX_SPAWN_SETPGROUP | POSIX_SPAWN_SETSIGMASK | POSIX_SPAWN_SETSIGDEF);
  posix_spawnattr_setpgroup(&attr, 0);
  sigset_t none, defaults;
  sigemptyset(&none);
  sigemptyset(&defaults);
  sigaddset(&defaults, SIGPIPE);
  sigaddset(&defaults, SIGINT);
  sigaddset(&defaults, SIGTERM);
  posix_spawnattr_setsigmask(&attr, &none);
  posix_spawnattr_setsigdefault(&attr, &defaults);

  auto argv = c_strings(options.argv);
  auto envp = c_strings(options.environment);
  pid_t pid = -1;
  int rc = posix_spawnp(&pid, argv[0], &actions, &attr, argv.data(), envp.data());
  posix_spawn_file_actions_destroy(&actions);
  posix_spawnattr_destroy(&attr);
  out_pipe.close_write();
  err_pipe.close_write();
  if (rc != 0) {
    result.spawn_error = std::strerror(rc);
    result.seconds = std::chrono::duration<double>(Clock::now() - started_at).count();
    return result;
  }
  result.started = true;

  std::optional<Clock::time_point> deadline;
  if (options.timeout_s) {
    deadline = started_at + std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(*options.timeout_s));
  }
  pollfd fds[2] = {{out_pipe.read_end(), POLLIN, 0}, {err_pipe.read_end(), POLLIN, 0}};
  std::string* sinks[2] = {&result.out, &result.err};
  int open_streams = 2;
  bool killed = false;
  bool reaped = false;
  int status = 0;
  char buf[65536];
  while (open_streams > 0) {
    int wait_ms = reaped ? -1 : 50;
    if (deadline && !killed) {
      auto left = std::chrono::duration_cast<std::chrono::milliseconds>(*deadline - Clock::now()).count();
      wait_ms = static_cast<int>(std::clamp<long long>(left, 0, wait_ms));
    }
    int n = poll(fds, 2, wait_ms);
    if (n < 0 && errno == EINTR) continue;
    if (deadline && !killed && Clock::now() >= *deadline) {
      kill(-pid, SIGKILL);
      killed = true;
      result.timed_out = true;
    }
    for (int i = 0; n > 0 && i < 2; ++i) {
      if (fds[i].fd < 0 || !(fds[i].revents & (POLLIN | POLLHUP | POLLERR))) continue;
      ssize_t got = ::read(fds[i].fd, buf, sizeof buf);
      if (got > 0) {
        sinks[i]->append(buf, static_cast<std::size_t>(got));
      } else if (got == 0 || (errno != EINTR && errno != EAGAIN)) {
        fds[i].fd = -1;
        --open_streams;
      }
    }
    if (!reaped && waitpid(pid, &status, WNOHANG) == pid) {
      reaped = true;
      // Background processes left in the group would keep the pipes open.
      kill(-pid, SIGKILL);
    }
  }
  if (!reaped) {
    while (waitpid(pid, &status, 0) < 0 && errno == EINTR) {
    }
    kill(-pid, SIGKILL);
  }
  result.seconds = std::chrono::duration<double>(Clock::now() - started_at).count();
  if (WIFEXITED(status)) {
    result.exit_code = WEXITSTATUS(status);
  } else if (WIFSIGNALED(status)) {
    result.term_signal = WTERMSIG(status);
  }
  return result;
}

std::vector<std::string> interpreter_environment(const std::vector<std::string>& python_path) {
  std::vector<std::string> env;
  std::string inherited_path;
  for (char** e = environ; e && *e; ++e) {
    std::string entry(*e);
    std::string key = entry.substr(0, entry.find('='));
    if (key == "PYTHONPATH") {
      inherited_path = entry.substr(key.size() + 1);
    } else if (key == "PATH" || key == "PYTHONHOME" || key == "VIRTUAL_ENV" || key == "LANG" || key == "HOME" ||
               key == "TMPDIR" || key == "SYSTEMROOT" || key.rfind("LC_", 0) == 0) {
      env.push_back(entry);
    }
  }
  std::string joined;
  for (const auto& p : python_path) {
    if (!joined.empty()) joined += ':';
    joined += p;
  }
  if (!inherited_path.empty()) {
    if (!joined.empty()) joined += ':';
    joined += inherited_path;
  }
  if (!joined.empty()) env.push_back("PYTHONPATH=" + joined);
  env.emplace_back("PYTHONDONTWRITEBYTECODE=1");
  return env;
}

}  // namespace itest
