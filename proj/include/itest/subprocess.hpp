#pragma once

#include <optional>
#include <string>
#include <vector>

namespace itest {

struct ProcessOptions {
  std::vector<std::string> argv;
  std::string working_directory;
  // KEY=VALUE entries; the child sees nothing else.
  std::vector<std::string> environment;
  std::optional<double> timeout_s;
};

struct ProcessResult {
  bool started = false;
  std::string spawn_error;
  int exit_code = -1;    // valid when the process exited normally
  int term_signal = 0;   // nonzero when killed by a signal
  bool timed_out = false;
  std::string out;
  std::string err;
  double seconds = 0;
};

// Runs a command in its own process group, capturing both output streams.
// On timeout the whole group is killed.
ProcessResult run_process(const ProcessOptions& options);

// Environment for interpreter subprocesses: PATH and the variables the
// interpreter needs from the current environment, with `python_path`
// prepended to PYTHONPATH.
std::vector<std::string> interpreter_environment(const std::vector<std::string>& python_path);

}  // namespace itest
