#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace testgen {

struct ProcessResult {
  int exit_code = -1;  // -1 when killed by a signal or the timeout
  int signal = 0;
  bool timed_out = false;
  std::string output;  // stdout and stderr, interleaved

  bool ok() const { return exit_code == 0; }
};

struct ProcessOptions {
  std::filesystem::path cwd;
  std::map<std::string, std::string> env;  // added to (or overriding) the current environment
  std::chrono::milliseconds timeout{std::chrono::minutes(5)};
  std::string stdin_text;
};

/// Runs argv[0] (looked up on PATH) and waits for it. Throws Error(IoFailure)
/// when the process cannot be started.
ProcessResult run_process(const std::vector<std::string>& argv, const ProcessOptions& options = {});

/// `/bin/sh -c command`.
ProcessResult run_shell(const std::string& command, const ProcessOptions& options = {});

}  // namespace testgen
