#pragma once

#include <chrono>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace affectbench {

/// Child process with line-oriented pipes on its stdin and stdout. stderr is
/// inherited. The destructor closes stdin, waits briefly, then kills.
class ChildProcess {
 public:
  /// argv[0] is resolved through PATH. Throws PredictorError on spawn failure.
  explicit ChildProcess(const std::vector<std::string>& argv,
                        const std::optional<std::filesystem::path>& working_dir = std::nullopt);
  ~ChildProcess();

  ChildProcess(const ChildProcess&) = delete;
  ChildProcess& operator=(const ChildProcess&) = delete;

  /// Appends '\n'. Returns false if the child closed its stdin.
  bool write_line(const std::string& line);

  enum class ReadStatus { line, eof, timeout };
  /// Reads one line (without '\n').
  ReadStatus read_line(std::string& line, std::chrono::milliseconds timeout);

  void close_stdin();
  /// Waits up to `timeout` for exit; returns the exit status, or nullopt if
  /// still running. Killed/signalled children report 128 + signal.
  std::optional<int> wait_for(std::chrono::milliseconds timeout);
  void kill();

  int pid() const noexcept { return pid_; }

 private:
  int pid_ = -1;
  int stdin_fd_ = -1;
  int stdout_fd_ = -1;
  std::optional<int> status_;
  std::string buffer_;
};

}  // namespace affectbench
