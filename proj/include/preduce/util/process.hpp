#pragma once

#include <chrono>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace preduce::util {

class ProcessError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// mkdtemp under the system temp directory; `prefix` gets "-XXXXXX" appended.
std::filesystem::path make_temp_dir(const std::string& prefix);

struct ProcessSpec {
  std::vector<std::string> argv;
  std::filesystem::path cwd;
  std::filesystem::path stdout_path;  ///< empty = /dev/null
  std::filesystem::path stderr_path;  ///< empty = /dev/null
  std::chrono::milliseconds timeout{60'000};
};

/// Runs argv[0] in its own process group. Returns the exit status (128 + signal
/// for signalled children) or nullopt if the timeout fired, in which case the
/// whole group has been killed.
std::optional<int> run_process(const ProcessSpec& spec);

}  // namespace preduce::util
