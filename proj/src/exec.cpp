#include "greenfuzz/exec.hpp"

#include <fcntl.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <atomic>
#include <cerrno>
#include <chrono>
#include <cstring>
#include <fstream>
#include <sstream>
#include <thread>
#include <vector>

#include "greenfuzz/errors.hpp"

namespace greenfuzz {

namespace fs = std::filesystem;

namespace {

ExecResult execute_synthetic(const TargetSpec& target,
                             std::span<const std::uint8_t> input,
                             Meter& meter) {
  const SyntheticTarget* model = find_synthetic_target(target.model);
  if (!model)
    throw ConfigError("unknown synthetic model '" + target.model + "'");

  std::vector<std::uint32_t> counts(model->map_size(), 0);
  SyntheticOutcome outcome;
  const EnergyReading reading = meter.measure_around([&] {
    outcome = model->run(input, counts);
    const EnergyReading cost = model->cost(input, counts);
    meter.credit(cost.cpu_joules, cost.ram_joules, cost.duration_us);
  });

  ExecResult result(model->map_size());
  result.trace = EdgeTrace::from_counts(counts);
  result.energy = reading;
  result.exec_time_us = reading.duration_us;
  if (outcome.crashed) {
    result.status = ExecResult::Status::crash;
    result.term_signal = SIGABRT;
  }
  return result;
}

// Scratch file helpers ------------------------------------------------------

struct ScratchFiles {
  fs::path input_file;
  fs::path trace_file;

  ~ScratchFiles() {
    std::error_code ec;
    if (!input_file.empty()) fs::remove(input_file, ec);
    if (!trace_file.empty()) fs::remove(trace_file, ec);
  }
};

ScratchFiles make_scratch(const fs::path& scratch_dir) {
  static std::atomic<std::uint64_t> seq{0};
  fs::path dir = scratch_dir;
  if (dir.empty()) dir = fs::temp_directory_path();
  fs::create_directories(dir);
  const auto tag = std::to_string(::getpid()) + "_" +
                   std::to_string(seq.fetch_add(1, std::memory_order_relaxed));
  ScratchFiles files;
  files.input_file = dir / ("gf_input_" + tag + ".bin");
  files.trace_file = dir / ("gf_trace_" + tag + ".txt");
  return files;
}

void write_file(const fs::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write scratch file " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
}

[[noreturn]] void child_exec(const std::vector<std::string>& argv_storage,
                             const fs::path& input_file,
                             const fs::path& trace_file,
                             TargetSpec::InputMode mode, int err_fd) {
  ::setpgid(0, 0);

  // stdin comes from the input file (stdin mode) or /dev/null.
  const char* stdin_path =
      mode == TargetSpec::InputMode::stdin_pipe ? input_file.c_str()
                                                : "/dev/null";
  const int in_fd = ::open(stdin_path, O_RDONLY);
  if (in_fd >= 0) {
    ::dup2(in_fd, STDIN_FILENO);
    ::close(in_fd);
  }

  ::setenv(kTraceFileEnv, trace_file.c_str(), 1);

  std::vector<char*> argv;
  argv.reserve(argv_storage.size() + 1);
  for (const auto& arg : argv_storage)
    argv.push_back(const_cast<char*>(arg.c_str()));
  argv.push_back(nullptr);

  ::execvp(argv[0], argv.data());

  // Report exec failure through the CLOEXEC pipe.
  const int saved = errno;
  ssize_t ignored = ::write(err_fd, &saved, sizeof(saved));
  (void)ignored;
  ::_exit(127);
}

ExecResult execute_external(const TargetSpec& target,
                            std::span<const std::uint8_t> input, Meter& meter,
                            const fs::path& scratch_dir) {
  ScratchFiles scratch = make_scratch(scratch_dir);
  write_file(scratch.input_file, input);
  std::error_code ec;
  fs::remove(scratch.trace_file, ec);  // stale trace from a previous run

  std::vector<std::string> argv = target.command;
  for (auto& arg : argv)
    if (arg == "@@") arg = scratch.input_file.string();

  int err_pipe[2];
  if (::pipe2(err_pipe, O_CLOEXEC) != 0)
    throw std::runtime_error("pipe2 failed: " + std::string(strerror(errno)));

  ExecResult result(target.map_size);
  int wait_status = 0;
  bool timed_out = false;

  result.energy = meter.measure_around([&] {
    const pid_t pid = ::fork();
    if (pid < 0) {
      ::close(err_pipe[0]);
      ::close(err_pipe[1]);
      throw std::runtime_error("fork failed: " + std::string(strerror(errno)));
    }
    if (pid == 0) {
      ::close(err_pipe[0]);
      child_exec(argv, scratch.input_file, scratch.trace_file,
                 target.input_mode, err_pipe[1]);
    }
    ::close(err_pipe[1]);

    // Spawn failure shows up as errno bytes on the pipe.
    int child_errno = 0;
    const ssize_t n = ::read(err_pipe[0], &child_errno, sizeof(child_errno));
    ::close(err_pipe[0]);
    if (n == static_cast<ssize_t>(sizeof(child_errno))) {
      ::waitpid(pid, &wait_status, 0);
      throw ConfigError("cannot execute target '" + argv[0] +
                        "': " + std::strerror(child_errno));
    }

    const auto deadline = std::chrono::steady_clock::now() +
                          std::chrono::milliseconds(target.timeout_ms);
    for (;;) {
      const pid_t done = ::waitpid(pid, &wait_status, WNOHANG);
      if (done == pid) break;
      if (std::chrono::steady_clock::now() >= deadline) {
        timed_out = true;
        ::kill(-pid, SIGKILL);
        ::kill(pid, SIGKILL);
        ::waitpid(pid, &wait_status, 0);
        break;
      }
      std::this_thread::sleep_for(std::chrono::microseconds(200));
    }
  });

  result.exec_time_us = result.energy.duration_us;

  // Partial traces are still useful after timeouts and crashes.
  std::ifstream trace_in(scratch.trace_file);
  if (trace_in)
    result.trace = EdgeTrace::from_showmap(trace_in, target.map_size);

  if (timed_out) {
    result.status = ExecResult::Status::timeout;
  } else if (WIFSIGNALED(wait_status)) {
    result.status = ExecResult::Status::crash;
    result.term_signal = WTERMSIG(wait_status);
  }
  return result;
}

}  // namespace

ExecResult execute(const TargetSpec& target, std::span<const std::uint8_t> input,
                   Meter& meter, const fs::path& scratch_dir) {
  if (target.kind == TargetSpec::Kind::synthetic)
    return execute_synthetic(target, input, meter);
  return execute_external(target, input, meter, scratch_dir);
}

ExecuteFn make_executor(const TargetSpec& target, Meter& meter,
                        const fs::path& scratch_dir) {
  return [&target, &meter, scratch_dir](std::span<const std::uint8_t> input) {
    return execute(target, input, meter, scratch_dir);
  };
}

}  // namespace greenfuzz
