#include "itemdeps/external_oracle.hpp"

#include <fcntl.h>
#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <vector>

extern char** environ;

namespace itemdeps {

namespace {

constexpr std::size_t kMaxDiagnosticBytes = 4096;

/// Temporary directory removed on scope exit.
class ScratchDir {
 public:
  ScratchDir() {
    auto pattern = (std::filesystem::temp_directory_path() / "itemdeps-oracle-XXXXXX").string();
    if (::mkdtemp(pattern.data()) == nullptr) {
      throw std::runtime_error(std::string("mkdtemp failed: ") + std::strerror(errno));
    }
    path_ = pattern;
  }
  ~ScratchDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  ScratchDir(const ScratchDir&) = delete;
  ScratchDir& operator=(const ScratchDir&) = delete;

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

std::string read_head(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::string out(kMaxDiagnosticBytes, '\0');
  in.read(out.data(), static_cast<std::streamsize>(out.size()));
  out.resize(static_cast<std::size_t>(in.gcount()));
  while (!out.empty() && (out.back() == '\n' || out.back() == '\r')) out.pop_back();
  return out;
}

std::string with_diagnostics(std::string message, const std::filesystem::path& log) {
  auto diag = read_head(log);
  if (!diag.empty()) message += ": " + diag;
  return message;
}

bool is_executable_file(const std::filesystem::path& p) {
  std::error_code ec;
  return std::filesystem::is_regular_file(p, ec) && ::access(p.c_str(), X_OK) == 0;
}

}  // namespace

std::filesystem::path find_executable(const std::string& command) {
  if (command.empty()) return {};
  if (command.find('/') != std::string::npos) {
    return is_executable_file(command) ? std::filesystem::path(command) : std::filesystem::path{};
  }
  const char* env = std::getenv("PATH");
  std::string path_var = env != nullptr ? env : "/usr/bin:/bin";
  std::istringstream dirs(path_var);
  std::string dir;
  while (std::getline(dirs, dir, ':')) {
    auto candidate = std::filesystem::path(dir.empty() ? "." : dir) / command;
    if (is_executable_file(candidate)) return candidate;
  }
  return {};
}

ExternalOracle::ExternalOracle(const Corpus& corpus, ExternalOracleOptions options)
    : corpus_(corpus), options_(std::move(options)) {
  if (options_.timeout.count() <= 0) {
    throw std::invalid_argument("external oracle timeout must be positive");
  }
  auto resolved = find_executable(options_.command);
  if (resolved.empty()) {
    throw std::invalid_argument("oracle command '" + options_.command + "' is not executable");
  }
  options_.command = resolved.string();
  descriptor_ = {"external:" + options_.command, options_.monotone, options_.deterministic};
}

VerificationOutcome ExternalOracle::verify(const Item& item, std::span<const ItemId> deps) const {
  std::vector<std::pair<std::size_t, const ItemId*>> ordered;
  ordered.reserve(deps.size());
  for (const auto& dep : deps) {
    auto pos = corpus_.position_of(dep);
    if (!pos) return VerificationOutcome::error("unknown dependency " + dep.str());
    if (*pos >= item.position) {
      return VerificationOutcome::error("dependency " + dep.str() + " does not precede " +
                                        item.id.str());
    }
    ordered.emplace_back(*pos, &dep);
  }
  std::sort(ordered.begin(), ordered.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });

  try {
    ScratchDir scratch;
    const auto sandbox = scratch.path() / "sandbox";
    const auto log = scratch.path() / "diagnostics";
    std::filesystem::create_directory(sandbox);
    {
      std::ofstream body(sandbox / "item.txt", std::ios::binary);
      if (item.body) body << *item.body;
      std::ofstream manifest(sandbox / "manifest", std::ios::binary);
      for (const auto& [_, id] : ordered) manifest << id->str() << '\n';
      if (!body || !manifest) return VerificationOutcome::error("cannot write sandbox");
    }

    posix_spawn_file_actions_t actions;
    posix_spawn_file_actions_init(&actions);
    posix_spawn_file_actions_addopen(&actions, STDIN_FILENO, "/dev/null", O_RDONLY, 0);
    posix_spawn_file_actions_addopen(&actions, STDOUT_FILENO, log.c_str(),
                                     O_WRONLY | O_CREAT | O_TRUNC, 0644);
    posix_spawn_file_actions_adddup2(&actions, STDOUT_FILENO, STDERR_FILENO);
    posix_spawnattr_t attr;
    posix_spawnattr_init(&attr);
    posix_spawnattr_setflags(&attr, POSIX_SPAWN_SETPGROUP);
    posix_spawnattr_setpgroup(&attr, 0);

    std::string program = options_.command;
    std::string dir = sandbox.string();
    char* argv[] = {program.data(), dir.data(), nullptr};
    pid_t pid = 0;
    int rc = ::posix_spawn(&pid, program.c_str(), &actions, &attr, argv, environ);
    posix_spawn_file_actions_destroy(&actions);
    posix_spawnattr_destroy(&attr);
    if (rc != 0) {
      return VerificationOutcome::error("cannot run '" + program + "': " + std::strerror(rc));
    }

    const auto deadline = std::chrono::steady_clock::now() + options_.timeout;
    auto pause = std::chrono::microseconds(200);
    int status = 0;
    while (true) {
      pid_t done = ::waitpid(pid, &status, WNOHANG);
      if (done == pid) break;
      if (done < 0 && errno != EINTR) {
        return VerificationOutcome::error(std::string("waitpid failed: ") + std::strerror(errno));
      }
      if (std::chrono::steady_clock::now() >= deadline) {
        ::kill(-pid, SIGKILL);
        ::waitpid(pid, &status, 0);
        return VerificationOutcome::error("timeout");
      }
      std::this_thread::sleep_for(pause);
      pause = std::min(pause * 2, std::chrono::microseconds(20'000));
    }

    if (WIFEXITED(status)) {
      int code = WEXITSTATUS(status);
      if (code == 0) return VerificationOutcome::verifiable();
      if (code == 1) return VerificationOutcome::not_verifiable();
      return VerificationOutcome::error(
          with_diagnostics("exit status " + std::to_string(code), log));
    }
    if (WIFSIGNALED(status)) {
      return VerificationOutcome::error(
          with_diagnostics("killed by signal " + std::to_string(WTERMSIG(status)), log));
    }
    return VerificationOutcome::error("abnormal termination");
  } catch (const std::exception& e) {
    return VerificationOutcome::error(e.what());
  }
}

VerificationOutcome verify_external(const Item& item, std::span<const ItemId> deps,
                                    const Corpus& corpus, const std::string& command,
                                    std::chrono::milliseconds timeout) {
  ExternalOracle oracle(corpus, {command, timeout});
  return oracle.verify(item, deps);
}

}  // namespace itemdeps
