#pragma once

#include <chrono>
#include <filesystem>
#include <span>
#include <string>

#include "itemdeps/oracle.hpp"

namespace itemdeps {

struct ExternalOracleOptions {
  std::string command;
  std::chrono::milliseconds timeout{60'000};
  // Declared properties of the wrapped checker; not verified at runtime.
  bool monotone = true;
  bool deterministic = true;
};

/// Runs an external checker once per query.
///
/// Each call materializes a fresh sandbox directory holding `item.txt` (the
/// item body) and `manifest` (one dependency id per line, corpus order) and
/// runs `<command> <sandbox-dir>`. Exit status 0 means verifiable, 1 means
/// not verifiable; any other status, a signal, or a timeout is an error
/// outcome carrying the checker's captured output.
class ExternalOracle final : public VerificationOracle {
 public:
  /// Throws std::invalid_argument if the command is not executable or the
  /// timeout is not positive.
  ExternalOracle(const Corpus& corpus, ExternalOracleOptions options);

  const OracleDescriptor& descriptor() const override { return descriptor_; }
  VerificationOutcome verify(const Item& item, std::span<const ItemId> deps) const override;

 private:
  const Corpus& corpus_;
  ExternalOracleOptions options_;
  OracleDescriptor descriptor_;
};

VerificationOutcome verify_external(const Item& item, std::span<const ItemId> deps,
                                    const Corpus& corpus, const std::string& command,
                                    std::chrono::milliseconds timeout);

/// Resolves a command the way execvp would; empty if not found/executable.
std::filesystem::path find_executable(const std::string& command);

}  // namespace itemdeps
