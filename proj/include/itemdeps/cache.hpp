#pragma once

#include <atomic>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <unordered_map>

#include "itemdeps/oracle.hpp"

namespace itemdeps {

/// Order-independent SHA-256 over the canonical ids of a dependency set, as
/// lowercase hex. Sets with equal membership get equal fingerprints.
std::string dependency_fingerprint(std::span<const ItemId> deps);

/// Memo of oracle outcomes keyed by (item id, dependency fingerprint).
///
/// Optionally backed by an append-only file of `itemId<TAB>hex<TAB>V|N`
/// records; every insert is flushed immediately. Safe for concurrent use.
class VerificationCache {
 public:
  VerificationCache() = default;
  /// Loads existing records from `path` (if present) and appends new ones
  /// to it. An unterminated final line is treated as a lost in-flight write.
  explicit VerificationCache(const std::filesystem::path& path);

  VerificationCache(const VerificationCache&) = delete;
  VerificationCache& operator=(const VerificationCache&) = delete;

  std::optional<VerificationOutcome> lookup(const ItemId& item, const std::string& fingerprint);
  /// Error outcomes are ignored.
  void insert(const ItemId& item, const std::string& fingerprint,
              const VerificationOutcome& outcome);

  std::size_t size() const;
  std::size_t hits() const noexcept { return hits_.load(std::memory_order_relaxed); }
  std::size_t misses() const noexcept { return misses_.load(std::memory_order_relaxed); }

 private:
  static std::string key(const ItemId& item, const std::string& fingerprint);

  mutable std::shared_mutex mutex_;
  std::unordered_map<std::string, bool> entries_;  // true = verifiable
  std::optional<std::ofstream> file_;
  std::atomic<std::size_t> hits_{0};
  std::atomic<std::size_t> misses_{0};
};

/// Consults `cache` before invoking `backend`. Throws std::invalid_argument
/// for backends not declared deterministic.
VerificationOutcome cached_verify(VerificationCache& cache, const VerificationOracle& backend,
                                  const Item& item, std::span<const ItemId> deps);

class CachingOracle final : public VerificationOracle {
 public:
  /// Throws std::invalid_argument for nondeterministic backends.
  CachingOracle(VerificationCache& cache, const VerificationOracle& backend);

  const OracleDescriptor& descriptor() const override { return descriptor_; }
  VerificationOutcome verify(const Item& item, std::span<const ItemId> deps) const override {
    return cached_verify(cache_, backend_, item, deps);
  }

 private:
  VerificationCache& cache_;
  const VerificationOracle& backend_;
  OracleDescriptor descriptor_;
};

}  // namespace itemdeps
