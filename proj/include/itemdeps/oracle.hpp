#pragma once

#include <atomic>
#include <cstddef>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "itemdeps/corpus.hpp"

namespace itemdeps {

class VerificationOutcome {
 public:
  enum class Kind { verifiable, not_verifiable, error };

  static VerificationOutcome verifiable() { return VerificationOutcome(Kind::verifiable, {}); }
  static VerificationOutcome not_verifiable() {
    return VerificationOutcome(Kind::not_verifiable, {});
  }
  /// Reserved for oracle malfunction (timeout, crash), never a clean "no".
  static VerificationOutcome error(std::string message) {
    return VerificationOutcome(Kind::error, std::move(message));
  }

  Kind kind() const noexcept { return kind_; }
  bool is_verifiable() const noexcept { return kind_ == Kind::verifiable; }
  bool is_error() const noexcept { return kind_ == Kind::error; }
  const std::string& message() const noexcept { return message_; }

  friend bool operator==(const VerificationOutcome&, const VerificationOutcome&) = default;

 private:
  VerificationOutcome(Kind kind, std::string message) : kind_(kind), message_(std::move(message)) {}

  Kind kind_;
  std::string message_;
};

std::string to_string(const VerificationOutcome& outcome);

/// Assumptions a backend declares about itself. The minimizer and cache
/// trust these flags.
struct OracleDescriptor {
  std::string name;
  bool monotone = false;
  bool deterministic = false;
};

/// Decides whether an item verifies when only `deps` are visible to it.
///
/// Implementations must be safe to call concurrently; `deps` is treated as a
/// set and may arrive in any order.
class VerificationOracle {
 public:
  virtual ~VerificationOracle() = default;
  virtual const OracleDescriptor& descriptor() const = 0;
  virtual VerificationOutcome verify(const Item& item, std::span<const ItemId> deps) const = 0;
};

/// Reference symbol-closure semantics: the item verifies iff every symbol it
/// uses is defined by some dependency and every explicit reference is among
/// the dependencies. Unknown or non-preceding deps yield an error outcome.
VerificationOutcome verify_builtin(const Item& item, std::span<const ItemId> deps,
                                   const Corpus& corpus);

/// Same semantics as verify_builtin, backed by a symbol -> definers index
/// built once per corpus.
class BuiltinOracle final : public VerificationOracle {
 public:
  explicit BuiltinOracle(const Corpus& corpus);

  const OracleDescriptor& descriptor() const override { return descriptor_; }
  VerificationOutcome verify(const Item& item, std::span<const ItemId> deps) const override;

 private:
  const Corpus& corpus_;
  OracleDescriptor descriptor_{"builtin", true, true};
  // Positions of the items defining each symbol, ascending.
  std::unordered_map<std::string, std::vector<std::size_t>> definers_;
};

/// Forwards to another oracle and counts backend invocations.
class CountingOracle final : public VerificationOracle {
 public:
  explicit CountingOracle(const VerificationOracle& backend) : backend_(backend) {}

  const OracleDescriptor& descriptor() const override { return backend_.descriptor(); }
  VerificationOutcome verify(const Item& item, std::span<const ItemId> deps) const override {
    calls_.fetch_add(1, std::memory_order_relaxed);
    return backend_.verify(item, deps);
  }

  std::size_t calls() const noexcept { return calls_.load(std::memory_order_relaxed); }
  void reset() noexcept { calls_.store(0, std::memory_order_relaxed); }

 private:
  const VerificationOracle& backend_;
  mutable std::atomic<std::size_t> calls_{0};
};

}  // namespace itemdeps
