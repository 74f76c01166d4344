#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "itemdeps/corpus.hpp"
#include "itemdeps/oracle.hpp"

namespace itemdeps {

enum class RemovalOrder { descending_position, ascending_position };
enum class StrategyKind { linear, ddmin };

struct Strategy {
  StrategyKind kind = StrategyKind::linear;
  RemovalOrder order = RemovalOrder::descending_position;

  /// `linear-desc`, `ddmin-asc`, ...
  std::string name() const;
  static std::optional<Strategy> parse(std::string_view name);

  friend bool operator==(const Strategy&, const Strategy&) = default;
};

struct MinimalDepSet {
  ItemId item;
  std::vector<ItemId> deps;  // corpus order
  std::string strategy;
  std::size_t oracle_calls = 0;
  /// Sufficient and 1-minimal with respect to the oracle used.
  bool certified = false;

  friend bool operator==(const MinimalDepSet&, const MinimalDepSet&) = default;
};

class MinimizationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The full candidate set does not verify; nothing was minimized.
class InsufficientCandidatesError : public MinimizationError {
 public:
  using MinimizationError::MinimizationError;
};

/// The oracle reported an error outcome.
class OracleFailureError : public MinimizationError {
 public:
  using MinimizationError::MinimizationError;
};

/// One-at-a-time removal in `order`: exactly |candidates| + 1 oracle calls.
MinimalDepSet minimize_linear(const Item& item, const CandidateSet& candidates,
                              const VerificationOracle& oracle,
                              RemovalOrder order = RemovalOrder::descending_position);

/// Delta-debugging complement removal with growing granularity; stops only
/// when no single element can be dropped. Requires an oracle declared
/// monotone.
MinimalDepSet minimize_ddmin(const Item& item, const CandidateSet& candidates,
                             const VerificationOracle& oracle,
                             RemovalOrder order = RemovalOrder::descending_position);

MinimalDepSet minimize(const Item& item, const CandidateSet& candidates,
                       const VerificationOracle& oracle, const Strategy& strategy);

struct CertificationResult {
  bool minimal = false;
  std::size_t oracle_calls = 0;
};

/// Checks sufficiency and 1-minimality with exactly |deps| + 1 oracle calls.
/// Throws OracleFailureError on an oracle error outcome.
CertificationResult certify_minimal(const Item& item, std::span<const ItemId> deps,
                                    const VerificationOracle& oracle);

struct ItemResult {
  ItemId item;
  std::optional<MinimalDepSet> result;
  std::string error;  // set iff result is empty

  bool ok() const noexcept { return result.has_value(); }
  friend bool operator==(const ItemResult&, const ItemResult&) = default;
};

struct CorpusResults {
  std::vector<ItemResult> items;  // corpus order

  std::size_t succeeded() const;
  std::size_t failed() const;
  std::size_t oracle_calls() const;
  const ItemResult* find(const ItemId& id) const;

  friend bool operator==(const CorpusResults&, const CorpusResults&) = default;
};

/// Minimizes every item of `corpus` on a pool of `jobs` OpenMP threads.
/// Per-item failures are recorded, not thrown. Output is independent of
/// `jobs`. Throws std::invalid_argument for jobs == 0 or a strategy the
/// oracle cannot support.
CorpusResults minimize_corpus(const Corpus& corpus, const VerificationOracle& oracle,
                              const Strategy& strategy, std::size_t jobs);

/// Single-threaded reference implementation of minimize_corpus.
CorpusResults minimize_corpus_serial(const Corpus& corpus, const VerificationOracle& oracle,
                                     const Strategy& strategy);

/// Results file: `id<TAB>dep,dep<TAB>strategy<TAB>calls` per item, or
/// `id<TAB>!<TAB>message` for failures. Uncertified sets carry a
/// `+uncertified` strategy suffix.
void write_results(const CorpusResults& results, std::ostream& out);
std::string results_to_text(const CorpusResults& results);
/// Throws std::runtime_error naming the offending line.
CorpusResults parse_results(std::istream& in);
CorpusResults load_results(const std::string& path);

}  // namespace itemdeps
