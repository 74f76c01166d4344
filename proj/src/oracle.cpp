#include "itemdeps/oracle.hpp"

#include <algorithm>
#include <unordered_set>

namespace itemdeps {

std::string to_string(const VerificationOutcome& outcome) {
  switch (outcome.kind()) {
    case VerificationOutcome::Kind::verifiable:
      return "verifiable";
    case VerificationOutcome::Kind::not_verifiable:
      return "not_verifiable";
    case VerificationOutcome::Kind::error:
      return "error(" + outcome.message() + ")";
  }
  return "error";
}

namespace {

// Maps deps to their positions, checking that each one precedes `item`.
// Returns an error message on failure, empty otherwise.
std::string collect_positions(const Item& item, std::span<const ItemId> deps,
                              const Corpus& corpus, std::vector<std::size_t>& positions) {
  positions.clear();
  positions.reserve(deps.size());
  for (const auto& dep : deps) {
    auto pos = corpus.position_of(dep);
    if (!pos) return "unknown dependency " + dep.str();
    if (*pos >= item.position) return "dependency " + dep.str() + " does not precede " + item.id.str();
    positions.push_back(*pos);
  }
  std::sort(positions.begin(), positions.end());
  return {};
}

}  // namespace

VerificationOutcome verify_builtin(const Item& item, std::span<const ItemId> deps,
                                   const Corpus& corpus) {
  std::unordered_set<std::string> visible;
  std::unordered_set<ItemId, ItemIdHash> dep_set;
  for (const auto& dep : deps) {
    const Item* d = corpus.find(dep);
    if (d == nullptr) return VerificationOutcome::error("unknown dependency " + dep.str());
    if (d->position >= item.position) {
      return VerificationOutcome::error("dependency " + dep.str() + " does not precede " +
                                        item.id.str());
    }
    dep_set.insert(dep);
    visible.insert(d->defines.begin(), d->defines.end());
  }
  for (const auto& ref : item.explicit_refs) {
    if (dep_set.count(ref) == 0) return VerificationOutcome::not_verifiable();
  }
  for (const auto& symbol : item.uses) {
    if (visible.count(symbol) == 0) return VerificationOutcome::not_verifiable();
  }
  return VerificationOutcome::verifiable();
}

BuiltinOracle::BuiltinOracle(const Corpus& corpus) : corpus_(corpus) {
  for (const auto& item : corpus.items()) {
    for (const auto& symbol : item.defines) definers_[symbol].push_back(item.position);
  }
}

VerificationOutcome BuiltinOracle::verify(const Item& item, std::span<const ItemId> deps) const {
  thread_local std::vector<std::size_t> positions;
  if (auto err = collect_positions(item, deps, corpus_, positions); !err.empty()) {
    return VerificationOutcome::error(std::move(err));
  }
  auto present = [&](std::size_t pos) {
    return std::binary_search(positions.begin(), positions.end(), pos);
  };
  for (const auto& ref : item.explicit_refs) {
    auto pos = corpus_.position_of(ref);
    if (!pos || !present(*pos)) return VerificationOutcome::not_verifiable();
  }
  for (const auto& symbol : item.uses) {
    auto it = definers_.find(symbol);
    if (it == definers_.end()) return VerificationOutcome::not_verifiable();
    bool covered = false;
    // Walk the shorter of the two sorted lists.
    if (it->second.size() <= positions.size()) {
      covered = std::any_of(it->second.begin(), it->second.end(), present);
    } else {
      covered = std::any_of(positions.begin(), positions.end(), [&](std::size_t pos) {
        return std::binary_search(it->second.begin(), it->second.end(), pos);
      });
    }
    if (!covered) return VerificationOutcome::not_verifiable();
  }
  return VerificationOutcome::verifiable();
}

}  // namespace itemdeps
