#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "itemdeps/item_id.hpp"

namespace itemdeps {

/// One definitional or propositional unit of a corpus.
///
/// `defines` and `uses` are kept sorted and duplicate-free, and symbols an
/// item defines itself never appear in its `uses`. `explicit_refs` and
/// `candidates` are kept in corpus order once the item belongs to a Corpus.
struct Item {
  ItemId id;
  std::vector<std::string> defines;
  std::vector<std::string> uses;
  std::vector<ItemId> explicit_refs;
  std::optional<std::string> body;
  std::optional<std::vector<ItemId>> candidates;
  std::size_t position = 0;

  friend bool operator==(const Item&, const Item&) = default;
};

class CorpusParseError : public std::runtime_error {
 public:
  CorpusParseError(std::size_t line, const std::string& message);
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class CorpusValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UnknownItemError : public std::out_of_range {
 public:
  explicit UnknownItemError(const ItemId& id);
};

/// Globally ordered, validated, immutable collection of items.
class Corpus {
 public:
  Corpus() = default;

  /// Normalizes and validates `items`; positions are reassigned in sequence.
  /// Throws CorpusValidationError naming the offending item.
  static Corpus from_items(std::vector<Item> items);

  std::size_t size() const noexcept { return items_.size(); }
  bool empty() const noexcept { return items_.empty(); }
  const std::vector<Item>& items() const noexcept { return items_; }
  const Item& operator[](std::size_t position) const { return items_[position]; }

  const Item* find(const ItemId& id) const;
  std::optional<std::size_t> position_of(const ItemId& id) const;
  /// Throws UnknownItemError.
  const Item& at(const ItemId& id) const;
  bool contains(const ItemId& id) const { return index_.count(id) != 0; }

  friend bool operator==(const Corpus& a, const Corpus& b) { return a.items_ == b.items_; }

 private:
  std::vector<Item> items_;
  std::unordered_map<ItemId, std::size_t, ItemIdHash> index_;
};

/// The over-approximated dependency set an item is minimized against.
struct CandidateSet {
  ItemId item;
  std::vector<ItemId> candidates;  // corpus order
};

struct CorpusStats {
  std::size_t items = 0;
  std::array<std::size_t, kItemKindCount> per_kind{};
  std::size_t symbols = 0;       // distinct defined symbols
  std::size_t used_symbols = 0;  // distinct used symbols
  std::size_t explicit_refs = 0;

  std::size_t count(ItemKind kind) const { return per_kind[static_cast<std::size_t>(kind)]; }
  friend bool operator==(const CorpusStats&, const CorpusStats&) = default;
};

Corpus parse_corpus(std::istream& in);
Corpus parse_corpus_text(const std::string& text);
Corpus load_corpus(const std::filesystem::path& path);

void write_corpus(const Corpus& corpus, std::ostream& out);
std::string corpus_to_text(const Corpus& corpus);

/// All predecessors of `id` unless the item carries an explicit candidate
/// list, which is returned as-is. Throws UnknownItemError.
CandidateSet default_candidates(const Corpus& corpus, const ItemId& id);

CorpusStats corpus_stats(const Corpus& corpus);

}  // namespace itemdeps
