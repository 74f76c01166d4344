#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>

namespace itemdeps {

enum class ItemKind : std::uint8_t {
  definition,
  theorem,
  lemma,
  scheme,
  notation,
  registration,
};

inline constexpr std::size_t kItemKindCount = 6;

std::string_view to_string(ItemKind kind);
std::optional<ItemKind> parse_item_kind(std::string_view text);

/// Identifies one item of a corpus. Canonical text form is
/// `article:kind:ordinal`, e.g. `xboole_0:theorem:3`.
struct ItemId {
  std::string article;
  ItemKind kind = ItemKind::definition;
  std::uint32_t ordinal = 1;

  std::string str() const;

  /// Throws std::invalid_argument on malformed text.
  static ItemId parse(std::string_view text);
  static std::optional<ItemId> try_parse(std::string_view text);

  friend bool operator==(const ItemId&, const ItemId&) = default;
  friend auto operator<=>(const ItemId&, const ItemId&) = default;
};

bool is_valid_article(std::string_view article);
bool is_valid_symbol(std::string_view symbol);

struct ItemIdHash {
  std::size_t operator()(const ItemId& id) const noexcept {
    std::size_t h = std::hash<std::string>{}(id.article);
    h ^= (static_cast<std::size_t>(id.ordinal) << 3 | static_cast<std::size_t>(id.kind)) +
         0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    return h;
  }
};

}  // namespace itemdeps
