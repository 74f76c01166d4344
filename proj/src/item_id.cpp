#include "itemdeps/item_id.hpp"

#include <array>
#include <charconv>
#include <stdexcept>

namespace itemdeps {

namespace {

constexpr std::array<std::string_view, kItemKindCount> kKindNames = {
    "definition", "theorem", "lemma", "scheme", "notation", "registration",
};

bool is_lower_alpha(char c) { return c >= 'a' && c <= 'z'; }
bool is_digit(char c) { return c >= '0' && c <= '9'; }

}  // namespace

std::string_view to_string(ItemKind kind) {
  return kKindNames[static_cast<std::size_t>(kind)];
}

std::optional<ItemKind> parse_item_kind(std::string_view text) {
  for (std::size_t i = 0; i < kKindNames.size(); ++i) {
    if (kKindNames[i] == text) return static_cast<ItemKind>(i);
  }
  return std::nullopt;
}

bool is_valid_article(std::string_view article) {
  if (article.empty() || !is_lower_alpha(article.front())) return false;
  for (char c : article) {
    if (!is_lower_alpha(c) && !is_digit(c) && c != '_') return false;
  }
  return true;
}

bool is_valid_symbol(std::string_view symbol) {
  if (symbol.empty()) return false;
  for (char c : symbol) {
    bool ok = is_lower_alpha(c) || (c >= 'A' && c <= 'Z') || is_digit(c) || c == '_' ||
              c == '.' || c == '-';
    if (!ok) return false;
  }
  return true;
}

std::string ItemId::str() const {
  std::string out;
  out.reserve(article.size() + 16);
  out += article;
  out += ':';
  out += to_string(kind);
  out += ':';
  out += std::to_string(ordinal);
  return out;
}

std::optional<ItemId> ItemId::try_parse(std::string_view text) {
  auto first = text.find(':');
  if (first == std::string_view::npos) return std::nullopt;
  auto second = text.find(':', first + 1);
  if (second == std::string_view::npos) return std::nullopt;

  auto article = text.substr(0, first);
  auto kind_text = text.substr(first + 1, second - first - 1);
  auto ordinal_text = text.substr(second + 1);
  if (!is_valid_article(article)) return std::nullopt;
  auto kind = parse_item_kind(kind_text);
  if (!kind) return std::nullopt;
  if (ordinal_text.empty() || ordinal_text.front() == '0') return std::nullopt;
  for (char c : ordinal_text) {
    if (!is_digit(c)) return std::nullopt;
  }
  std::uint32_t ordinal = 0;
  auto [ptr, ec] =
      std::from_chars(ordinal_text.data(), ordinal_text.data() + ordinal_text.size(), ordinal);
  if (ec != std::errc{} || ptr != ordinal_text.data() + ordinal_text.size()) return std::nullopt;

  return ItemId{std::string(article), *kind, ordinal};
}

ItemId ItemId::parse(std::string_view text) {
  auto id = try_parse(text);
  if (!id) throw std::invalid_argument("malformed item id '" + std::string(text) + "'");
  return *std::move(id);
}

}  // namespace itemdeps
