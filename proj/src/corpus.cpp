#include "itemdeps/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

namespace itemdeps {

using nlohmann::json;

CorpusParseError::CorpusParseError(std::size_t line, const std::string& message)
    : std::runtime_error("line " + std::to_string(line) + ": " + message), line_(line) {}

UnknownItemError::UnknownItemError(const ItemId& id)
    : std::out_of_range("unknown item '" + id.str() + "'") {}

namespace {

void sort_unique(std::vector<std::string>& v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
}

[[noreturn]] void reject(const Item& item, const std::string& what) {
  throw CorpusValidationError("item " + item.id.str() + ": " + what);
}

// Resolves `ids` against the already admitted prefix of the corpus and
// returns them in corpus order.
std::vector<ItemId> resolve_prefix_refs(
    const Item& item, const std::vector<ItemId>& ids,
    const std::unordered_map<ItemId, std::size_t, ItemIdHash>& index,
    const std::unordered_set<ItemId, ItemIdHash>& all_ids, const char* field) {
  std::vector<std::pair<std::size_t, ItemId>> resolved;
  resolved.reserve(ids.size());
  for (const auto& ref : ids) {
    if (ref == item.id) reject(item, std::string("self reference in ") + field);
    auto it = index.find(ref);
    if (it == index.end()) {
      if (all_ids.count(ref) != 0) {
        reject(item, std::string("forward reference to ") + ref.str() + " in " + field);
      }
      reject(item, std::string("unresolved reference to ") + ref.str() + " in " + field);
    }
    resolved.emplace_back(it->second, ref);
  }
  std::sort(resolved.begin(), resolved.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<ItemId> out;
  out.reserve(resolved.size());
  for (std::size_t i = 0; i < resolved.size(); ++i) {
    if (i > 0 && resolved[i].first == resolved[i - 1].first) {
      reject(item, std::string("duplicate entry ") + resolved[i].second.str() + " in " + field);
    }
    out.push_back(std::move(resolved[i].second));
  }
  return out;
}

std::vector<std::string> parse_symbols(const json& obj, const char* key, std::size_t line) {
  auto it = obj.find(key);
  if (it == obj.end()) throw CorpusParseError(line, std::string("missing field '") + key + "'");
  if (!it->is_array()) throw CorpusParseError(line, std::string("field '") + key + "' must be an array");
  std::vector<std::string> out;
  out.reserve(it->size());
  for (const auto& v : *it) {
    if (!v.is_string()) throw CorpusParseError(line, std::string("non-string symbol in '") + key + "'");
    auto s = v.get<std::string>();
    if (!is_valid_symbol(s)) throw CorpusParseError(line, "invalid symbol name '" + s + "'");
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<ItemId> parse_ids(const json& value, const char* key, std::size_t line) {
  if (!value.is_array()) throw CorpusParseError(line, std::string("field '") + key + "' must be an array");
  std::vector<ItemId> out;
  out.reserve(value.size());
  for (const auto& v : value) {
    if (!v.is_string()) throw CorpusParseError(line, std::string("non-string id in '") + key + "'");
    auto id = ItemId::try_parse(v.get<std::string>());
    if (!id) throw CorpusParseError(line, "malformed item id '" + v.get<std::string>() + "'");
    out.push_back(*std::move(id));
  }
  return out;
}

Item parse_item_line(const std::string& text, std::size_t line) {
  json obj;
  try {
    obj = json::parse(text);
  } catch (const json::parse_error& e) {
    throw CorpusParseError(line, std::string("invalid JSON: ") + e.what());
  }
  if (!obj.is_object()) throw CorpusParseError(line, "item line must be a JSON object");

  Item item;
  auto id_it = obj.find("id");
  if (id_it == obj.end() || !id_it->is_string()) {
    throw CorpusParseError(line, "missing or non-string field 'id'");
  }
  auto id = ItemId::try_parse(id_it->get<std::string>());
  if (!id) throw CorpusParseError(line, "malformed item id '" + id_it->get<std::string>() + "'");
  item.id = *std::move(id);

  item.defines = parse_symbols(obj, "defines", line);
  item.uses = parse_symbols(obj, "uses", line);
  auto refs_it = obj.find("refs");
  if (refs_it == obj.end()) throw CorpusParseError(line, "missing field 'refs'");
  item.explicit_refs = parse_ids(*refs_it, "refs", line);

  if (auto it = obj.find("body"); it != obj.end()) {
    if (!it->is_string()) throw CorpusParseError(line, "field 'body' must be a string");
    item.body = it->get<std::string>();
  }
  if (auto it = obj.find("candidates"); it != obj.end()) {
    item.candidates = parse_ids(*it, "candidates", line);
  }
  for (const auto& [key, _] : obj.items()) {
    if (key != "id" && key != "defines" && key != "uses" && key != "refs" && key != "body" &&
        key != "candidates") {
      throw CorpusParseError(line, "unknown field '" + key + "'");
    }
  }
  return item;
}

json ids_to_json(const std::vector<ItemId>& ids) {
  json arr = json::array();
  for (const auto& id : ids) arr.push_back(id.str());
  return arr;
}

}  // namespace

Corpus Corpus::from_items(std::vector<Item> items) {
  std::unordered_set<ItemId, ItemIdHash> all_ids;
  all_ids.reserve(items.size());
  for (const auto& item : items) {
    if (!all_ids.insert(item.id).second) {
      throw CorpusValidationError("item " + item.id.str() + ": duplicate id");
    }
  }

  Corpus corpus;
  corpus.items_.reserve(items.size());
  corpus.index_.reserve(items.size());
  for (auto& item : items) {
    for (const auto& s : item.defines) {
      if (!is_valid_symbol(s)) reject(item, "invalid symbol name '" + s + "'");
    }
    for (const auto& s : item.uses) {
      if (!is_valid_symbol(s)) reject(item, "invalid symbol name '" + s + "'");
    }
    sort_unique(item.defines);
    sort_unique(item.uses);
    std::vector<std::string> external_uses;
    std::set_difference(item.uses.begin(), item.uses.end(), item.defines.begin(),
                        item.defines.end(), std::back_inserter(external_uses));
    item.uses = std::move(external_uses);

    // Duplicate refs collapse; duplicate candidates are an error.
    std::sort(item.explicit_refs.begin(), item.explicit_refs.end());
    item.explicit_refs.erase(std::unique(item.explicit_refs.begin(), item.explicit_refs.end()),
                             item.explicit_refs.end());
    item.explicit_refs =
        resolve_prefix_refs(item, item.explicit_refs, corpus.index_, all_ids, "refs");
    if (item.candidates) {
      item.candidates =
          resolve_prefix_refs(item, *item.candidates, corpus.index_, all_ids, "candidates");
      for (const auto& ref : item.explicit_refs) {
        if (!std::binary_search(item.candidates->begin(), item.candidates->end(), ref,
                                [&](const ItemId& a, const ItemId& b) {
                                  return corpus.index_.at(a) < corpus.index_.at(b);
                                })) {
          reject(item, "explicit reference " + ref.str() + " missing from candidates");
        }
      }
    }

    item.position = corpus.items_.size();
    corpus.index_.emplace(item.id, item.position);
    corpus.items_.push_back(std::move(item));
  }
  return corpus;
}

const Item* Corpus::find(const ItemId& id) const {
  auto it = index_.find(id);
  return it == index_.end() ? nullptr : &items_[it->second];
}

std::optional<std::size_t> Corpus::position_of(const ItemId& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

const Item& Corpus::at(const ItemId& id) const {
  const Item* item = find(id);
  if (item == nullptr) throw UnknownItemError(id);
  return *item;
}

Corpus parse_corpus(std::istream& in) {
  std::vector<Item> items;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (!text.empty() && text.back() == '\r') text.pop_back();
    if (text.find_first_not_of(" \t") == std::string::npos) continue;
    if (text.front() == '#') continue;
    items.push_back(parse_item_line(text, line));
  }
  return Corpus::from_items(std::move(items));
}

Corpus parse_corpus_text(const std::string& text) {
  std::istringstream in(text);
  return parse_corpus(in);
}

Corpus load_corpus(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open corpus file '" + path.string() + "'");
  return parse_corpus(in);
}

void write_corpus(const Corpus& corpus, std::ostream& out) {
  for (const auto& item : corpus.items()) {
    nlohmann::ordered_json obj;
    obj["id"] = item.id.str();
    obj["defines"] = item.defines;
    obj["uses"] = item.uses;
    obj["refs"] = ids_to_json(item.explicit_refs);
    if (item.body) obj["body"] = *item.body;
    if (item.candidates) obj["candidates"] = ids_to_json(*item.candidates);
    out << obj.dump() << '\n';
  }
}

std::string corpus_to_text(const Corpus& corpus) {
  std::ostringstream out;
  write_corpus(corpus, out);
  return out.str();
}

CandidateSet default_candidates(const Corpus& corpus, const ItemId& id) {
  const Item& item = corpus.at(id);
  CandidateSet set{item.id, {}};
  if (item.candidates) {
    set.candidates = *item.candidates;
    return set;
  }
  set.candidates.reserve(item.position);
  for (std::size_t i = 0; i < item.position; ++i) set.candidates.push_back(corpus[i].id);
  return set;
}

CorpusStats corpus_stats(const Corpus& corpus) {
  CorpusStats stats;
  std::unordered_set<std::string> defined;
  std::unordered_set<std::string> used;
  for (const auto& item : corpus.items()) {
    ++stats.items;
    ++stats.per_kind[static_cast<std::size_t>(item.id.kind)];
    defined.insert(item.defines.begin(), item.defines.end());
    used.insert(item.uses.begin(), item.uses.end());
    stats.explicit_refs += item.explicit_refs.size();
  }
  stats.symbols = defined.size();
  stats.used_symbols = used.size();
  return stats;
}

}  // namespace itemdeps
