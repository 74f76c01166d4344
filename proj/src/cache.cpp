#include "itemdeps/cache.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "itemdeps/hash.hpp"

namespace itemdeps {

std::string dependency_fingerprint(std::span<const ItemId> deps) {
  std::vector<std::string> ids;
  ids.reserve(deps.size());
  for (const auto& d : deps) ids.push_back(d.str());
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  std::string canonical;
  for (const auto& id : ids) {
    canonical += id;
    canonical += '\n';
  }
  return sha256_hex(canonical);
}

VerificationCache::VerificationCache(const std::filesystem::path& path) {
  if (std::filesystem::exists(path)) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read cache file '" + path.string() + "'");
    std::stringstream buffer;
    buffer << in.rdbuf();
    const std::string content = buffer.str();

    std::size_t start = 0;
    std::size_t line_no = 0;
    while (start < content.size()) {
      auto end = content.find('\n', start);
      if (end == std::string::npos) break;  // in-flight write from a crashed run
      ++line_no;
      std::string_view line(content.data() + start, end - start);
      start = end + 1;
      if (line.empty()) continue;

      auto t1 = line.find('\t');
      auto t2 = t1 == std::string_view::npos ? t1 : line.find('\t', t1 + 1);
      if (t2 == std::string_view::npos || line.size() != t2 + 2 ||
          (line.back() != 'V' && line.back() != 'N')) {
        throw std::runtime_error("cache file '" + path.string() + "' line " +
                                 std::to_string(line_no) + ": malformed record");
      }
      auto id = ItemId::try_parse(line.substr(0, t1));
      if (!id) {
        throw std::runtime_error("cache file '" + path.string() + "' line " +
                                 std::to_string(line_no) + ": malformed item id");
      }
      entries_[key(*id, std::string(line.substr(t1 + 1, t2 - t1 - 1)))] = line.back() == 'V';
    }
    // Drop a torn tail so that the next append starts on a fresh line.
    if (start < content.size()) std::filesystem::resize_file(path, start);
  }
  file_.emplace(path, std::ios::binary | std::ios::app);
  if (!*file_) throw std::runtime_error("cannot open cache file '" + path.string() + "'");
}

std::string VerificationCache::key(const ItemId& item, const std::string& fingerprint) {
  std::string k = item.str();
  k += '\t';
  k += fingerprint;
  return k;
}

std::optional<VerificationOutcome> VerificationCache::lookup(const ItemId& item,
                                                             const std::string& fingerprint) {
  std::shared_lock lock(mutex_);
  auto it = entries_.find(key(item, fingerprint));
  if (it == entries_.end()) {
    misses_.fetch_add(1, std::memory_order_relaxed);
    return std::nullopt;
  }
  hits_.fetch_add(1, std::memory_order_relaxed);
  return it->second ? VerificationOutcome::verifiable() : VerificationOutcome::not_verifiable();
}

void VerificationCache::insert(const ItemId& item, const std::string& fingerprint,
                               const VerificationOutcome& outcome) {
  if (outcome.is_error()) return;
  auto k = key(item, fingerprint);
  std::unique_lock lock(mutex_);
  auto [it, inserted] = entries_.insert_or_assign(k, outcome.is_verifiable());
  if (inserted && file_) {
    *file_ << k << '\t' << (outcome.is_verifiable() ? 'V' : 'N') << '\n';
    file_->flush();
  }
}

std::size_t VerificationCache::size() const {
  std::shared_lock lock(mutex_);
  return entries_.size();
}

VerificationOutcome cached_verify(VerificationCache& cache, const VerificationOracle& backend,
                                  const Item& item, std::span<const ItemId> deps) {
  if (!backend.descriptor().deterministic) {
    throw std::invalid_argument("refusing to cache nondeterministic oracle '" +
                                backend.descriptor().name + "'");
  }
  auto fingerprint = dependency_fingerprint(deps);
  if (auto hit = cache.lookup(item.id, fingerprint)) return *hit;
  auto outcome = backend.verify(item, deps);
  cache.insert(item.id, fingerprint, outcome);
  return outcome;
}

CachingOracle::CachingOracle(VerificationCache& cache, const VerificationOracle& backend)
    : cache_(cache), backend_(backend), descriptor_(backend.descriptor()) {
  if (!descriptor_.deterministic) {
    throw std::invalid_argument("refusing to cache nondeterministic oracle '" +
                                descriptor_.name + "'");
  }
  descriptor_.name = "cached(" + descriptor_.name + ")";
}

}  // namespace itemdeps
