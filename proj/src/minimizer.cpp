#include "itemdeps/minimizer.hpp"

#include <omp.h>

#include <algorithm>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

namespace itemdeps {

std::string Strategy::name() const {
  std::string out = kind == StrategyKind::linear ? "linear" : "ddmin";
  out += order == RemovalOrder::descending_position ? "-desc" : "-asc";
  return out;
}

std::optional<Strategy> Strategy::parse(std::string_view name) {
  auto dash = name.rfind('-');
  if (dash == std::string_view::npos) return std::nullopt;
  Strategy s;
  auto kind = name.substr(0, dash);
  auto order = name.substr(dash + 1);
  if (kind == "linear") {
    s.kind = StrategyKind::linear;
  } else if (kind == "ddmin") {
    s.kind = StrategyKind::ddmin;
  } else {
    return std::nullopt;
  }
  if (order == "desc") {
    s.order = RemovalOrder::descending_position;
  } else if (order == "asc") {
    s.order = RemovalOrder::ascending_position;
  } else {
    return std::nullopt;
  }
  return s;
}

namespace {

/// Tracks the working subset of a candidate list and counts oracle calls.
class Probe {
 public:
  Probe(const Item& item, const std::vector<ItemId>& candidates, const VerificationOracle& oracle)
      : item_(item), candidates_(candidates), oracle_(oracle) {}

  /// `members` are indices into the candidate list, in any order.
  bool verifies(std::span<const std::size_t> members) {
    scratch_.clear();
    scratch_.reserve(members.size());
    for (auto i : members) scratch_.push_back(candidates_[i]);
    ++calls_;
    auto outcome = oracle_.verify(item_, scratch_);
    if (outcome.is_error()) {
      throw OracleFailureError("item " + item_.id.str() + ": oracle error: " + outcome.message());
    }
    return outcome.is_verifiable();
  }

  void require_sufficient(std::span<const std::size_t> all) {
    if (!verifies(all)) {
      throw InsufficientCandidatesError("item " + item_.id.str() +
                                        ": candidate set is not sufficient");
    }
  }

  std::size_t calls() const noexcept { return calls_; }

 private:
  const Item& item_;
  const std::vector<ItemId>& candidates_;
  const VerificationOracle& oracle_;
  std::vector<ItemId> scratch_;
  std::size_t calls_ = 0;
};

std::vector<std::size_t> visit_order(std::size_t n, RemovalOrder order) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  if (order == RemovalOrder::descending_position) std::reverse(idx.begin(), idx.end());
  return idx;
}

std::vector<ItemId> deps_in_corpus_order(const std::vector<ItemId>& candidates,
                                         std::vector<std::size_t> members) {
  std::sort(members.begin(), members.end());
  std::vector<ItemId> out;
  out.reserve(members.size());
  for (auto i : members) out.push_back(candidates[i]);
  return out;
}

std::vector<std::size_t> without(const std::vector<std::size_t>& set, std::size_t lo,
                                 std::size_t hi) {
  std::vector<std::size_t> out;
  out.reserve(set.size() - (hi - lo));
  out.insert(out.end(), set.begin(), set.begin() + static_cast<std::ptrdiff_t>(lo));
  out.insert(out.end(), set.begin() + static_cast<std::ptrdiff_t>(hi), set.end());
  return out;
}

void check_candidates_belong(const Item& item, const CandidateSet& candidates) {
  if (candidates.item != item.id) {
    throw std::invalid_argument("candidate set for " + candidates.item.str() +
                                " used with item " + item.id.str());
  }
}

}  // namespace

MinimalDepSet minimize_linear(const Item& item, const CandidateSet& candidates,
                              const VerificationOracle& oracle, RemovalOrder order) {
  check_candidates_belong(item, candidates);
  const auto& cands = candidates.candidates;
  Probe probe(item, cands, oracle);

  auto current = visit_order(cands.size(), RemovalOrder::ascending_position);
  probe.require_sufficient(current);

  std::vector<bool> kept(cands.size(), true);
  std::vector<std::size_t> trial;
  for (auto victim : visit_order(cands.size(), order)) {
    trial.clear();
    for (std::size_t i = 0; i < cands.size(); ++i) {
      if (kept[i] && i != victim) trial.push_back(i);
    }
    if (probe.verifies(trial)) kept[victim] = false;
  }

  std::vector<std::size_t> members;
  for (std::size_t i = 0; i < cands.size(); ++i) {
    if (kept[i]) members.push_back(i);
  }
  Strategy strategy{StrategyKind::linear, order};
  return MinimalDepSet{item.id, deps_in_corpus_order(cands, std::move(members)), strategy.name(),
                       probe.calls(), oracle.descriptor().monotone};
}

MinimalDepSet minimize_ddmin(const Item& item, const CandidateSet& candidates,
                             const VerificationOracle& oracle, RemovalOrder order) {
  check_candidates_belong(item, candidates);
  if (!oracle.descriptor().monotone) {
    throw std::invalid_argument("ddmin requires a monotone oracle; '" +
                                oracle.descriptor().name + "' is not declared monotone");
  }
  const auto& cands = candidates.candidates;
  Probe probe(item, cands, oracle);

  // Working set, listed in removal order so blocks are contiguous runs of it.
  auto current = visit_order(cands.size(), order);
  probe.require_sufficient(current);

  std::size_t granularity = 2;
  while (!current.empty()) {
    const std::size_t n = std::min(granularity, current.size());
    const std::size_t base = current.size() / n;
    const std::size_t extra = current.size() % n;
    bool reduced = false;
    std::size_t lo = 0;
    for (std::size_t block = 0; block < n; ++block) {
      const std::size_t hi = lo + base + (block < extra ? 1 : 0);
      auto complement = without(current, lo, hi);
      if (probe.verifies(complement)) {
        current = std::move(complement);
        granularity = std::max<std::size_t>(n - 1, 2);
        reduced = true;
        break;
      }
      lo = hi;
    }
    if (reduced) continue;
    if (n >= current.size()) break;
    granularity = std::min(current.size(), 2 * n);
  }

  // The loop only stops once every single-element complement of `current`
  // has been rejected (or nothing is left), so the result is 1-minimal for
  // any oracle that answers the same question the same way.
  const bool certified = oracle.descriptor().deterministic;

  Strategy strategy{StrategyKind::ddmin, order};
  return MinimalDepSet{item.id, deps_in_corpus_order(cands, std::move(current)), strategy.name(),
                       probe.calls(), certified};
}

MinimalDepSet minimize(const Item& item, const CandidateSet& candidates,
                       const VerificationOracle& oracle, const Strategy& strategy) {
  switch (strategy.kind) {
    case StrategyKind::linear:
      return minimize_linear(item, candidates, oracle, strategy.order);
    case StrategyKind::ddmin:
      return minimize_ddmin(item, candidates, oracle, strategy.order);
  }
  throw std::invalid_argument("unknown strategy");
}

CertificationResult certify_minimal(const Item& item, std::span<const ItemId> deps,
                                    const VerificationOracle& oracle) {
  CertificationResult result;
  auto ask = [&](std::span<const ItemId> set) {
    ++result.oracle_calls;
    auto outcome = oracle.verify(item, set);
    if (outcome.is_error()) {
      throw OracleFailureError("item " + item.id.str() + ": oracle error: " + outcome.message());
    }
    return outcome.is_verifiable();
  };

  bool minimal = ask(deps);
  std::vector<ItemId> trial;
  for (std::size_t i = 0; i < deps.size(); ++i) {
    trial.assign(deps.begin(), deps.end());
    trial.erase(trial.begin() + static_cast<std::ptrdiff_t>(i));
    if (ask(trial)) minimal = false;
  }
  result.minimal = minimal;
  return result;
}

std::size_t CorpusResults::succeeded() const {
  return static_cast<std::size_t>(
      std::count_if(items.begin(), items.end(), [](const ItemResult& r) { return r.ok(); }));
}

std::size_t CorpusResults::failed() const { return items.size() - succeeded(); }

std::size_t CorpusResults::oracle_calls() const {
  std::size_t total = 0;
  for (const auto& r : items) {
    if (r.result) total += r.result->oracle_calls;
  }
  return total;
}

const ItemResult* CorpusResults::find(const ItemId& id) const {
  for (const auto& r : items) {
    if (r.item == id) return &r;
  }
  return nullptr;
}

namespace {

void validate_run(const VerificationOracle& oracle, const Strategy& strategy) {
  if (strategy.kind == StrategyKind::ddmin && !oracle.descriptor().monotone) {
    throw std::invalid_argument("ddmin requires a monotone oracle; '" +
                                oracle.descriptor().name + "' is not declared monotone");
  }
}

ItemResult minimize_item(const Corpus& corpus, const VerificationOracle& oracle,
                         const Strategy& strategy, std::size_t position) {
  const Item& item = corpus[position];
  ItemResult out{item.id, std::nullopt, {}};
  try {
    out.result = minimize(item, default_candidates(corpus, item.id), oracle, strategy);
  } catch (const std::exception& e) {
    out.error = e.what();
    if (out.error.empty()) out.error = "unknown error";
  }
  return out;
}

}  // namespace

CorpusResults minimize_corpus(const Corpus& corpus, const VerificationOracle& oracle,
                              const Strategy& strategy, std::size_t jobs) {
  if (jobs == 0) throw std::invalid_argument("parallelism must be at least 1");
  validate_run(oracle, strategy);

  CorpusResults results;
  results.items.resize(corpus.size());
  const auto n = static_cast<std::ptrdiff_t>(corpus.size());
  // minimize_item never throws; each slot is written by exactly one thread.
#pragma omp parallel for schedule(dynamic, 1) num_threads(static_cast<int>(jobs))
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    results.items[static_cast<std::size_t>(i)] =
        minimize_item(corpus, oracle, strategy, static_cast<std::size_t>(i));
  }
  return results;
}

CorpusResults minimize_corpus_serial(const Corpus& corpus, const VerificationOracle& oracle,
                                     const Strategy& strategy) {
  validate_run(oracle, strategy);
  CorpusResults results;
  results.items.reserve(corpus.size());
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    results.items.push_back(minimize_item(corpus, oracle, strategy, i));
  }
  return results;
}

namespace {

constexpr std::string_view kUncertifiedSuffix = "+uncertified";

std::string single_line(std::string text) {
  for (char& c : text) {
    if (c == '\t' || c == '\n' || c == '\r') c = ' ';
  }
  return text;
}

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    auto pos = text.find(sep, start);
    parts.push_back(text.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

}  // namespace

void write_results(const CorpusResults& results, std::ostream& out) {
  for (const auto& r : results.items) {
    out << r.item.str() << '\t';
    if (!r.result) {
      out << "!\t" << single_line(r.error) << '\n';
      continue;
    }
    const auto& m = *r.result;
    for (std::size_t i = 0; i < m.deps.size(); ++i) {
      if (i > 0) out << ',';
      out << m.deps[i].str();
    }
    out << '\t' << m.strategy;
    if (!m.certified) out << kUncertifiedSuffix;
    out << '\t' << m.oracle_calls << '\n';
  }
}

std::string results_to_text(const CorpusResults& results) {
  std::ostringstream out;
  write_results(results, out);
  return out.str();
}

CorpusResults parse_results(std::istream& in) {
  CorpusResults results;
  std::string line;
  std::size_t line_no = 0;
  auto fail = [&](const std::string& what) {
    throw std::runtime_error("results line " + std::to_string(line_no) + ": " + what);
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto fields = split(line, '\t');
    if (fields.size() < 3) fail("expected at least 3 tab-separated fields");
    auto id = ItemId::try_parse(fields[0]);
    if (!id) fail("malformed item id '" + std::string(fields[0]) + "'");

    ItemResult r{*id, std::nullopt, {}};
    if (fields[1] == "!") {
      if (fields.size() != 3) fail("failure record must have 3 fields");
      r.error = std::string(fields[2]);
      results.items.push_back(std::move(r));
      continue;
    }
    if (fields.size() != 4) fail("expected 4 tab-separated fields");
    MinimalDepSet m{*id, {}, std::string(fields[2]), 0, true};
    if (!fields[1].empty()) {
      for (auto dep : split(fields[1], ',')) {
        auto dep_id = ItemId::try_parse(dep);
        if (!dep_id) fail("malformed dependency id '" + std::string(dep) + "'");
        m.deps.push_back(*std::move(dep_id));
      }
    }
    if (m.strategy.ends_with(kUncertifiedSuffix)) {
      m.strategy.resize(m.strategy.size() - kUncertifiedSuffix.size());
      m.certified = false;
    }
    try {
      std::size_t used = 0;
      m.oracle_calls = std::stoull(std::string(fields[3]), &used);
      if (used != fields[3].size()) fail("malformed oracle call count");
    } catch (const std::logic_error&) {
      fail("malformed oracle call count");
    }
    r.result = std::move(m);
    results.items.push_back(std::move(r));
  }
  return results;
}

CorpusResults load_results(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open results file '" + path + "'");
  return parse_results(in);
}

}  // namespace itemdeps
