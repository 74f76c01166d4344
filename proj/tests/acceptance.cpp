// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include <json.hpp>

#include "brute_force.hpp"
#include "itemdeps/cache.hpp"
#include "itemdeps/depgraph.hpp"
#include "itemdeps/minimizer.hpp"
#include "itemdeps/oracle.hpp"
#include "itemdeps/service.hpp"
#include "synthetic.hpp"

namespace {

using namespace itemdeps;
using itemdeps::testing::Rng;
using Clock = std::chrono::steady_clock;

struct Verdict {
  bool pass = true;
  std::string detail;
};

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::uint32_t mask_of(const std::vector<ItemId>& candidates, const std::vector<ItemId>& subset) {
  std::uint32_t mask = 0;
  for (const auto& d : subset) {
    auto it = std::find(candidates.begin(), candidates.end(), d);
    if (it == candidates.end()) return ~0U;
    mask |= 1U << (it - candidates.begin());
  }
  return mask;
}

Verdict minimality_suite() {
  Rng rng(1001);
  testing::SyntheticParams params;
  params.items = 500;
  params.max_candidates = 30;
  auto corpus = testing::synthetic_corpus(rng, params);
  std::size_t max_cands = 0;
  for (const auto& item : corpus.items()) max_cands = std::max(max_cands, item.candidates->size());

  const auto start = Clock::now();
  BuiltinOracle oracle(corpus);
  auto results = minimize_corpus(corpus, oracle, {}, 1);
  std::size_t certified = 0, passed = 0;
  for (const auto& r : results.items) {
    if (!r.ok() || !r.result->certified) continue;
    ++certified;
    if (certify_minimal(corpus.at(r.item), r.result->deps, oracle).minimal) ++passed;
  }
  const double elapsed = seconds_since(start);
  std::ostringstream d;
  d << passed << "/" << certified << " certified sets pass certify_minimal; " << results.failed()
    << " failures; max candidates " << max_cands << "; " << elapsed << " s (limit 60 s)";
  return {certified == corpus.size() && passed == certified && max_cands <= 30 && elapsed < 60.0, d.str()};
}

Verdict exhaustive_equivalence() {
  Rng rng(1002);
  std::size_t member = 0, predicted = 0;
  const std::size_t trials = 200;
  for (std::size_t t = 0; t < trials; ++t) {
    auto corpus = testing::random_small_fixture(rng, 12);
    const auto& target = corpus.items().back();
    auto table = testing::enumerate_subsets(corpus, target.id);
    auto minimal = table.minimal_masks();
    BuiltinOracle oracle(corpus);
    auto result = minimize_linear(target, default_candidates(corpus, target.id), oracle);
    auto mask = mask_of(table.candidates, result.deps);
    if (std::find(minimal.begin(), minimal.end(), mask) != minimal.end()) ++member;
    if (mask == table.simulate_linear(RemovalOrder::descending_position)) ++predicted;
  }
  std::ostringstream d;
  d << member << "/" << trials << " in the minimal family; " << predicted << "/" << trials
    << " equal to the simulated removal";
  return {member == trials && predicted == trials, d.str()};
}

Verdict call_count_law() {
  Rng rng(1003);
  std::size_t instances = 0, lawful = 0;
  auto check = [&](const Corpus& corpus, const Item& item, RemovalOrder order) {
    BuiltinOracle builtin(corpus);
    CountingOracle counted(builtin);
    auto cands = default_candidates(corpus, item.id);
    auto r = minimize_linear(item, cands, counted, order);
    ++instances;
    if (counted.calls() == cands.candidates.size() + 1 && r.oracle_calls == counted.calls()) ++lawful;
  };
  for (int t = 0; t < 300; ++t) {
    auto corpus = testing::random_small_fixture(rng, 30);
    check(corpus, corpus.items().back(), t % 2 ? RemovalOrder::ascending_position : RemovalOrder::descending_position);
  }
  testing::SyntheticParams params;
  params.items = 300;
  auto synthetic = testing::synthetic_corpus(rng, params);
  for (const auto& item : synthetic.items()) check(synthetic, item, RemovalOrder::descending_position);

  // 64 candidates, exactly one needed.
  std::vector<Item> items;
  for (int i = 0; i < 64; ++i) {
    Item it;
    it.id = testing::make_id("lib", ItemKind::definition, static_cast<std::uint32_t>(i + 1));
    it.defines = {i == 41 ? "needed" : "other" + std::to_string(i)};
    items.push_back(it);
  }
  Item goal;
  goal.id = testing::make_id("goal", ItemKind::theorem, 1);
  goal.uses = {"needed"};
  items.push_back(goal);
  auto corpus = Corpus::from_items(std::move(items));
  BuiltinOracle builtin(corpus);
  CountingOracle counted(builtin);
  const auto& target = corpus.items().back();
  auto dd = minimize_ddmin(target, default_candidates(corpus, target.id), counted);
  const auto dd_calls = counted.calls();
  const bool dd_ok = dd_calls < 65 && dd.deps.size() == 1 && dd.deps[0].ordinal == 42;

  std::ostringstream d;
  d << lawful << "/" << instances << " linear runs used |candidates|+1 calls; ddmin on 64/1 used " << dd_calls
    << " calls (< 65 required)";
  return {lawful == instances && dd_ok, d.str()};
}

Verdict determinism() {
  Rng rng(1004);
  testing::SyntheticParams params;
  params.items = 1000;
  auto corpus = testing::synthetic_corpus(rng, params);
  BuiltinOracle oracle(corpus);
  bool identical = true;
  for (auto kind : {StrategyKind::linear, StrategyKind::ddmin}) {
    auto one = results_to_text(minimize_corpus(corpus, oracle, {kind}, 1));
    auto eight = results_to_text(minimize_corpus(corpus, oracle, {kind}, 8));
    identical = identical && one == eight && !one.empty();
  }
  return {identical, identical ? "results files byte-identical at 1 and 8 jobs (linear, ddmin)"
                               : "results files differ between 1 and 8 jobs"};
}

Verdict cache_idempotence() {
  namespace fs = std::filesystem;
  auto path = fs::temp_directory_path() / ("itemdeps_acceptance_cache_" + std::to_string(::getpid()));
  fs::remove(path);
  Rng rng(1005);
  testing::SyntheticParams params;
  params.items = 400;
  auto corpus = testing::synthetic_corpus(rng, params);
  BuiltinOracle builtin(corpus);

  std::string first_text, second_text;
  std::size_t first_calls = 0, second_calls = 0;
  {
    VerificationCache cache(path);
    CountingOracle counted(builtin);
    CachingOracle cached(cache, counted);
    first_text = results_to_text(minimize_corpus(corpus, cached, {}, 4));
    first_calls = counted.calls();
  }
  {
    VerificationCache cache(path);
    CountingOracle counted(builtin);
    CachingOracle cached(cache, counted);
    second_text = results_to_text(minimize_corpus(corpus, cached, {}, 4));
    second_calls = counted.calls();
  }
  fs::remove(path);
  std::ostringstream d;
  d << "first run " << first_calls << " backend calls, second run " << second_calls
    << (first_text == second_text ? "; results identical" : "; results differ");
  return {first_calls > 0 && second_calls == 0 && first_text == second_text, d.str()};
}

Verdict query_suite() {
  Rng rng(1006);
  std::size_t checks = 0, agree = 0;
  auto expect = [&](bool ok) {
    ++checks;
    if (ok) ++agree;
  };
  for (int t = 0; t < 500; ++t) {
    const std::size_t n = 1 + rng() % 10;
    auto g = testing::random_dag(rng, n, 0.1 + 0.6 * static_cast<double>(rng() % 100) / 100.0);
    testing::PathOracle oracle(g);
    for (std::size_t a = 0; a < n; ++a) {
      const auto& ida = g.node(a).id;
      std::vector<ItemId> anc, desc;
      for (std::size_t b = 0; b < n; ++b) {
        if (b == a) continue;
        if (!oracle.simple_paths(a, b).empty()) desc.push_back(g.node(b).id);
        if (!oracle.simple_paths(b, a).empty()) anc.push_back(g.node(b).id);
      }
      expect(ancestors(g, ida) == anc);
      expect(descendants(g, ida) == desc);
      for (std::size_t b = 0; b < n; ++b) {
        const auto& idb = g.node(b).id;
        expect(reachable(g, ida, idb) == oracle.reachable(a, b));
        for (std::size_t z = 0; z < n; ++z) {
          expect(all_paths_through(g, ida, idb, g.node(z).id) == oracle.all_through(a, b, z));
        }
        std::vector<std::size_t> blocked;
        std::vector<ItemId> blocked_ids;
        for (std::size_t z = 0; z < n; ++z) {
          if (z != a && z != b && rng() % 3 == 0) {
            blocked.push_back(z);
            blocked_ids.push_back(g.node(z).id);
          }
        }
        auto answer = exists_path_avoiding(g, ida, idb, blocked_ids);
        auto best = oracle.best_avoiding(a, b, blocked);
        std::vector<ItemId> witness;
        if (best) {
          for (auto i : *best) witness.push_back(g.node(i).id);
        }
        expect(answer.found == oracle.exists_avoiding(a, b, blocked) && answer.witness == witness);
      }
    }
  }
  std::ostringstream d;
  d << agree << "/" << checks << " answers agree with simple-path enumeration over 500 DAGs";
  return {agree == checks, d.str()};
}

Verdict reduction_suite() {
  Rng rng(1007);
  std::size_t ok = 0;
  const std::size_t trials = 200;
  for (std::size_t t = 0; t < trials; ++t) {
    const std::size_t n = 1 + rng() % 10;
    auto g = testing::random_dag(rng, n, 0.5);
    auto reduced = transitive_reduction(g, 4);
    auto closure = testing::closure_by_squaring(g);
    bool good = testing::closure_by_squaring(reduced) == closure && reduced == transitive_reduction_serial(g);
    for (const auto& e : reduced.edges()) {
      std::vector<Edge> fewer;
      for (const auto& f : reduced.edges()) {
        if (f != e) fewer.push_back(f);
      }
      auto without = DependencyGraph::from_edges(reduced.nodes(), fewer);
      if (testing::closure_by_squaring(without) == closure) good = false;
    }
    if (good) ++ok;
  }
  std::ostringstream d;
  d << ok << "/" << trials << " reductions preserve reachability and are edge-minimal";
  return {ok == trials, d.str()};
}

double median_ms(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v.empty() ? 0.0 : v[v.size() / 2];
}

Verdict scale_smoke() {
  Rng rng(1008);
  testing::SyntheticParams params;
  params.items = 10'000;
  auto corpus = testing::synthetic_corpus(rng, params);
  BuiltinOracle oracle(corpus);
  const auto start = Clock::now();
  auto results = minimize_corpus(corpus, oracle, {}, std::max(1L, sysconf(_SC_NPROCESSORS_ONLN)));
  const double minimize_s = seconds_since(start);
  auto build = build_graph(results, corpus);
  const auto& g = build.graph;

  std::vector<double> reach_ms, avoid_ms, via_ms;
  for (int q = 0; q < 201; ++q) {
    const auto& a = g.node(g.node_count() - 1 - rng() % (g.node_count() / 2)).id;
    const auto& b = g.node(rng() % (g.node_count() / 2)).id;
    const auto& z = g.node(rng() % g.node_count()).id;
    auto t0 = Clock::now();
    (void)reachable(g, a, b);
    reach_ms.push_back(seconds_since(t0) * 1000);
    std::vector<ItemId> blocked;
    if (z != a && z != b) blocked.push_back(z);
    t0 = Clock::now();
    (void)exists_path_avoiding(g, a, b, blocked);
    avoid_ms.push_back(seconds_since(t0) * 1000);
    t0 = Clock::now();
    (void)all_paths_through(g, a, b, z);
    via_ms.push_back(seconds_since(t0) * 1000);
  }
  const double worst_median = std::max({median_ms(reach_ms), median_ms(avoid_ms), median_ms(via_ms)});
  std::ostringstream d;
  d << corpus.size() << " items, " << g.edge_count() << " edges, " << results.failed() << " failures; minimize "
    << minimize_s << " s (limit 300 s); median query ms reach " << median_ms(reach_ms) << ", avoiding "
    << median_ms(avoid_ms) << ", via " << median_ms(via_ms) << " (limit 50 ms)";
  const bool edges_ok = g.edge_count() >= 80'000 && g.edge_count() <= 120'000;
  return {results.failed() == 0 && edges_ok && minimize_s < 300.0 && worst_median < 50.0, d.str()};
}

Verdict round_trips() {
  Rng rng(1009);
  std::size_t corpus_ok = 0, tsv_ok = 0;
  const std::size_t trials = 50;
  namespace fs = std::filesystem;
  auto path = fs::temp_directory_path() / ("itemdeps_acceptance_corpus_" + std::to_string(::getpid()) + ".jsonl");
  for (std::size_t t = 0; t < trials; ++t) {
    testing::SyntheticParams params;
    params.items = 50 + rng() % 200;
    params.explicit_candidates = t % 2 == 0;
    auto corpus = testing::synthetic_corpus(rng, params);
    auto text = corpus_to_text(corpus);
    {
      std::ofstream out(path, std::ios::binary);
      out << text;
    }
    auto loaded = load_corpus(path);
    if (loaded == corpus && corpus_to_text(loaded) == text) ++corpus_ok;

    auto g = testing::random_dag(rng, 2 + rng() % 80, 0.08);
    auto tsv = export_graph(g, ExportFormat::edge_tsv);
    if (export_graph(import_edge_tsv(tsv), ExportFormat::edge_tsv) == tsv) ++tsv_ok;
  }
  fs::remove(path);
  std::ostringstream d;
  d << "corpus " << corpus_ok << "/" << trials << ", edge-tsv " << tsv_ok << "/" << trials << " bit-exact";
  return {corpus_ok == trials && tsv_ok == trials, d.str()};
}

Verdict service_contract() {
  using nlohmann::json;
  Rng rng(1010);
  std::size_t queries = 0, agree = 0, status_ok = 0, status_checks = 0, server_errors = 0;
  auto record = [&](const ServiceResponse& r) {
    if (r.status >= 500) ++server_errors;
    return r;
  };
  auto ids_json = [](const std::vector<ItemId>& ids) {
    json out = json::array();
    for (const auto& i : ids) out.push_back(i.str());
    return out;
  };
  while (queries < 100) {
    auto g = testing::random_dag(rng, 3 + rng() % 8, 0.35);
    GraphService svc(GraphDocument{g, std::nullopt}, "fixture");
    const auto& a = g.node(rng() % g.node_count()).id;
    const auto& b = g.node(rng() % g.node_count()).id;
    const auto& z = g.node(rng() % g.node_count()).id;
    switch (queries % 3) {
      case 0: {
        auto r = record(svc.handle("/query/path", {{"from", a.str()}, {"to", b.str()}}));
        auto lib = exists_path_avoiding(g, a, b, {});
        json expected{{"answer", lib.found}};
        if (lib.found) expected["witness"] = ids_json(lib.witness);
        if (r.status == 200 && json::parse(r.body) == expected && lib.found == reachable(g, a, b)) ++agree;
        break;
      }
      case 1: {
        auto r = record(svc.handle("/query/via", {{"from", a.str()}, {"to", b.str()}, {"via", z.str()}}));
        json expected{{"answer", all_paths_through(g, a, b, z)}};
        if (r.status == 200 && json::parse(r.body) == expected) ++agree;
        break;
      }
      default: {
        std::vector<ItemId> blocked;
        std::string avoid;
        for (const auto& node : g.nodes()) {
          if (node.id != a && node.id != b && rng() % 3 == 0) {
            blocked.push_back(node.id);
            avoid += (avoid.empty() ? "" : ",") + node.id.str();
          }
        }
        auto r = record(svc.handle("/query/avoiding", {{"from", a.str()}, {"to", b.str()}, {"avoid", avoid}}));
        auto lib = exists_path_avoiding(g, a, b, blocked);
        json expected{{"answer", lib.found}};
        if (lib.found) expected["witness"] = ids_json(lib.witness);
        if (r.status == 200 && json::parse(r.body) == expected) ++agree;
        break;
      }
    }
    ++queries;

    const std::string ghost = "ghost:lemma:" + std::to_string(1 + rng() % 1000);
    auto expect_status = [&](int want, const std::string& path, const QueryParams& params) {
      ++status_checks;
      if (record(svc.handle(path, params)).status == want) ++status_ok;
    };
    expect_status(404, "/items/" + ghost, {});
    expect_status(404, "/query/path", {{"from", ghost}, {"to", b.str()}});
    expect_status(404, "/query/via", {{"from", a.str()}, {"to", b.str()}, {"via", ghost}});
    expect_status(404, "/query/avoiding", {{"from", a.str()}, {"to", b.str()}, {"avoid", ghost}});
    expect_status(400, "/query/avoiding", {{"from", a.str()}, {"to", b.str()}, {"avoid", a.str()}});
    expect_status(400, "/query/avoiding", {{"from", a.str()}, {"to", b.str()}, {"avoid", b.str()}});
    expect_status(400, "/query/path", {{"from", "not-an-id"}, {"to", b.str()}});
    record(svc.handle("/items", {{"page", std::to_string(rng() % 5)}, {"per_page", std::to_string(rng() % 2000)}}));
    record(svc.handle("/items/" + a.str(), {}));
    record(svc.handle("/stats", {}));
    record(svc.handle("/entry-points", {}));
  }
  std::ostringstream d;
  d << agree << "/" << queries << " answers equal library calls; " << status_ok << "/" << status_checks
    << " error statuses as specified; " << server_errors << " 5xx responses";
  return {agree == queries && status_ok == status_checks && server_errors == 0, d.str()};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
      {"minimality", minimality_suite},
      {"exhaustive-oracle-equivalence", exhaustive_equivalence},
      {"call-count-law", call_count_law},
      {"determinism", determinism},
      {"cache-idempotence", cache_idempotence},
      {"query-suite", query_suite},
      {"transitive-reduction", reduction_suite},
      {"scale-smoke", scale_smoke},
      {"round-trips", round_trips},
      {"service-contract", service_contract},
  };
  int failures = 0;
  for (const auto& [name, check] : criteria) {
    Verdict v;
    const auto start = Clock::now();
    try {
      v = check();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    if (!v.pass) ++failures;
    std::printf("%s %s: %s [%.2f s]\n", v.pass ? "PASS" : "FAIL", name.c_str(), v.detail.c_str(),
                seconds_since(start));
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria failed\n", failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
