#include "itemdeps/depgraph.hpp"

#include <omp.h>

#include <algorithm>
#include <cstdint>
#include <deque>
#include <limits>

namespace itemdeps {

UnknownNodeError::UnknownNodeError(const ItemId& id)
    : std::out_of_range("unknown item '" + id.str() + "'") {}

BlockedEndpointError::BlockedEndpointError(const ItemId& id)
    : std::invalid_argument("endpoint '" + id.str() + "' is in the blocked set") {}

using NodeIndex = DependencyGraph::NodeIndex;

DependencyGraph DependencyGraph::from_edges(std::vector<GraphNode> nodes,
                                            const std::vector<Edge>& edges) {
  std::sort(nodes.begin(), nodes.end(),
            [](const GraphNode& a, const GraphNode& b) { return a.position < b.position; });
  DependencyGraph g;
  g.index_.reserve(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (i > 0 && nodes[i].position == nodes[i - 1].position) {
      throw GraphError("nodes " + nodes[i - 1].id.str() + " and " + nodes[i].id.str() +
                       " share position " + std::to_string(nodes[i].position));
    }
    if (!g.index_.emplace(nodes[i].id, i).second) {
      throw GraphError("duplicate node " + nodes[i].id.str());
    }
  }
  g.nodes_ = std::move(nodes);
  g.out_.assign(g.nodes_.size(), {});
  g.in_.assign(g.nodes_.size(), {});

  for (const auto& [from, to] : edges) {
    auto f = g.index_of(from);
    if (!f) throw GraphError("dangling edge source " + from.str());
    auto t = g.index_of(to);
    if (!t) throw GraphError("dangling dependency " + to.str() + " of " + from.str());
    if (*f == *t) throw GraphError("self-loop on " + from.str());
    // Every edge must point backwards in the global order; this rules out cycles.
    if (*t > *f) {
      throw GraphError("edge " + from.str() + " -> " + to.str() + " points forward in corpus order");
    }
    g.out_[*f].push_back(*t);
  }
  for (NodeIndex i = 0; i < g.out_.size(); ++i) {
    auto& succ = g.out_[i];
    std::sort(succ.begin(), succ.end());
    if (std::adjacent_find(succ.begin(), succ.end()) != succ.end()) {
      throw GraphError("duplicate edge from " + g.nodes_[i].id.str());
    }
    g.edge_count_ += succ.size();
    for (auto t : succ) g.in_[t].push_back(i);  // i ascending keeps in_ sorted
  }
  return g;
}

std::optional<NodeIndex> DependencyGraph::index_of(const ItemId& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

NodeIndex DependencyGraph::require(const ItemId& id) const {
  auto i = index_of(id);
  if (!i) throw UnknownNodeError(id);
  return *i;
}

bool DependencyGraph::has_edge(NodeIndex from, NodeIndex to) const {
  return std::binary_search(out_[from].begin(), out_[from].end(), to);
}

std::vector<Edge> DependencyGraph::edges() const {
  std::vector<Edge> out;
  out.reserve(edge_count_);
  for (NodeIndex i = 0; i < out_.size(); ++i) {
    for (auto t : out_[i]) out.emplace_back(nodes_[i].id, nodes_[t].id);
  }
  return out;
}

GraphBuild build_graph(const CorpusResults& results, const Corpus& corpus) {
  GraphBuild build;
  std::vector<GraphNode> nodes;
  nodes.reserve(corpus.size());
  for (const auto& item : corpus.items()) nodes.push_back({item.id, item.position});

  std::vector<Edge> edges;
  for (const auto& r : results.items) {
    if (!corpus.contains(r.item)) throw GraphError("result for unknown item " + r.item.str());
    if (!r.ok()) {
      build.warnings.push_back("item " + r.item.str() + " excluded: " + r.error);
      continue;
    }
    for (const auto& d : r.result->deps) {
      if (!corpus.contains(d)) {
        throw GraphError("dangling dependency " + d.str() + " of " + r.item.str());
      }
      edges.emplace_back(r.item, d);
    }
  }
  build.graph = DependencyGraph::from_edges(std::move(nodes), edges);
  return build;
}

namespace {

std::vector<ItemId> ids_of(const DependencyGraph& g, std::span<const NodeIndex> idx) {
  std::vector<ItemId> out;
  out.reserve(idx.size());
  for (auto i : idx) out.push_back(g.node(i).id);
  return out;
}

// Marks every node reachable from `start` (excluding `start`) along
// `next`, skipping blocked nodes.
template <typename Next>
std::vector<char> sweep(const DependencyGraph& g, NodeIndex start, Next next,
                        const std::vector<char>* blocked = nullptr) {
  std::vector<char> seen(g.node_count(), 0);
  std::vector<NodeIndex> stack{start};
  while (!stack.empty()) {
    auto u = stack.back();
    stack.pop_back();
    for (auto v : next(u)) {
      if (seen[v] || (blocked && (*blocked)[v])) continue;
      seen[v] = 1;
      stack.push_back(v);
    }
  }
  return seen;
}

std::vector<NodeIndex> marked(const std::vector<char>& seen, NodeIndex exclude) {
  std::vector<NodeIndex> out;
  for (NodeIndex i = 0; i < seen.size(); ++i) {
    if (seen[i] && i != exclude) out.push_back(i);
  }
  return out;
}

}  // namespace

bool reachable(const DependencyGraph& g, const ItemId& from, const ItemId& to) {
  const auto a = g.require(from);
  const auto b = g.require(to);
  if (a == b) return true;
  if (b > a) return false;
  std::vector<char> seen(g.node_count(), 0);
  std::vector<NodeIndex> stack{a};
  seen[a] = 1;
  while (!stack.empty()) {
    auto u = stack.back();
    stack.pop_back();
    for (auto v : g.successors(u)) {
      if (v == b) return true;
      // Nothing below b's rank can lead back up to it.
      if (v < b || seen[v]) continue;
      seen[v] = 1;
      stack.push_back(v);
    }
  }
  return false;
}

PathAnswer exists_path_avoiding(const DependencyGraph& g, const ItemId& from, const ItemId& to,
                                std::span<const ItemId> blocked) {
  const auto a = g.require(from);
  const auto b = g.require(to);
  std::vector<char> is_blocked(g.node_count(), 0);
  for (const auto& id : blocked) is_blocked[g.require(id)] = 1;
  if (is_blocked[a]) throw BlockedEndpointError(from);
  if (is_blocked[b]) throw BlockedEndpointError(to);

  // Distances to `b` over the reversed graph.
  constexpr auto kUnseen = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> dist(g.node_count(), kUnseen);
  std::deque<NodeIndex> queue{b};
  dist[b] = 0;
  while (!queue.empty() && dist[a] == kUnseen) {
    auto u = queue.front();
    queue.pop_front();
    for (auto p : g.predecessors(u)) {
      if (dist[p] != kUnseen || is_blocked[p]) continue;
      dist[p] = dist[u] + 1;
      queue.push_back(p);
    }
  }
  if (dist[a] == kUnseen) return {};

  PathAnswer answer{true, {g.node(a).id}};
  for (auto cur = a; cur != b;) {
    for (auto next : g.successors(cur)) {
      if (!is_blocked[next] && dist[next] != kUnseen && dist[next] + 1 == dist[cur]) {
        cur = next;
        break;
      }
    }
    answer.witness.push_back(g.node(cur).id);
  }
  return answer;
}

bool all_paths_through(const DependencyGraph& g, const ItemId& from, const ItemId& to,
                       const ItemId& via) {
  g.require(via);
  if (!reachable(g, from, to)) return false;
  if (via == from || via == to) return true;
  const ItemId blocked[] = {via};
  return !exists_path_avoiding(g, from, to, blocked).found;
}

std::vector<ItemId> deps(const DependencyGraph& g, const ItemId& id) {
  return ids_of(g, g.successors(g.require(id)));
}

std::vector<ItemId> rdeps(const DependencyGraph& g, const ItemId& id) {
  return ids_of(g, g.predecessors(g.require(id)));
}

std::vector<ItemId> ancestors(const DependencyGraph& g, const ItemId& id) {
  auto i = g.require(id);
  auto seen = sweep(g, i, [&](NodeIndex u) { return g.predecessors(u); });
  return ids_of(g, marked(seen, i));
}

std::vector<ItemId> descendants(const DependencyGraph& g, const ItemId& id) {
  auto i = g.require(id);
  auto seen = sweep(g, i, [&](NodeIndex u) { return g.successors(u); });
  return ids_of(g, marked(seen, i));
}

std::size_t ancestor_count(const DependencyGraph& g, NodeIndex i) {
  auto seen = sweep(g, i, [&](NodeIndex u) { return g.predecessors(u); });
  return marked(seen, i).size();
}

std::size_t descendant_count(const DependencyGraph& g, NodeIndex i) {
  auto seen = sweep(g, i, [&](NodeIndex u) { return g.successors(u); });
  return marked(seen, i).size();
}

namespace {

DependencyGraph with_successors(const DependencyGraph& g,
                                const std::vector<std::vector<NodeIndex>>& kept) {
  std::vector<Edge> edges;
  for (NodeIndex u = 0; u < kept.size(); ++u) {
    for (auto v : kept[u]) edges.emplace_back(g.node(u).id, g.node(v).id);
  }
  return DependencyGraph::from_edges(g.nodes(), edges);
}

/// Dense bit rows over node indices.
class BitMatrix {
 public:
  explicit BitMatrix(std::size_t n) : words_((n + 63) / 64), bits_(n * words_, 0) {}

  std::uint64_t* row(std::size_t i) { return bits_.data() + i * words_; }
  const std::uint64_t* row(std::size_t i) const { return bits_.data() + i * words_; }
  bool test(std::size_t i, std::size_t j) const { return (row(i)[j / 64] >> (j % 64)) & 1U; }
  void set(std::size_t i, std::size_t j) { row(i)[j / 64] |= std::uint64_t{1} << (j % 64); }
  std::size_t words() const { return words_; }

 private:
  std::size_t words_;
  std::vector<std::uint64_t> bits_;
};

}  // namespace

namespace {

// Bit-matrix closure needs n^2/8 bytes; above this size the parallel kernel
// falls back to one graph search per node.
constexpr std::size_t kDenseClosureLimit = 40'000;

/// Kept successors of `u`. `stamp` holds per-node marks; a node counts as
/// marked for `u` when its stamp equals u + 1.
std::vector<NodeIndex> reduce_node(const DependencyGraph& g, NodeIndex u,
                                   std::vector<std::size_t>& stamp,
                                   std::vector<NodeIndex>& stack) {
  std::vector<NodeIndex> kept;
  // Successors nearest to u in the order come first: they are the only ones
  // that can reach the others.
  auto succ = g.successors(u);
  for (auto it = succ.rbegin(); it != succ.rend(); ++it) {
    const auto v = *it;
    if (stamp[v] == u + 1) continue;  // reachable through a kept successor
    kept.push_back(v);
    stamp[v] = u + 1;
    stack.assign(1, v);
    while (!stack.empty()) {
      auto w = stack.back();
      stack.pop_back();
      for (auto x : g.successors(w)) {
        if (stamp[x] == u + 1) continue;
        stamp[x] = u + 1;
        stack.push_back(x);
      }
    }
  }
  std::sort(kept.begin(), kept.end());
  return kept;
}

}  // namespace

DependencyGraph transitive_reduction_serial(const DependencyGraph& g) {
  const auto n = g.node_count();
  std::vector<std::vector<NodeIndex>> kept(n);
  std::vector<std::size_t> stamp(n, 0);
  std::vector<NodeIndex> stack;
  for (NodeIndex u = 0; u < n; ++u) kept[u] = reduce_node(g, u, stamp, stack);
  return with_successors(g, kept);
}

DependencyGraph transitive_reduction(const DependencyGraph& g, std::size_t jobs) {
  const auto n = g.node_count();
  const int threads = jobs == 0 ? omp_get_max_threads() : static_cast<int>(jobs);

  if (n > kDenseClosureLimit) {
    std::vector<std::vector<NodeIndex>> kept(n);
#pragma omp parallel num_threads(threads)
    {
      std::vector<std::size_t> stamp(n, 0);
      std::vector<NodeIndex> stack;
#pragma omp for schedule(dynamic, 64)
      for (std::ptrdiff_t k = 0; k < static_cast<std::ptrdiff_t>(n); ++k) {
        const auto u = static_cast<NodeIndex>(k);
        kept[u] = reduce_node(g, u, stamp, stack);
      }
    }
    return with_successors(g, kept);
  }

  // Level = length of the longest path down to a sink; a node only depends
  // on strictly lower levels, so each level's closures can be built in
  // parallel from the ones below.
  std::vector<std::size_t> level(n, 0);
  std::size_t max_level = 0;
  for (NodeIndex u = 0; u < n; ++u) {
    for (auto v : g.successors(u)) level[u] = std::max(level[u], level[v] + 1);
    max_level = std::max(max_level, level[u]);
  }
  std::vector<std::vector<NodeIndex>> by_level(n == 0 ? 0 : max_level + 1);
  for (NodeIndex u = 0; u < n; ++u) by_level[level[u]].push_back(u);

  BitMatrix closure(n);  // strict descendants
  const auto words = closure.words();
  for (const auto& layer : by_level) {
    const auto count = static_cast<std::ptrdiff_t>(layer.size());
#pragma omp parallel for schedule(dynamic, 16) num_threads(threads)
    for (std::ptrdiff_t k = 0; k < count; ++k) {
      const auto u = layer[static_cast<std::size_t>(k)];
      auto* row = closure.row(u);
      for (auto v : g.successors(u)) {
        const auto* below = closure.row(v);
        for (std::size_t w = 0; w < words; ++w) row[w] |= below[w];
        closure.set(u, v);
      }
    }
  }

  // Edge u -> v is redundant iff v is a strict descendant of another
  // successor of u.
  std::vector<std::vector<NodeIndex>> kept(n);
  const auto total = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(dynamic, 16) num_threads(threads)
  for (std::ptrdiff_t k = 0; k < total; ++k) {
    const auto u = static_cast<NodeIndex>(k);
    auto succ = g.successors(u);
    for (auto v : succ) {
      bool redundant = std::any_of(succ.begin(), succ.end(),
                                   [&](NodeIndex w) { return w != v && closure.test(w, v); });
      if (!redundant) kept[u].push_back(v);
    }
  }
  return with_successors(g, kept);
}

}  // namespace itemdeps
