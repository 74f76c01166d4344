#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "itemdeps/corpus.hpp"
#include "itemdeps/minimizer.hpp"

namespace itemdeps {

class GraphError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UnknownNodeError : public std::out_of_range {
 public:
  explicit UnknownNodeError(const ItemId& id);
};

/// An endpoint of a path query appears in its own blocked set.
class BlockedEndpointError : public std::invalid_argument {
 public:
  explicit BlockedEndpointError(const ItemId& id);
};

struct GraphNode {
  ItemId id;
  std::size_t position = 0;

  friend bool operator==(const GraphNode&, const GraphNode&) = default;
};

using Edge = std::pair<ItemId, ItemId>;  // (dependent, prerequisite)

/// Immutable dependency DAG. An edge a -> b means "a depends on b" and
/// always points to a strictly smaller position.
///
/// Nodes are stored in position order; NodeIndex is the rank in that order,
/// which is also the canonical order used for every sorted output.
class DependencyGraph {
 public:
  using NodeIndex = std::size_t;

  DependencyGraph() = default;

  /// Throws GraphError on duplicate nodes or positions, dangling edge
  /// endpoints, self-loops, duplicate edges, or an edge that does not point
  /// to a smaller position.
  static DependencyGraph from_edges(std::vector<GraphNode> nodes, const std::vector<Edge>& edges);

  std::size_t node_count() const noexcept { return nodes_.size(); }
  std::size_t edge_count() const noexcept { return edge_count_; }
  const std::vector<GraphNode>& nodes() const noexcept { return nodes_; }
  const GraphNode& node(NodeIndex i) const { return nodes_[i]; }

  std::optional<NodeIndex> index_of(const ItemId& id) const;
  /// Throws UnknownNodeError.
  NodeIndex require(const ItemId& id) const;
  bool contains(const ItemId& id) const { return index_.count(id) != 0; }

  /// Ascending NodeIndex order.
  std::span<const NodeIndex> successors(NodeIndex i) const { return out_[i]; }
  std::span<const NodeIndex> predecessors(NodeIndex i) const { return in_[i]; }
  bool has_edge(NodeIndex from, NodeIndex to) const;

  /// Sorted by (from, to) in canonical order.
  std::vector<Edge> edges() const;

  friend bool operator==(const DependencyGraph& a, const DependencyGraph& b) {
    return a.nodes_ == b.nodes_ && a.out_ == b.out_;
  }

 private:
  std::vector<GraphNode> nodes_;
  std::unordered_map<ItemId, NodeIndex, ItemIdHash> index_;
  std::vector<std::vector<NodeIndex>> out_;
  std::vector<std::vector<NodeIndex>> in_;
  std::size_t edge_count_ = 0;
};

struct GraphBuild {
  DependencyGraph graph;
  std::vector<std::string> warnings;  // one per failed item
};

/// Nodes are the corpus items; one edge per minimal dependency. Failed items
/// contribute no edges and are listed in `warnings`. Throws GraphError on a
/// result or dependency id missing from the corpus.
GraphBuild build_graph(const CorpusResults& results, const Corpus& corpus);

struct PathAnswer {
  bool found = false;
  std::vector<ItemId> witness;  // empty when !found

  friend bool operator==(const PathAnswer&, const PathAnswer&) = default;
};

/// True iff a path of zero or more edges leads from `from` to `to`;
/// reachable(a, a) is true.
bool reachable(const DependencyGraph& g, const ItemId& from, const ItemId& to);

/// Path from `from` to `to` avoiding every node in `blocked`. The witness
/// is a shortest path; among shortest paths the one taking the smallest
/// next node (canonical order) at each step. Throws BlockedEndpointError if
/// an endpoint is blocked.
PathAnswer exists_path_avoiding(const DependencyGraph& g, const ItemId& from, const ItemId& to,
                                std::span<const ItemId> blocked);

/// Every path from `from` to `to` passes `via`. False when `to` is not
/// reachable at all; endpoints lie on every path.
bool all_paths_through(const DependencyGraph& g, const ItemId& from, const ItemId& to,
                       const ItemId& via);

std::vector<ItemId> deps(const DependencyGraph& g, const ItemId& id);
std::vector<ItemId> rdeps(const DependencyGraph& g, const ItemId& id);

/// Everything that transitively depends on `id`, excluding `id`.
std::vector<ItemId> ancestors(const DependencyGraph& g, const ItemId& id);
/// The full dependency cone of `id`, excluding `id`.
std::vector<ItemId> descendants(const DependencyGraph& g, const ItemId& id);

std::size_t ancestor_count(const DependencyGraph& g, DependencyGraph::NodeIndex i);
std::size_t descendant_count(const DependencyGraph& g, DependencyGraph::NodeIndex i);

/// Unique minimal subgraph with the same reachability relation, computed
/// per node on OpenMP threads.
DependencyGraph transitive_reduction(const DependencyGraph& g, std::size_t jobs = 0);
DependencyGraph transitive_reduction_serial(const DependencyGraph& g);

// ---------------------------------------------------------------------------
// Export / import

enum class ExportFormat { edge_tsv, dot, structured };

std::optional<ExportFormat> parse_export_format(std::string_view name);

/// `structured` embeds `corpus_summary` when given.
std::string export_graph(const DependencyGraph& g, ExportFormat format,
                         const CorpusStats* corpus_summary = nullptr);

/// Rebuilds the graph from `from<TAB>to` lines. Only nodes incident to an
/// edge are recovered; positions are a topological order with ties broken
/// by id text.
DependencyGraph import_edge_tsv(const std::string& text);

struct GraphDocument {
  DependencyGraph graph;
  std::optional<CorpusStats> corpus_summary;
};

/// Parses the structured export.
GraphDocument parse_structured_graph(const std::string& text);

struct LoadedGraph {
  GraphDocument document;
  std::string fingerprint;  // SHA-256 of the file contents
};

/// Accepts the structured or the edge-tsv export, detected by content.
LoadedGraph load_graph_file(const std::filesystem::path& path);

}  // namespace itemdeps
