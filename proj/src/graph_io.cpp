#include <algorithm>
#include <fstream>
#include <queue>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "itemdeps/depgraph.hpp"
#include "itemdeps/hash.hpp"
#include "itemdeps/stats_json.hpp"

namespace itemdeps {

using nlohmann::json;
using nlohmann::ordered_json;

nlohmann::ordered_json stats_to_json(const CorpusStats& stats) {
  ordered_json j;
  j["items"] = stats.items;
  for (std::size_t k = 0; k < kItemKindCount; ++k) {
    j[std::string(to_string(static_cast<ItemKind>(k))) + "s"] = stats.per_kind[k];
  }
  j["symbols"] = stats.symbols;
  j["used_symbols"] = stats.used_symbols;
  j["explicit_refs"] = stats.explicit_refs;
  return j;
}

CorpusStats stats_from_json(const nlohmann::json& j) {
  CorpusStats stats;
  stats.items = j.at("items").get<std::size_t>();
  for (std::size_t k = 0; k < kItemKindCount; ++k) {
    stats.per_kind[k] =
        j.at(std::string(to_string(static_cast<ItemKind>(k))) + "s").get<std::size_t>();
  }
  stats.symbols = j.at("symbols").get<std::size_t>();
  stats.used_symbols = j.at("used_symbols").get<std::size_t>();
  stats.explicit_refs = j.at("explicit_refs").get<std::size_t>();
  return stats;
}

std::optional<ExportFormat> parse_export_format(std::string_view name) {
  if (name == "edge-tsv") return ExportFormat::edge_tsv;
  if (name == "dot") return ExportFormat::dot;
  if (name == "structured") return ExportFormat::structured;
  return std::nullopt;
}

namespace {

constexpr std::string_view kStructuredFormat = "itemdeps-graph";
constexpr int kStructuredVersion = 1;

std::string export_edge_tsv(const DependencyGraph& g) {
  std::vector<std::pair<std::string, std::string>> lines;
  lines.reserve(g.edge_count());
  for (const auto& [from, to] : g.edges()) lines.emplace_back(from.str(), to.str());
  std::sort(lines.begin(), lines.end());
  std::string out;
  for (const auto& [from, to] : lines) {
    out += from;
    out += '\t';
    out += to;
    out += '\n';
  }
  return out;
}

std::string export_dot(const DependencyGraph& g) {
  std::ostringstream out;
  out << "digraph dependencies {\n";
  for (const auto& node : g.nodes()) {
    out << "  \"" << node.id.str() << "\" [label=\"" << node.id.str() << "\", kind=\""
        << to_string(node.id.kind) << "\"];\n";
  }
  for (const auto& [from, to] : g.edges()) {
    out << "  \"" << from.str() << "\" -> \"" << to.str() << "\";\n";
  }
  out << "}\n";
  return out.str();
}

std::string export_structured(const DependencyGraph& g, const CorpusStats* summary) {
  ordered_json doc;
  doc["format"] = kStructuredFormat;
  doc["version"] = kStructuredVersion;
  ordered_json nodes = ordered_json::array();
  for (const auto& node : g.nodes()) {
    nodes.push_back(ordered_json{{"id", node.id.str()},
                                 {"kind", to_string(node.id.kind)},
                                 {"position", node.position}});
  }
  doc["nodes"] = std::move(nodes);
  ordered_json edges = ordered_json::array();
  for (const auto& [from, to] : g.edges()) edges.push_back(ordered_json::array({from.str(), to.str()}));
  doc["edges"] = std::move(edges);
  if (summary != nullptr) doc["corpus"] = stats_to_json(*summary);
  return doc.dump(1) + "\n";
}

ItemId parse_graph_id(const std::string& text, const std::string& where) {
  auto id = ItemId::try_parse(text);
  if (!id) throw GraphError(where + ": malformed item id '" + text + "'");
  return *std::move(id);
}

}  // namespace

std::string export_graph(const DependencyGraph& g, ExportFormat format,
                         const CorpusStats* corpus_summary) {
  switch (format) {
    case ExportFormat::edge_tsv:
      return export_edge_tsv(g);
    case ExportFormat::dot:
      return export_dot(g);
    case ExportFormat::structured:
      return export_structured(g, corpus_summary);
  }
  return {};
}

DependencyGraph import_edge_tsv(const std::string& text) {
  std::vector<Edge> edges;
  std::unordered_map<std::string, ItemId> ids;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos || line.find('\t', tab + 1) != std::string::npos) {
      throw GraphError("edge-tsv line " + std::to_string(line_no) + ": expected from<TAB>to");
    }
    auto where = "edge-tsv line " + std::to_string(line_no);
    auto from = parse_graph_id(line.substr(0, tab), where);
    auto to = parse_graph_id(line.substr(tab + 1), where);
    ids.emplace(from.str(), from);
    ids.emplace(to.str(), to);
    edges.emplace_back(std::move(from), std::move(to));
  }

  // Kahn's algorithm, prerequisites first, smallest id text first.
  std::unordered_map<std::string, std::size_t> pending;  // unplaced prerequisites
  std::unordered_map<std::string, std::vector<std::string>> dependents;
  for (const auto& [key, _] : ids) pending[key] = 0;
  std::unordered_set<std::string> seen_edges;
  for (const auto& [from, to] : edges) {
    auto f = from.str();
    auto t = to.str();
    if (!seen_edges.insert(f + '\t' + t).second) {
      throw GraphError("duplicate edge " + f + " -> " + t);
    }
    ++pending[f];
    dependents[t].push_back(f);
  }
  std::priority_queue<std::string, std::vector<std::string>, std::greater<>> ready;
  for (const auto& [key, count] : pending) {
    if (count == 0) ready.push(key);
  }
  std::vector<GraphNode> nodes;
  nodes.reserve(ids.size());
  while (!ready.empty()) {
    auto key = ready.top();
    ready.pop();
    nodes.push_back({ids.at(key), nodes.size()});
    for (const auto& d : dependents[key]) {
      if (--pending[d] == 0) ready.push(d);
    }
  }
  if (nodes.size() != ids.size()) throw GraphError("edge-tsv input contains a cycle");
  return DependencyGraph::from_edges(std::move(nodes), edges);
}

GraphDocument parse_structured_graph(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw GraphError(std::string("invalid graph JSON: ") + e.what());
  }
  try {
    if (doc.at("format").get<std::string>() != kStructuredFormat) {
      throw GraphError("not an itemdeps graph document");
    }
    if (doc.at("version").get<int>() != kStructuredVersion) {
      throw GraphError("unsupported graph document version");
    }
    std::vector<GraphNode> nodes;
    for (const auto& n : doc.at("nodes")) {
      nodes.push_back({parse_graph_id(n.at("id").get<std::string>(), "graph node"),
                       n.at("position").get<std::size_t>()});
    }
    std::vector<Edge> edges;
    for (const auto& e : doc.at("edges")) {
      if (!e.is_array() || e.size() != 2) throw GraphError("graph edge must be a pair");
      edges.emplace_back(parse_graph_id(e[0].get<std::string>(), "graph edge"),
                         parse_graph_id(e[1].get<std::string>(), "graph edge"));
    }
    GraphDocument out{DependencyGraph::from_edges(std::move(nodes), edges), std::nullopt};
    if (auto it = doc.find("corpus"); it != doc.end()) out.corpus_summary = stats_from_json(*it);
    return out;
  } catch (const json::exception& e) {
    throw GraphError(std::string("malformed graph document: ") + e.what());
  }
}

LoadedGraph load_graph_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw GraphError("cannot open graph file '" + path.string() + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  const auto text = buffer.str();

  LoadedGraph loaded;
  loaded.fingerprint = sha256_hex(text);
  auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    loaded.document = parse_structured_graph(text);
  } else {
    loaded.document.graph = import_edge_tsv(text);
  }
  return loaded;
}

}  // namespace itemdeps
