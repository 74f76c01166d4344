#include "itemdeps/service.hpp"

#include <charconv>
#include <fstream>

#include <httplib.h>
#include <json.hpp>

#include "itemdeps/stats_json.hpp"

namespace itemdeps {

using nlohmann::ordered_json;

namespace {

struct HttpError {
  int status;
  std::string message;
};

ServiceResponse json_response(int status, const ordered_json& body) {
  return {status, body.dump()};
}

ServiceResponse error_response(int status, const std::string& message) {
  return json_response(status, ordered_json{{"error", message}});
}

ordered_json id_list(const std::vector<ItemId>& ids) {
  auto arr = ordered_json::array();
  for (const auto& id : ids) arr.push_back(id.str());
  return arr;
}

const std::string& required(const QueryParams& params, std::string_view key) {
  auto it = params.find(key);
  if (it == params.end() || it->second.empty()) {
    throw HttpError{400, "missing parameter '" + std::string(key) + "'"};
  }
  return it->second;
}

ItemId parse_id(std::string_view text) {
  auto id = ItemId::try_parse(text);
  if (!id) throw HttpError{400, "malformed item id '" + std::string(text) + "'"};
  return *std::move(id);
}

ItemId known_id(const DependencyGraph& g, std::string_view text) {
  auto id = parse_id(text);
  if (!g.contains(id)) throw HttpError{404, "unknown item '" + id.str() + "'"};
  return id;
}

std::size_t parse_count(const QueryParams& params, std::string_view key, std::size_t fallback) {
  auto it = params.find(key);
  if (it == params.end()) return fallback;
  const auto& text = it->second;
  std::size_t value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size() || value == 0) {
    throw HttpError{400, "parameter '" + std::string(key) + "' must be a positive integer"};
  }
  return value;
}

ordered_json path_body(const PathAnswer& answer) {
  ordered_json body{{"answer", answer.found}};
  if (answer.found) body["witness"] = id_list(answer.witness);
  return body;
}

}  // namespace

std::vector<EntryPoint> load_entry_points(const std::filesystem::path& path,
                                          const DependencyGraph& graph) {
  std::vector<EntryPoint> out;
  std::ifstream in(path);
  if (!in) return out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto where = "entry points line " + std::to_string(line_no);
    auto tab = line.find('\t');
    if (tab == std::string::npos) throw std::runtime_error(where + ": expected itemId<TAB>label");
    auto id = ItemId::try_parse(std::string_view(line).substr(0, tab));
    if (!id) throw std::runtime_error(where + ": malformed item id '" + line.substr(0, tab) + "'");
    if (!graph.contains(*id)) {
      throw std::runtime_error(where + ": unknown item '" + id->str() + "'");
    }
    out.push_back({*std::move(id), line.substr(tab + 1)});
  }
  return out;
}

GraphService::GraphService(GraphDocument document, std::string fingerprint,
                           std::vector<EntryPoint> entry_points,
                           std::optional<CorpusStats> corpus_stats)
    : document_(std::move(document)),
      fingerprint_(std::move(fingerprint)),
      entry_points_(std::move(entry_points)),
      corpus_stats_(corpus_stats ? corpus_stats : document_.corpus_summary) {
  for (const auto& e : entry_points_) {
    if (!document_.graph.contains(e.id)) {
      throw std::invalid_argument("entry point '" + e.id.str() + "' is not in the graph");
    }
  }
}

ServiceResponse GraphService::handle(std::string_view path, const QueryParams& params) const {
  try {
    if (path == "/items") return items_page(params);
    if (path.starts_with("/items/")) return item_view(path.substr(7));
    if (path == "/query/path") return query_path(params);
    if (path == "/query/via") return query_via(params);
    if (path == "/query/avoiding") return query_avoiding(params);
    if (path == "/entry-points") return entry_points();
    if (path == "/stats") return stats();
    return error_response(404, "no such endpoint '" + std::string(path) + "'");
  } catch (const HttpError& e) {
    return error_response(e.status, e.message);
  } catch (const UnknownNodeError& e) {
    return error_response(404, e.what());
  } catch (const BlockedEndpointError& e) {
    return error_response(400, e.what());
  } catch (const std::exception& e) {
    return error_response(500, e.what());
  }
}

ServiceResponse GraphService::items_page(const QueryParams& params) const {
  const auto page = parse_count(params, "page", 1);
  const auto per_page = parse_count(params, "per_page", kDefaultPerPage);
  if (per_page > kMaxPerPage) {
    throw HttpError{400, "per_page must not exceed " + std::to_string(kMaxPerPage)};
  }
  const auto& nodes = graph().nodes();
  auto items = ordered_json::array();
  // Division first so huge page numbers cannot overflow.
  if (page - 1 < (nodes.size() + per_page - 1) / per_page) {
    const auto begin = (page - 1) * per_page;
    const auto end = std::min(nodes.size(), begin + per_page);
    for (auto i = begin; i < end; ++i) items.push_back(nodes[i].id.str());
  }
  return json_response(200, ordered_json{{"page", page},
                                         {"per_page", per_page},
                                         {"total", nodes.size()},
                                         {"items", std::move(items)}});
}

ServiceResponse GraphService::item_view(std::string_view id_text) const {
  const auto id = known_id(graph(), id_text);
  const auto i = graph().require(id);
  return json_response(200, ordered_json{{"id", id.str()},
                                         {"kind", to_string(id.kind)},
                                         {"position", graph().node(i).position},
                                         {"deps", id_list(deps(graph(), id))},
                                         {"rdeps", id_list(rdeps(graph(), id))},
                                         {"ancestor_count", ancestor_count(graph(), i)},
                                         {"descendant_count", descendant_count(graph(), i)}});
}

ServiceResponse GraphService::query_path(const QueryParams& params) const {
  const auto from = known_id(graph(), required(params, "from"));
  const auto to = known_id(graph(), required(params, "to"));
  return json_response(200, path_body(exists_path_avoiding(graph(), from, to, {})));
}

ServiceResponse GraphService::query_via(const QueryParams& params) const {
  const auto from = known_id(graph(), required(params, "from"));
  const auto to = known_id(graph(), required(params, "to"));
  const auto via = known_id(graph(), required(params, "via"));
  return json_response(200, ordered_json{{"answer", all_paths_through(graph(), from, to, via)}});
}

ServiceResponse GraphService::query_avoiding(const QueryParams& params) const {
  // Parse everything before resolving so malformed input wins over unknown ids.
  const auto from = parse_id(required(params, "from"));
  const auto to = parse_id(required(params, "to"));
  std::vector<ItemId> blocked;
  if (auto it = params.find("avoid"); it != params.end() && !it->second.empty()) {
    std::string_view rest = it->second;
    while (true) {
      auto comma = rest.find(',');
      blocked.push_back(parse_id(rest.substr(0, comma)));
      if (comma == std::string_view::npos) break;
      rest = rest.substr(comma + 1);
    }
  }
  for (const auto* id : {&from, &to}) {
    if (!graph().contains(*id)) throw HttpError{404, "unknown item '" + id->str() + "'"};
  }
  for (const auto& id : blocked) {
    if (!graph().contains(id)) throw HttpError{404, "unknown item '" + id.str() + "'"};
  }
  return json_response(200, path_body(exists_path_avoiding(graph(), from, to, blocked)));
}

ServiceResponse GraphService::entry_points() const {
  auto list = ordered_json::array();
  for (const auto& e : entry_points_) {
    list.push_back(ordered_json{{"id", e.id.str()}, {"label", e.label}});
  }
  return json_response(200, ordered_json{{"entry_points", std::move(list)}});
}

ServiceResponse GraphService::stats() const {
  ordered_json body{{"graph", {{"nodes", graph().node_count()}, {"edges", graph().edge_count()}}}};
  body["corpus"] = corpus_stats_ ? ordered_json(stats_to_json(*corpus_stats_)) : ordered_json();
  return json_response(200, body);
}

void register_routes(httplib::Server& server, const GraphService& service) {
  server.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                              {"Access-Control-Expose-Headers", "X-Graph-Fingerprint"}});
  server.Get(".*", [&service](const httplib::Request& req, httplib::Response& res) {
    QueryParams params;
    for (const auto& [key, value] : req.params) params.emplace(key, value);
    auto response = service.handle(req.path, params);
    res.status = response.status;
    res.set_header("X-Graph-Fingerprint", service.fingerprint());
    res.set_content(response.body, "application/json");
  });
}

}  // namespace itemdeps
