#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "itemdeps/depgraph.hpp"

namespace httplib {
class Server;
}

namespace itemdeps {

struct EntryPoint {
  ItemId id;
  std::string label;

  friend bool operator==(const EntryPoint&, const EntryPoint&) = default;
};

/// Reads `itemId<TAB>label` lines. A missing file yields an empty list; an
/// id absent from `graph` is an error naming it.
std::vector<EntryPoint> load_entry_points(const std::filesystem::path& path,
                                          const DependencyGraph& graph);

struct ServiceResponse {
  int status = 200;
  std::string body;  // JSON
};

using QueryParams = std::map<std::string, std::string, std::less<>>;

/// Read-only query API over one loaded graph snapshot.
///
///   GET /items?page&per_page     paginated ids in position order (page is 1-based)
///   GET /items/{id}              item view with deps, rdeps and cone sizes
///   GET /query/path?from&to
///   GET /query/via?from&to&via
///   GET /query/avoiding?from&to&avoid=id,id
///   GET /entry-points
///   GET /stats
///
/// Errors are `{"error": message}` with 400 for malformed input or blocked
/// endpoints and 404 for unknown ids or routes.
class GraphService {
 public:
  GraphService(GraphDocument document, std::string fingerprint,
               std::vector<EntryPoint> entry_points = {},
               std::optional<CorpusStats> corpus_stats = std::nullopt);

  ServiceResponse handle(std::string_view path, const QueryParams& params) const;

  const DependencyGraph& graph() const noexcept { return document_.graph; }
  const std::string& fingerprint() const noexcept { return fingerprint_; }

 private:
  ServiceResponse items_page(const QueryParams& params) const;
  ServiceResponse item_view(std::string_view id_text) const;
  ServiceResponse query_path(const QueryParams& params) const;
  ServiceResponse query_via(const QueryParams& params) const;
  ServiceResponse query_avoiding(const QueryParams& params) const;
  ServiceResponse entry_points() const;
  ServiceResponse stats() const;

  GraphDocument document_;
  std::string fingerprint_;
  std::vector<EntryPoint> entry_points_;
  std::optional<CorpusStats> corpus_stats_;
};

inline constexpr std::size_t kDefaultPerPage = 50;
inline constexpr std::size_t kMaxPerPage = 1000;

/// Routes every GET to `service.handle`, adding the X-Graph-Fingerprint header.
void register_routes(httplib::Server& server, const GraphService& service);

}  // namespace itemdeps
