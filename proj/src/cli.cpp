#include "itemdeps/cli.hpp"

#include <csignal>
#include <iomanip>
#include <memory>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <httplib.h>

#include "itemdeps/atomic_file.hpp"
#include "itemdeps/cache.hpp"
#include "itemdeps/external_oracle.hpp"
#include "itemdeps/service.hpp"

namespace itemdeps::cli {

void validate(const RunConfig& config) {
  if (config.jobs == 0) throw std::invalid_argument("--jobs must be at least 1");
  if (config.oracle == OracleKind::external) {
    if (config.command.empty()) throw std::invalid_argument("--oracle external requires --command");
    if (config.timeout.count() <= 0) throw std::invalid_argument("--timeout must be positive");
  }
  if (config.out.empty()) throw std::invalid_argument("--out is required");
}

int cmd_minimize(const RunConfig& config, std::ostream& out, std::ostream& err) {
  CorpusResults results;
  std::size_t backend_calls = 0;
  std::size_t hits = 0;
  std::size_t misses = 0;
  try {
    validate(config);
    const Corpus corpus = load_corpus(config.corpus);

    std::unique_ptr<VerificationOracle> backend;
    if (config.oracle == OracleKind::builtin) {
      backend = std::make_unique<BuiltinOracle>(corpus);
    } else {
      backend = std::make_unique<ExternalOracle>(
          corpus, ExternalOracleOptions{config.command, config.timeout});
    }
    CountingOracle counted(*backend);
    std::unique_ptr<VerificationCache> cache;
    std::unique_ptr<CachingOracle> cached;
    const VerificationOracle* oracle = &counted;
    if (config.cache) {
      cache = std::make_unique<VerificationCache>(*config.cache);
      cached = std::make_unique<CachingOracle>(*cache, counted);
      oracle = cached.get();
    }

    results = minimize_corpus(corpus, *oracle, config.strategy, config.jobs);
    write_file_atomically(config.out, results_to_text(results));
    backend_calls = counted.calls();
    if (cache) {
      hits = cache->hits();
      misses = cache->misses();
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFatal;
  }

  for (const auto& r : results.items) {
    if (!r.ok()) err << "error: " << r.error << '\n';
  }
  out << "items: " << results.items.size() << '\n'
      << "succeeded: " << results.succeeded() << '\n'
      << "failed: " << results.failed() << '\n'
      << "oracle calls: " << results.oracle_calls() << '\n'
      << "backend invocations: " << backend_calls << '\n';
  if (config.cache) {
    const auto lookups = hits + misses;
    out << "cache hits: " << hits << '\n'
        << "cache misses: " << misses << '\n'
        << "cache hit rate: " << std::fixed << std::setprecision(1)
        << (lookups == 0 ? 0.0 : 100.0 * static_cast<double>(hits) / static_cast<double>(lookups))
        << "%\n";
  }
  return results.failed() == 0 ? kExitOk : kExitPartial;
}

int cmd_graph(const std::filesystem::path& results_path, const std::filesystem::path& corpus_path,
              ExportFormat format, const std::filesystem::path& output, std::ostream& err) {
  try {
    const Corpus corpus = load_corpus(corpus_path);
    const CorpusResults results = load_results(results_path.string());
    auto build = build_graph(results, corpus);
    for (const auto& w : build.warnings) err << "warning: " << w << '\n';
    const auto stats = corpus_stats(corpus);
    write_file_atomically(output, export_graph(build.graph, format, &stats));
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFatal;
  }
  return kExitOk;
}

namespace {

std::vector<ItemId> parse_id_list(const std::string& text) {
  std::vector<ItemId> ids;
  std::string_view rest = text;
  while (true) {
    auto comma = rest.find(',');
    ids.push_back(ItemId::parse(rest.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    rest = rest.substr(comma + 1);
  }
  return ids;
}

void print_witness(const std::vector<ItemId>& path, std::ostream& out) {
  for (std::size_t i = 0; i < path.size(); ++i) {
    if (i > 0) out << " -> ";
    out << path[i].str();
  }
  out << '\n';
}

}  // namespace

int cmd_query(const std::filesystem::path& graph_path, const std::string& kind,
              const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  static const std::map<std::string, std::size_t> kArity = {
      {"path", 2}, {"via", 3}, {"avoiding", 3}, {"deps", 1}, {"rdeps", 1}};
  auto arity = kArity.find(kind);
  if (arity == kArity.end()) {
    err << "error: unknown query '" << kind << "' (expected path, via, avoiding, deps, rdeps)\n";
    return kExitFatal;
  }
  if (args.size() != arity->second) {
    err << "error: query '" << kind << "' takes " << arity->second << " item ids\n";
    return kExitFatal;
  }

  try {
    const auto loaded = load_graph_file(graph_path);
    const auto& g = loaded.document.graph;
    std::vector<ItemId> ids;
    for (std::size_t i = 0; i < args.size(); ++i) {
      if (kind == "avoiding" && i == 2) break;
      ids.push_back(ItemId::parse(args[i]));
    }

    if (kind == "path") {
      auto answer = exists_path_avoiding(g, ids[0], ids[1], {});
      out << (answer.found ? "yes" : "no") << '\n';
      if (answer.found) print_witness(answer.witness, out);
    } else if (kind == "via") {
      out << (all_paths_through(g, ids[0], ids[1], ids[2]) ? "yes" : "no") << '\n';
    } else if (kind == "avoiding") {
      auto blocked = parse_id_list(args[2]);
      auto answer = exists_path_avoiding(g, ids[0], ids[1], blocked);
      out << (answer.found ? "yes" : "no") << '\n';
      if (answer.found) print_witness(answer.witness, out);
    } else {
      auto list = kind == "deps" ? deps(g, ids[0]) : rdeps(g, ids[0]);
      for (const auto& id : list) out << id.str() << '\n';
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFatal;
  }
  return kExitOk;
}

int cmd_stats(const std::filesystem::path& corpus_path, std::ostream& out, std::ostream& err) {
  CorpusStats stats;
  try {
    stats = corpus_stats(load_corpus(corpus_path));
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFatal;
  }
  out << "items: " << stats.items << '\n';
  for (std::size_t k = 0; k < kItemKindCount; ++k) {
    out << to_string(static_cast<ItemKind>(k)) << "s: " << stats.per_kind[k] << '\n';
  }
  out << "symbols: " << stats.symbols << '\n'
      << "used symbols: " << stats.used_symbols << '\n'
      << "explicit refs: " << stats.explicit_refs << '\n';
  return kExitOk;
}

namespace {

httplib::Server* g_server = nullptr;

extern "C" void stop_server(int) {
  if (g_server != nullptr) g_server->stop();
}

}  // namespace

int cmd_serve(const std::filesystem::path& graph_path,
              const std::optional<std::filesystem::path>& corpus_path, const std::string& bind,
              const std::optional<std::filesystem::path>& entry_points_path, std::ostream& out,
              std::ostream& err) {
  std::unique_ptr<GraphService> service;
  std::string host;
  int port = 0;
  try {
    auto colon = bind.rfind(':');
    if (colon == std::string::npos) throw std::invalid_argument("--bind must be HOST:PORT");
    host = bind.substr(0, colon);
    port = std::stoi(bind.substr(colon + 1));
    if (port < 0 || port > 65535) throw std::invalid_argument("port out of range");

    auto loaded = load_graph_file(graph_path);
    std::optional<CorpusStats> stats;
    if (corpus_path) stats = corpus_stats(load_corpus(*corpus_path));
    std::vector<EntryPoint> entries;
    if (entry_points_path) entries = load_entry_points(*entry_points_path, loaded.document.graph);
    service = std::make_unique<GraphService>(std::move(loaded.document), loaded.fingerprint,
                                             std::move(entries), stats);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFatal;
  }

  httplib::Server server;
  register_routes(server, *service);
  if (!server.bind_to_port(host, port)) {
    err << "error: cannot bind " << bind << '\n';
    return kExitFatal;
  }
  out << "serving " << service->graph().node_count() << " items on " << bind << std::endl;
  g_server = &server;
  std::signal(SIGINT, stop_server);
  std::signal(SIGTERM, stop_server);
  server.listen_after_bind();
  g_server = nullptr;
  return kExitOk;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Minimal dependency extraction and dependency-graph queries for formal libraries",
               "itemdeps"};
  app.require_subcommand(1);

  RunConfig config;
  std::string oracle_name = "builtin";
  std::string strategy_name = "linear";
  std::string order_name = "desc";
  long timeout_ms = 60'000;
  std::string cache_path;
  auto* minimize = app.add_subcommand("minimize", "Compute minimal dependency sets");
  minimize->add_option("--corpus", config.corpus, "Itemized corpus file")->required();
  minimize->add_option("--oracle", oracle_name, "Verification oracle")
      ->check(CLI::IsMember({"builtin", "external"}));
  minimize->add_option("--command", config.command, "External checker executable");
  minimize->add_option("--timeout", timeout_ms, "External checker timeout in milliseconds");
  minimize->add_option("--strategy", strategy_name, "Minimization strategy")
      ->check(CLI::IsMember({"linear", "ddmin"}));
  minimize->add_option("--order", order_name, "Removal order")
      ->check(CLI::IsMember({"desc", "asc"}));
  minimize->add_option("--jobs", config.jobs, "Worker threads");
  minimize->add_option("--cache", cache_path, "Persistent verification cache file");
  minimize->add_option("--out", config.out, "Results file")->required();

  std::string results_path;
  std::string corpus_path;
  std::string format_name = "structured";
  std::string graph_out;
  auto* graph = app.add_subcommand("graph", "Build and export the dependency graph");
  graph->add_option("--results", results_path, "Results file from minimize")->required();
  graph->add_option("--corpus", corpus_path, "Itemized corpus file")->required();
  graph->add_option("--format", format_name, "Export format")
      ->check(CLI::IsMember({"edge-tsv", "dot", "structured"}));
  graph->add_option("--out", graph_out, "Output file")->required();

  std::string graph_path;
  std::string query_kind;
  std::vector<std::string> query_args;
  auto* query = app.add_subcommand("query", "Answer a path, via, avoiding, deps or rdeps query");
  query->add_option("--graph", graph_path, "Graph file (structured or edge-tsv)")->required();
  query->add_option("kind", query_kind, "path|via|avoiding|deps|rdeps")->required();
  query->add_option("ids", query_args, "Item ids");

  std::string stats_corpus;
  auto* stats = app.add_subcommand("stats", "Summarize a corpus");
  stats->add_option("--corpus", stats_corpus, "Itemized corpus file")->required();

  std::string serve_graph;
  std::string serve_corpus;
  std::string bind = "127.0.0.1:8080";
  std::string entry_points;
  auto* serve = app.add_subcommand("serve", "Serve the read-only HTTP API");
  serve->add_option("--graph", serve_graph, "Structured graph file")->required();
  serve->add_option("--corpus", serve_corpus, "Itemized corpus file");
  serve->add_option("--bind", bind, "HOST:PORT");
  serve->add_option("--entry-points", entry_points, "Entry points file (itemId<TAB>label)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitFatal;
  }

  if (*minimize) {
    config.oracle = oracle_name == "external" ? OracleKind::external : OracleKind::builtin;
    config.timeout = std::chrono::milliseconds(timeout_ms);
    config.strategy = *Strategy::parse(strategy_name + "-" + order_name);
    if (!cache_path.empty()) config.cache = cache_path;
    return cmd_minimize(config, out, err);
  }
  if (*graph) {
    return cmd_graph(results_path, corpus_path, *parse_export_format(format_name), graph_out, err);
  }
  if (*query) return cmd_query(graph_path, query_kind, query_args, out, err);
  if (*stats) return cmd_stats(stats_corpus, out, err);
  if (*serve) {
    std::optional<std::filesystem::path> corpus;
    if (!serve_corpus.empty()) corpus = serve_corpus;
    std::optional<std::filesystem::path> entries;
    if (!entry_points.empty()) entries = entry_points;
    return cmd_serve(serve_graph, corpus, bind, entries, out, err);
  }
  return kExitFatal;
}

}  // namespace itemdeps::cli
