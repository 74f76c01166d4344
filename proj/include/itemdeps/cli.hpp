#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "itemdeps/depgraph.hpp"
#include "itemdeps/minimizer.hpp"

namespace itemdeps::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFatal = 1;
inline constexpr int kExitPartial = 2;

enum class OracleKind { builtin, external };

struct RunConfig {
  std::filesystem::path corpus;
  OracleKind oracle = OracleKind::builtin;
  std::string command;
  std::chrono::milliseconds timeout{60'000};
  Strategy strategy;
  std::size_t jobs = 1;
  std::optional<std::filesystem::path> cache;
  std::filesystem::path out;
};

/// Throws std::invalid_argument describing the first violated constraint.
void validate(const RunConfig& config);

int cmd_minimize(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_graph(const std::filesystem::path& results, const std::filesystem::path& corpus,
              ExportFormat format, const std::filesystem::path& output, std::ostream& err);
/// `kind` is one of path, via, avoiding, deps, rdeps; `args` are its ids
/// (avoiding takes a comma-separated blocked list as its third argument).
int cmd_query(const std::filesystem::path& graph, const std::string& kind,
              const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int cmd_stats(const std::filesystem::path& corpus, std::ostream& out, std::ostream& err);
int cmd_serve(const std::filesystem::path& graph, const std::optional<std::filesystem::path>& corpus,
              const std::string& bind, const std::optional<std::filesystem::path>& entry_points,
              std::ostream& out, std::ostream& err);

/// Full command line entry point.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace itemdeps::cli
