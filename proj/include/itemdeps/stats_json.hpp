#pragma once

#include <json.hpp>

#include "itemdeps/corpus.hpp"

namespace itemdeps {

nlohmann::ordered_json stats_to_json(const CorpusStats& stats);
/// Throws nlohmann::json::exception on missing or mistyped fields.
CorpusStats stats_from_json(const nlohmann::json& j);

}  // namespace itemdeps
