#pragma once

#include <filesystem>
#include <string_view>

namespace itemdeps {

/// Writes to a sibling temporary file, then renames it over `path`, so
/// readers never observe a truncated file.
void write_file_atomically(const std::filesystem::path& path, std::string_view content);

}  // namespace itemdeps
