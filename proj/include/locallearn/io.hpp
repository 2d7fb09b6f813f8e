#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace locallearn {

/// Writes to a sibling temporary file and renames it over the target, so readers
/// never observe a truncated file.
void atomic_write(const std::filesystem::path& path, std::string_view content);

std::string read_file(const std::filesystem::path& path);

/// Shortest decimal text that round-trips the double exactly.
std::string format_double(double v);

}  // namespace locallearn
