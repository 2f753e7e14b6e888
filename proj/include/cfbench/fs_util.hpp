#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace cfbench {

// Writes via a sibling temp file and rename, creating parent directories.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

std::string read_file(const std::filesystem::path& path);

}  // namespace cfbench
