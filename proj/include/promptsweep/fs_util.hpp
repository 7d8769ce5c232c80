#pragma once
#include <filesystem>
#include <string>
#include <string_view>

namespace promptsweep {

std::string read_file(const std::filesystem::path& path);

// Writes to a sibling temp file, flushes, then renames over `path`, so a
// reader never observes a partially written file.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

} // namespace promptsweep
