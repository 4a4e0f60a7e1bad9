#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace ttvga {

std::string read_file(const std::filesystem::path& path);

/// Writes via a temporary sibling file and rename, so readers never see a partial file.
void write_file_atomic(const std::filesystem::path& path, std::string_view bytes);

} // namespace ttvga
