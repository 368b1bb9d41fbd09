#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace arground {

/// Whole file as bytes. Throws IoError.
std::string read_file(const std::filesystem::path& path);

/// Writes to a temporary sibling and renames it over `path`, so readers see
/// either the old file or the complete new one. Throws IoError.
void atomic_write_file(const std::filesystem::path& path, std::string_view contents);

/// Lowercase hex SHA-256 digest.
std::string sha256_hex(std::string_view data);

}  // namespace arground
