#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace debatelab {

/// Lower-case hex SHA-256 of `bytes`.
std::string sha256_hex(std::string_view bytes);

/// SHA-256 of a file's exact bytes. Throws IoError when unreadable.
std::string sha256_file(const std::filesystem::path& path);

std::string read_file(const std::filesystem::path& path);

}  // namespace debatelab
