#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>

namespace depthpoison {

/// Lowercase hex SHA-256.
std::string sha256_hex(std::span<const std::uint8_t> bytes);
std::string sha256_hex(std::string_view text);

/// Digest over every regular file below `root`: sorted relative paths and
/// their contents. Two trees with equal digests hold byte-identical files.
std::string tree_digest(const std::filesystem::path& root);

}  // namespace depthpoison
