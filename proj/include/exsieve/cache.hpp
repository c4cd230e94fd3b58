#pragma once

#include <cstddef>
#include <filesystem>
#include <span>

#include "exsieve/image.hpp"

namespace exsieve {

// Binary image cache, little-endian:
//   magic "NAIM" | version u32 | kind u8 | mode u8 | limit u64 |
//   undecided-count u64 | ceil(X/8) bitmap bytes (bit j of byte i <=>
//   value 8i+j+1 attained) | undecided values as u64, sorted.
// Heuristic-mode caches append the scan ceiling as a trailing u64 so the
// round trip reproduces the map including its mode parameters.
inline constexpr std::uint32_t kCacheVersion = 1;

u64 fnv1a64(std::span<const std::byte> bytes);

// Returns the FNV-1a digest of the written file.
u64 write_cache(const ImageMap& map, const std::filesystem::path& path);

ImageMap read_cache(const std::filesystem::path& path);

}  // namespace exsieve
