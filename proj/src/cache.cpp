#include "exsieve/cache.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <vector>

namespace exsieve {

namespace {

constexpr char kMagic[4] = {'N', 'A', 'I', 'M'};

void put_u32(std::vector<std::byte>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(std::byte((v >> (8 * i)) & 0xff));
}

void put_u64(std::vector<std::byte>& out, u64 v) {
    for (int i = 0; i < 8; ++i) out.push_back(std::byte((v >> (8 * i)) & 0xff));
}

std::uint32_t get_u32(const std::byte* p) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t(std::to_integer<unsigned>(p[i])) << (8 * i);
    return v;
}

u64 get_u64(const std::byte* p) {
    u64 v = 0;
    for (int i = 0; i < 8; ++i) v |= u64(std::to_integer<unsigned>(p[i])) << (8 * i);
    return v;
}

}  // namespace

u64 fnv1a64(std::span<const std::byte> bytes) {
    u64 hash = 0xcbf29ce484222325ull;
    for (std::byte b : bytes) {
        hash ^= std::to_integer<u64>(b);
        hash *= 0x100000001b3ull;
    }
    return hash;
}

u64 write_cache(const ImageMap& map, const std::filesystem::path& path) {
    std::vector<std::byte> out;
    const u64 limit = map.limit();
    const u64 nbytes = (limit + 7) / 8;
    out.reserve(26 + nbytes + 8 * map.undecided().size() + 8);

    for (char c : kMagic) out.push_back(std::byte(c));
    put_u32(out, kCacheVersion);
    out.push_back(std::byte(static_cast<std::uint8_t>(map.kind())));
    out.push_back(std::byte(static_cast<std::uint8_t>(map.mode())));
    put_u64(out, limit);
    put_u64(out, map.undecided().size());
    for (u64 i = 0; i < nbytes; ++i) {
        const u64 word = map.words()[i / 8];
        out.push_back(std::byte((word >> (8 * (i % 8))) & 0xff));
    }
    for (u64 v : map.undecided()) put_u64(out, v);
    if (map.mode() == ImageMode::heuristic) put_u64(out, map.heuristic_ceiling());

    std::ofstream file(path, std::ios::binary | std::ios::trunc);
    if (!file) throw CacheError("cannot open cache file for writing: " + path.string());
    file.write(reinterpret_cast<const char*>(out.data()),
               static_cast<std::streamsize>(out.size()));
    if (!file) throw CacheError("short write to cache file: " + path.string());
    return fnv1a64(out);
}

ImageMap read_cache(const std::filesystem::path& path) {
    std::ifstream file(path, std::ios::binary | std::ios::ate);
    if (!file) throw CacheError("cannot open cache file: " + path.string());
    const auto size = static_cast<u64>(file.tellg());
    file.seekg(0);
    std::vector<std::byte> data(size);
    file.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(size));
    if (!file) throw CacheError("short read from cache file: " + path.string());

    if (size < 26) throw CacheError("truncated cache (header incomplete): " + path.string());
    if (std::memcmp(data.data(), kMagic, 4) != 0) {
        throw CacheError("bad cache magic in " + path.string());
    }
    const std::uint32_t version = get_u32(data.data() + 4);
    if (version != kCacheVersion) {
        throw CacheError("cache version mismatch in " + path.string() + ": file has " +
                         std::to_string(version) + ", expected " +
                         std::to_string(kCacheVersion));
    }
    const auto kind_code = std::to_integer<unsigned>(data[8]);
    const auto mode_code = std::to_integer<unsigned>(data[9]);
    if (kind_code > 2 || mode_code > 2) {
        throw CacheError("invalid kind/mode code in " + path.string());
    }
    const auto kind = static_cast<MapKind>(kind_code);
    const auto mode = static_cast<ImageMode>(mode_code);
    const u64 limit = get_u64(data.data() + 10);
    const u64 undecided_count = get_u64(data.data() + 18);
    if (limit < 1) throw CacheError("invalid limit in " + path.string());

    const u64 nbytes = (limit + 7) / 8;
    u64 expected = 26 + nbytes + 8 * undecided_count;
    if (mode == ImageMode::heuristic) expected += 8;
    if (size != expected) {
        throw CacheError("cache size mismatch in " + path.string() + ": have " +
                         std::to_string(size) + " bytes, expected " +
                         std::to_string(expected));
    }

    std::vector<u64> words((limit + 63) / 64, 0);
    for (u64 i = 0; i < nbytes; ++i) {
        words[i / 8] |= u64(std::to_integer<unsigned>(data[26 + i])) << (8 * (i % 8));
    }
    std::vector<u64> undecided(undecided_count);
    const std::byte* p = data.data() + 26 + nbytes;
    for (u64 i = 0; i < undecided_count; ++i) undecided[i] = get_u64(p + 8 * i);
    if (!std::is_sorted(undecided.begin(), undecided.end())) {
        throw CacheError("undecided list not sorted in " + path.string());
    }
    u64 ceiling = 0;
    if (mode == ImageMode::heuristic) {
        ceiling = get_u64(data.data() + size - 8);
    }
    return ImageMap(kind, limit, mode, ceiling, std::move(words), std::move(undecided));
}

}  // namespace exsieve
