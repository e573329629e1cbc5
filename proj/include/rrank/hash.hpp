#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace rrank {

// FNV-1a 64-bit. Used for toy-embedding buckets and input provenance hashes;
// stable across platforms, unlike std::hash.
inline std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed = 0xcbf29ce484222325ULL) {
    std::uint64_t h = seed;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

// Hash of a file's content, hex-encoded. Throws DataError if unreadable.
std::string hash_file_hex(const std::string& path);

std::string to_hex(std::uint64_t v);

}  // namespace rrank
