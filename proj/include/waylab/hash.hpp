#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "waylab/util.hpp"

namespace waylab {

/// 64-bit FNV-1a. Used for content hashes of configs, weight blocks, and
/// run directories; not a cryptographic hash.
inline std::uint64_t fnv1a64(const void* data, std::size_t size,
                             std::uint64_t seed = 0xcbf29ce484222325ULL) {
    const auto* bytes = static_cast<const std::uint8_t*>(data);
    std::uint64_t h = seed;
    for (std::size_t i = 0; i < size; ++i) {
        h ^= bytes[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::uint64_t fnv1a64(std::string_view text) {
    return fnv1a64(text.data(), text.size());
}

inline std::string to_hex(std::uint64_t v) {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[v & 0xf];
        v >>= 4;
    }
    return out;
}

inline std::uint64_t hash_file(const std::filesystem::path& path) {
    auto bytes = read_binary_file(path);
    return fnv1a64(bytes.data(), bytes.size());
}

/// Content hash of a directory tree: every regular file's relative path and
/// byte hash, folded in path-sorted order so the result is layout-stable.
inline std::uint64_t hash_directory(const std::filesystem::path& root) {
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::recursive_directory_iterator(root)) {
        if (entry.is_regular_file()) files.push_back(entry.path());
    }
    std::vector<std::string> keys;
    keys.reserve(files.size());
    for (const auto& f : files) {
        keys.push_back(f.lexically_relative(root).generic_string());
    }
    std::sort(keys.begin(), keys.end());
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const auto& key : keys) {
        h = fnv1a64(key.data(), key.size(), h);
        std::uint64_t fh = hash_file(root / key);
        h = fnv1a64(&fh, sizeof(fh), h);
    }
    return h;
}

}  // namespace waylab
