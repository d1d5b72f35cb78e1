#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace fscale {

// splitmix64, used to derive independent per-task seeds from one root seed
// so concurrent work never shares a stream.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t root, std::uint64_t task) {
    return mix64(root ^ mix64(task));
}

inline std::uint64_t derive_seed(std::uint64_t root, std::string_view tag) {
    std::uint64_t h = 1469598103934665603ULL;  // FNV-1a
    for (char c : tag) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ULL;
    }
    return mix64(root ^ h);
}

using Rng = std::mt19937_64;

}  // namespace fscale
