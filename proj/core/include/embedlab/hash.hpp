#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>

namespace embedlab::hash {

inline constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ull;
inline constexpr std::uint64_t kFnvPrime = 0x100000001b3ull;

// FNV-1a over raw bytes; chainable via the seed parameter.
inline std::uint64_t fnv1a64(std::span<const std::byte> bytes,
                             std::uint64_t seed = kFnvOffset) {
    std::uint64_t h = seed;
    for (std::byte b : bytes) {
        h ^= static_cast<std::uint64_t>(b);
        h *= kFnvPrime;
    }
    return h;
}

inline std::uint64_t fnv1a64(std::string_view text, std::uint64_t seed = kFnvOffset) {
    return fnv1a64(std::as_bytes(std::span(text.data(), text.size())), seed);
}

inline std::uint64_t fnv1a64(std::span<const double> values,
                             std::uint64_t seed = kFnvOffset) {
    return fnv1a64(std::as_bytes(values), seed);
}

std::string to_hex(std::uint64_t h);

}  // namespace embedlab::hash
