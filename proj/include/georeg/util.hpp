#pragma once

#include <cstdint>
#include <cstring>
#include <string>

namespace georeg {

inline constexpr std::uint64_t kFnvOffset = 1469598103934665603ULL;
inline constexpr std::uint64_t kFnvPrime = 1099511628211ULL;

inline std::uint64_t fnv1a(const void* data, std::size_t size, std::uint64_t h = kFnvOffset) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < size; ++i) {
        h ^= bytes[i];
        h *= kFnvPrime;
    }
    return h;
}

inline std::uint64_t fnv1a(const std::string& s, std::uint64_t h = kFnvOffset) {
    return fnv1a(s.data(), s.size(), h);
}

inline std::uint64_t fnv1a(double value, std::uint64_t h = kFnvOffset) {
    std::uint64_t bits;
    std::memcpy(&bits, &value, sizeof(bits));
    return fnv1a(&bits, sizeof(bits), h);
}

// Formats a double with 17 significant digits (exact round trip).
std::string format_double(double value);

// Writes content to a temp file next to `path`, then renames it into place.
void write_file_atomic(const std::string& path, const std::string& content);

std::string read_file(const std::string& path);

std::uint64_t hash_file(const std::string& path);

}  // namespace georeg
