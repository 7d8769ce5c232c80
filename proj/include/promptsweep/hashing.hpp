#pragma once
#include <cstdint>
#include <string>
#include <string_view>

namespace promptsweep {

// Lowercase hex SHA-256 of the bytes in `data`.
std::string sha256_hex(std::string_view data);

// 64-bit FNV-1a. Stable across platforms; used to derive mock sampling keys.
std::uint64_t fnv1a64(std::string_view data, std::uint64_t basis = 0xcbf29ce484222325ULL);

std::uint64_t splitmix64(std::uint64_t x);

// Uniform double in [0, 1) from the top 53 bits of a 64-bit key.
double unit_interval(std::uint64_t key);

} // namespace promptsweep
