#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace pnrqkd {

/// Shortest decimal text that round-trips to the same double.
std::string format_double(double value);

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view bytes);

/// Lower-case 16-digit hex.
std::string hex64(std::uint64_t value);

/// One SplitMix64 step: advances `state` and returns the mixed output.
std::uint64_t splitmix64(std::uint64_t& state);

/// Independent stream seed for `stream` under a base `seed`.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace pnrqkd
