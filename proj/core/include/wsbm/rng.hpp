#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace wsbm {

using Rng = std::mt19937_64;

/// Derives an independent seed for a named sub-stream of a master seed.
///
/// Every random consumer (restart `r`, trial `t`, holdout split, ...) draws from
/// its own stream so results do not depend on scheduling or worker count.
std::uint64_t derive_seed(std::uint64_t master, std::string_view stream, std::uint64_t index = 0);

inline Rng make_rng(std::uint64_t master, std::string_view stream, std::uint64_t index = 0) {
  return Rng(derive_seed(master, stream, index));
}

/// Uniform draw on the open interval (0, 1).
double uniform_open(Rng& rng);

/// Uniform integer in [0, n), unbiased (multiply-shift with rejection). n > 0.
std::uint64_t uniform_index(Rng& rng, std::uint64_t n);

/// Standard normal draw (Box-Muller; stable across standard libraries).
double standard_normal(Rng& rng);

}  // namespace wsbm
