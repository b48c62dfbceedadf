#pragma once

#include <cstddef>

namespace ias {

/// Sets the OpenMP worker count (no-op without OpenMP). n ≤ 0 keeps the runtime default.
void set_num_threads(int n);
int num_threads();

/// Points per reduction chunk. Partial sums are formed per chunk and combined in chunk
/// order, so reductions do not depend on the worker count.
inline constexpr std::size_t kReductionChunk = 256;

constexpr std::size_t num_chunks(std::size_t n, std::size_t chunk = kReductionChunk) {
    return (n + chunk - 1) / chunk;
}

}  // namespace ias
