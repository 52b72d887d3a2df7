// Seed derivation and deterministic parallel chunking.
//
// All stochastic stages derive per-chunk sub-seeds from a master seed
// with a splitmix64 hop, then run an independent engine per chunk.  The
// chunk partition is fixed by kChunkSamples, never by the thread count,
// so results are bit-identical at any parallelism level.
#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>

namespace sqn {

inline constexpr std::size_t kChunkSamples = 4096;

// Independent 64-bit sub-seed for (master, stream).
std::uint64_t split_seed(std::uint64_t master, std::uint64_t stream);

inline std::mt19937_64 make_engine(std::uint64_t seed) {
    return std::mt19937_64(seed);
}

// Runs fn(chunk_index, begin, end) over [0, count) split into fixed-size
// chunks, on `threads` workers (1 = serial).  Chunk boundaries do not
// depend on the thread count.
void for_each_chunk(std::size_t count, int threads,
                    const std::function<void(std::size_t, std::size_t, std::size_t)>& fn);

}  // namespace sqn
