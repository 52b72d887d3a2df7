#include "sqn/rng.hpp"

#include <atomic>
#include <thread>
#include <vector>

namespace sqn {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace

std::uint64_t split_seed(std::uint64_t master, std::uint64_t stream) {
    std::uint64_t state = master;
    std::uint64_t out = splitmix64(state);
    state ^= stream * 0xda942042e4dd58b5ULL;
    out ^= splitmix64(state);
    return out;
}

void for_each_chunk(std::size_t count, int threads,
                    const std::function<void(std::size_t, std::size_t, std::size_t)>& fn) {
    const std::size_t n_chunks = (count + kChunkSamples - 1) / kChunkSamples;
    if (threads <= 1 || n_chunks <= 1) {
        for (std::size_t ci = 0; ci < n_chunks; ++ci) {
            const std::size_t begin = ci * kChunkSamples;
            const std::size_t end = std::min(count, begin + kChunkSamples);
            fn(ci, begin, end);
        }
        return;
    }
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            const std::size_t ci = next.fetch_add(1);
            if (ci >= n_chunks)
                return;
            const std::size_t begin = ci * kChunkSamples;
            const std::size_t end = std::min(count, begin + kChunkSamples);
            fn(ci, begin, end);
        }
    };
    std::vector<std::thread> pool;
    const int n_workers = std::min<int>(threads, static_cast<int>(n_chunks));
    pool.reserve(n_workers);
    for (int t = 0; t < n_workers; ++t)
        pool.emplace_back(worker);
    for (auto& th : pool)
        th.join();
}

}  // namespace sqn
