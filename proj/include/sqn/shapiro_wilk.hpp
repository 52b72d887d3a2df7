// Shapiro-Wilk W normality test, Royston's extension (valid for
// 3 <= n <= 5000).  Larger inputs are subsampled without replacement
// with a recorded seed.
#pragma once

#include <cstdint>
#include <span>

namespace sqn {

struct ShapiroWilkResult {
    double w = 0.0;        // W statistic, in (0, 1]
    double p_value = 0.0;  // upper-tail probability under normality
    std::size_t n_used = 0;
    bool subsampled = false;
    std::uint64_t subsample_seed = 0;
};

inline constexpr std::size_t kShapiroWilkMaxN = 5000;

ShapiroWilkResult shapiro_wilk(std::span<const double> samples, std::uint64_t subsample_seed = 0);

}  // namespace sqn
