#include "sqn/shapiro_wilk.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include <boost/math/distributions/normal.hpp>

#include "sqn/rng.hpp"

namespace sqn {

namespace {

// Royston (1995), AS R94 polynomial coefficients.
constexpr double kC1[] = {0.0, 0.221157, -0.147981, -2.071190, 4.434685, -2.706056};
constexpr double kC2[] = {0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633};
constexpr double kSmallM[] = {0.5440, -0.39978, 0.025054, -6.714e-4};
constexpr double kSmallLogS[] = {1.3822, -0.77857, 0.062767, -0.0020322};
constexpr double kLargeM[] = {-1.5861, -0.31082, -0.083751, 0.0038915};
constexpr double kLargeLogS[] = {-0.4803, -0.082676, 0.0030302};

template <std::size_t N>
double poly(const double (&c)[N], double x) {
    double acc = 0.0;
    for (std::size_t i = N; i-- > 0;)
        acc = acc * x + c[i];
    return acc;
}

double normal_quantile(double p) {
    static const boost::math::normal_distribution<double> nd;
    return boost::math::quantile(nd, p);
}

double upper_tail(double z) {
    static const boost::math::normal_distribution<double> nd;
    return boost::math::cdf(boost::math::complement(nd, z));
}

// Normalized weight vector a (full length); Royston's end corrections
// applied to the outermost one or two pairs.
std::vector<double> sw_weights(std::size_t n) {
    std::vector<double> m(n);
    const double an25 = static_cast<double>(n) + 0.25;
    double ssq = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        m[i] = normal_quantile((static_cast<double>(i + 1) - 0.375) / an25);
        ssq += m[i] * m[i];
    }
    const double rssq = std::sqrt(ssq);

    std::vector<double> a(n);
    if (n == 3) {
        a[0] = -std::numbers::sqrt2 / 2.0;
        a[1] = 0.0;
        a[2] = -a[0];
        return a;
    }

    const double u = 1.0 / std::sqrt(static_cast<double>(n));
    const double an = m[n - 1] / rssq + poly(kC1, u);
    if (n > 5) {
        const double an1 = m[n - 2] / rssq + poly(kC2, u);
        const double phi = (ssq - 2.0 * m[n - 1] * m[n - 1] - 2.0 * m[n - 2] * m[n - 2]) /
                           (1.0 - 2.0 * an * an - 2.0 * an1 * an1);
        const double rphi = std::sqrt(phi);
        for (std::size_t i = 2; i + 2 < n; ++i)
            a[i] = m[i] / rphi;
        a[n - 1] = an;
        a[n - 2] = an1;
        a[0] = -an;
        a[1] = -an1;
    } else {
        const double phi = (ssq - 2.0 * m[n - 1] * m[n - 1]) / (1.0 - 2.0 * an * an);
        const double rphi = std::sqrt(phi);
        for (std::size_t i = 1; i + 1 < n; ++i)
            a[i] = m[i] / rphi;
        a[n - 1] = an;
        a[0] = -an;
    }
    return a;
}

double p_value_for(double w, std::size_t n) {
    if (n == 3) {
        const double stqr = std::asin(std::sqrt(0.75));
        const double p = (6.0 / std::numbers::pi) * (std::asin(std::sqrt(w)) - stqr);
        return std::clamp(p, 0.0, 1.0);
    }
    if (n <= 11) {
        const double an = static_cast<double>(n);
        const double gamma = -2.273 + 0.459 * an;
        const double arg = gamma - std::log(1.0 - w);
        if (arg <= 0.0)
            return 1e-99;
        const double w1 = -std::log(arg);
        const double mu = poly(kSmallM, an);
        const double sigma = std::exp(poly(kSmallLogS, an));
        return upper_tail((w1 - mu) / sigma);
    }
    const double ln = std::log(static_cast<double>(n));
    const double w1 = std::log(1.0 - w);
    const double mu = poly(kLargeM, ln);
    const double sigma = std::exp(poly(kLargeLogS, ln));
    return upper_tail((w1 - mu) / sigma);
}

}  // namespace

ShapiroWilkResult shapiro_wilk(std::span<const double> samples, std::uint64_t subsample_seed) {
    if (samples.size() < 3)
        throw std::invalid_argument("shapiro_wilk: need at least 3 samples");

    ShapiroWilkResult result;
    std::vector<double> x;
    if (samples.size() > kShapiroWilkMaxN) {
        // Deterministic subsample without replacement (partial
        // Fisher-Yates over the index range).
        result.subsampled = true;
        result.subsample_seed = subsample_seed;
        std::vector<std::size_t> index(samples.size());
        for (std::size_t i = 0; i < index.size(); ++i)
            index[i] = i;
        auto engine = make_engine(split_seed(subsample_seed, 0x5bULL));
        for (std::size_t i = 0; i < kShapiroWilkMaxN; ++i) {
            std::uniform_int_distribution<std::size_t> pick(i, index.size() - 1);
            std::swap(index[i], index[pick(engine)]);
        }
        x.reserve(kShapiroWilkMaxN);
        for (std::size_t i = 0; i < kShapiroWilkMaxN; ++i)
            x.push_back(samples[index[i]]);
    } else {
        x.assign(samples.begin(), samples.end());
    }
    const std::size_t n = x.size();
    result.n_used = n;

    std::sort(x.begin(), x.end());
    if (!(x.back() - x.front() > 0.0))
        throw std::invalid_argument("shapiro_wilk: zero sample range");

    double mean = 0.0;
    for (double v : x)
        mean += v;
    mean /= static_cast<double>(n);
    double sse = 0.0;
    for (double v : x)
        sse += (v - mean) * (v - mean);
    if (!(sse > 0.0))
        throw std::invalid_argument("shapiro_wilk: zero variance");

    const auto a = sw_weights(n);
    double num = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        num += a[i] * x[i];

    result.w = std::clamp(num * num / sse, 0.0, 1.0);
    result.p_value = p_value_for(result.w, n);
    return result;
}

}  // namespace sqn
