#include "sqn/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include <boost/math/distributions/normal.hpp>

#include "sqn/exact.hpp"
#include "sqn/rng.hpp"

namespace sqn {

namespace {

constexpr int kHighestRatioOrder = 7;  // ratios r^{2n} for n = 2..7

// Central power sums around a fixed mean, long double accumulation.
std::vector<long double> central_sums(std::span<const double> samples, double mean, int max_order) {
    std::vector<long double> sums(max_order + 1, 0.0L);
    for (double x : samples) {
        const long double d = static_cast<long double>(x) - mean;
        long double p = d;
        for (int k = 2; k <= max_order; ++k) {
            p *= d;
            sums[k] += p;
        }
    }
    return sums;
}

std::vector<double> central_moments_of(std::span<const double> samples, int max_order) {
    long double mean_acc = 0.0L;
    for (double x : samples)
        mean_acc += x;
    const double mean = static_cast<double>(mean_acc / static_cast<long double>(samples.size()));
    auto sums = central_sums(samples, mean, max_order);
    std::vector<double> moments(max_order + 1, 0.0);
    for (int k = 2; k <= max_order; ++k)
        moments[k] = static_cast<double>(sums[k] / static_cast<long double>(samples.size()));
    return moments;  // moments[0], moments[1] unused (0)
}

double bonferroni_threshold(double significance, int n_tests) {
    // Map the per-order z to a family budget, then split it across the
    // tested orders.
    boost::math::normal_distribution<double> nd;
    const double family_alpha = 2.0 * boost::math::cdf(boost::math::complement(nd, significance));
    const double per_order = family_alpha / std::max(1, n_tests);
    return boost::math::quantile(boost::math::complement(nd, per_order / 2.0));
}

}  // namespace

const MomentEstimate& MomentEstimates::at(int order) const {
    for (const auto& m : central)
        if (m.order == order)
            return m;
    throw std::out_of_range("MomentEstimates: order not present");
}

MomentEstimates estimate_moments(std::span<const double> samples, int max_order,
                                 std::size_t bootstrap_rounds, std::uint64_t seed, int threads) {
    if (max_order < 1 || max_order > 14)
        throw std::invalid_argument("estimate_moments: max_order must be in [1, 14]");
    const std::size_t min_n = std::max<std::size_t>(30, 2 * static_cast<std::size_t>(max_order));
    if (samples.size() < min_n)
        throw std::invalid_argument("estimate_moments: insufficient samples");

    const auto point = central_moments_of(samples, max_order);

    // Bootstrap standard errors; resamples are seeded individually, so
    // the result is independent of the parallel schedule.
    std::vector<std::vector<double>> replicates(bootstrap_rounds);
    for_each_chunk(bootstrap_rounds, threads, [&](std::size_t, std::size_t begin, std::size_t end) {
        std::vector<double> resample(samples.size());
        for (std::size_t r = begin; r < end; ++r) {
            auto engine = make_engine(split_seed(seed, 0xb007ULL + r));
            std::uniform_int_distribution<std::size_t> pick(0, samples.size() - 1);
            for (auto& v : resample)
                v = samples[pick(engine)];
            replicates[r] = central_moments_of(resample, max_order);
        }
    });

    MomentEstimates out;
    out.mean = 0.0;
    {
        long double acc = 0.0L;
        for (double x : samples)
            acc += x;
        out.mean = static_cast<double>(acc / static_cast<long double>(samples.size()));
    }
    out.n_samples = samples.size();
    for (int k = 1; k <= max_order; ++k) {
        MomentEstimate est;
        est.order = k;
        est.value = k >= 2 ? point[k] : 0.0;
        est.n_samples = samples.size();
        if (bootstrap_rounds >= 2 && k >= 2) {
            long double s = 0.0L, s2 = 0.0L;
            for (const auto& rep : replicates) {
                s += rep[k];
                s2 += static_cast<long double>(rep[k]) * rep[k];
            }
            const long double m = s / static_cast<long double>(bootstrap_rounds);
            const long double var =
                std::max(0.0L, s2 / static_cast<long double>(bootstrap_rounds) - m * m);
            est.std_error = static_cast<double>(std::sqrt(
                var * static_cast<long double>(bootstrap_rounds) / (bootstrap_rounds - 1.0L)));
        }
        out.central.push_back(est);
    }
    return out;
}

namespace {

struct RatioReplicates {
    // index [r][n]: bootstrap replicate r, ratio order 2n (n = 1 stores s^2)
    std::vector<std::array<double, kHighestRatioOrder + 1>> rows;
    std::vector<double> d_rows;  // third-order ratio replicates
};

std::array<double, kHighestRatioOrder + 1> ratio_row(const std::vector<double>& moments) {
    std::array<double, kHighestRatioOrder + 1> row{};
    const double s2 = moments[2];
    row[1] = s2;
    for (int n = 2; n <= kHighestRatioOrder; ++n)
        row[n] = moments[2 * n] / std::pow(s2, n);
    return row;
}

}  // namespace

GaussianityReport gaussianity_report_batched(std::span<const double> samples,
                                             std::span<const std::size_t> batch_sizes,
                                             const AnalysisOptions& options) {
    const int max_order = 14;
    const std::size_t min_n = std::max<std::size_t>(30, 2 * max_order);
    if (samples.size() < min_n)
        throw std::invalid_argument("gaussianity_report: insufficient samples");

    const auto point = central_moments_of(samples, max_order);
    const double s2 = point[2];
    if (!(s2 > 0.0))
        throw std::invalid_argument("gaussianity_report: zero variance");
    const double s = std::sqrt(s2);

    const std::size_t rounds = std::max<std::size_t>(2, options.bootstrap_rounds);
    RatioReplicates reps;
    reps.rows.resize(rounds);
    reps.d_rows.resize(rounds);
    for_each_chunk(rounds, options.threads, [&](std::size_t, std::size_t begin, std::size_t end) {
        std::vector<double> resample(samples.size());
        for (std::size_t r = begin; r < end; ++r) {
            auto engine = make_engine(split_seed(options.seed, 0xb007ULL + r));
            std::uniform_int_distribution<std::size_t> pick(0, samples.size() - 1);
            for (auto& v : resample)
                v = samples[pick(engine)];
            const auto m = central_moments_of(resample, max_order);
            reps.rows[r] = ratio_row(m);
            reps.d_rows[r] = m[3] / std::pow(m[2], 1.5);
        }
    });

    auto std_error_of = [&](auto&& extract) {
        long double acc = 0.0L, acc2 = 0.0L;
        for (std::size_t r = 0; r < rounds; ++r) {
            const long double v = extract(r);
            acc += v;
            acc2 += v * v;
        }
        const long double m = acc / static_cast<long double>(rounds);
        const long double var = std::max(0.0L, acc2 / static_cast<long double>(rounds) - m * m);
        return static_cast<double>(
            std::sqrt(var * static_cast<long double>(rounds) / (rounds - 1.0L)));
    };

    GaussianityReport report;
    report.n_samples = samples.size();
    report.s = s;
    report.s2_std_error = std_error_of([&](std::size_t r) { return reps.rows[r][1]; });
    report.d = point[3] / std::pow(s2, 1.5);
    report.d_std_error = std_error_of([&](std::size_t r) { return reps.d_rows[r]; });

    const int n_tested = kHighestRatioOrder - 1;  // orders 4..14
    report.per_order_threshold = bonferroni_threshold(options.significance, n_tested);

    report.all_pass = true;
    for (int n = 2; n <= kHighestRatioOrder; ++n) {
        RatioEntry entry;
        entry.order = 2 * n;
        entry.value = point[2 * n] / std::pow(s2, n);
        entry.std_error = std_error_of([&](std::size_t r) { return reps.rows[r][n]; });
        entry.reference = to_double(Rational(double_factorial(2 * n - 1)));
        entry.pass = std::abs(entry.value - entry.reference) <=
                     report.per_order_threshold * entry.std_error;
        report.all_pass = report.all_pass && entry.pass;
        report.ratios.push_back(entry);
        if (n == 2) {
            report.k = entry.value;
            report.k_std_error = entry.std_error;
        }
    }

    if (!batch_sizes.empty()) {
        // Paper-style systematic diagnostic: scatter of per-batch means
        // relative to the sampling-error expectation.
        std::size_t offset = 0;
        long double acc = 0.0L, acc2 = 0.0L;
        std::size_t used = 0;
        for (std::size_t b : batch_sizes) {
            if (b == 0 || offset + b > samples.size())
                break;
            long double m = 0.0L;
            for (std::size_t i = offset; i < offset + b; ++i)
                m += samples[i];
            m /= static_cast<long double>(b);
            acc += m;
            acc2 += m * m;
            offset += b;
            ++used;
        }
        if (used >= 2) {
            const long double mean_of_means = acc / static_cast<long double>(used);
            const long double var_means = std::max(
                0.0L, (acc2 / static_cast<long double>(used) - mean_of_means * mean_of_means) *
                          static_cast<long double>(used) / (used - 1.0L));
            const double expected = s2 * static_cast<double>(batch_sizes.size()) /
                                    static_cast<double>(samples.size());
            if (expected > 0.0)
                report.mean_drift = static_cast<double>(var_means) / expected;
        }
    }
    return report;
}

GaussianityReport gaussianity_report(std::span<const double> samples,
                                     const AnalysisOptions& options) {
    return gaussianity_report_batched(samples, {}, options);
}

AsymmetryEstimate infer_asymmetry(const GaussianityReport& report) {
    AsymmetryEstimate est;
    const double s2 = report.s * report.s;
    est.delta = (report.k - 3.0) * s2 * s2;
    est.delta_std_error = report.k_std_error * s2 * s2;

    if (est.delta < 0.0 && std::abs(est.delta) > 3.0 * est.delta_std_error) {
        // Eq.-(15)-type right side is nonnegative for Gaussian states.
        est.consistent_with_gaussian_state = false;
        est.value = 0.0;
        est.std_error = est.delta_std_error;
        return est;
    }
    const double clipped = std::max(0.0, est.delta);
    est.value = std::sqrt((8.0 / 3.0) * clipped);
    est.std_error = est.value > 0.0
                        ? (4.0 / 3.0) * est.delta_std_error / est.value
                        : std::sqrt((8.0 / 3.0) * est.delta_std_error);
    return est;
}

std::vector<double> central_moments_to_cumulants(std::span<const double> central) {
    // central[k] = m_k for k >= 2 (m_0 = 1, m_1 = 0 implied); returns
    // kappa in the same layout.  kappa_n = m_n - sum C(n-1, j-1) kappa_j m_{n-j}.
    const int max_order = static_cast<int>(central.size()) - 1;
    std::vector<double> kappa(central.size(), 0.0);
    std::vector<double> m(central.begin(), central.end());
    if (max_order >= 0)
        m[0] = 1.0;
    if (max_order >= 1)
        m[1] = 0.0;
    for (int n = 2; n <= max_order; ++n) {
        double acc = m[n];
        for (int j = 2; j <= n - 2; ++j)
            acc -= to_double(Rational(binomial(n - 1, j - 1))) * kappa[j] * m[n - j];
        kappa[n] = acc;
    }
    return kappa;
}

std::vector<double> cumulants_to_central_moments(std::span<const double> cumulants) {
    const int max_order = static_cast<int>(cumulants.size()) - 1;
    std::vector<double> m(cumulants.size(), 0.0);
    if (max_order >= 0)
        m[0] = 1.0;
    for (int n = 2; n <= max_order; ++n) {
        double acc = cumulants[n];
        for (int j = 2; j <= n - 2; ++j)
            acc += to_double(Rational(binomial(n - 1, j - 1))) * cumulants[j] * m[n - j];
        m[n] = acc;
    }
    if (max_order >= 1)
        m[1] = 0.0;
    return m;
}

namespace {

std::vector<double> apply_background_correction(const std::vector<double>& central,
                                                double background_variance) {
    auto kappa = central_moments_to_cumulants(central);
    kappa[2] -= background_variance;
    return cumulants_to_central_moments(kappa);
}

}  // namespace

MomentEstimates correct_gaussian_background(const MomentEstimates& moments,
                                            double background_variance) {
    if (!(background_variance >= 0.0))
        throw std::invalid_argument("correct_gaussian_background: negative background variance");
    const int max_order = static_cast<int>(moments.central.size());
    std::vector<double> central(max_order + 1, 0.0);
    std::vector<double> errors(max_order + 1, 0.0);
    for (const auto& m : moments.central) {
        central[m.order] = m.value;
        errors[m.order] = m.std_error;
    }
    if (max_order < 2 || !(background_variance < central[2]))
        throw std::invalid_argument(
            "correct_gaussian_background: background exceeds the measured variance");

    const auto corrected = apply_background_correction(central, background_variance);

    // First-order uncertainty propagation through the correction map,
    // numerical Jacobian, independent-errors approximation.
    std::vector<double> corrected_errors(max_order + 1, 0.0);
    for (int j = 2; j <= max_order; ++j) {
        if (errors[j] == 0.0)
            continue;
        const double h = errors[j] * 1e-3 + 1e-12;
        auto bumped = central;
        bumped[j] += h;
        const auto shifted = apply_background_correction(bumped, background_variance);
        for (int i = 2; i <= max_order; ++i) {
            const double deriv = (shifted[i] - corrected[i]) / h;
            corrected_errors[i] += deriv * deriv * errors[j] * errors[j];
        }
    }

    MomentEstimates out = moments;
    for (auto& m : out.central) {
        m.value = m.order >= 2 ? corrected[m.order] : 0.0;
        m.std_error = std::sqrt(corrected_errors[m.order]);
        m.method = moments.central.front().method;
    }
    return out;
}

std::vector<double> combine_two_beams(std::span<const double> a, std::span<const double> b,
                                      int sign) {
    if (a.size() != b.size())
        throw std::invalid_argument("combine_two_beams: length mismatch");
    if (sign != 1 && sign != -1)
        throw std::invalid_argument("combine_two_beams: sign must be +1 or -1");
    std::vector<double> out(a.size());
    const double r = 1.0 / std::sqrt(2.0);
    for (std::size_t i = 0; i < a.size(); ++i)
        out[i] = r * (a[i] + sign * b[i]);
    return out;
}

std::string format_with_uncertainty(double value, double std_error) {
    std::ostringstream os;
    if (!(std_error > 0.0)) {
        os.precision(6);
        os << value;
        return os.str();
    }
    // Keep two significant digits when the leading digits of the error
    // are small (below 355), one otherwise; 950+ rounds up a decade.
    int decade = static_cast<int>(std::floor(std::log10(std_error)));
    const int leading3 = static_cast<int>(std::lround(std_error * std::pow(10.0, 2 - decade)));
    int sig = 1;
    if (leading3 >= 950) {
        ++decade;
        sig = 2;
    } else if (leading3 <= 354) {
        sig = 2;
    }
    const int place = decade - sig + 1;  // decade of the last displayed digit
    const long err_int = std::lround(std_error * std::pow(10.0, -place));

    os.setf(std::ios::fixed);
    if (place <= 0) {
        os.precision(-place);
        os << value << "(" << err_int << ")";
    } else {
        const double scale = std::pow(10.0, place);
        os.precision(0);
        os << std::round(value / scale) * scale << "(" << static_cast<double>(err_int) * scale
           << ")";
    }
    return os.str();
}

}  // namespace sqn
