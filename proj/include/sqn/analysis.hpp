// Statistical pipeline: central-moment estimation with bootstrap
// uncertainties, Gaussianity reports against the (2n-1)!! references,
// asymmetry inference from the fourth-order identity, Gaussian
// background correction at the cumulant level, and two-beam
// combinations.
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace sqn {

struct MomentEstimate {
    int order = 0;
    double value = 0.0;
    double std_error = 0.0;
    std::string method = "bootstrap";
    std::size_t n_samples = 0;
};

struct MomentEstimates {
    std::vector<MomentEstimate> central;  // orders 1..max_order (order 1 = 0 by construction)
    double mean = 0.0;
    std::size_t n_samples = 0;

    const MomentEstimate& at(int order) const;
};

struct AnalysisOptions {
    int max_order = 14;
    std::size_t bootstrap_rounds = 200;
    std::uint64_t seed = 1;
    int threads = 1;
    // Per-order verdicts use `significance` standard errors with a
    // Bonferroni adjustment across the tested higher orders.
    double significance = 3.0;
};

// Mean-subtracted central moments up to max_order with seed-deterministic
// bootstrap standard errors.  Requires n >= max(30, 2 max_order).
MomentEstimates estimate_moments(std::span<const double> samples, int max_order,
                                 std::size_t bootstrap_rounds, std::uint64_t seed = 1,
                                 int threads = 1);

struct RatioEntry {
    int order = 0;          // 2n
    double value = 0.0;     // r^{2n} = sigma^{2n} / s^{2n}
    double std_error = 0.0;
    double reference = 0.0;  // (2n-1)!!
    bool pass = false;
};

struct GaussianityReport {
    double d = 0.0;  // sigma^{3}/s^3, skewness-type
    double d_std_error = 0.0;
    double k = 0.0;  // sigma^{4}/s^4, kurtosis-type
    double k_std_error = 0.0;
    double s = 0.0;  // mixed standard deviation
    double s2_std_error = 0.0;
    std::vector<RatioEntry> ratios;  // n = 2..7
    std::optional<std::pair<double, double>> w_test;  // (W, p)
    bool all_pass = false;
    double per_order_threshold = 0.0;  // standard-error multiplier after Bonferroni
    std::size_t n_samples = 0;
    // Per-batch mean-drift diagnostic (ratio of observed batch-mean
    // scatter to the sampling-error expectation); only set when batch
    // structure is supplied.
    std::optional<double> mean_drift = std::nullopt;
};

// Ratios r^{2n} for n <= 7 with bootstrap errors, flagged against the
// Gaussian references at the Bonferroni-adjusted significance.
GaussianityReport gaussianity_report(std::span<const double> samples,
                                     const AnalysisOptions& options = {});

// Same, with a batch structure (e.g. scan settings) used for the
// mean-drift diagnostic.
GaussianityReport gaussianity_report_batched(std::span<const double> samples,
                                             std::span<const std::size_t> batch_sizes,
                                             const AnalysisOptions& options = {});

struct AsymmetryEstimate {
    double value = 0.0;       // |s_cos^2 - s_sin^2|
    double std_error = 0.0;
    double delta = 0.0;       // (k - 3) s^4
    double delta_std_error = 0.0;
    bool consistent_with_gaussian_state = true;  // false when delta < 0 beyond errors
};

// Under the Gaussian-state assumption (c = 0):
// |s_cos^2 - s_sin^2| = sqrt((8/3) delta) with delta = (k - 3) s^4.
// A significantly negative delta is reported as inconsistent rather
// than failing.
AsymmetryEstimate infer_asymmetry(const GaussianityReport& report);

// Central moments -> cumulants (zero-mean convention), orders 2..n.
std::vector<double> central_moments_to_cumulants(std::span<const double> central);
std::vector<double> cumulants_to_central_moments(std::span<const double> cumulants);

// Removes an independent additive Gaussian background of the given
// variance: subtracts it from the second cumulant and leaves all higher
// cumulants unchanged.  Uncertainties are propagated through the
// numerical Jacobian of the correction map.
MomentEstimates correct_gaussian_background(const MomentEstimates& moments,
                                            double background_variance);

// (a +/- b)/sqrt2 elementwise; the two-beam modal combination.
std::vector<double> combine_two_beams(std::span<const double> a, std::span<const double> b,
                                      int sign);

// "2.9987(17)"-style formatting of value with uncertainty in the last
// digits.
std::string format_with_uncertainty(double value, double std_error);

}  // namespace sqn
