#include "sqn/mixture_fit.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "sqn/rng.hpp"

namespace sqn {

namespace {

// Mean log-likelihood of the theta-mixture with mean variance vbar and
// modulation ratio rho in [0, 1): v(theta) = vbar (1 + rho cos 2theta).
// v has period pi, so `nodes` effective nodes over 2pi reduce to
// nodes/2 distinct midpoint evaluations on [0, pi).
double mean_log_likelihood(std::span<const double> samples, double vbar, double rho, int nodes,
                           int threads) {
    const int k2 = std::max(2, nodes / 2);
    std::vector<double> weight(k2), rate(k2);
    for (int j = 0; j < k2; ++j) {
        const double theta = std::numbers::pi * (j + 0.5) / k2;
        const double v = vbar * (1.0 + rho * std::cos(2.0 * theta));
        weight[j] = 1.0 / std::sqrt(2.0 * std::numbers::pi * v);
        rate[j] = 0.5 / v;
    }
    const double node_norm = 1.0 / static_cast<double>(k2);

    const std::size_t n_chunks = (samples.size() + kChunkSamples - 1) / kChunkSamples;
    std::vector<double> partial(n_chunks, 0.0);
    for_each_chunk(samples.size(), threads, [&](std::size_t chunk, std::size_t begin, std::size_t end) {
        double acc = 0.0;
        for (std::size_t i = begin; i < end; ++i) {
            const double x2 = samples[i] * samples[i];
            double f = 0.0;
            for (int j = 0; j < k2; ++j)
                f += weight[j] * std::exp(-rate[j] * x2);
            acc += std::log(std::max(f * node_norm, 1e-300));
        }
        partial[chunk] = acc;
    });
    // Fixed summation order keeps the result independent of threading.
    double total = 0.0;
    for (double p : partial)
        total += p;
    return total / static_cast<double>(samples.size());
}

struct Point {
    std::array<double, 2> u;  // (log vbar, logit rho)
    double value = 0.0;       // negative mean log-likelihood
};

double rho_of(double u) { return 1.0 / (1.0 + std::exp(-u)); }

}  // namespace

MixedGaussianFit fit_phase_mixed_gaussian(std::span<const double> samples,
                                          const MixtureFitOptions& options) {
    if (samples.size() < 100)
        throw std::invalid_argument("fit_phase_mixed_gaussian: need at least 100 samples");
    if (options.quadrature_nodes < 8)
        throw std::invalid_argument("fit_phase_mixed_gaussian: too few quadrature nodes");

    // Method-of-moments start from m2, m4.
    long double s2acc = 0.0L, s4acc = 0.0L;
    for (double x : samples) {
        const long double x2 = static_cast<long double>(x) * x;
        s2acc += x2;
        s4acc += x2 * x2;
    }
    const double m2 = static_cast<double>(s2acc / static_cast<long double>(samples.size()));
    const double m4 = static_cast<double>(s4acc / static_cast<long double>(samples.size()));
    if (!(m2 > 0.0))
        throw std::invalid_argument("fit_phase_mixed_gaussian: zero variance");
    const double r2 = std::max(0.0, 2.0 * (m4 / 3.0 - m2 * m2));
    const double rho0 = std::clamp(std::sqrt(r2) / m2, 1e-3, 0.95);

    auto objective = [&](const std::array<double, 2>& u) {
        return -mean_log_likelihood(samples, std::exp(u[0]), rho_of(u[1]), options.quadrature_nodes,
                                    options.threads);
    };

    // Nelder-Mead in (log vbar, logit rho); the contract is convergence
    // when the natural-parameter spread and the mean log-likelihood
    // spread both fall under their tolerances.
    std::array<Point, 3> simplex;
    const std::array<double, 2> u0 = {std::log(m2), std::log(rho0 / (1.0 - rho0))};
    simplex[0].u = u0;
    simplex[1].u = {u0[0] + 0.05, u0[1]};
    simplex[2].u = {u0[0], u0[1] + 0.25};
    for (auto& p : simplex)
        p.value = objective(p.u);

    auto natural = [](const std::array<double, 2>& u) {
        const double vbar = std::exp(u[0]);
        const double rho = rho_of(u[1]);
        return std::array<double, 2>{std::sqrt(vbar * (1.0 + rho)), std::sqrt(vbar * (1.0 - rho))};
    };

    MixedGaussianFit fit;
    fit.quadrature_nodes = options.quadrature_nodes;

    int iter = 0;
    for (; iter < options.max_iterations; ++iter) {
        std::sort(simplex.begin(), simplex.end(),
                  [](const Point& a, const Point& b) { return a.value < b.value; });

        const auto nb = natural(simplex[0].u);
        const auto nw = natural(simplex[2].u);
        const double param_spread =
            std::max(std::abs(nb[0] - nw[0]), std::abs(nb[1] - nw[1]));
        const double value_spread = std::abs(simplex[2].value - simplex[0].value);
        if (param_spread < options.parameter_tolerance &&
            value_spread < options.log_likelihood_tolerance) {
            fit.converged = true;
            break;
        }

        const std::array<double, 2> centroid = {
            0.5 * (simplex[0].u[0] + simplex[1].u[0]),
            0.5 * (simplex[0].u[1] + simplex[1].u[1]),
        };
        auto blend = [&](double t) {
            return std::array<double, 2>{centroid[0] + t * (simplex[2].u[0] - centroid[0]),
                                         centroid[1] + t * (simplex[2].u[1] - centroid[1])};
        };

        Point reflected{blend(-1.0), 0.0};
        reflected.value = objective(reflected.u);
        if (reflected.value < simplex[0].value) {
            Point expanded{blend(-2.0), 0.0};
            expanded.value = objective(expanded.u);
            simplex[2] = expanded.value < reflected.value ? expanded : reflected;
            continue;
        }
        if (reflected.value < simplex[1].value) {
            simplex[2] = reflected;
            continue;
        }
        Point contracted{blend(0.5), 0.0};
        contracted.value = objective(contracted.u);
        if (contracted.value < simplex[2].value) {
            simplex[2] = contracted;
            continue;
        }
        // Shrink toward the best vertex.
        for (int i = 1; i < 3; ++i) {
            for (int d = 0; d < 2; ++d)
                simplex[i].u[d] = simplex[0].u[d] + 0.5 * (simplex[i].u[d] - simplex[0].u[d]);
            simplex[i].value = objective(simplex[i].u);
        }
    }
    fit.iterations = iter;

    std::sort(simplex.begin(), simplex.end(),
              [](const Point& a, const Point& b) { return a.value < b.value; });
    const auto best = natural(simplex[0].u);
    fit.s_cos = std::max(best[0], best[1]);
    fit.s_sin = std::min(best[0], best[1]);
    fit.c = 0.0;

    const double mean_ll = -simplex[0].value;
    fit.log_likelihood = mean_ll * static_cast<double>(samples.size());

    const double vbar = std::exp(simplex[0].u[0]);
    const double rho = rho_of(simplex[0].u[1]);
    const double doubled = mean_log_likelihood(samples, vbar, rho, 2 * options.quadrature_nodes,
                                               options.threads);
    fit.node_doubling_change = std::abs(doubled - mean_ll);

    // Best single Gaussian (zero-mean MLE: variance = m2).
    fit.single_gaussian_log_likelihood =
        -0.5 * static_cast<double>(samples.size()) *
        (std::log(2.0 * std::numbers::pi * m2) + 1.0);
    fit.likelihood_gain = fit.log_likelihood - fit.single_gaussian_log_likelihood;
    return fit;
}

}  // namespace sqn
