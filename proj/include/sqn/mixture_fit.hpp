// Maximum-likelihood fit of the phase-mixed Gaussian density
//
//   f(x) = (1/2pi) Int_0^2pi N(x; 0, v(theta)) dtheta,
//   v(theta) = cos^2 s_cos^2 + sin^2 s_sin^2 + 2 sin cos c s_cos s_sin.
//
// The density depends on (s_cos, s_sin, c) only through the mean and
// modulation amplitude of v(theta); the correlation is a gauge freedom
// absorbed into the principal axes, so fits report c = 0 with the
// convention s_cos >= s_sin.
#pragma once

#include <cstdint>
#include <span>

namespace sqn {

struct MixtureFitOptions {
    int quadrature_nodes = 64;  // effective nodes over the full period
    int max_iterations = 500;
    double parameter_tolerance = 1e-6;       // on (s_cos, s_sin)
    double log_likelihood_tolerance = 1e-9;  // mean log-likelihood per iteration
    int threads = 1;
};

struct MixedGaussianFit {
    double s_cos = 1.0;  // labeled s_cos >= s_sin
    double s_sin = 1.0;
    double c = 0.0;
    double log_likelihood = 0.0;  // total, at the fitted parameters
    bool converged = false;
    int iterations = 0;
    double single_gaussian_log_likelihood = 0.0;
    double likelihood_gain = 0.0;  // log_likelihood - single-Gaussian fit
    int quadrature_nodes = 64;
    // Self-check: |mean log-likelihood change| when the node count is
    // doubled; must be < 1e-6 for a trustworthy quadrature.
    double node_doubling_change = 0.0;
};

// Zero-mean samples expected (the phase-mixed photocurrent has zero
// mean by construction).
MixedGaussianFit fit_phase_mixed_gaussian(std::span<const double> samples,
                                          const MixtureFitOptions& options = {});

}  // namespace sqn
