// Moment algebra for the phase-mixed spectral photocurrent.
//
// The mixed 2n-th moment of I_theta = cos(theta) Icos + sin(theta) Isin,
// averaged uniformly over theta, expands as
//
//   sigma^{2n} = sum_k binom(2n, 2k) W(k, n-k) <Icos^{2k} Isin^{2(n-k)}>,
//
// where W(a, b) is the theta-average of cos^{2a} sin^{2b} (a beta
// integral).  Deviations compare measured/state moments against their
// Gaussian reference values, and are identically zero for Gaussian
// statistics.  All expansion coefficients are exact rationals.
#pragma once

#include <map>
#include <utility>

#include "sqn/component_stats.hpp"
#include "sqn/exact.hpp"

namespace sqn {

// (2n-1)!! s^(2n): the 2n-th central moment of a Gaussian with standard
// deviation s, with (-1)!! = 1 for n = 0.
double gaussian_central_moment(int n, double s);

// (1/2pi) Int_0^2pi cos^(2a) sin^(2b) d(theta)
//   = (2a)! (2b)! / (4^(a+b) a! b! (a+b)!), exact.
// Supported through a + b <= 16; beyond that throws std::domain_error.
Rational phase_average_weight(int a, int b);

// Mixed 2n-th photocurrent moment sigma^{2n} from component statistics.
// Cross terms of odd power vanish under the theta-average and are never
// requested.  Missing joint moments of non-Gaussian stats throw.
double mixed_moment_from_components(int n, const ComponentStats& stats);

// delta^{2n} = sigma2n - (2n-1)!! s^(2n).
double gaussian_deviation(int n, double sigma2n, double s);

// delta_{2a,2b} = joint - (2a-1)!!(2b-1)!! s_cos^(2a) s_sin^(2b),
// except (a,b) = (1,1) whose correlated reference is
// (1 + 2c^2) s_cos^2 s_sin^2.  Requests with both a,b >= 1 beyond
// fourth order require c = 0 (outside the validity domain otherwise).
double joint_gaussian_deviation(int a, int b, double joint_moment,
                                const ComponentStats& stats);

// Consistency oracle for the fourth-order identity
//   (8/3) delta = delta_cos + delta_sin + 2 delta_c
//                 + (s_cos^2 - s_sin^2)^2 + 4 c^2 s_cos^2 s_sin^2;
// returns the residual (lhs - rhs), identically 0 for valid stats.
double fourth_order_identity_residual(const ComponentStats& stats);

// d_{n,k} = [n! - (2(n-k)-1)!! (2k-1)!!] / ((n-k)! k!), exact.
Rational dnk_coefficient(int n, int k);

struct ConstraintSides {
    double lhs = 0.0;  // photocurrent-side: delta^{2n} minus weighted state deviations
    double rhs = 0.0;  // state-side: weighted d-coefficient terms in s_cos, s_sin
};

// Order-2n constraint linking photocurrent and quantum-state deviations,
// uncorrelated components (c = 0) only:
//
//   lhs = delta^{2n} - sum_k w_k delta_{2k,2(n-k)},
//   rhs = -A_n sum_k d_{n,k} s_cos^(2(n-k)) s_sin^(2k),
//
// with w_k = binom(2n,2k) W(k, n-k) and A_n = (2n-1)!!/2^n.  The weights
// come from the beta-function phase average; lhs = rhs for any valid
// stats, and both vanish iff the state side does (Gaussian + symmetric).
ConstraintSides higher_order_constraint_residual(int n, const ComponentStats& stats);

struct DeviationSet {
    double delta4 = 0.0;     // photocurrent fourth-order deviation
    double delta_cos = 0.0;  // state-side fourth-order deviations
    double delta_sin = 0.0;
    double delta_c = 0.0;
    std::map<int, double> mixed;                        // 2n -> delta^{2n}
    std::map<std::pair<int, int>, double> state_joint;  // (2a,2b) -> delta_{2a,2b}
};

// All deviations up to order 2*max_n.  Joint entries beyond fourth order
// are only populated for uncorrelated stats (c = 0).
DeviationSet compute_deviations(const ComponentStats& stats, int max_n);

}  // namespace sqn
