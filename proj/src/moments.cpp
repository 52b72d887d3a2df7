#include "sqn/moments.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace sqn {

namespace {

constexpr int kMaxHalfOrder = 10;

void check_half_order(int n, const char* what) {
    if (n < 0) {
        std::ostringstream os;
        os << what << ": negative half-order " << n;
        throw std::invalid_argument(os.str());
    }
    if (n > kMaxHalfOrder) {
        std::ostringstream os;
        os << what << ": half-order " << n << " beyond supported maximum " << kMaxHalfOrder;
        throw std::domain_error(os.str());
    }
}

// A_n = (2n-1)!!/2^n, the overall scale of the order-2n expansion.
Rational expansion_scale(int n) {
    return Rational(double_factorial(2 * n - 1),
                    boost::multiprecision::pow(BigInt(2), unsigned(n)));
}

// w_k = binom(2n, 2k) W(k, n-k), which reduces to A_n / (k! (n-k)!).
Rational expansion_weight(int n, int k) {
    return Rational(binomial(2 * n, 2 * k)) * phase_average_weight(k, n - k);
}

}  // namespace

double gaussian_central_moment(int n, double s) {
    if (n < 0)
        throw std::invalid_argument("gaussian_central_moment: negative half-order");
    if (!(s >= 0.0))
        throw std::invalid_argument("gaussian_central_moment: negative or non-finite s");
    return to_double(Rational(double_factorial(2 * n - 1))) * std::pow(s, 2 * n);
}

Rational phase_average_weight(int a, int b) {
    if (a < 0 || b < 0)
        throw std::invalid_argument("phase_average_weight: negative half-order");
    if (a + b > 16)
        throw std::domain_error("phase_average_weight: order beyond supported a+b <= 16");
    return Rational(factorial(2 * a) * factorial(2 * b),
                    boost::multiprecision::pow(BigInt(4), unsigned(a + b)) * factorial(a) *
                        factorial(b) * factorial(a + b));
}

double mixed_moment_from_components(int n, const ComponentStats& stats) {
    check_half_order(n, "mixed_moment_from_components");
    if (n == 0)
        return 1.0;
    double acc = 0.0;
    for (int k = 0; k <= n; ++k) {
        const double joint = stats.joint_moment(2 * k, 2 * (n - k));
        acc += to_double(expansion_weight(n, k)) * joint;
    }
    return acc;
}

double gaussian_deviation(int n, double sigma2n, double s) {
    if (n < 1)
        throw std::invalid_argument("gaussian_deviation: half-order must be >= 1");
    return sigma2n - gaussian_central_moment(n, s);
}

double joint_gaussian_deviation(int a, int b, double joint_moment,
                                const ComponentStats& stats) {
    if (a < 0 || b < 0)
        throw std::invalid_argument("joint_gaussian_deviation: negative half-order");
    const double sc = stats.s_cos();
    const double ss = stats.s_sin();
    const double c = stats.c();
    if (a == 1 && b == 1)
        return joint_moment - (1.0 + 2.0 * c * c) * sc * sc * ss * ss;
    // The factorized reference is only valid for uncorrelated components
    // once both powers are involved.
    if (a >= 1 && b >= 1 && c != 0.0)
        throw std::invalid_argument(
            "joint_gaussian_deviation: correlated stats unsupported beyond (1,1)");
    const double ref = to_double(Rational(double_factorial(2 * a - 1) * double_factorial(2 * b - 1))) *
                       std::pow(sc, 2 * a) * std::pow(ss, 2 * b);
    return joint_moment - ref;
}

double fourth_order_identity_residual(const ComponentStats& stats) {
    const double sc2 = stats.s_cos() * stats.s_cos();
    const double ss2 = stats.s_sin() * stats.s_sin();
    const double c = stats.c();

    const double sigma4 = mixed_moment_from_components(2, stats);
    const double s2 = mixed_moment_from_components(1, stats);
    const double delta = gaussian_deviation(2, sigma4, std::sqrt(s2));

    const double delta_cos = joint_gaussian_deviation(2, 0, stats.joint_moment(4, 0), stats);
    const double delta_sin = joint_gaussian_deviation(0, 2, stats.joint_moment(0, 4), stats);
    const double delta_c = joint_gaussian_deviation(1, 1, stats.joint_moment(2, 2), stats);

    const double state_side = delta_cos + delta_sin + 2.0 * delta_c + (sc2 - ss2) * (sc2 - ss2) +
                              4.0 * c * c * sc2 * ss2;
    return (8.0 / 3.0) * delta - state_side;
}

Rational dnk_coefficient(int n, int k) {
    if (n < 0)
        throw std::invalid_argument("dnk_coefficient: negative n");
    if (k < 0 || k > n)
        throw std::invalid_argument("dnk_coefficient: k out of range [0, n]");
    const BigInt num = factorial(n) - double_factorial(2 * (n - k) - 1) * double_factorial(2 * k - 1);
    return Rational(num, factorial(n - k) * factorial(k));
}

ConstraintSides higher_order_constraint_residual(int n, const ComponentStats& stats) {
    check_half_order(n, "higher_order_constraint_residual");
    if (n < 2)
        throw std::invalid_argument("higher_order_constraint_residual: requires n >= 2");
    if (stats.c() != 0.0)
        throw std::invalid_argument("higher_order_constraint_residual: requires c = 0");

    const double s2 = mixed_moment_from_components(1, stats);
    const double sigma2n = mixed_moment_from_components(n, stats);
    const double delta2n = gaussian_deviation(n, sigma2n, std::sqrt(s2));

    double state_dev = 0.0;
    for (int k = 0; k <= n; ++k) {
        const double joint = stats.joint_moment(2 * k, 2 * (n - k));
        const double dev = joint_gaussian_deviation(k, n - k, joint, stats);
        state_dev += to_double(expansion_weight(n, k)) * dev;
    }

    const double scale = to_double(expansion_scale(n));
    double second_order = 0.0;
    for (int k = 0; k <= n; ++k) {
        second_order += to_double(dnk_coefficient(n, k)) *
                        std::pow(stats.s_cos(), 2 * (n - k)) * std::pow(stats.s_sin(), 2 * k);
    }

    ConstraintSides sides;
    sides.lhs = delta2n - state_dev;
    sides.rhs = -scale * second_order;
    return sides;
}

DeviationSet compute_deviations(const ComponentStats& stats, int max_n) {
    check_half_order(max_n, "compute_deviations");
    if (max_n < 2)
        throw std::invalid_argument("compute_deviations: max_n must be >= 2");

    DeviationSet out;
    const double s = std::sqrt(mixed_moment_from_components(1, stats));
    for (int n = 2; n <= max_n; ++n) {
        const double d = gaussian_deviation(n, mixed_moment_from_components(n, stats), s);
        out.mixed[2 * n] = d;
    }
    out.delta4 = out.mixed[4];
    out.delta_cos = joint_gaussian_deviation(2, 0, stats.joint_moment(4, 0), stats);
    out.delta_sin = joint_gaussian_deviation(0, 2, stats.joint_moment(0, 4), stats);
    out.delta_c = joint_gaussian_deviation(1, 1, stats.joint_moment(2, 2), stats);

    for (int total = 2; total <= max_n; ++total) {
        for (int a = 0; a <= total; ++a) {
            const int b = total - a;
            if (stats.c() != 0.0 && !(a == 1 && b == 1) && a >= 1 && b >= 1)
                continue;  // outside the uncorrelated validity domain
            if (!stats.has_moment(2 * a, 2 * b))
                continue;
            out.state_joint[{2 * a, 2 * b}] =
                joint_gaussian_deviation(a, b, stats.joint_moment(2 * a, 2 * b), stats);
        }
    }
    return out;
}

}  // namespace sqn
