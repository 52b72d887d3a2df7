#include "sqn/component_stats.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "sqn/exact.hpp"

namespace sqn {

double gaussian_joint_moment(int p, int q, double sx, double sy, double c) {
    if (p < 0 || q < 0)
        throw std::invalid_argument("gaussian_joint_moment: negative power");
    if ((p + q) % 2 != 0)
        return 0.0;  // odd total order vanishes for zero-mean Gaussians
    // MGF expansion: <X^p Y^q> = p! q! sum_j rho^j / (i! j! k! 2^(i+k)),
    // with 2i + j = p, 2k + j = q.
    const BigInt pq_fact = factorial(p) * factorial(q);
    double acc = 0.0;
    for (int j = p % 2; j <= std::min(p, q); j += 2) {
        const int i = (p - j) / 2;
        const int k = (q - j) / 2;
        Rational coeff(pq_fact, factorial(i) * factorial(j) * factorial(k) *
                                    boost::multiprecision::pow(BigInt(2), unsigned(i + k)));
        acc += to_double(coeff) * std::pow(c, j);
    }
    return acc * std::pow(sx, p) * std::pow(sy, q);
}

ComponentStats ComponentStats::gaussian(double s_cos, double s_sin, double c) {
    return ComponentStats(s_cos, s_sin, c, true, {});
}

ComponentStats ComponentStats::with_moments(double s_cos, double s_sin, double c,
                                            std::map<std::pair<int, int>, double> joint) {
    return ComponentStats(s_cos, s_sin, c, false, std::move(joint));
}

ComponentStats::ComponentStats(double s_cos, double s_sin, double c, bool gaussian,
                               std::map<std::pair<int, int>, double> joint)
    : s_cos_(s_cos), s_sin_(s_sin), c_(c), gaussian_(gaussian), joint_(std::move(joint)) {
    validate();
}

void ComponentStats::validate() const {
    if (!std::isfinite(s_cos_) || !std::isfinite(s_sin_) || !std::isfinite(c_))
        throw std::invalid_argument("ComponentStats: non-finite parameter");
    if (s_cos_ < 0.0 || s_sin_ < 0.0)
        throw std::invalid_argument("ComponentStats: negative standard deviation");
    if (c_ < -1.0 || c_ > 1.0)
        throw std::invalid_argument("ComponentStats: correlation outside [-1, 1]");

    auto close = [](double a, double b) {
        const double scale = std::max({std::abs(a), std::abs(b), 1.0});
        return std::abs(a - b) <= 1e-9 * scale;
    };
    for (const auto& [key, value] : joint_) {
        const auto [p, q] = key;
        if (p < 0 || q < 0 || p + q > kMaxJointOrder)
            throw std::invalid_argument("ComponentStats: joint moment order out of range");
        if (!std::isfinite(value))
            throw std::invalid_argument("ComponentStats: non-finite joint moment");
    }
    if (auto it = joint_.find({2, 0}); it != joint_.end() && !close(it->second, s_cos_ * s_cos_))
        throw std::invalid_argument("ComponentStats: (2,0) moment disagrees with s_cos^2");
    if (auto it = joint_.find({0, 2}); it != joint_.end() && !close(it->second, s_sin_ * s_sin_))
        throw std::invalid_argument("ComponentStats: (0,2) moment disagrees with s_sin^2");
    if (auto it = joint_.find({1, 1}); it != joint_.end() && !close(it->second, c_ * s_cos_ * s_sin_))
        throw std::invalid_argument("ComponentStats: (1,1) moment disagrees with c*s_cos*s_sin");

    // Cauchy-Schwarz chain on pure even moments: <x^(2n)> >= <x^n>^2.
    for (const auto& [key, value] : joint_) {
        const auto [p, q] = key;
        if (q == 0 && p % 4 == 0 && p >= 4) {
            if (auto half = joint_.find({p / 2, 0}); half != joint_.end()) {
                if (value < half->second * half->second * (1.0 - 1e-9))
                    throw std::invalid_argument("ComponentStats: cos moments violate Cauchy-Schwarz");
            }
        }
        if (p == 0 && q % 4 == 0 && q >= 4) {
            if (auto half = joint_.find({0, q / 2}); half != joint_.end()) {
                if (value < half->second * half->second * (1.0 - 1e-9))
                    throw std::invalid_argument("ComponentStats: sin moments violate Cauchy-Schwarz");
            }
        }
    }
}

bool ComponentStats::has_moment(int p, int q) const {
    return gaussian_ || joint_.count({p, q}) > 0;
}

double ComponentStats::joint_moment(int p, int q) const {
    if (auto it = joint_.find({p, q}); it != joint_.end())
        return it->second;
    if (gaussian_)
        return gaussian_joint_moment(p, q, s_cos_, s_sin_, c_);
    std::ostringstream os;
    os << "ComponentStats: joint moment (" << p << "," << q
       << ") not declared for non-Gaussian stats";
    throw std::invalid_argument(os.str());
}

}  // namespace sqn
