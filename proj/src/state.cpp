#include "sqn/state.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "sqn/exact.hpp"

namespace sqn {

double EngineeredComponent::variance() const {
    return half_width * half_width / 3.0 + gaussian_sd * gaussian_sd;
}

double EngineeredComponent::even_moment(int m) const {
    if (m < 0)
        throw std::invalid_argument("EngineeredComponent::even_moment: negative half-order");
    // <X^2m> = sum_j binom(2m, 2j) <U^2j> <G^2(m-j)>, with
    // <U^2j> = a^2j/(2j+1) and <G^2k> = (2k-1)!! g^2k.
    double acc = 0.0;
    for (int j = 0; j <= m; ++j) {
        const double u = std::pow(half_width, 2 * j) / (2.0 * j + 1.0);
        const double g = to_double(Rational(double_factorial(2 * (m - j) - 1))) *
                         std::pow(gaussian_sd, 2 * (m - j));
        acc += to_double(Rational(binomial(2 * m, 2 * j))) * u * g;
    }
    return acc;
}

double EngineeredComponent::fourth_deviation() const {
    return -(2.0 / 15.0) * std::pow(half_width, 4);
}

std::map<std::pair<int, int>, double> EngineeredState::declared_moments(int max_order) const {
    std::map<std::pair<int, int>, double> joint;
    for (int p = 0; p <= max_order; ++p) {
        for (int q = 0; p + q <= max_order; ++q) {
            if (p == 0 && q == 0)
                continue;
            // Independent symmetric components: odd powers vanish.
            if (p % 2 != 0 || q % 2 != 0) {
                joint[{p, q}] = 0.0;
                continue;
            }
            joint[{p, q}] = cos_part.even_moment(p / 2) * sin_part.even_moment(q / 2);
        }
    }
    return joint;
}

ComponentStats EngineeredState::declared_stats(int max_order) const {
    return ComponentStats::with_moments(std::sqrt(cos_part.variance()),
                                        std::sqrt(sin_part.variance()), 0.0,
                                        declared_moments(max_order));
}

void validate_state(const StateModel& state) {
    if (const auto* g = std::get_if<GaussianState>(&state)) {
        const PhysicalityReport report = validate_covariance(g->covariance);
        if (!report.pass)
            throw std::invalid_argument("validate_state: unphysical Gaussian covariance");
        return;
    }
    if (const auto* cg = std::get_if<ComponentGaussianState>(&state)) {
        ComponentStats::gaussian(cg->s_cos, cg->s_sin, cg->c);  // throws on bad parameters
        return;
    }
    if (const auto* mix = std::get_if<GaussianMixtureState>(&state)) {
        if (mix->weights.empty() || mix->weights.size() != mix->components.size())
            throw std::invalid_argument("validate_state: mixture weights/components mismatch");
        double total = 0.0;
        for (double w : mix->weights) {
            if (!(w >= 0.0))
                throw std::invalid_argument("validate_state: negative mixture weight");
            total += w;
        }
        if (std::abs(total - 1.0) > 1e-12)
            throw std::invalid_argument("validate_state: mixture weights must sum to 1");
        for (const auto& V : mix->components) {
            if (!validate_covariance(V).pass)
                throw std::invalid_argument("validate_state: unphysical mixture component");
        }
        return;
    }
    const auto& eng = std::get<EngineeredState>(state);
    if (eng.cos_part.half_width < 0.0 || eng.sin_part.half_width < 0.0 ||
        eng.cos_part.gaussian_sd < 0.0 || eng.sin_part.gaussian_sd < 0.0)
        throw std::invalid_argument("validate_state: negative engineered parameter");
    if (eng.cos_part.variance() <= 0.0 || eng.sin_part.variance() <= 0.0)
        throw std::invalid_argument("validate_state: engineered component with zero variance");
    eng.declared_stats(4);  // must at least declare fourth-order moments
}

bool has_quadrature_representation(const StateModel& state) {
    return std::holds_alternative<GaussianState>(state) ||
           std::holds_alternative<GaussianMixtureState>(state);
}

}  // namespace sqn
