// Two-mode field state descriptions consumed by the simulator.
#pragma once

#include <map>
#include <variant>
#include <vector>

#include "sqn/component_stats.hpp"
#include "sqn/covariance.hpp"

namespace sqn {

struct GaussianState {
    Matrix4 covariance = Matrix4::Identity();
};

// Gaussian joint law declared directly at component level (skips the
// quadrature stage when sampled).
struct ComponentGaussianState {
    double s_cos = 1.0;
    double s_sin = 1.0;
    double c = 0.0;
};

struct GaussianMixtureState {
    std::vector<double> weights;
    std::vector<Matrix4> components;
};

// One engineered component: bounded symmetric variable (uniform on
// [-half_width, half_width], negative excess kurtosis) convolved with an
// independent Gaussian of standard deviation gaussian_sd.
struct EngineeredComponent {
    double half_width = 0.0;
    double gaussian_sd = 1.0;

    double variance() const;
    // 2m-th central moment of the convolution, exact closed form.
    double even_moment(int m) const;
    // Fourth-order deviation from Gaussian: -(2/15) half_width^4.
    double fourth_deviation() const;
};

// Independent engineered joint law for (I_cos, I_sin) with declared
// moments; the masquerade construction returns one of these.
struct EngineeredState {
    EngineeredComponent cos_part;
    EngineeredComponent sin_part;

    // Declared joint central moments up to total order max_order.
    std::map<std::pair<int, int>, double> declared_moments(int max_order = 14) const;
    ComponentStats declared_stats(int max_order = 14) const;
};

using StateModel =
    std::variant<GaussianState, ComponentGaussianState, GaussianMixtureState, EngineeredState>;

// Checks physicality / weight / declared-moment invariants; throws on
// violation.
void validate_state(const StateModel& state);

// True when sampling goes through quadrature 4-vectors (Gaussian or
// mixture states); component-level states sample (I_cos, I_sin) pairs
// directly.
bool has_quadrature_representation(const StateModel& state);

}  // namespace sqn
