#include "sqn/simulator.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "sqn/rng.hpp"

namespace sqn {

namespace {

// Factor L with L L^T = V, tolerant of semidefinite covariances.
Eigen::Matrix4d covariance_factor(const Matrix4& V) {
    Eigen::SelfAdjointEigenSolver<Matrix4> es(0.5 * (V + V.transpose()));
    Eigen::Vector4d lambda = es.eigenvalues().cwiseMax(0.0);
    return es.eigenvectors() * lambda.cwiseSqrt().asDiagonal();
}

void draw_normal4(std::mt19937_64& engine, std::normal_distribution<double>& normal,
                  Eigen::Vector4d& z) {
    for (int i = 0; i < 4; ++i)
        z(i) = normal(engine);
}

double engineered_draw(const EngineeredComponent& part, std::mt19937_64& engine,
                       std::uniform_real_distribution<double>& uniform,
                       std::normal_distribution<double>& normal) {
    const double u = part.half_width > 0.0 ? part.half_width * (2.0 * uniform(engine) - 1.0) : 0.0;
    const double g = part.gaussian_sd > 0.0 ? part.gaussian_sd * normal(engine) : 0.0;
    return u + g;
}

}  // namespace

std::vector<QuadratureSample> sample_quadratures(const StateModel& state, std::size_t n,
                                                 std::uint64_t seed, int threads) {
    if (n < 1)
        throw std::invalid_argument("sample_quadratures: n must be >= 1");
    validate_state(state);
    if (!has_quadrature_representation(state))
        throw std::invalid_argument(
            "sample_quadratures: component-level state has no quadrature representation; "
            "use sample_component_pairs");

    std::vector<QuadratureSample> out(n);

    if (const auto* g = std::get_if<GaussianState>(&state)) {
        const Eigen::Matrix4d L = covariance_factor(g->covariance);
        for_each_chunk(n, threads, [&](std::size_t chunk, std::size_t begin, std::size_t end) {
            auto engine = make_engine(split_seed(seed, chunk));
            std::normal_distribution<double> normal;
            Eigen::Vector4d z;
            for (std::size_t i = begin; i < end; ++i) {
                draw_normal4(engine, normal, z);
                const Eigen::Vector4d x = L * z;
                out[i] = {x(0), x(1), x(2), x(3)};
            }
        });
        return out;
    }

    const auto& mix = std::get<GaussianMixtureState>(state);
    std::vector<Eigen::Matrix4d> factors;
    factors.reserve(mix.components.size());
    for (const auto& V : mix.components)
        factors.push_back(covariance_factor(V));
    std::vector<double> cdf(mix.weights.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < mix.weights.size(); ++i) {
        acc += mix.weights[i];
        cdf[i] = acc;
    }
    cdf.back() = 1.0;

    for_each_chunk(n, threads, [&](std::size_t chunk, std::size_t begin, std::size_t end) {
        auto engine = make_engine(split_seed(seed, chunk));
        std::normal_distribution<double> normal;
        std::uniform_real_distribution<double> uniform(0.0, 1.0);
        Eigen::Vector4d z;
        for (std::size_t i = begin; i < end; ++i) {
            const double u = uniform(engine);
            std::size_t idx = std::lower_bound(cdf.begin(), cdf.end(), u) - cdf.begin();
            idx = std::min(idx, factors.size() - 1);
            draw_normal4(engine, normal, z);
            const Eigen::Vector4d x = factors[idx] * z;
            out[i] = {x(0), x(1), x(2), x(3)};
        }
    });
    return out;
}

std::vector<ComponentPair> apply_measurement(const std::vector<QuadratureSample>& samples,
                                             const MeasurementModel& model) {
    const MeasurementMatrix& m = model.matrix();
    std::vector<ComponentPair> out(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const auto& s = samples[i];
        out[i].i_cos = m(0, 0) * s.p_s + m(0, 1) * s.q_s + m(0, 2) * s.p_a + m(0, 3) * s.q_a;
        out[i].i_sin = m(1, 0) * s.p_s + m(1, 1) * s.q_s + m(1, 2) * s.p_a + m(1, 3) * s.q_a;
    }
    return out;
}

std::vector<ComponentPair> sample_component_pairs(const StateModel& state,
                                                  const MeasurementModel& model, std::size_t n,
                                                  std::uint64_t seed, int threads) {
    if (has_quadrature_representation(state))
        return apply_measurement(sample_quadratures(state, n, seed, threads), model);

    if (n < 1)
        throw std::invalid_argument("sample_component_pairs: n must be >= 1");
    validate_state(state);
    std::vector<ComponentPair> out(n);

    if (const auto* cg = std::get_if<ComponentGaussianState>(&state)) {
        // Bivariate normal via conditional factorization.
        const double sc = cg->s_cos, ss = cg->s_sin, c = cg->c;
        const double resid = ss * std::sqrt(std::max(0.0, 1.0 - c * c));
        for_each_chunk(n, threads, [&](std::size_t chunk, std::size_t begin, std::size_t end) {
            auto engine = make_engine(split_seed(seed, chunk));
            std::normal_distribution<double> normal;
            for (std::size_t i = begin; i < end; ++i) {
                const double z1 = normal(engine);
                const double z2 = normal(engine);
                out[i].i_cos = sc * z1;
                out[i].i_sin = ss * c * z1 + resid * z2;
            }
        });
        return out;
    }

    const auto& eng = std::get<EngineeredState>(state);
    for_each_chunk(n, threads, [&](std::size_t chunk, std::size_t begin, std::size_t end) {
        auto engine = make_engine(split_seed(seed, chunk));
        std::normal_distribution<double> normal;
        std::uniform_real_distribution<double> uniform(0.0, 1.0);
        for (std::size_t i = begin; i < end; ++i) {
            out[i].i_cos = engineered_draw(eng.cos_part, engine, uniform, normal);
            out[i].i_sin = engineered_draw(eng.sin_part, engine, uniform, normal);
        }
    });
    return out;
}

namespace {

std::vector<double> draw_thetas(std::size_t n, const PhaseMixingModel& model, std::uint64_t seed) {
    std::vector<double> thetas(n);
    if (const auto* locked = std::get_if<LockedPhase>(&model)) {
        std::fill(thetas.begin(), thetas.end(), locked->theta);
        return thetas;
    }
    if (std::holds_alternative<UniformPerSample>(model)) {
        for_each_chunk(n, 1, [&](std::size_t chunk, std::size_t begin, std::size_t end) {
            auto engine = make_engine(split_seed(seed, chunk));
            std::uniform_real_distribution<double> uniform(0.0, 2.0 * M_PI);
            for (std::size_t i = begin; i < end; ++i)
                thetas[i] = uniform(engine);
        });
        return thetas;
    }
    // Random walk: sequential by nature, one stream.
    const auto& walk = std::get<RandomWalkPhase>(model);
    if (!(walk.step_stddev >= 0.0))
        throw std::invalid_argument("phase_mix: negative random-walk step");
    auto engine = make_engine(split_seed(seed, 0));
    std::normal_distribution<double> normal(0.0, 1.0);
    double theta = walk.initial_theta;
    for (std::size_t i = 0; i < n; ++i) {
        thetas[i] = theta;
        theta += walk.step_stddev * normal(engine);
    }
    return thetas;
}

}  // namespace

std::vector<double> phase_mix(const std::vector<ComponentPair>& pairs,
                              const PhaseMixingModel& model, std::uint64_t seed) {
    const auto thetas = draw_thetas(pairs.size(), model, seed);
    std::vector<double> out(pairs.size());
    for (std::size_t i = 0; i < pairs.size(); ++i)
        out[i] = std::cos(thetas[i]) * pairs[i].i_cos + std::sin(thetas[i]) * pairs[i].i_sin;
    return out;
}

std::vector<ComponentPair> phase_mix_quadrature_pair(const std::vector<ComponentPair>& pairs,
                                                     const PhaseMixingModel& model,
                                                     std::uint64_t seed) {
    const auto thetas = draw_thetas(pairs.size(), model, seed);
    std::vector<ComponentPair> out(pairs.size());
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        const double c = std::cos(thetas[i]), s = std::sin(thetas[i]);
        out[i].i_cos = c * pairs[i].i_cos + s * pairs[i].i_sin;
        out[i].i_sin = -s * pairs[i].i_cos + c * pairs[i].i_sin;
    }
    return out;
}

EngineeredState build_masquerade_state(double s_cos, double s_sin, double c) {
    if (!(s_cos >= 0.0) || !(s_sin >= 0.0))
        throw std::invalid_argument("build_masquerade_state: negative standard deviation");
    if (c != 0.0)
        throw std::invalid_argument("build_masquerade_state: only c = 0 is supported");
    const double sc2 = s_cos * s_cos, ss2 = s_sin * s_sin;
    const double excess = (sc2 - ss2) * (sc2 - ss2);
    if (excess == 0.0)
        throw std::invalid_argument(
            "build_masquerade_state: s_cos = s_sin with c = 0 is degenerate; the Gaussian state "
            "already satisfies delta = 0");

    // Split the required fourth-order deficit in proportion to each
    // component's capacity s^4; the uniform-plus-Gaussian family reaches
    // deviations down to -(6/5) s^4, so the split is always feasible.
    const double cap = sc2 * sc2 + ss2 * ss2;
    auto solve_component = [](double variance, double target_deviation) {
        const double limit = -(6.0 / 5.0) * variance * variance;
        if (target_deviation < limit || target_deviation > 0.0) {
            std::ostringstream os;
            os << "build_masquerade_state: component deviation " << target_deviation
               << " outside feasible range [" << limit << ", 0]";
            throw std::invalid_argument(os.str());
        }
        // Bracketed bisection for -(2/15) a^4 = target on [0, sqrt(3) s];
        // monotone decreasing, so the bracket is immediate.
        double lo = 0.0, hi = std::sqrt(3.0 * variance);
        for (int iter = 0; iter < 200; ++iter) {
            const double mid = 0.5 * (lo + hi);
            const double f = -(2.0 / 15.0) * std::pow(mid, 4) - target_deviation;
            if (f > 0.0)
                lo = mid;
            else
                hi = mid;
        }
        EngineeredComponent part;
        part.half_width = 0.5 * (lo + hi);
        part.gaussian_sd = std::sqrt(std::max(0.0, variance - part.half_width * part.half_width / 3.0));
        return part;
    };

    EngineeredState state;
    state.cos_part = solve_component(sc2, -excess * (sc2 * sc2) / cap);
    state.sin_part = solve_component(ss2, -excess * (ss2 * ss2) / cap);
    return state;
}

namespace {

ScanResult run_scan(const StateModel& state, const std::vector<double>& settings,
                    const std::function<MeasurementModel(double)>& model_at, ScanAxis axis,
                    std::size_t per_point, const PhaseMixingModel& mixing, std::uint64_t seed,
                    int threads) {
    if (settings.empty())
        throw std::invalid_argument("scan: empty setting grid");
    if (per_point < 2)
        throw std::invalid_argument("scan: per_point must be >= 2");
    validate_state(state);

    ScanResult result;
    result.axis = axis;
    result.points.reserve(settings.size());
    for (std::size_t si = 0; si < settings.size(); ++si) {
        const std::uint64_t point_seed = split_seed(seed, 0x5ca00000ULL + si);
        const MeasurementModel model = model_at(settings[si]);
        auto pairs = sample_component_pairs(state, model, per_point, point_seed, threads);
        ScanPoint point;
        point.setting = settings[si];
        point.values = phase_mix(pairs, mixing, split_seed(point_seed, 1));
        result.points.push_back(std::move(point));
    }
    return result;
}

}  // namespace

ScanResult detuning_scan(const StateModel& state, const MeasurementModel& rd_family,
                         const std::vector<double>& detunings, std::size_t per_point,
                         const PhaseMixingModel& mixing, std::uint64_t seed, int threads) {
    if (rd_family.kind() != MeasurementModel::Kind::RD)
        throw std::invalid_argument("detuning_scan: measurement model must be an RD family");
    return run_scan(
        state, detunings, [&](double d) { return rd_family.at_detuning(d); }, ScanAxis::Detuning,
        per_point, mixing, seed, threads);
}

ScanResult phase_scan(const StateModel& state, const std::vector<double>& phases,
                      std::size_t per_point, const PhaseMixingModel& mixing, std::uint64_t seed,
                      int threads) {
    return run_scan(
        state, phases, [](double phi) { return MeasurementModel::hd(phi); }, ScanAxis::LoPhase,
        per_point, mixing, seed, threads);
}

}  // namespace sqn
