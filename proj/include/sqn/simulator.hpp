// Monte-Carlo generation of quadrature samples, measurement application,
// LO-eLO phase mixing, detuning/phase scans, and masquerade-state
// construction.  Deterministic for fixed seeds at any parallelism level.
#pragma once

#include <cstdint>
#include <vector>

#include "sqn/measurement.hpp"
#include "sqn/state.hpp"

namespace sqn {

struct QuadratureSample {
    double p_s, q_s, p_a, q_a;
};

struct ComponentPair {
    double i_cos, i_sin;
};

// LO-eLO phase behaviour across measurements.
struct LockedPhase {
    double theta = 0.0;
};
struct UniformPerSample {};
struct RandomWalkPhase {
    double step_stddev = 0.0;  // radians per sample
    double initial_theta = 0.0;
};
using PhaseMixingModel = std::variant<LockedPhase, UniformPerSample, RandomWalkPhase>;

// Multivariate-normal (or mixture) quadrature draws.  Component-level
// states have no quadrature representation and are rejected; use
// sample_component_pairs for those.
std::vector<QuadratureSample> sample_quadratures(const StateModel& state, std::size_t n,
                                                 std::uint64_t seed, int threads = 1);

// Per-sample linear map through the measurement model.
std::vector<ComponentPair> apply_measurement(const std::vector<QuadratureSample>& samples,
                                             const MeasurementModel& model);

// Unified front door: quadrature states go through sample_quadratures +
// apply_measurement; component-level states sample their joint law
// directly and ignore the measurement model.
std::vector<ComponentPair> sample_component_pairs(const StateModel& state,
                                                  const MeasurementModel& model, std::size_t n,
                                                  std::uint64_t seed, int threads = 1);

// I_theta = cos(theta) I_cos + sin(theta) I_sin with theta drawn per the
// mixing model.  The random-walk model is inherently sequential and is
// generated as a single stream from its seed.
std::vector<double> phase_mix(const std::vector<ComponentPair>& pairs,
                              const PhaseMixingModel& model, std::uint64_t seed);

// Simultaneously measured quadrature pair (I_theta, I_theta+pi/2) with
// one theta draw per sample; the two streams are uncorrelated under
// mixing.
std::vector<ComponentPair> phase_mix_quadrature_pair(const std::vector<ComponentPair>& pairs,
                                                     const PhaseMixingModel& model,
                                                     std::uint64_t seed);

// Engineered non-Gaussian joint law with the requested second moments
// whose fourth-order deviations satisfy
//   delta_cos + delta_sin + 2 delta_c = -(s_cos^2 - s_sin^2)^2,
// so the phase-mixed fourth moment is exactly Gaussian-valued.
// Only c = 0 is supported; requests with s_cos = s_sin are rejected
// (the Gaussian state already satisfies delta = 0).
EngineeredState build_masquerade_state(double s_cos, double s_sin, double c);

// One scan point: `count` phase-mixed samples at one measurement setting.
struct ScanPoint {
    double setting = 0.0;  // detuning or LO phase, per axis
    std::vector<double> values;
};

enum class ScanAxis { Detuning, LoPhase };

struct ScanResult {
    ScanAxis axis = ScanAxis::Detuning;
    std::vector<ScanPoint> points;
};

// Detuning scan with a resonator-detection family: for each grid value,
// per_point phase-mixed samples tagged with the setting.
ScanResult detuning_scan(const StateModel& state, const MeasurementModel& rd_family,
                         const std::vector<double>& detunings, std::size_t per_point,
                         const PhaseMixingModel& mixing, std::uint64_t seed, int threads = 1);

// Homodyne analogue: scan over LO phases.
ScanResult phase_scan(const StateModel& state, const std::vector<double>& phases,
                      std::size_t per_point, const PhaseMixingModel& mixing, std::uint64_t seed,
                      int threads = 1);

}  // namespace sqn
