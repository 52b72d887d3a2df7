// Raw-photocurrent synthesis and digital demodulation: per-window beat
// synthesis at the analysis frequency, mixing with cosine/sine eLO
// references, linear-phase FIR low-pass, and integration over the
// window.  Spectral convention: I_Omega = (1/sqrt2)(I_cos + i I_sin);
// the recovered components are the sqrt2-scaled real/imaginary parts,
// so amplitudes round-trip unchanged.
#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "sqn/simulator.hpp"

namespace sqn {

struct DemodConfig {
    double analysis_frequency = 21.0e6;        // Hz
    double window_length = 35.0 / 21.0e6;      // s, T = 2pi/DeltaOmega
    double lowpass_bandwidth = 600.0e3;        // Hz, passband edge
    double sample_rate = 105.0e6;              // Hz

    // Throws on aliasing configurations (sample_rate <= 2 f_analysis) or
    // windows shorter than 8 samples.
    void validate() const;

    std::size_t samples_per_window() const;
};

struct BackgroundNoise {
    double stddev = 0.0;  // additive white Gaussian, per raw sample
};

// Kaiser-windowed sinc low-pass: passband edge at lowpass_bandwidth,
// stopband at twice that, designed for >= 40 dB stopband attenuation
// (46 dB design target).  DC gain normalized to exactly 1.
std::vector<double> design_lowpass_taps(const DemodConfig& cfg);

// Lead-in samples required ahead of each window so the FIR is in steady
// state over the whole integration span.
inline std::size_t demod_lead_in(const std::vector<double>& taps) {
    return taps.empty() ? 0 : taps.size() - 1;
}

// One window of raw photocurrent (lead-in + window samples), with the
// window origin at raw[lead_in].
std::vector<double> synthesize_window(const ComponentPair& amplitudes, const DemodConfig& cfg,
                                      std::size_t lead_in, double noise_stddev,
                                      std::mt19937_64& engine);

// Mix with the eLO references, low-pass, and integrate over the window.
ComponentPair demodulate_window(std::span<const double> raw, const DemodConfig& cfg,
                                const std::vector<double>& taps);

// Full chain over a pair sequence; deterministic per (seed, window).
std::vector<ComponentPair> synthesize_and_demodulate(const std::vector<ComponentPair>& pairs,
                                                     const DemodConfig& cfg,
                                                     const BackgroundNoise& noise,
                                                     std::uint64_t seed, int threads = 1);

}  // namespace sqn
