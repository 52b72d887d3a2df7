#include "sqn/demod.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "sqn/rng.hpp"

namespace sqn {

namespace {

constexpr double kStopbandAttenuationDb = 46.0;  // design target, >= 40 required

double kaiser_beta(double attenuation_db) {
    if (attenuation_db > 50.0)
        return 0.1102 * (attenuation_db - 8.7);
    if (attenuation_db >= 21.0)
        return 0.5842 * std::pow(attenuation_db - 21.0, 0.4) + 0.07886 * (attenuation_db - 21.0);
    return 0.0;
}

}  // namespace

void DemodConfig::validate() const {
    if (!(analysis_frequency > 0.0) || !(window_length > 0.0) || !(lowpass_bandwidth > 0.0) ||
        !(sample_rate > 0.0))
        throw std::invalid_argument("DemodConfig: parameters must be positive");
    if (sample_rate <= 2.0 * analysis_frequency)
        throw std::invalid_argument("DemodConfig: sample_rate must exceed twice the analysis frequency");
    if (window_length * sample_rate < 8.0)
        throw std::invalid_argument("DemodConfig: window shorter than 8 samples");
    if (2.0 * lowpass_bandwidth >= 0.5 * sample_rate)
        throw std::invalid_argument("DemodConfig: low-pass stopband beyond Nyquist");
}

std::size_t DemodConfig::samples_per_window() const {
    return static_cast<std::size_t>(std::llround(window_length * sample_rate));
}

std::vector<double> design_lowpass_taps(const DemodConfig& cfg) {
    cfg.validate();
    const double f_pass = cfg.lowpass_bandwidth;
    const double f_stop = 2.0 * cfg.lowpass_bandwidth;
    const double delta_omega = 2.0 * std::numbers::pi * (f_stop - f_pass) / cfg.sample_rate;
    const double beta = kaiser_beta(kStopbandAttenuationDb);

    std::size_t n_taps =
        static_cast<std::size_t>(std::ceil((kStopbandAttenuationDb - 7.95) / (2.285 * delta_omega))) + 1;
    if (n_taps % 2 == 0)
        ++n_taps;  // odd length, exactly linear phase

    const double fc = 0.5 * (f_pass + f_stop) / cfg.sample_rate;  // cycles per sample
    const double mid = 0.5 * static_cast<double>(n_taps - 1);
    const double i0_beta = std::cyl_bessel_i(0.0, beta);

    std::vector<double> taps(n_taps);
    double dc_gain = 0.0;
    for (std::size_t i = 0; i < n_taps; ++i) {
        const double m = static_cast<double>(i) - mid;
        const double x = 2.0 * std::numbers::pi * fc * m;
        const double sinc = (m == 0.0) ? 2.0 * std::numbers::pi * fc : std::sin(x) / m;
        const double r = m / (mid > 0.0 ? mid : 1.0);
        const double window = std::cyl_bessel_i(0.0, beta * std::sqrt(std::max(0.0, 1.0 - r * r))) / i0_beta;
        taps[i] = sinc * window;
        dc_gain += taps[i];
    }
    for (double& t : taps)
        t /= dc_gain;
    return taps;
}

std::vector<double> synthesize_window(const ComponentPair& amplitudes, const DemodConfig& cfg,
                                      std::size_t lead_in, double noise_stddev,
                                      std::mt19937_64& engine) {
    const std::size_t n = cfg.samples_per_window();
    const double omega = 2.0 * std::numbers::pi * cfg.analysis_frequency / cfg.sample_rate;
    std::vector<double> raw(lead_in + n);
    std::normal_distribution<double> normal;
    for (std::size_t j = 0; j < raw.size(); ++j) {
        // Window origin sits at raw[lead_in]; the lead-in covers negative times.
        const double phase = omega * (static_cast<double>(j) - static_cast<double>(lead_in));
        double v = amplitudes.i_cos * std::cos(phase) + amplitudes.i_sin * std::sin(phase);
        if (noise_stddev > 0.0)
            v += noise_stddev * normal(engine);
        raw[j] = v;
    }
    return raw;
}

ComponentPair demodulate_window(std::span<const double> raw, const DemodConfig& cfg,
                                const std::vector<double>& taps) {
    const std::size_t n = cfg.samples_per_window();
    const std::size_t lead = demod_lead_in(taps);
    if (raw.size() < lead + n)
        throw std::invalid_argument("demodulate_window: raw buffer shorter than lead-in + window");

    const double omega = 2.0 * std::numbers::pi * cfg.analysis_frequency / cfg.sample_rate;
    const std::size_t total = lead + n;
    std::vector<double> mixed_c(total), mixed_s(total);
    for (std::size_t j = 0; j < total; ++j) {
        const double phase = omega * (static_cast<double>(j) - static_cast<double>(lead));
        mixed_c[j] = 2.0 * raw[j] * std::cos(phase);
        mixed_s[j] = 2.0 * raw[j] * std::sin(phase);
    }

    // FIR in steady state over [0, n), then boxcar integration over T.
    double acc_c = 0.0, acc_s = 0.0;
    for (std::size_t out = 0; out < n; ++out) {
        double yc = 0.0, ys = 0.0;
        const std::size_t base = out + lead;
        for (std::size_t k = 0; k < taps.size(); ++k) {
            yc += taps[k] * mixed_c[base - k];
            ys += taps[k] * mixed_s[base - k];
        }
        acc_c += yc;
        acc_s += ys;
    }
    return {acc_c / static_cast<double>(n), acc_s / static_cast<double>(n)};
}

std::vector<ComponentPair> synthesize_and_demodulate(const std::vector<ComponentPair>& pairs,
                                                     const DemodConfig& cfg,
                                                     const BackgroundNoise& noise,
                                                     std::uint64_t seed, int threads) {
    cfg.validate();
    if (!(noise.stddev >= 0.0))
        throw std::invalid_argument("synthesize_and_demodulate: negative noise stddev");
    const std::vector<double> taps = design_lowpass_taps(cfg);
    const std::size_t lead = demod_lead_in(taps);

    std::vector<ComponentPair> out(pairs.size());
    for_each_chunk(pairs.size(), threads, [&](std::size_t, std::size_t begin, std::size_t end) {
        for (std::size_t w = begin; w < end; ++w) {
            auto engine = make_engine(split_seed(seed, w));
            const auto raw = synthesize_window(pairs[w], cfg, lead, noise.stddev, engine);
            out[w] = demodulate_window(raw, cfg, taps);
        }
    });
    return out;
}

}  // namespace sqn
