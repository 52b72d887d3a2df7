// Run configuration and the simulate -> (optional DSP) -> analyze ->
// report pipeline.  Runs are reproducible: every output embeds the
// master seed and a digest of the normalized configuration, and results
// are byte-identical for a fixed (config, seed) at any parallelism.
#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sqn/analysis.hpp"
#include "sqn/dataset.hpp"
#include "sqn/demod.hpp"
#include "sqn/measurement.hpp"
#include "sqn/simulator.hpp"
#include "sqn/state.hpp"

namespace sqn {

struct DspConfig {
    DemodConfig demod;
    double noise_stddev = 0.0;
};

struct BeamConfig {
    std::string label;
    nlohmann::json state_json;
    nlohmann::json measurement_json;  // null for component-level states
    nlohmann::json mixing_json;
    std::uint64_t samples = 10000;
};

struct ScanConfig {
    ScanAxis axis = ScanAxis::Detuning;
    double start = -3.0;
    double stop = 3.0;
    std::size_t points = 450;
    std::size_t per_point = 1000;

    std::vector<double> grid() const;
};

struct RunConfig {
    std::uint64_t seed = 1;
    int threads = 1;
    DatasetFormat format = DatasetFormat::Binary;
    std::vector<BeamConfig> beams;
    bool combine_beams = false;
    std::optional<DspConfig> dsp;
    std::optional<ScanConfig> scan;
    AnalysisOptions analysis;
    bool run_shapiro = true;
    bool fit_mixture = false;
    bool run_reconstruction = false;

    static RunConfig from_json(const nlohmann::json& j);
    static RunConfig from_file(const std::filesystem::path& path);
    nlohmann::json to_json() const;  // normalized (defaults materialized)

    // Validates every referenced sub-configuration before any run starts.
    void validate() const;
};

// SHA-256 over the normalized config JSON; changes iff a semantically
// meaningful field changes.
std::string config_digest(const RunConfig& config);

// Config-descriptor parsing shared with the CLI.
StateModel parse_state(const nlohmann::json& j);
std::optional<MeasurementModel> parse_measurement(const nlohmann::json& j);
PhaseMixingModel parse_mixing(const nlohmann::json& j);

class PipelineError : public std::runtime_error {
public:
    PipelineError(std::string stage, const std::string& message)
        : std::runtime_error("pipeline stage '" + stage + "': " + message), stage_(std::move(stage)) {}
    const std::string& stage() const { return stage_; }

private:
    std::string stage_;
};

struct ReportBundle {
    nlohmann::json report;
    bool all_pass = true;
    std::string digest;
    std::vector<std::filesystem::path> outputs;
};

ReportBundle run_pipeline(const RunConfig& config, const std::filesystem::path& out_dir);

// JSON views of analysis records (also used by the CLI subcommands).
nlohmann::json report_to_json(const GaussianityReport& report);
nlohmann::json asymmetry_to_json(const AsymmetryEstimate& estimate);

}  // namespace sqn
