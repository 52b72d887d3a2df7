#include "sqn/pipeline.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <openssl/evp.h>

#include "sqn/mixture_fit.hpp"
#include "sqn/reconstruct.hpp"
#include "sqn/rng.hpp"
#include "sqn/shapiro_wilk.hpp"

namespace sqn {

namespace {

Eigen::Matrix4d matrix_from_json(const nlohmann::json& j) {
    const auto flat = j.get<std::vector<double>>();
    if (flat.size() != 16)
        throw std::invalid_argument("state: covariance matrix needs 16 row-major entries");
    Eigen::Matrix4d V;
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c)
            V(r, c) = flat[4 * r + c];
    return V;
}

}  // namespace

StateModel parse_state(const nlohmann::json& j) {
    const std::string type = j.at("type").get<std::string>();
    if (type == "vacuum")
        return GaussianState{Matrix4::Identity()};
    if (type == "covariance")
        return GaussianState{matrix_from_json(j.at("matrix"))};
    if (type == "symmetric") {
        return GaussianState{symmetric_covariance(j.at("alpha").get<double>(),
                                                  j.at("beta").get<double>(),
                                                  j.at("gamma").get<double>(),
                                                  j.at("delta").get<double>())};
    }
    if (type == "component") {
        return ComponentGaussianState{j.at("s_cos").get<double>(), j.at("s_sin").get<double>(),
                                      j.value("c", 0.0)};
    }
    if (type == "mixture") {
        GaussianMixtureState mix;
        mix.weights = j.at("weights").get<std::vector<double>>();
        for (const auto& comp : j.at("components"))
            mix.components.push_back(matrix_from_json(comp));
        return mix;
    }
    if (type == "masquerade") {
        return build_masquerade_state(j.at("s_cos").get<double>(), j.at("s_sin").get<double>(),
                                      j.value("c", 0.0));
    }
    throw std::invalid_argument("state: unknown type '" + type + "'");
}

std::optional<MeasurementModel> parse_measurement(const nlohmann::json& j) {
    if (j.is_null())
        return std::nullopt;
    const std::string type = j.at("type").get<std::string>();
    if (type == "hd")
        return MeasurementModel::hd(j.value("phi", 0.0));
    if (type == "rd")
        return MeasurementModel::rd(j.value("detuning", 0.0));
    if (type == "explicit") {
        const auto flat = j.at("matrix").get<std::vector<double>>();
        if (flat.size() != 8)
            throw std::invalid_argument("measurement: explicit matrix needs 8 row-major entries");
        MeasurementMatrix m;
        for (int r = 0; r < 2; ++r)
            for (int c = 0; c < 4; ++c)
                m(r, c) = flat[4 * r + c];
        return MeasurementModel::explicit_matrix(m);
    }
    throw std::invalid_argument("measurement: unknown type '" + type + "'");
}

PhaseMixingModel parse_mixing(const nlohmann::json& j) {
    if (j.is_null())
        return UniformPerSample{};
    const std::string type = j.at("type").get<std::string>();
    if (type == "uniform")
        return UniformPerSample{};
    if (type == "locked")
        return LockedPhase{j.value("theta", 0.0)};
    if (type == "walk")
        return RandomWalkPhase{j.at("step_stddev").get<double>(), j.value("initial_theta", 0.0)};
    throw std::invalid_argument("mixing: unknown type '" + type + "'");
}

std::vector<double> ScanConfig::grid() const {
    std::vector<double> g(points);
    if (points == 1) {
        g[0] = start;
        return g;
    }
    const double step = (stop - start) / static_cast<double>(points - 1);
    for (std::size_t i = 0; i < points; ++i)
        g[i] = start + step * static_cast<double>(i);
    return g;
}

RunConfig RunConfig::from_json(const nlohmann::json& j) {
    RunConfig cfg;
    cfg.seed = j.value("seed", std::uint64_t{1});
    cfg.threads = j.value("threads", 1);
    cfg.format = j.value("format", std::string("binary")) == "text" ? DatasetFormat::Text
                                                                    : DatasetFormat::Binary;
    for (const auto& bj : j.at("beams")) {
        BeamConfig beam;
        beam.label = bj.at("label").get<std::string>();
        beam.state_json = bj.at("state");
        beam.measurement_json = bj.value("measurement", nlohmann::json());
        beam.mixing_json = bj.value("mixing", nlohmann::json());
        beam.samples = bj.value("samples", std::uint64_t{10000});
        cfg.beams.push_back(std::move(beam));
    }
    cfg.combine_beams = j.value("combine_beams", false);
    if (j.contains("dsp") && !j.at("dsp").is_null()) {
        const auto& dj = j.at("dsp");
        DspConfig dsp;
        dsp.demod.analysis_frequency = dj.value("analysis_frequency", dsp.demod.analysis_frequency);
        dsp.demod.window_length = dj.value("window_length", dsp.demod.window_length);
        dsp.demod.lowpass_bandwidth = dj.value("lowpass_bandwidth", dsp.demod.lowpass_bandwidth);
        dsp.demod.sample_rate = dj.value("sample_rate", dsp.demod.sample_rate);
        dsp.noise_stddev = dj.value("noise_stddev", 0.0);
        cfg.dsp = dsp;
    }
    if (j.contains("scan") && !j.at("scan").is_null()) {
        const auto& sj = j.at("scan");
        ScanConfig scan;
        scan.axis = sj.value("axis", std::string("delta")) == "theta" ? ScanAxis::LoPhase
                                                                      : ScanAxis::Detuning;
        scan.start = sj.at("start").get<double>();
        scan.stop = sj.at("stop").get<double>();
        scan.points = sj.at("points").get<std::size_t>();
        scan.per_point = sj.at("per_point").get<std::size_t>();
        cfg.scan = scan;
    }
    if (j.contains("analysis")) {
        const auto& aj = j.at("analysis");
        cfg.analysis.max_order = aj.value("max_order", 14);
        cfg.analysis.bootstrap_rounds = aj.value("bootstrap_rounds", std::size_t{200});
        cfg.analysis.significance = aj.value("significance", 3.0);
        cfg.run_shapiro = aj.value("shapiro_wilk", true);
    }
    cfg.fit_mixture = j.value("fit_mixture", false);
    cfg.run_reconstruction = j.value("reconstruct", false);
    return cfg;
}

RunConfig RunConfig::from_file(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is)
        throw std::runtime_error("RunConfig: cannot open " + path.string());
    nlohmann::json j = nlohmann::json::parse(is);
    return from_json(j);
}

nlohmann::json RunConfig::to_json() const {
    nlohmann::json j;
    j["seed"] = seed;
    j["threads"] = threads;
    j["format"] = format == DatasetFormat::Text ? "text" : "binary";
    j["beams"] = nlohmann::json::array();
    for (const auto& beam : beams) {
        j["beams"].push_back({{"label", beam.label},
                              {"state", beam.state_json},
                              {"measurement", beam.measurement_json},
                              {"mixing", beam.mixing_json},
                              {"samples", beam.samples}});
    }
    j["combine_beams"] = combine_beams;
    if (dsp) {
        j["dsp"] = {{"analysis_frequency", dsp->demod.analysis_frequency},
                    {"window_length", dsp->demod.window_length},
                    {"lowpass_bandwidth", dsp->demod.lowpass_bandwidth},
                    {"sample_rate", dsp->demod.sample_rate},
                    {"noise_stddev", dsp->noise_stddev}};
    } else {
        j["dsp"] = nullptr;
    }
    if (scan) {
        j["scan"] = {{"axis", scan->axis == ScanAxis::LoPhase ? "theta" : "delta"},
                     {"start", scan->start},
                     {"stop", scan->stop},
                     {"points", scan->points},
                     {"per_point", scan->per_point}};
    } else {
        j["scan"] = nullptr;
    }
    j["analysis"] = {{"max_order", analysis.max_order},
                     {"bootstrap_rounds", analysis.bootstrap_rounds},
                     {"significance", analysis.significance},
                     {"shapiro_wilk", run_shapiro}};
    j["fit_mixture"] = fit_mixture;
    j["reconstruct"] = run_reconstruction;
    return j;
}

void RunConfig::validate() const {
    if (beams.empty())
        throw std::invalid_argument("config: at least one beam required");
    if (threads < 1)
        throw std::invalid_argument("config: threads must be >= 1");
    for (const auto& beam : beams) {
        if (beam.label.empty())
            throw std::invalid_argument("config: beam label must not be empty");
        const StateModel state = parse_state(beam.state_json);
        validate_state(state);
        const auto measurement = parse_measurement(beam.measurement_json);
        if (has_quadrature_representation(state)) {
            if (!measurement && !scan)
                throw std::invalid_argument("config: beam '" + beam.label +
                                            "' needs a measurement model");
        } else if (measurement) {
            throw std::invalid_argument("config: beam '" + beam.label +
                                        "' declares a component-level state; measurement model "
                                        "is not applicable");
        }
        if (scan && scan->axis == ScanAxis::Detuning && measurement &&
            measurement->kind() != MeasurementModel::Kind::RD)
            throw std::invalid_argument("config: detuning scans require an RD measurement");
        parse_mixing(beam.mixing_json);
        const std::size_t min_n = std::max<std::size_t>(30, 2 * analysis.max_order);
        const std::uint64_t total = scan ? scan->points * scan->per_point : beam.samples;
        if (total < min_n)
            throw std::invalid_argument("config: beam '" + beam.label +
                                        "' has too few samples for the analysis order");
    }
    if (scan) {
        if (scan->points < 1 || scan->per_point < 2)
            throw std::invalid_argument("config: scan needs >= 1 point and >= 2 samples per point");
        if (scan->points > 0xffffffffULL)
            throw std::invalid_argument("config: scan grid too large");
    }
    if (dsp) {
        dsp->demod.validate();
        if (dsp->noise_stddev < 0.0)
            throw std::invalid_argument("config: negative DSP noise stddev");
    }
    if (analysis.max_order < 4 || analysis.max_order > 14)
        throw std::invalid_argument("config: analysis max_order must be in [4, 14]");
    if (analysis.bootstrap_rounds < 2)
        throw std::invalid_argument("config: bootstrap_rounds must be >= 2");
    if (!(analysis.significance > 0.0))
        throw std::invalid_argument("config: significance must be positive");
}

std::string config_digest(const RunConfig& config) {
    // The worker count is an execution detail: outputs are bit-identical
    // at any parallelism, so it must not perturb the digest.
    nlohmann::json normalized = config.to_json();
    normalized.erase("threads");
    const std::string canonical = normalized.dump();
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_Digest(canonical.data(), canonical.size(), md, &len, EVP_sha256(), nullptr);
    std::ostringstream os;
    os << std::hex;
    for (unsigned int i = 0; i < len; ++i) {
        os.width(2);
        os.fill('0');
        os << static_cast<int>(md[i]);
    }
    return os.str();
}

nlohmann::json report_to_json(const GaussianityReport& report) {
    nlohmann::json j;
    j["n_samples"] = report.n_samples;
    j["s"] = report.s;
    j["s2_std_error"] = report.s2_std_error;
    j["d"] = report.d;
    j["d_std_error"] = report.d_std_error;
    j["k"] = report.k;
    j["k_std_error"] = report.k_std_error;
    j["per_order_threshold"] = report.per_order_threshold;
    j["all_pass"] = report.all_pass;
    j["ratios"] = nlohmann::json::array();
    for (const auto& r : report.ratios) {
        j["ratios"].push_back({{"order", r.order},
                               {"value", r.value},
                               {"std_error", r.std_error},
                               {"reference", r.reference},
                               {"pass", r.pass}});
    }
    if (report.w_test)
        j["w_test"] = {{"W", report.w_test->first}, {"p", report.w_test->second}};
    if (report.mean_drift)
        j["mean_drift"] = *report.mean_drift;
    return j;
}

nlohmann::json asymmetry_to_json(const AsymmetryEstimate& estimate) {
    return {{"value", estimate.value},
            {"std_error", estimate.std_error},
            {"delta", estimate.delta},
            {"delta_std_error", estimate.delta_std_error},
            {"consistent_with_gaussian_state", estimate.consistent_with_gaussian_state}};
}

namespace {

struct BeamRun {
    std::string label;
    std::vector<double> values;
    std::vector<std::size_t> batch_sizes;  // scan batches, empty otherwise
    Dataset dataset;
    nlohmann::json analysis;
    bool all_pass = true;
};

std::string technique_name(const nlohmann::json& measurement_json, const std::optional<ScanConfig>& scan) {
    if (scan)
        return scan->axis == ScanAxis::LoPhase ? "hd" : "rd";
    if (measurement_json.is_null())
        return "none";
    return measurement_json.at("type").get<std::string>();
}

nlohmann::json fit_to_json(const MixedGaussianFit& fit) {
    return {{"s_cos", fit.s_cos},
            {"s_sin", fit.s_sin},
            {"c", fit.c},
            {"log_likelihood", fit.log_likelihood},
            {"converged", fit.converged},
            {"iterations", fit.iterations},
            {"single_gaussian_log_likelihood", fit.single_gaussian_log_likelihood},
            {"likelihood_gain", fit.likelihood_gain},
            {"quadrature_nodes", fit.quadrature_nodes},
            {"node_doubling_change", fit.node_doubling_change}};
}

nlohmann::json reconstruction_to_json(const ReconstructionResult& rec) {
    nlohmann::json j;
    j["alpha"] = rec.params.alpha;
    j["beta"] = rec.params.beta;
    j["gamma"] = rec.params.gamma;
    j["delta"] = rec.params.delta;
    j["std_errors"] = {rec.std_error(0), rec.std_error(1), rec.std_error(2), rec.std_error(3)};
    j["inaccessible"] = rec.inaccessible;
    j["chi_square"] = rec.chi_square;
    j["degrees_of_freedom"] = rec.degrees_of_freedom;
    j["reduced_chi_square"] = rec.reduced_chi_square;
    return j;
}

void write_text_report(std::ostream& os, const nlohmann::json& report) {
    os << "spectral quantum-noise report\n";
    os << "seed: " << report.at("seed").get<std::uint64_t>() << "\n";
    os << "config digest: " << report.at("config_digest").get<std::string>() << "\n";
    os << "status: " << report.at("status").get<std::string>() << "\n";

    auto print_section = [&os](const nlohmann::json& entry) {
        const auto& g = entry.at("gaussianity");
        os << "\n[" << entry.at("label").get<std::string>() << "]  n = "
           << g.at("n_samples").get<std::uint64_t>() << "\n";
        const double s = g.at("s").get<double>();
        const double s2err = g.at("s2_std_error").get<double>();
        os << "  s^2 = " << format_with_uncertainty(s * s, s2err) << " SQL\n";
        os << "  d   = " << format_with_uncertainty(g.at("d").get<double>(),
                                                    g.at("d_std_error").get<double>())
           << "\n";
        for (const auto& r : g.at("ratios")) {
            os << "  r{" << r.at("order").get<int>() << "} = "
               << format_with_uncertainty(r.at("value").get<double>(),
                                          r.at("std_error").get<double>())
               << "  vs " << r.at("reference").get<double>() << "  ["
               << (r.at("pass").get<bool>() ? "pass" : "FAIL") << "]\n";
        }
        if (g.contains("w_test")) {
            os << "  Shapiro-Wilk: W = " << g.at("w_test").at("W").get<double>()
               << ", p = " << g.at("w_test").at("p").get<double>() << "\n";
        }
        if (g.contains("mean_drift"))
            os << "  batch mean-drift ratio = " << g.at("mean_drift").get<double>() << "\n";
        if (entry.contains("asymmetry")) {
            const auto& a = entry.at("asymmetry");
            os << "  |s_cos^2 - s_sin^2| = " << a.at("value").get<double>() << " +/- "
               << a.at("std_error").get<double>()
               << (a.at("consistent_with_gaussian_state").get<bool>()
                       ? ""
                       : "  [inconsistent with Gaussian state]")
               << "\n";
        }
        if (entry.contains("fit")) {
            const auto& f = entry.at("fit");
            os << "  mixed-Gaussian fit: s_cos = " << f.at("s_cos").get<double>()
               << ", s_sin = " << f.at("s_sin").get<double>()
               << ", gain = " << f.at("likelihood_gain").get<double>()
               << (f.at("converged").get<bool>() ? "" : "  [not converged]") << "\n";
        }
        if (entry.contains("reconstruction")) {
            const auto& r = entry.at("reconstruction");
            os << "  reconstruction: alpha = " << r.at("alpha").get<double>()
               << ", beta = " << r.at("beta").get<double>()
               << ", gamma = " << r.at("gamma").get<double>()
               << ", delta = " << r.at("delta").get<double>()
               << ", red-chi2 = " << r.at("reduced_chi_square").get<double>() << "\n";
            if (!r.at("inaccessible").empty()) {
                os << "    inaccessible:";
                for (const auto& name : r.at("inaccessible"))
                    os << " " << name.get<std::string>();
                os << "\n";
            }
        }
    };

    for (const auto& entry : report.at("beams"))
        print_section(entry);
    for (const auto& entry : report.at("combinations"))
        print_section(entry);
    os << "\nverdict: " << (report.at("verdict_all_pass").get<bool>() ? "all orders pass"
                                                                      : "statistical fail")
       << "\n";
}

}  // namespace

ReportBundle run_pipeline(const RunConfig& config, const std::filesystem::path& out_dir) {
    std::string stage = "validate";
    ReportBundle bundle;
    bundle.digest = config_digest(config);

    nlohmann::json report;
    report["seed"] = config.seed;
    report["config_digest"] = bundle.digest;
    report["status"] = "incomplete";
    report["beams"] = nlohmann::json::array();
    report["combinations"] = nlohmann::json::array();
    report["verdict_all_pass"] = false;

    auto fail = [&](const std::string& message) -> PipelineError {
        // Flag partial outputs before aborting.
        std::error_code ec;
        std::filesystem::create_directories(out_dir, ec);
        report["status"] = "incomplete";
        report["failed_stage"] = stage;
        report["error"] = message;
        std::ofstream os(out_dir / "report.json");
        os << report.dump(2) << "\n";
        return PipelineError(stage, message);
    };

    try {
        config.validate();
        std::filesystem::create_directories(out_dir);

        AnalysisOptions analysis = config.analysis;
        analysis.threads = config.threads;

        std::vector<BeamRun> runs;
        std::vector<std::vector<ComponentPair>> beam_pairs;  // non-scan runs, for combos

        stage = "simulate";
        for (std::size_t bi = 0; bi < config.beams.size(); ++bi) {
            const auto& beam = config.beams[bi];
            const StateModel state = parse_state(beam.state_json);
            const auto measurement = parse_measurement(beam.measurement_json);
            const PhaseMixingModel mixing = parse_mixing(beam.mixing_json);
            const std::uint64_t sim_seed = split_seed(config.seed, 100 + bi);
            const std::uint64_t mix_seed = split_seed(config.seed, 200 + bi);

            BeamRun run;
            run.label = beam.label;

            DatasetHeader header;
            header.beam = beam.label;
            header.technique = technique_name(beam.measurement_json, config.scan);
            header.seed = sim_seed;
            header.state = beam.state_json;
            header.config_digest = bundle.digest;

            if (config.scan) {
                const auto grid = config.scan->grid();
                ScanResult scan;
                if (config.scan->axis == ScanAxis::LoPhase) {
                    scan = phase_scan(state, grid, config.scan->per_point, mixing, sim_seed,
                                      config.threads);
                } else {
                    const MeasurementModel rd_family =
                        measurement ? *measurement : MeasurementModel::rd(0.0);
                    scan = detuning_scan(state, rd_family, grid, config.scan->per_point, mixing,
                                         sim_seed, config.threads);
                }
                run.dataset = dataset_from_scan(scan, header);
                for (const auto& point : scan.points) {
                    run.batch_sizes.push_back(point.values.size());
                    run.values.insert(run.values.end(), point.values.begin(), point.values.end());
                }
            } else {
                const MeasurementModel model =
                    measurement ? *measurement : MeasurementModel::explicit_matrix(
                                                     MeasurementMatrix::Zero());
                auto pairs =
                    sample_component_pairs(state, model, beam.samples, sim_seed, config.threads);
                if (config.dsp) {
                    stage = "dsp";
                    BackgroundNoise noise{config.dsp->noise_stddev};
                    pairs = synthesize_and_demodulate(pairs, config.dsp->demod, noise,
                                                      split_seed(config.seed, 300 + bi),
                                                      config.threads);
                    header.demod = {{"analysis_frequency", config.dsp->demod.analysis_frequency},
                                    {"window_length", config.dsp->demod.window_length},
                                    {"lowpass_bandwidth", config.dsp->demod.lowpass_bandwidth},
                                    {"sample_rate", config.dsp->demod.sample_rate},
                                    {"noise_stddev", config.dsp->noise_stddev}};
                    header.filter_taps = design_lowpass_taps(config.dsp->demod);
                    stage = "simulate";
                }
                run.values = phase_mix(pairs, mixing, mix_seed);
                beam_pairs.push_back(std::move(pairs));
                run.dataset = dataset_from_samples(run.values, header);
            }

            const auto path = out_dir / ("beam_" + beam.label +
                                         (config.format == DatasetFormat::Text ? ".txt" : ".sqnd"));
            write_dataset(run.dataset, path, config.format);
            bundle.outputs.push_back(path);
            runs.push_back(std::move(run));
        }

        stage = "analyze";
        bool all_pass = true;
        for (std::size_t bi = 0; bi < runs.size(); ++bi) {
            auto& run = runs[bi];
            AnalysisOptions options = analysis;
            options.seed = split_seed(config.seed, 500 + bi);
            GaussianityReport g =
                run.batch_sizes.empty()
                    ? gaussianity_report(run.values, options)
                    : gaussianity_report_batched(run.values, run.batch_sizes, options);
            if (config.run_shapiro) {
                const auto sw = shapiro_wilk(run.values, split_seed(config.seed, 400 + bi));
                g.w_test = {sw.w, sw.p_value};
            }
            nlohmann::json entry;
            entry["label"] = run.label;
            entry["gaussianity"] = report_to_json(g);
            entry["asymmetry"] = asymmetry_to_json(infer_asymmetry(g));
            if (config.fit_mixture) {
                MixtureFitOptions fit_options;
                fit_options.threads = config.threads;
                entry["fit"] = fit_to_json(fit_phase_mixed_gaussian(run.values, fit_options));
            }
            if (config.scan && config.run_reconstruction) {
                ReconstructionOptions rec_options;
                rec_options.seed = split_seed(config.seed, 600 + bi);
                rec_options.threads = config.threads;
                rec_options.bootstrap_rounds = config.analysis.bootstrap_rounds;
                const auto scan = dataset_to_scan(runs[bi].dataset);
                const Technique technique =
                    config.scan->axis == ScanAxis::LoPhase ? Technique::HD : Technique::RD;
                entry["reconstruction"] =
                    reconstruction_to_json(reconstruct_symmetric_covariance(scan, technique,
                                                                            default_rd_coefficients,
                                                                            rec_options));
            }
            run.all_pass = g.all_pass;
            all_pass = all_pass && g.all_pass;
            run.analysis = entry;
            report["beams"].push_back(entry);
        }

        stage = "combine";
        if (config.combine_beams && !config.scan) {
            for (std::size_t i = 0; i < runs.size(); ++i) {
                for (std::size_t j = i + 1; j < runs.size(); ++j) {
                    if (runs[i].values.size() != runs[j].values.size())
                        continue;
                    for (int sign : {+1, -1}) {
                        const auto combined =
                            combine_two_beams(runs[i].values, runs[j].values, sign);
                        AnalysisOptions options = analysis;
                        options.seed = split_seed(config.seed, 700 + 16 * i + j + (sign > 0 ? 0 : 8));
                        GaussianityReport g = gaussianity_report(combined, options);
                        if (config.run_shapiro) {
                            const auto sw =
                                shapiro_wilk(combined, split_seed(config.seed, 800 + 16 * i + j));
                            g.w_test = {sw.w, sw.p_value};
                        }
                        nlohmann::json entry;
                        entry["label"] =
                            runs[i].label + (sign > 0 ? "+" : "-") + runs[j].label;
                        entry["gaussianity"] = report_to_json(g);
                        entry["asymmetry"] = asymmetry_to_json(infer_asymmetry(g));
                        all_pass = all_pass && g.all_pass;
                        report["combinations"].push_back(entry);
                    }
                }
            }
        }

        stage = "report";
        report["status"] = "complete";
        report["verdict_all_pass"] = all_pass;
        bundle.all_pass = all_pass;

        {
            std::ofstream os(out_dir / "report.json");
            os << report.dump(2) << "\n";
            bundle.outputs.push_back(out_dir / "report.json");
        }
        {
            std::ofstream os(out_dir / "report.txt");
            write_text_report(os, report);
            bundle.outputs.push_back(out_dir / "report.txt");
        }
        {
            std::ofstream os(out_dir / "moment_ratios.tsv");
            os << "# seed " << config.seed << " digest " << bundle.digest << "\n";
            os << "label\torder\tratio\tstd_error\treference\tpass\n";
            char buf[64];
            auto emit = [&](const nlohmann::json& entry) {
                for (const auto& r : entry.at("gaussianity").at("ratios")) {
                    std::snprintf(buf, sizeof(buf), "%.17g", r.at("value").get<double>());
                    os << entry.at("label").get<std::string>() << "\t" << r.at("order").get<int>()
                       << "\t" << buf;
                    std::snprintf(buf, sizeof(buf), "%.17g", r.at("std_error").get<double>());
                    os << "\t" << buf << "\t" << r.at("reference").get<double>() << "\t"
                       << (r.at("pass").get<bool>() ? 1 : 0) << "\n";
                }
            };
            for (const auto& entry : report["beams"])
                emit(entry);
            for (const auto& entry : report["combinations"])
                emit(entry);
            bundle.outputs.push_back(out_dir / "moment_ratios.tsv");
        }
        {
            std::ofstream os(out_dir / "histogram.tsv");
            os << "# seed " << config.seed << " digest " << bundle.digest << "\n";
            os << "label\tbin_center\tcount\tgaussian_overlay\n";
            for (const auto& run : runs) {
                const auto& g = run.analysis.at("gaussianity");
                const double s = g.at("s").get<double>();
                const int n_bins = 61;
                const double lo = -6.0 * s, hi = 6.0 * s;
                const double width = (hi - lo) / n_bins;
                std::vector<std::size_t> counts(n_bins, 0);
                for (double v : run.values) {
                    const int bin = static_cast<int>(std::floor((v - lo) / width));
                    if (bin >= 0 && bin < n_bins)
                        ++counts[bin];
                }
                const double norm =
                    static_cast<double>(run.values.size()) * width / (s * std::sqrt(2.0 * M_PI));
                for (int b = 0; b < n_bins; ++b) {
                    const double x = lo + (b + 0.5) * width;
                    char buf[64];
                    std::snprintf(buf, sizeof(buf), "%.17g", norm * std::exp(-x * x / (2.0 * s * s)));
                    os << run.label << "\t" << x << "\t" << counts[b] << "\t" << buf << "\n";
                }
            }
            bundle.outputs.push_back(out_dir / "histogram.tsv");
        }
        if (config.scan) {
            std::ofstream os(out_dir / "noise_vs_setting.tsv");
            os << "# seed " << config.seed << " digest " << bundle.digest << "\n";
            os << "label\tsetting\tvariance\n";
            char buf[64];
            for (const auto& run : runs) {
                const auto scan = dataset_to_scan(run.dataset);
                for (const auto& point : scan.points) {
                    double mean = 0.0;
                    for (double v : point.values)
                        mean += v;
                    mean /= static_cast<double>(point.values.size());
                    double var = 0.0;
                    for (double v : point.values)
                        var += (v - mean) * (v - mean);
                    var /= static_cast<double>(point.values.size() - 1);
                    std::snprintf(buf, sizeof(buf), "%.17g", var);
                    os << run.label << "\t" << point.setting << "\t" << buf << "\n";
                }
            }
            bundle.outputs.push_back(out_dir / "noise_vs_setting.tsv");
        }

        bundle.report = report;
        return bundle;
    } catch (const PipelineError&) {
        throw;
    } catch (const std::invalid_argument& e) {
        fail(e.what());  // flag partial outputs, keep the validation type
        throw;
    } catch (const std::exception& e) {
        throw fail(e.what());
    }
}

}  // namespace sqn
