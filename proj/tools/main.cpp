// Command-line front end: simulate, scan, analyze, fit, reconstruct, and
// report subcommands composing over dataset files.
//
// Exit codes: 0 success (all statistical verdicts pass), 1 statistical
// verdict failed (still a successful run), 2 validation failure,
// 3 runtime failure.
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "sqn/mixture_fit.hpp"
#include "sqn/pipeline.hpp"
#include "sqn/reconstruct.hpp"
#include "sqn/rng.hpp"
#include "sqn/shapiro_wilk.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitVerdictFail = 1;
constexpr int kExitValidation = 2;
constexpr int kExitRuntime = 3;

struct CommonArgs {
    std::string config_path;
    std::string out_dir = "sqn-out";
    std::string format = "binary";
    std::uint64_t seed = 0;
    bool seed_set = false;
};

sqn::RunConfig load_config(const CommonArgs& args) {
    auto config = sqn::RunConfig::from_file(args.config_path);
    if (args.seed_set)
        config.seed = args.seed;
    if (args.format == "text")
        config.format = sqn::DatasetFormat::Text;
    return config;
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
    std::filesystem::create_directories(path.parent_path().empty() ? "." : path.parent_path());
    std::ofstream os(path);
    if (!os)
        throw std::runtime_error("cannot write " + path.string());
    os << j.dump(2) << "\n";
}

int run_report(const CommonArgs& args) {
    const auto config = load_config(args);
    const auto bundle = sqn::run_pipeline(config, args.out_dir);
    std::cout << "report written to " << args.out_dir << " (digest " << bundle.digest << ")\n";
    return bundle.all_pass ? kExitOk : kExitVerdictFail;
}

int run_simulate(const CommonArgs& args) {
    auto config = load_config(args);
    config.scan.reset();
    config.fit_mixture = false;
    config.run_reconstruction = false;
    const auto bundle = sqn::run_pipeline(config, args.out_dir);
    std::cout << "datasets written to " << args.out_dir << "\n";
    return bundle.all_pass ? kExitOk : kExitVerdictFail;
}

int run_scan(const CommonArgs& args) {
    auto config = load_config(args);
    if (!config.scan)
        throw std::invalid_argument("scan subcommand requires a 'scan' block in the config");
    const auto bundle = sqn::run_pipeline(config, args.out_dir);
    std::cout << "scan datasets written to " << args.out_dir << "\n";
    return bundle.all_pass ? kExitOk : kExitVerdictFail;
}

int run_analyze(const std::string& input, const std::string& out_dir, int max_order,
                double significance, std::uint64_t seed, std::size_t bootstrap_rounds,
                int threads) {
    const auto dataset = sqn::read_dataset(input);
    sqn::AnalysisOptions options;
    options.max_order = max_order;
    options.significance = significance;
    options.seed = seed;
    options.bootstrap_rounds = bootstrap_rounds;
    options.threads = threads;

    std::vector<std::size_t> batches;
    for (auto c : dataset.header.per_setting_counts)
        batches.push_back(static_cast<std::size_t>(c));
    const auto report = batches.size() > 1
                            ? sqn::gaussianity_report_batched(dataset.value, batches, options)
                            : sqn::gaussianity_report(dataset.value, options);
    auto j = sqn::report_to_json(report);
    j["asymmetry"] = sqn::asymmetry_to_json(sqn::infer_asymmetry(report));
    const auto sw = sqn::shapiro_wilk(dataset.value, sqn::split_seed(seed, 0x57ULL));
    j["w_test"] = {{"W", sw.w}, {"p", sw.p_value}, {"n_used", sw.n_used},
                   {"subsampled", sw.subsampled}};
    j["beam"] = dataset.header.beam;
    write_json(std::filesystem::path(out_dir) / "analysis.json", j);

    std::cout << "k = " << sqn::format_with_uncertainty(report.k, report.k_std_error)
              << (report.all_pass ? "  [all orders pass]" : "  [statistical fail]") << "\n";
    return report.all_pass ? kExitOk : kExitVerdictFail;
}

int run_fit(const std::string& input, const std::string& out_dir, int threads) {
    const auto dataset = sqn::read_dataset(input);
    sqn::MixtureFitOptions options;
    options.threads = threads;
    const auto fit = sqn::fit_phase_mixed_gaussian(dataset.value, options);
    nlohmann::json j = {{"s_cos", fit.s_cos},
                        {"s_sin", fit.s_sin},
                        {"c", fit.c},
                        {"log_likelihood", fit.log_likelihood},
                        {"converged", fit.converged},
                        {"iterations", fit.iterations},
                        {"likelihood_gain", fit.likelihood_gain},
                        {"quadrature_nodes", fit.quadrature_nodes},
                        {"node_doubling_change", fit.node_doubling_change},
                        {"beam", dataset.header.beam}};
    write_json(std::filesystem::path(out_dir) / "fit.json", j);
    std::cout << "fit: s_cos = " << fit.s_cos << ", s_sin = " << fit.s_sin
              << ", likelihood gain = " << fit.likelihood_gain << "\n";
    return kExitOk;
}

int run_reconstruct(const std::string& input, const std::string& out_dir,
                    const std::string& technique, std::uint64_t seed,
                    std::size_t bootstrap_rounds, int threads) {
    const auto dataset = sqn::read_dataset(input);
    const auto scan = sqn::dataset_to_scan(dataset);
    sqn::ReconstructionOptions options;
    options.seed = seed;
    options.bootstrap_rounds = bootstrap_rounds;
    options.threads = threads;
    const sqn::Technique tech = technique == "hd" ? sqn::Technique::HD : sqn::Technique::RD;
    const auto rec = sqn::reconstruct_symmetric_covariance(scan, tech,
                                                           sqn::default_rd_coefficients, options);
    nlohmann::json j = {{"alpha", rec.params.alpha},
                        {"beta", rec.params.beta},
                        {"gamma", rec.params.gamma},
                        {"delta", rec.params.delta},
                        {"std_errors",
                         {rec.std_error(0), rec.std_error(1), rec.std_error(2), rec.std_error(3)}},
                        {"inaccessible", rec.inaccessible},
                        {"chi_square", rec.chi_square},
                        {"degrees_of_freedom", rec.degrees_of_freedom},
                        {"reduced_chi_square", rec.reduced_chi_square},
                        {"beam", dataset.header.beam}};
    write_json(std::filesystem::path(out_dir) / "reconstruction.json", j);
    std::cout << "reconstruction: alpha = " << rec.params.alpha << ", beta = " << rec.params.beta
              << ", gamma = " << rec.params.gamma;
    if (rec.accessible("delta"))
        std::cout << ", delta = " << rec.params.delta;
    else
        std::cout << ", delta inaccessible";
    std::cout << " (reduced chi2 = " << rec.reduced_chi_square << ")\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Phase-mixed spectral quantum-noise simulation and analysis"};
    app.require_subcommand(1);

    CommonArgs common;
    std::string input;
    int max_order = 14;
    double significance = 3.0;
    std::uint64_t analysis_seed = 1;
    std::size_t bootstrap_rounds = 200;
    int threads = 1;
    std::string technique = "rd";

    auto add_config_opts = [&](CLI::App* cmd) {
        cmd->add_option("--config", common.config_path, "Run configuration JSON")->required();
        cmd->add_option("--seed", common.seed, "Master seed override")
            ->each([&](const std::string&) { common.seed_set = true; });
        cmd->add_option("--out-dir", common.out_dir, "Output directory");
        cmd->add_option("--format", common.format, "Dataset format")
            ->check(CLI::IsMember({"binary", "text"}));
    };

    auto* simulate = app.add_subcommand("simulate", "Simulate beams and write datasets");
    add_config_opts(simulate);
    auto* scan = app.add_subcommand("scan", "Run a detuning or LO-phase scan");
    add_config_opts(scan);
    auto* report = app.add_subcommand("report", "Full simulate/analyze/report pipeline");
    add_config_opts(report);

    auto add_analysis_opts = [&](CLI::App* cmd) {
        cmd->add_option("--input", input, "Dataset file")->required();
        cmd->add_option("--out-dir", common.out_dir, "Output directory");
        cmd->add_option("--seed", analysis_seed, "Analysis seed");
        cmd->add_option("--threads", threads, "Worker threads");
    };

    auto* analyze = app.add_subcommand("analyze", "Gaussianity report for a dataset");
    add_analysis_opts(analyze);
    analyze->add_option("--max-order", max_order, "Highest moment order");
    analyze->add_option("--significance", significance, "Per-order significance (std errors)");
    analyze->add_option("--bootstrap-rounds", bootstrap_rounds, "Bootstrap resamples");

    auto* fit = app.add_subcommand("fit", "Phase-mixed Gaussian MLE fit");
    add_analysis_opts(fit);

    auto* reconstruct = app.add_subcommand("reconstruct", "Symmetric-covariance reconstruction");
    add_analysis_opts(reconstruct);
    reconstruct->add_option("--technique", technique, "Measurement technique")
        ->check(CLI::IsMember({"hd", "rd"}));
    reconstruct->add_option("--bootstrap-rounds", bootstrap_rounds, "Bootstrap resamples");

    CLI11_PARSE(app, argc, argv);

    try {
        if (simulate->parsed())
            return run_simulate(common);
        if (scan->parsed())
            return run_scan(common);
        if (report->parsed())
            return run_report(common);
        if (analyze->parsed())
            return run_analyze(input, common.out_dir, max_order, significance, analysis_seed,
                               bootstrap_rounds, threads);
        if (fit->parsed())
            return run_fit(input, common.out_dir, threads);
        if (reconstruct->parsed())
            return run_reconstruct(input, common.out_dir, technique, analysis_seed,
                                   bootstrap_rounds, threads);
    } catch (const std::invalid_argument& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const sqn::DatasetError& e) {
        std::cerr << "dataset error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "runtime error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return kExitOk;
}
