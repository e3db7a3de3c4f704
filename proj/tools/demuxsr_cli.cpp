// Command-line runner for demultiplexing superresolution experiments:
// scan simulation and parabola fitting, repeated Monte-Carlo studies,
// precision sweeps, photon-budget optimization and qubit-model reports.

#include <cstdint>
#include <exception>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "demuxsr/config.hpp"
#include "demuxsr/errors.hpp"
#include "demuxsr/experiment.hpp"
#include "demuxsr/inference.hpp"
#include "demuxsr/io_util.hpp"

namespace {

struct GlobalOptions {
    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    bool seed_given = false;
    bool expected_counts = false;
    int threads = 1;
};

demuxsr::ExperimentConfig effective_config(const GlobalOptions& opts) {
    demuxsr::ExperimentConfig config;
    if (!opts.config_path.empty())
        config = demuxsr::load_config(opts.config_path);
    if (opts.seed_given) config.seed = opts.seed;
    if (!opts.out_dir.empty()) config.output_path = opts.out_dir;
    return config;
}

std::string output_file(const demuxsr::ExperimentConfig& config,
                        const std::string& name) {
    namespace fs = std::filesystem;
    fs::path dir(config.output_path);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec)
        throw demuxsr::io_error("cannot create output directory: " +
                                dir.string());
    return (dir / name).string();
}

void run_scan_command(const GlobalOptions& opts) {
    const auto config = effective_config(opts);
    const auto run = demuxsr::run_scan(config, opts.expected_counts);
    demuxsr::write_scan_csv(output_file(config, "scan.csv"), run, config);
    demuxsr::write_fit_json(output_file(config, "scan_fit.json"), run.fit,
                            config);
    std::cout << "i_c_hat=" << demuxsr::fmt_double(run.fit.i_c_hat)
              << " x_c_hat=" << demuxsr::fmt_double(run.fit.x_c_hat)
              << " chi_square=" << demuxsr::fmt_double(run.fit.chi_square)
              << " dof=" << run.fit.dof << "\n";
}

void run_fig2_command(const GlobalOptions& opts) {
    const auto config = effective_config(opts);
    const auto result = demuxsr::replicate_fig2(config, opts.threads);
    demuxsr::write_fig2_csv(output_file(config, "fig2_hist.csv"), result,
                            config);
    demuxsr::write_fig2_json(output_file(config, "fig2_summary.json"), result,
                             config);
    std::cout << "repetitions=" << config.repetitions
              << " mean=" << demuxsr::fmt_double(result.mean)
              << " sem=" << demuxsr::fmt_double(result.sem)
              << " gauss_fit_mean="
              << demuxsr::fmt_double(result.gauss_fit_mean) << "\n";
}

void run_sweep_command(const GlobalOptions& opts) {
    const auto config = effective_config(opts);
    const auto rows = demuxsr::sweep_precision(config, opts.threads);
    demuxsr::write_sweep_csv(output_file(config, "sweep.csv"), rows, config);
    std::cout << "sweep rows=" << rows.size() << "\n";
}

void run_budget_command(const GlobalOptions& opts) {
    const auto config = effective_config(opts);
    const auto sweep = demuxsr::optimize_budget(
        config.n_photons, config.ensemble(), config.sigma, config.repetitions,
        config.seed, opts.threads);
    demuxsr::write_budget_csv(output_file(config, "budget.csv"), sweep, config);
    demuxsr::write_budget_json(output_file(config, "budget_best.json"), sweep,
                               config);
    std::cout << "best n_centroid=" << sweep.best.n_centroid
              << " alpha=" << demuxsr::fmt_double(sweep.best.alpha)
              << " rmse=" << demuxsr::fmt_double(sweep.best_rmse) << "\n";
}

void run_qubit_command(const GlobalOptions& opts, double eps, double theta,
                       bool point_given) {
    auto config = effective_config(opts);
    if (point_given) {
        config.eps = eps;
        config.theta = theta;
    }
    nlohmann::json report = nlohmann::json::parse(
        demuxsr::report_qubit(config.eps, config.theta, config.n_photons));
    report["seed"] = config.seed;
    report["config_hash"] = config.hash();
    const std::string text = report.dump(2) + "\n";
    demuxsr::write_text_file(output_file(config, "qubit.json"), text);
    std::cout << text;
}

void run_fisher_command(const GlobalOptions& opts, double d, bool d_given) {
    const auto config = effective_config(opts);
    const double half_sep =
        d_given ? d
                : (config.sweep_d.empty() ? 0.05 : config.sweep_d.front());
    const double f_demux = demuxsr::fisher_demux(half_sep, config.sigma);
    const double f_direct = demuxsr::fisher_direct(half_sep, config.sigma);
    const auto n = static_cast<double>(config.n_photons);
    nlohmann::json j;
    j["schema"] = "demux-sr/v1";
    j["kind"] = "fisher";
    j["d"] = half_sep;
    j["sigma"] = config.sigma;
    j["n_photons"] = config.n_photons;
    j["fisher_demux_per_photon"] = f_demux;
    j["delta_d_demux"] = 1.0 / std::sqrt(n * f_demux);
    j["fisher_direct_per_photon"] = f_direct;
    j["delta_d_direct"] = 1.0 / std::sqrt(n * f_direct);
    std::cout << j.dump(2) << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"spatial-mode demultiplexing superresolution toolkit"};
    app.require_subcommand(1);
    app.fallthrough();

    GlobalOptions opts;
    app.add_option("--config", opts.config_path, "experiment config file");
    auto* seed_opt =
        app.add_option("--seed", opts.seed, "override the config seed");
    app.add_option("--out", opts.out_dir, "override the output directory");
    app.add_flag("--expected-counts", opts.expected_counts,
                 "noiseless mode: feed expected counts to the fitter");
    app.add_option("--threads", opts.threads,
                   "worker threads (never changes results)")
        ->check(CLI::PositiveNumber);

    app.add_subcommand("scan", "simulate one scan and fit the parabola");
    app.add_subcommand("fig2",
                       "repeat the scan study; histogram the fitted I_C");
    app.add_subcommand("sweep", "precision sweep over (d, N) cells");
    app.add_subcommand("budget", "optimize the two-stage photon split");

    double eps = 0.0, theta = 0.0;
    auto* qubit = app.add_subcommand("qubit", "qubit-model report");
    auto* eps_opt = qubit->add_option("--eps", eps, "effective radius");
    qubit->add_option("--theta", theta, "centroid offset in mode widths");

    double d = 0.0;
    auto* fisher = app.add_subcommand("fisher",
                                      "print demux and direct-imaging "
                                      "information and precision");
    auto* d_opt = fisher->add_option("--d", d, "pair half-separation");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    opts.seed_given = seed_opt->count() > 0;
    try {
        if (app.got_subcommand("scan")) run_scan_command(opts);
        if (app.got_subcommand("fig2")) run_fig2_command(opts);
        if (app.got_subcommand("sweep")) run_sweep_command(opts);
        if (app.got_subcommand("budget")) run_budget_command(opts);
        if (app.got_subcommand("qubit"))
            run_qubit_command(opts, eps, theta, eps_opt->count() > 0);
        if (app.got_subcommand("fisher"))
            run_fisher_command(opts, d, d_opt->count() > 0);
    } catch (const demuxsr::config_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const demuxsr::io_error& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return 4;
    } catch (const demuxsr::model_error& e) {
        std::cerr << "model error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
