#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "demuxsr/source_model.hpp"

namespace demuxsr {

/// Scan grid: either uniform (min/max/points) or an explicit list.
struct ScanGridSpec {
    double min = 0.0;
    double max = 0.0;
    int points = 0;
    std::vector<double> explicit_points;

    bool is_explicit() const { return !explicit_points.empty(); }
    std::vector<double> positions() const;
};

/// Experiment description parsed from the key: value config format (see
/// README for the grammar). Defaults reproduce the reference two-source
/// scenario: sigma 1, sources at -0.025 and 0.075, 21 scan points on
/// [-0.2 sigma, 0.2 sigma].
struct ExperimentConfig {
    std::vector<double> source_x{-0.025, 0.075};
    std::vector<double> source_w{0.5, 0.5};
    double sigma = 1.0;
    std::string psf_path;  // empty: Gaussian of width sigma
    std::int64_t n_photons = 100000;
    ScanGridSpec scan_grid;  // points == 0: default grid
    int repetitions = 1000;
    std::uint64_t seed = 1;
    std::string output_path = ".";
    std::string allocation = "equal";  // or "proportional"
    int histogram_bins = 0;            // 0: Freedman-Diaconis
    std::vector<double> sweep_d;
    std::vector<double> sweep_n;
    double eps = 0.05;
    double theta = 0.025;

    SourceEnsemble ensemble() const;
    std::vector<double> grid_positions() const;

    /// Canonical one-key-per-line rendering; its FNV-1a hash identifies
    /// the effective configuration in every output file.
    std::string canonical_text() const;
    std::string hash() const;
};

/// Parse a config file. Unknown keys are rejected (config_error), as are
/// type mismatches and invariant violations.
ExperimentConfig load_config(const std::string& path);

/// Parse config text (same grammar as the file contents).
ExperimentConfig parse_config(const std::string& text);

}  // namespace demuxsr
