#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "pnrqkd/bounds.hpp"
#include "pnrqkd/channel.hpp"
#include "pnrqkd/detector_decoy.hpp"
#include "pnrqkd/keyrate.hpp"
#include "pnrqkd/optics.hpp"
#include "pnrqkd/pna.hpp"
#include "pnrqkd/photon_stats.hpp"
#include "pnrqkd/sampling.hpp"

namespace pnrqkd {

inline constexpr int kCsvSchemaVersion = 1;

enum class Scenario { TrustedReference, PnrNoiseless, PnrPoissonDark, PnrGeneralNoise, PnaScheme, DetectorDecoy };
enum class RunMode { MonteCarlo, Deterministic };

/// Exact: mu_signal / mu_decoy feed both the detector and the channel.
/// Optical: means are derived from the source APN and the optical path, so a
/// calibration mismatch shows up between detector and channel.
enum class SourceMode { Exact, Optical };

const char* to_string(Scenario s);
const char* to_string(RunMode m);

struct PnaSettings {
    std::optional<double> eps;                  // overrides the confidence-derived resolution
    std::optional<UntaggedWindow> window;       // explicit [m_min, m_max]
    double rel_half_width = 0.1;                // used when no explicit window is given
};

struct VoaSettings {
    std::array<double, 3> etas{1.0, 0.5, 0.25};
    double lambda = 0.0;
    DarkCountModel dark_model = DarkCountModel::Bernoulli;
};

struct SeriesConfig {
    std::string label;
    Scenario scenario = Scenario::TrustedReference;
    std::uint64_t n_total = 0;
    RunMode mode = RunMode::MonteCarlo;
    bool asymptotic = false;  // exact source statistics, confidence 1
    NoiseModel noise;
    PnaSettings pna;
    VoaSettings voa;
    std::optional<std::uint64_t> seed;  // defaults to the experiment seed
};

struct ExperimentConfig {
    std::string name;
    std::string title;
    std::uint64_t seed = 1;
    double confidence = 1.0 - 1e-6;
    std::vector<double> distances;  // km, strictly increasing
    double mu_signal = 0.5;
    double mu_decoy = 0.1;
    SourceMode source_mode = SourceMode::Exact;
    PoissonianSource source;
    OpticalPath optics;
    GysParameters gys;
    GainModel gain_model = GainModel::Additive;
    double frac_signal = 0.5;
    double frac_decoy = 0.25;
    double frac_vacuum = 0.25;
    std::vector<SeriesConfig> series;
    std::string config_hash;  // FNV-1a of the normalized config document

    /// Throws ConfigError naming the offending field.
    void validate() const;
};

/// Parses and validates a JSON experiment description.
ExperimentConfig parse_config(std::string_view json_text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// 0, step, ..., stop (inclusive when stop is on the grid).
std::vector<double> distance_grid(double start, double stop, double step);

struct SeriesResult {
    SeriesConfig config;
    std::uint64_t seed = 0;
    double mu_signal_p4 = 0.0;
    double mu_decoy_p4 = 0.0;
    PulseSplit split;
    ResolutionPair resolution;
    SourceBounds bounds;
    std::vector<std::pair<SourceClass, CountHistogram>> histograms;
    std::vector<std::pair<SourceClass, SweepRecord>> sweeps;
    std::vector<KeyRateReport> rows;
    std::vector<PnaReport> pna_rows;  // PnaScheme only
};

struct ExperimentResult {
    ExperimentConfig config;
    std::vector<SeriesResult> series;
};

/// Evaluates every series over the distance grid. Series run concurrently;
/// results keep config order.
ExperimentResult run_experiment(const ExperimentConfig& config);

/// Runs a single series; the building block of run_experiment.
SeriesResult run_series(const ExperimentConfig& config, const SeriesConfig& series);

void write_rates_csv(std::ostream& out, const ExperimentResult& result);
void write_histograms_csv(std::ostream& out, const ExperimentResult& result);
void write_sweeps_csv(std::ostream& out, const ExperimentResult& result);
void write_pna_csv(std::ostream& out, const ExperimentResult& result);

struct PlotSeries {
    std::string label;
    std::vector<std::pair<double, double>> points;  // (distance, rate)
};

struct PlotSpec {
    std::string title;
    std::string x_label = "Distance (km)";
    std::string y_label = "Key rate (bits/pulse)";
};

/// Log-y SVG of rate vs distance. Non-positive rates are left off the curve; a
/// series with none left is listed in the legend as "no key". Throws
/// InvalidParameter when `series` is empty.
std::string emit_figure(const std::vector<PlotSeries>& series, const PlotSpec& spec);

std::vector<PlotSeries> plot_series(const ExperimentResult& result);

/// Writes <name>_rates.csv, <name>_histograms.csv, <name>_sweeps.csv,
/// <name>_pna.csv (when present) and optionally <name>.svg. Returns the paths written.
std::vector<std::filesystem::path> write_outputs(const ExperimentResult& result, const std::filesystem::path& out_dir,
                                                 bool with_svg);

}  // namespace pnrqkd
