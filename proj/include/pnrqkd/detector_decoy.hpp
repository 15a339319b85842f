#pragma once

#include <array>
#include <cstdint>

#include "pnrqkd/bounds.hpp"
#include "pnrqkd/photon_stats.hpp"

namespace pnrqkd {

/// How threshold-detector dark counts suppress the no-click probability.
enum class DarkCountModel {
    Bernoulli,  // factor (1 - lambda), lambda in [0, 1)
    Poisson,    // factor exp(-lambda)
};

/// No-click statistics of a threshold detector behind a variable attenuator set
/// to three transmittances eta_0 = 1 > eta_1 > eta_2 > 0.
struct VoaSweep {
    std::array<double, 3> etas{1.0, 0.5, 0.25};
    std::array<double, 3> no_click{1.0, 1.0, 1.0};
    double lambda = 0.0;
    std::uint64_t n_pulses_per_setting = 0;  // 0: no_click holds exact probabilities
    DarkCountModel dark_model = DarkCountModel::Bernoulli;

    void validate() const;
    /// Probability that no dark count fires.
    [[nodiscard]] double dark_survival() const;
};

/// Bounds on p'_0, p'_1, p'_2, the photon-number probabilities after the detector efficiency.
struct PPrimeBounds {
    double p0 = 0.0;
    double p1_lower = 0.0;
    double p1_upper = 0.0;
    double p2_lower = 0.0;
    double p2_upper = 0.0;
    bool consistent = true;  // lower <= upper for both pairs before clamping
};

/// (1 - lambda) sum_n (1 - eta)^n p'_n, or with exp(-lambda) for the Poisson model.
double no_click_probability(const PhotonNumberDistribution& pnd_after_det_efficiency, double eta, double lambda,
                            DarkCountModel model = DarkCountModel::Bernoulli);

PPrimeBounds p_prime_bounds(const VoaSweep& sweep);

/// Source bounds from the signal and decoy sweeps. Each measured no-click
/// frequency is widened by the class resolution and the bound formulas are
/// evaluated at the worst corner of the resulting box.
SourceBounds sweep_to_source_bounds(const VoaSweep& signal, const VoaSweep& decoy, const ResolutionPair& res);

/// Click/no-click record for one class.
struct SweepRecord {
    VoaSweep sweep;
    std::array<std::uint64_t, 3> clicks{};
    std::array<std::uint64_t, 3> no_clicks{};
    std::uint64_t seed = 0;
};

/// Monte Carlo record with `n_per_setting` pulses at each transmittance; exact
/// probabilities when n_per_setting is 0.
SweepRecord simulate_sweep(const PhotonNumberDistribution& pnd_after_det_efficiency, const std::array<double, 3>& etas,
                           double lambda, DarkCountModel model, std::uint64_t n_per_setting, std::uint64_t seed);

/// Deterministic record: no-click counts are round(n p(eta_i)).
SweepRecord expected_sweep(const PhotonNumberDistribution& pnd_after_det_efficiency, const std::array<double, 3>& etas,
                           double lambda, DarkCountModel model, std::uint64_t n_per_setting);

}  // namespace pnrqkd
