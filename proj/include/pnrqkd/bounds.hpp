#pragma once

#include <cstdint>

#include "pnrqkd/photon_stats.hpp"
#include "pnrqkd/sampling.hpp"

namespace pnrqkd {

/// Lower bounds on the signal source's vacuum/one/two-photon probabilities and
/// upper bounds on the decoy source's, all clamped to [0, 1].
struct SourceBounds {
    double a0p_lower = 0.0;
    double a1p_lower = 0.0;
    double a2p_lower = 0.0;
    double a0_upper = 1.0;
    double a1_upper = 1.0;
    double a2_upper = 1.0;
    double confidence = 0.0;

    friend bool operator==(const SourceBounds&, const SourceBounds&) = default;
};

/// Estimation resolutions: eps_signal (for signal frequencies), eps_decoy (for decoy frequencies).
struct ResolutionPair {
    double eps_signal = 0.0;
    double eps_decoy = 0.0;
};

/// Splits the failure budget 1 - target_confidence equally between the signal
/// and decoy terms of 1 - 6 exp(-Ns eps'^2 / 2) - 6 exp(-Nd eps^2 / 2).
ResolutionPair resolution_from_confidence(std::uint64_t n_signal, std::uint64_t n_decoy, double target_confidence);

/// 1 - 6 exp(-Ns eps'^2/2) - 6 exp(-Nd eps^2/2), clamped to [0, 1].
double joint_confidence(const ResolutionPair& res, std::uint64_t n_signal, std::uint64_t n_decoy);

SourceBounds noiseless_bounds(const CountHistogram& signal, const CountHistogram& decoy, const ResolutionPair& res);

/// Bounds for a detector with Poisson dark counts of mean `lambda`.
SourceBounds poisson_noise_bounds(const CountHistogram& signal, const CountHistogram& decoy,
                                  const ResolutionPair& res, double lambda);

/// Bounds for arbitrary additive noise; only N(y=0..2) enter.
SourceBounds general_noise_bounds(const CountHistogram& signal, const CountHistogram& decoy,
                                  const ResolutionPair& res, const PhotonNumberDistribution& noise);

/// Picks the estimator matching the noise model.
SourceBounds estimate_bounds(const CountHistogram& signal, const CountHistogram& decoy, const ResolutionPair& res,
                             const NoiseModel& noise);

}  // namespace pnrqkd
