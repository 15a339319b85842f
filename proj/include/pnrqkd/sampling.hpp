#pragma once

#include <array>
#include <cstdint>
#include <random>

#include "pnrqkd/photon_stats.hpp"

namespace pnrqkd {

/// Detector record for one pulse class: pulses with 0, 1, 2 and >= 3 photoelectrons.
struct CountHistogram {
    std::uint64_t k0 = 0;
    std::uint64_t k1 = 0;
    std::uint64_t k2 = 0;
    std::uint64_t k_more = 0;
    std::uint64_t n_pulses = 0;

    [[nodiscard]] bool consistent() const { return k0 + k1 + k2 + k_more == n_pulses; }
    /// k_m / n_pulses for m = 0, 1, 2.
    [[nodiscard]] double frequency(int m) const;

    friend bool operator==(const CountHistogram&, const CountHistogram&) = default;
};

struct PulseBudget {
    std::uint64_t n_total = 0;
    double frac_signal = 0.5;
    double frac_decoy = 0.25;
    double frac_vacuum = 0.25;

    void validate() const;
};

struct PulseSplit {
    std::uint64_t n_signal = 0;
    std::uint64_t n_decoy = 0;
    std::uint64_t n_vacuum = 0;
};

/// Largest-remainder rounding; the three parts always sum to n_total.
PulseSplit split_budget(const PulseBudget& budget);

/// {P(m'=0), P(m'=1), P(m'=2), P(m'>=3)} after adding detector noise.
std::array<double, 4> outcome_probabilities(const PhotonNumberDistribution& pnd_p3, const NoiseModel& noise);

using Engine = std::mt19937_64;

/// Exact Binomial(n, p) draw. Throws CapacityError if n exceeds the signed 64-bit range.
std::uint64_t sample_binomial(std::uint64_t n, double p, Engine& rng);

/// Draws photon numbers from `pnd_p3`, then adds an independent noise draw to
/// each pulse; reproducible for a given seed.
CountHistogram sample_histogram(const PhotonNumberDistribution& pnd_p3, const NoiseModel& noise,
                                std::uint64_t n_pulses, std::uint64_t seed);

/// k_m = round(n P(m'=m)) for m = 0..2, remainder in k_more.
CountHistogram expected_histogram(const PhotonNumberDistribution& pnd_p3, const NoiseModel& noise,
                                  std::uint64_t n_pulses);

}  // namespace pnrqkd
