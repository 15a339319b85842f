#pragma once

#include <cstdint>
#include <limits>
#include <map>

#include "pnrqkd/channel.hpp"
#include "pnrqkd/keyrate.hpp"

namespace pnrqkd {

/// Photon-number window at the monitoring position that defines untagged pulses.
struct UntaggedWindow {
    std::uint64_t m_min = 0;
    std::uint64_t m_max = std::numeric_limits<std::uint64_t>::max();

    void validate() const;
    [[nodiscard]] bool contains(std::uint64_t m) const { return m >= m_min && m <= m_max; }
    /// [round((1 - rel) mean), round((1 + rel) mean)].
    static UntaggedWindow around(double mean, double rel_half_width);
};

/// delta: fraction of pulses outside the window; eps: resolution; at least
/// (1 - delta - eps) N pulses are untagged with probability `confidence`.
struct UntaggedStats {
    double delta = 0.0;
    double eps = 0.0;
    double confidence = 1.0;

    [[nodiscard]] double guaranteed_fraction() const { return 1.0 - delta - eps; }
};

struct BoundPair {
    double upper = 0.0;
    double lower = 0.0;
};

/// eps = sqrt(4 ln(2 / delta) / N), delta = 1 - target_confidence; 0 once delta >= 2.
double pna_resolution(std::uint64_t n_total, double target_confidence);

/// Confidence 1 - 2 exp(-N eps^2 / 4), clamped to [0, 1].
double pna_confidence(std::uint64_t n_total, double eps);

/// Fraction of recorded pulses outside the window. `histogram` maps photoelectron count -> pulses.
UntaggedStats untagged_fraction(const std::map<std::uint64_t, std::uint64_t>& histogram, const UntaggedWindow& window,
                                double target_confidence);

/// Probability that a Poisson(mean) photon number falls outside the window.
double poisson_outside_window(double mean, const UntaggedWindow& window);

BoundPair untagged_gain_bounds(double q, const UntaggedStats& stats);
BoundPair untagged_qber_bounds(double qe_product, const UntaggedStats& stats);

/// Bounds on the probability of n photons leaving the attenuator `eta` for an
/// untagged pulse. Requires m_max * eta < 1.
BoundPair output_pnd_bounds(const UntaggedWindow& window, double eta, std::uint64_t n);

struct PnaReport {
    KeyRateReport base;  // rate, delta1_s = q1s_lower / Q_s, e1_s = e1s_upper, flags
    UntaggedStats stats;
    UntaggedWindow window;
    double q1s_lower = 0.0;
    double e1s_upper = 0.0;
    double qs_upper = 0.0;
    double qd_lower = 0.0;
    double qes_upper = 0.0;
    double correction = 0.0;
    BoundPair p0s, p1s, p2s, p0d, p1d, p2d;
};

/// Untagged-bits key rate of the passive photon-number-analyzer scheme.
PnaReport pna_key_rate(const ChannelObservables& obs, const UntaggedStats& stats, const UntaggedWindow& window,
                       double eta_s, double eta_d);

}  // namespace pnrqkd
