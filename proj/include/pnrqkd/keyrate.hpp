#pragma once

#include <cstdint>
#include <string>

#include "pnrqkd/bounds.hpp"
#include "pnrqkd/channel.hpp"

namespace pnrqkd {

/// Diagnostic flags carried by a rate report. A set flag means the rate was forced to 0.
enum RateFlag : std::uint32_t {
    kRateOk = 0,
    kDegenerateBounds = 1u << 0,   // decoy-state denominator <= 0 or Q_s <= 0
    kNoSinglePhotons = 1u << 1,    // Delta_1 lower bound is 0
    kQberAboveHalf = 1u << 2,      // e_1 > 0.5
    kNoUntaggedGuarantee = 1u << 3, // 1 - Delta - eps <= 0
};

/// "ok" or a '|'-joined list of flag names.
std::string describe_flags(std::uint32_t flags);

struct KeyRateReport {
    double rate = 0.0;      // secure bits per pulse, >= 0
    double delta1_s = 0.0;  // lower bound on the single-photon fraction of signal counts
    double e1_s = 0.0;      // upper bound on the single-photon error rate (NaN when delta1_s = 0)
    double distance_km = 0.0;
    SourceBounds bounds;
    ChannelObservables obs;
    std::uint32_t flags = kRateOk;
};

/// Rate for a source whose multi-photon emission probability is `p_multi`, with
/// every loss and error attributed to single photons.
double gllp_rate(double q, double e, double p_multi);

/// 1/2 Q {Delta_1 [1 - H2(E / Delta_1)] - H2(E)} clamped at 0; sets flags on `flags`.
double rate_from_single_photon_fraction(double q, double e, double delta1, std::uint32_t& flags);

/// Lower bound on Delta_1^s from the six source bounds, clamped to [0, 1].
/// Throws DegenerateBounds when Q_s <= 0 or a1U a2pL - a1pL a2U <= 0.
double delta1_lower(const SourceBounds& b, const ChannelObservables& obs);

/// Three-intensity decoy-state rate for an untrusted source given its monitored bounds.
KeyRateReport untrusted_rate(const SourceBounds& b, const ChannelObservables& obs);

/// Exact Poisson probabilities for signal mean mu_s and decoy mean mu_d (confidence 1).
SourceBounds asymptotic_bounds(double mu_s, double mu_d);

/// Three-intensity rate for a trusted Poissonian source, from the closed-form
/// single-photon gain bound.
KeyRateReport trusted_rate(double mu_s, double mu_d, const ChannelObservables& obs);

/// Closed-form single-photon gain lower bound of a trusted Poissonian source.
double trusted_single_photon_gain(double mu_s, double mu_d, const ChannelObservables& obs);

}  // namespace pnrqkd
