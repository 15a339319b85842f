#include "pnrqkd/keyrate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pnrqkd/errors.hpp"
#include "pnrqkd/photon_stats.hpp"
#include "pnrqkd/util.hpp"

namespace pnrqkd {

std::string describe_flags(std::uint32_t flags) {
    if (flags == kRateOk) return "ok";
    std::string out;
    const auto add = [&](std::uint32_t bit, const char* name) {
        if ((flags & bit) == 0) return;
        if (!out.empty()) out += '|';
        out += name;
    };
    add(kDegenerateBounds, "degenerate_bounds");
    add(kNoSinglePhotons, "no_single_photons");
    add(kQberAboveHalf, "qber_above_half");
    add(kNoUntaggedGuarantee, "no_untagged_guarantee");
    return out;
}

double rate_from_single_photon_fraction(double q, double e, double delta1, std::uint32_t& flags) {
    if (!(q > 0.0)) return 0.0;
    if (!(delta1 > 0.0)) {
        flags |= kNoSinglePhotons;
        return 0.0;
    }
    const double e1 = e / delta1;
    if (e1 > 0.5) {
        flags |= kQberAboveHalf;
        return 0.0;
    }
    const double r = 0.5 * q * (delta1 * (1.0 - binary_entropy(e1)) - binary_entropy(e));
    return std::max(0.0, r);
}

double gllp_rate(double q, double e, double p_multi) {
    if (!(q > 0.0)) return 0.0;
    std::uint32_t flags = kRateOk;
    return rate_from_single_photon_fraction(q, e, (q - p_multi) / q, flags);
}

double delta1_lower(const SourceBounds& b, const ChannelObservables& obs) {
    if (!(obs.qs > 0.0)) throw DegenerateBounds("signal gain Q_s must be > 0");
    const double denominator = b.a1_upper * b.a2p_lower - b.a1p_lower * b.a2_upper;
    if (!(denominator > 0.0)) {
        throw DegenerateBounds("a1U*a2pL - a1pL*a2U = " + format_double(denominator) + " is not positive");
    }
    const double numerator = b.a1p_lower * (b.a2p_lower * obs.qd - b.a2_upper * obs.qs -
                                            b.a2p_lower * b.a0_upper * obs.q0 + b.a2_upper * b.a0p_lower * obs.q0);
    return std::clamp(numerator / (obs.qs * denominator), 0.0, 1.0);
}

namespace {

KeyRateReport report_from_delta1(double delta1, std::uint32_t flags, const SourceBounds& b,
                                 const ChannelObservables& obs) {
    KeyRateReport r;
    r.bounds = b;
    r.obs = obs;
    r.distance_km = obs.distance_km;
    r.flags = flags;
    r.delta1_s = delta1;
    r.e1_s = delta1 > 0.0 ? obs.es / delta1 : std::numeric_limits<double>::quiet_NaN();
    if ((r.flags & kDegenerateBounds) == 0) {
        r.rate = rate_from_single_photon_fraction(obs.qs, obs.es, delta1, r.flags);
    }
    return r;
}

}  // namespace

KeyRateReport untrusted_rate(const SourceBounds& b, const ChannelObservables& obs) {
    try {
        return report_from_delta1(delta1_lower(b, obs), kRateOk, b, obs);
    } catch (const DegenerateBounds&) {
        return report_from_delta1(0.0, kDegenerateBounds, b, obs);
    }
}

SourceBounds asymptotic_bounds(double mu_s, double mu_d) {
    if (!(mu_d > 0.0 && mu_d < mu_s) || !std::isfinite(mu_s)) {
        throw InvalidParameter("asymptotic bounds need 0 < mu_d < mu_s, got mu_s=" + format_double(mu_s) +
                               ", mu_d=" + format_double(mu_d));
    }
    const double vs = std::exp(-mu_s);
    const double vd = std::exp(-mu_d);
    SourceBounds b;
    b.a0_upper = vd;
    b.a1_upper = mu_d * vd;
    b.a2_upper = mu_d * mu_d / 2.0 * vd;
    b.a0p_lower = vs;
    b.a1p_lower = mu_s * vs;
    b.a2p_lower = mu_s * mu_s / 2.0 * vs;
    b.confidence = 1.0;
    return b;
}

double trusted_single_photon_gain(double mu_s, double mu_d, const ChannelObservables& obs) {
    const double ms2 = mu_s * mu_s;
    const double md2 = mu_d * mu_d;
    return ms2 * std::exp(-mu_s) / (mu_s * mu_d - md2) *
           (obs.qd * std::exp(mu_d) - obs.qs * std::exp(mu_s) * md2 / ms2 - (ms2 - md2) / ms2 * obs.q0);
}

KeyRateReport trusted_rate(double mu_s, double mu_d, const ChannelObservables& obs) {
    const SourceBounds b = asymptotic_bounds(mu_s, mu_d);
    if (!(obs.qs > 0.0)) return report_from_delta1(0.0, kDegenerateBounds, b, obs);
    const double delta1 = std::clamp(trusted_single_photon_gain(mu_s, mu_d, obs) / obs.qs, 0.0, 1.0);
    return report_from_delta1(delta1, kRateOk, b, obs);
}

}  // namespace pnrqkd
