#include "pnrqkd/pna.hpp"

#include <algorithm>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>

#include "pnrqkd/errors.hpp"
#include "pnrqkd/photon_stats.hpp"
#include "pnrqkd/util.hpp"

namespace pnrqkd {

namespace {

BoundPair untagged_bounds(double value, const UntaggedStats& stats) {
    const double g = stats.guaranteed_fraction();
    if (!(g > 0.0)) {
        throw NoUntaggedGuarantee("1 - delta - eps = " + format_double(g) + " leaves no guaranteed untagged pulses");
    }
    const double loss = stats.delta + stats.eps;
    return {value / g, std::max(0.0, (value - loss) / g)};
}

// C(m, n) eta^n (1 - eta)^(m - n), evaluated in log space.
double binomial_pmf(std::uint64_t m, std::uint64_t n, double eta) {
    if (n > m) return 0.0;
    double log_value = static_cast<double>(m - n) * std::log1p(-eta);
    for (std::uint64_t i = 0; i < n; ++i) {
        log_value += std::log(static_cast<double>(m - i) * eta / static_cast<double>(i + 1));
    }
    return std::exp(log_value);
}

}  // namespace

void UntaggedWindow::validate() const {
    if (m_min > m_max) {
        throw InvalidParameter("untagged window needs m_min <= m_max, got [" + std::to_string(m_min) + ", " +
                               std::to_string(m_max) + "]");
    }
}

UntaggedWindow UntaggedWindow::around(double mean, double rel_half_width) {
    if (!(mean >= 0.0) || !(rel_half_width >= 0.0 && rel_half_width <= 1.0)) {
        throw InvalidParameter("window needs mean >= 0 and relative half-width in [0, 1]");
    }
    return {static_cast<std::uint64_t>(std::llround(mean * (1.0 - rel_half_width))),
            static_cast<std::uint64_t>(std::llround(mean * (1.0 + rel_half_width)))};
}

double pna_resolution(std::uint64_t n_total, double target_confidence) {
    if (n_total < 1) throw InvalidParameter("n_total must be >= 1");
    const double delta = 1.0 - target_confidence;
    if (!(delta > 0.0)) {
        throw InvalidParameter("target confidence must be < 1, got " + format_double(target_confidence));
    }
    if (delta >= 2.0) return 0.0;
    return std::sqrt(4.0 * std::log(2.0 / delta) / static_cast<double>(n_total));
}

double pna_confidence(std::uint64_t n_total, double eps) {
    return std::clamp(1.0 - 2.0 * std::exp(-static_cast<double>(n_total) * eps * eps / 4.0), 0.0, 1.0);
}

UntaggedStats untagged_fraction(const std::map<std::uint64_t, std::uint64_t>& histogram, const UntaggedWindow& window,
                                double target_confidence) {
    window.validate();
    std::uint64_t total = 0;
    std::uint64_t outside = 0;
    for (const auto& [m, pulses] : histogram) {
        total += pulses;
        if (!window.contains(m)) outside += pulses;
    }
    if (total == 0) throw InvalidParameter("photoelectron histogram is empty");
    UntaggedStats stats;
    stats.delta = static_cast<double>(outside) / static_cast<double>(total);
    stats.eps = pna_resolution(total, target_confidence);
    stats.confidence = pna_confidence(total, stats.eps);
    return stats;
}

double poisson_outside_window(double mean, const UntaggedWindow& window) {
    window.validate();
    if (!(mean >= 0.0) || !std::isfinite(mean)) throw InvalidParameter("Poisson mean must be finite and >= 0");
    if (mean == 0.0) return window.contains(0) ? 0.0 : 1.0;
    // P(M <= k) = Q(k + 1, mean), the regularized upper incomplete gamma function.
    const double below = window.m_min == 0 ? 0.0 : boost::math::gamma_q(static_cast<double>(window.m_min), mean);
    const double above = window.m_max == std::numeric_limits<std::uint64_t>::max()
                             ? 0.0
                             : boost::math::gamma_p(static_cast<double>(window.m_max) + 1.0, mean);
    return std::clamp(below + above, 0.0, 1.0);
}

BoundPair untagged_gain_bounds(double q, const UntaggedStats& stats) { return untagged_bounds(q, stats); }

BoundPair untagged_qber_bounds(double qe_product, const UntaggedStats& stats) {
    return untagged_bounds(qe_product, stats);
}

BoundPair output_pnd_bounds(const UntaggedWindow& window, double eta, std::uint64_t n) {
    window.validate();
    if (!(eta > 0.0 && eta < 1.0)) throw InvalidParameter("attenuation must lie in (0, 1)");
    if (!(static_cast<long double>(window.m_max) * eta < 1.0L)) {
        throw PreconditionError("output photon-number bounds need m_max * eta < 1, got " +
                                format_double(static_cast<double>(window.m_max) * eta));
    }
    if (n == 0) {
        return {std::exp(static_cast<double>(window.m_min) * std::log1p(-eta)),
                std::exp(static_cast<double>(window.m_max) * std::log1p(-eta))};
    }
    return {binomial_pmf(window.m_max, n, eta), binomial_pmf(window.m_min, n, eta)};
}

PnaReport pna_key_rate(const ChannelObservables& obs, const UntaggedStats& stats, const UntaggedWindow& window,
                       double eta_s, double eta_d) {
    PnaReport r;
    r.stats = stats;
    r.window = window;
    r.base.obs = obs;
    r.base.distance_km = obs.distance_km;
    r.base.e1_s = std::numeric_limits<double>::quiet_NaN();

    const double g = stats.guaranteed_fraction();
    if (!(g > 0.0)) {
        r.base.flags |= kNoUntaggedGuarantee;
        return r;
    }

    r.p0s = output_pnd_bounds(window, eta_s, 0);
    r.p1s = output_pnd_bounds(window, eta_s, 1);
    r.p2s = output_pnd_bounds(window, eta_s, 2);
    r.p0d = output_pnd_bounds(window, eta_d, 0);
    r.p1d = output_pnd_bounds(window, eta_d, 1);
    r.p2d = output_pnd_bounds(window, eta_d, 2);

    r.qs_upper = untagged_gain_bounds(obs.qs, stats).upper;
    r.qd_lower = untagged_gain_bounds(obs.qd, stats).lower;
    r.qes_upper = untagged_qber_bounds(obs.qs * obs.es, stats).upper;

    // (M_max - M_min)(1 - eta_d)^(M_max - M_min - 1) P2s_lower / (M_min + 1)!, in log space.
    if (window.m_max > window.m_min && r.p2s.lower > 0.0) {
        const auto spread = static_cast<double>(window.m_max - window.m_min);
        const double log_corr = std::log(spread) + (spread - 1.0) * std::log1p(-eta_d) + std::log(r.p2s.lower) -
                                std::lgamma(static_cast<double>(window.m_min) + 2.0);
        r.correction = std::exp(log_corr);
    }

    const double denominator = r.p1d.upper * r.p2s.lower - r.p1s.lower * r.p2d.upper;
    if (!(denominator > 0.0)) {
        r.base.flags |= kDegenerateBounds;
        return r;
    }
    r.q1s_lower = r.p1s.lower / denominator *
                  (r.qd_lower * r.p2s.lower - r.qs_upper * r.p2d.upper + r.p0s.lower * r.p2d.upper * obs.q0 -
                   r.p0d.upper * r.p2s.lower * obs.q0 - r.correction);
    if (obs.qs > 0.0) r.base.delta1_s = std::clamp(r.q1s_lower / obs.qs, 0.0, 1.0);
    if (!(r.q1s_lower > 0.0)) {
        r.base.flags |= kNoSinglePhotons;
        return r;
    }

    const double vacuum_errors = obs.e0 * obs.q0;
    r.e1s_upper = std::max(0.0, (r.qes_upper - r.p0s.lower * vacuum_errors) / r.q1s_lower);
    r.base.e1_s = r.e1s_upper;
    if (r.e1s_upper > 0.5) {
        r.base.flags |= kQberAboveHalf;
        return r;
    }
    r.base.rate =
        std::max(0.0, 0.5 * (-obs.qs * binary_entropy(obs.es) + g * r.q1s_lower * (1.0 - binary_entropy(r.e1s_upper))));
    return r;
}

}  // namespace pnrqkd
