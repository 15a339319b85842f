#include "pnrqkd/bounds.hpp"

#include <algorithm>
#include <cmath>

#include "pnrqkd/errors.hpp"
#include "pnrqkd/util.hpp"

namespace pnrqkd {

namespace {

double clamp01(double x) { return std::clamp(x, 0.0, 1.0); }

SourceBounds finish(SourceBounds b, const ResolutionPair& res, const CountHistogram& s, const CountHistogram& d) {
    b.a0p_lower = clamp01(b.a0p_lower);
    b.a1p_lower = clamp01(b.a1p_lower);
    b.a2p_lower = clamp01(b.a2p_lower);
    b.a0_upper = clamp01(b.a0_upper);
    b.a1_upper = clamp01(b.a1_upper);
    b.a2_upper = clamp01(b.a2_upper);
    b.confidence = joint_confidence(res, s.n_pulses, d.n_pulses);
    return b;
}

void check_resolution(const ResolutionPair& res) {
    if (!(res.eps_signal >= 0.0) || !(res.eps_decoy >= 0.0)) {
        throw InvalidParameter("estimation resolutions must be >= 0");
    }
}

}  // namespace

ResolutionPair resolution_from_confidence(std::uint64_t n_signal, std::uint64_t n_decoy, double target_confidence) {
    if (n_signal < 1 || n_decoy < 1) throw InvalidParameter("pulse counts must be >= 1");
    const double delta = 1.0 - target_confidence;
    if (!(delta > 0.0) || !(target_confidence > 0.0)) {
        throw InvalidParameter("target confidence must lie in (0, 1), got " + format_double(target_confidence));
    }
    // Each class carries half the failure budget: 6 exp(-N eps^2 / 2) = delta / 2.
    const double log_term = 2.0 * std::log(12.0 / delta);
    return {std::sqrt(log_term / static_cast<double>(n_signal)), std::sqrt(log_term / static_cast<double>(n_decoy))};
}

double joint_confidence(const ResolutionPair& res, std::uint64_t n_signal, std::uint64_t n_decoy) {
    const auto ns = static_cast<double>(n_signal);
    const auto nd = static_cast<double>(n_decoy);
    const double failure = 6.0 * std::exp(-ns * res.eps_signal * res.eps_signal / 2.0) +
                           6.0 * std::exp(-nd * res.eps_decoy * res.eps_decoy / 2.0);
    return clamp01(1.0 - failure);
}

SourceBounds noiseless_bounds(const CountHistogram& signal, const CountHistogram& decoy, const ResolutionPair& res) {
    check_resolution(res);
    const double es = res.eps_signal;
    const double ed = res.eps_decoy;
    SourceBounds b;
    b.a0p_lower = signal.frequency(0) - es;
    b.a1p_lower = signal.frequency(1) - es;
    b.a2p_lower = signal.frequency(2) - es;
    b.a0_upper = decoy.frequency(0) + ed;
    b.a1_upper = decoy.frequency(1) + ed;
    b.a2_upper = decoy.frequency(2) + ed;
    return finish(b, res, signal, decoy);
}

SourceBounds poisson_noise_bounds(const CountHistogram& signal, const CountHistogram& decoy,
                                  const ResolutionPair& res, double lambda) {
    check_resolution(res);
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
        throw InvalidParameter("dark-count mean must be finite and >= 0, got " + format_double(lambda));
    }
    const double c0 = std::exp(lambda);              // e^l
    const double c1 = lambda * c0;                   // l e^l
    const double c2 = lambda * lambda / 2.0 * c0;    // l^2 e^l / 2
    const double es = res.eps_signal;
    const double ed = res.eps_decoy;
    const double s0 = signal.frequency(0);
    const double s1 = signal.frequency(1);
    const double s2 = signal.frequency(2);
    const double d0 = decoy.frequency(0);
    const double d1 = decoy.frequency(1);
    const double d2 = decoy.frequency(2);

    SourceBounds b;
    b.a0p_lower = c0 * (s0 - es);
    b.a1p_lower = -c1 * (s0 + es) + c0 * (s1 - es);
    b.a2p_lower = c2 * (s0 - es) - c1 * (s1 + es) + c0 * (s2 - es);
    b.a0_upper = c0 * (d0 + ed);
    b.a1_upper = -c1 * (d0 - ed) + c0 * (d1 + ed);
    b.a2_upper = c2 * (d0 + ed) - c1 * (d1 - ed) + c0 * (d2 + ed);
    return finish(b, res, signal, decoy);
}

SourceBounds general_noise_bounds(const CountHistogram& signal, const CountHistogram& decoy,
                                  const ResolutionPair& res, const PhotonNumberDistribution& noise) {
    check_resolution(res);
    const double n0 = noise[0];
    const double n1 = noise[1];
    const double n2 = noise[2];
    if (!(n0 > 0.0)) throw SingularDeconvolution("noise probability N(y=0) is zero; deconvolution is singular");
    const double n0sq = n0 * n0;
    const double n0cu = n0sq * n0;
    const double es = res.eps_signal;
    const double ed = res.eps_decoy;
    const double s0 = signal.frequency(0);
    const double s1 = signal.frequency(1);
    const double s2 = signal.frequency(2);
    const double d0 = decoy.frequency(0);
    const double d1 = decoy.frequency(1);
    const double d2 = decoy.frequency(2);

    SourceBounds b;
    b.a0p_lower = (s0 - es) / n0;
    b.a1p_lower = ((s1 - es) * n0 - (s0 + es) * n1) / n0sq;
    b.a2p_lower = (s2 - es) / n0 - (s1 + es) / n0sq * n1 + (s0 - es) / n0cu * (n1 * n1) - (s0 + es) / n0sq * n2;
    b.a0_upper = (d0 + ed) / n0;
    b.a1_upper = ((d1 + ed) * n0 - (d0 - ed) * n1) / n0sq;
    b.a2_upper = (d2 + ed) / n0 - (d1 - ed) / n0sq * n1 + (d0 + ed) / n0cu * (n1 * n1) - (d0 - ed) / n0sq * n2;
    return finish(b, res, signal, decoy);
}

SourceBounds estimate_bounds(const CountHistogram& signal, const CountHistogram& decoy, const ResolutionPair& res,
                             const NoiseModel& noise) {
    if (std::holds_alternative<NoNoise>(noise.kind())) return noiseless_bounds(signal, decoy, res);
    if (const auto* dark = std::get_if<PoissonDark>(&noise.kind())) {
        return poisson_noise_bounds(signal, decoy, res, dark->lambda);
    }
    return general_noise_bounds(signal, decoy, res, std::get<GeneralNoise>(noise.kind()).pnd);
}

}  // namespace pnrqkd
