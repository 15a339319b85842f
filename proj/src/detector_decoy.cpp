#include "pnrqkd/detector_decoy.hpp"

#include <algorithm>
#include <cmath>

#include "pnrqkd/errors.hpp"
#include "pnrqkd/sampling.hpp"
#include "pnrqkd/util.hpp"

namespace pnrqkd {

namespace {

double survival(double lambda, DarkCountModel model) {
    return model == DarkCountModel::Bernoulli ? 1.0 - lambda : std::exp(-lambda);
}

void check_lambda(double lambda, DarkCountModel model) {
    if (model == DarkCountModel::Bernoulli && lambda == 1.0) {
        throw DegenerateDetector("dark-count probability 1: the detector always clicks");
    }
    if (!(lambda >= 0.0) || !std::isfinite(lambda) || (model == DarkCountModel::Bernoulli && lambda > 1.0)) {
        throw InvalidParameter("dark-count rate out of range: " + format_double(lambda));
    }
}

struct RawBounds {
    double p0, p1_lower, p1_upper, p2_lower, p2_upper;
};

// Bounds from the three no-click probabilities, before clamping.
RawBounds raw_bounds(double q0, double q1, double q2, double eta1, double eta2, double s) {
    const double b1 = 1.0 - eta1;
    const double b1sq = b1 * b1;
    const double b2 = 1.0 - eta2;
    const double b2sq = b2 * b2;
    const double b2cu = b2sq * b2;

    RawBounds r{};
    r.p0 = q0 / s;
    r.p1_upper = (q1 - q0) / (s * b1);
    r.p1_lower = (q1 - q0 * (1.0 - b1sq) - s * b1sq) / (s * (b1 - b1sq));
    r.p2_upper = (q2 - q0 - s * b2 * r.p1_lower) / (s * b2sq);
    r.p2_lower = (q2 - (1.0 - b2cu) * q0 - s * (b2 - b2cu) * r.p1_upper - s * b2cu) / (s * (b2sq - b2cu));
    return r;
}

double clamp01(double x) { return std::clamp(x, 0.0, 1.0); }

}  // namespace

void VoaSweep::validate() const {
    check_lambda(lambda, dark_model);
    if (etas[0] != 1.0) throw InvalidParameter("first attenuator setting must be eta_0 = 1");
    if (etas[1] == 1.0) throw PreconditionError("eta_1 = 1 makes the p'_1 bounds divide by zero");
    if (!(etas[2] > 0.0 && etas[2] < etas[1] && etas[1] < 1.0)) {
        throw InvalidParameter("attenuator settings need 0 < eta_2 < eta_1 < 1");
    }
    for (const double p : no_click) {
        if (!(p >= 0.0 && p <= 1.0)) throw InvalidParameter("no-click probabilities must lie in [0, 1]");
    }
}

double VoaSweep::dark_survival() const { return survival(lambda, dark_model); }

double no_click_probability(const PhotonNumberDistribution& pnd, double eta, double lambda, DarkCountModel model) {
    if (!(eta >= 0.0 && eta <= 1.0)) throw InvalidParameter("attenuator transmittance must lie in [0, 1]");
    check_lambda(lambda, model);
    const double pass = 1.0 - eta;
    double sum = 0.0;
    double weight = 1.0;
    for (const double p : pnd.probs()) {
        sum += weight * p;
        weight *= pass;
    }
    return survival(lambda, model) * sum;
}

PPrimeBounds p_prime_bounds(const VoaSweep& sweep) {
    sweep.validate();
    const auto raw = raw_bounds(sweep.no_click[0], sweep.no_click[1], sweep.no_click[2], sweep.etas[1],
                                sweep.etas[2], sweep.dark_survival());
    PPrimeBounds b;
    b.consistent = raw.p1_lower <= raw.p1_upper && raw.p2_lower <= raw.p2_upper;
    b.p0 = clamp01(raw.p0);
    b.p1_lower = clamp01(raw.p1_lower);
    b.p1_upper = clamp01(raw.p1_upper);
    b.p2_lower = clamp01(raw.p2_lower);
    b.p2_upper = clamp01(raw.p2_upper);
    return b;
}

SourceBounds sweep_to_source_bounds(const VoaSweep& signal, const VoaSweep& decoy, const ResolutionPair& res) {
    signal.validate();
    decoy.validate();
    if (!(res.eps_signal >= 0.0) || !(res.eps_decoy >= 0.0)) {
        throw InvalidParameter("estimation resolutions must be >= 0");
    }

    // All bounds are affine in the three no-click probabilities, so the extremes
    // over the box are attained at its corners.
    const auto corners = [](const VoaSweep& sweep, double eps, auto&& visit) {
        const double s = sweep.dark_survival();
        for (int mask = 0; mask < 8; ++mask) {
            std::array<double, 3> q{};
            for (int i = 0; i < 3; ++i) {
                const double shift = (mask >> i) & 1 ? eps : -eps;
                q[static_cast<std::size_t>(i)] = clamp01(sweep.no_click[static_cast<std::size_t>(i)] + shift);
            }
            visit(raw_bounds(q[0], q[1], q[2], sweep.etas[1], sweep.etas[2], s));
        }
    };

    SourceBounds b;
    b.a0p_lower = b.a1p_lower = b.a2p_lower = INFINITY;
    corners(signal, res.eps_signal, [&](const RawBounds& r) {
        b.a0p_lower = std::min(b.a0p_lower, r.p0);
        b.a1p_lower = std::min(b.a1p_lower, r.p1_lower);
        b.a2p_lower = std::min(b.a2p_lower, r.p2_lower);
    });
    b.a0_upper = b.a1_upper = b.a2_upper = -INFINITY;
    corners(decoy, res.eps_decoy, [&](const RawBounds& r) {
        b.a0_upper = std::max(b.a0_upper, r.p0);
        b.a1_upper = std::max(b.a1_upper, r.p1_upper);
        b.a2_upper = std::max(b.a2_upper, r.p2_upper);
    });
    b.a0p_lower = clamp01(b.a0p_lower);
    b.a1p_lower = clamp01(b.a1p_lower);
    b.a2p_lower = clamp01(b.a2p_lower);
    b.a0_upper = clamp01(b.a0_upper);
    b.a1_upper = clamp01(b.a1_upper);
    b.a2_upper = clamp01(b.a2_upper);

    // Three settings per class, each a two-sided event of failure 2 exp(-n eps^2 / 2).
    if (signal.n_pulses_per_setting == 0 || decoy.n_pulses_per_setting == 0) {
        b.confidence = 1.0;
    } else {
        b.confidence = joint_confidence(res, signal.n_pulses_per_setting, decoy.n_pulses_per_setting);
    }
    return b;
}

SweepRecord simulate_sweep(const PhotonNumberDistribution& pnd, const std::array<double, 3>& etas, double lambda,
                           DarkCountModel model, std::uint64_t n_per_setting, std::uint64_t seed) {
    SweepRecord rec;
    rec.seed = seed;
    rec.sweep.etas = etas;
    rec.sweep.lambda = lambda;
    rec.sweep.dark_model = model;
    rec.sweep.n_pulses_per_setting = n_per_setting;
    for (std::size_t i = 0; i < 3; ++i) {
        const double p = no_click_probability(pnd, etas[i], lambda, model);
        if (n_per_setting == 0) {
            rec.sweep.no_click[i] = p;
            continue;
        }
        Engine rng(derive_seed(seed, i));
        rec.no_clicks[i] = sample_binomial(n_per_setting, p, rng);
        rec.clicks[i] = n_per_setting - rec.no_clicks[i];
        rec.sweep.no_click[i] = static_cast<double>(rec.no_clicks[i]) / static_cast<double>(n_per_setting);
    }
    rec.sweep.validate();
    return rec;
}

SweepRecord expected_sweep(const PhotonNumberDistribution& pnd, const std::array<double, 3>& etas, double lambda,
                           DarkCountModel model, std::uint64_t n_per_setting) {
    if (n_per_setting == 0) return simulate_sweep(pnd, etas, lambda, model, 0, 0);
    SweepRecord rec;
    rec.sweep.etas = etas;
    rec.sweep.lambda = lambda;
    rec.sweep.dark_model = model;
    rec.sweep.n_pulses_per_setting = n_per_setting;
    for (std::size_t i = 0; i < 3; ++i) {
        const double p = no_click_probability(pnd, etas[i], lambda, model);
        rec.no_clicks[i] =
            std::min(n_per_setting, static_cast<std::uint64_t>(std::llround(static_cast<long double>(n_per_setting) * p)));
        rec.clicks[i] = n_per_setting - rec.no_clicks[i];
        rec.sweep.no_click[i] = static_cast<double>(rec.no_clicks[i]) / static_cast<double>(n_per_setting);
    }
    rec.sweep.validate();
    return rec;
}

}  // namespace pnrqkd
