#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "pnrqkd/detector_decoy.hpp"
#include "pnrqkd/errors.hpp"
#include "pnrqkd/keyrate.hpp"

using namespace pnrqkd;

namespace {

constexpr std::array<double, 3> kDefaultEtas{1.0, 0.5, 0.25};
constexpr double kSlack = 1e-12;

VoaSweep exact_sweep(const PhotonNumberDistribution& pnd, std::array<double, 3> etas, double lambda,
                     DarkCountModel model = DarkCountModel::Bernoulli) {
    return simulate_sweep(pnd, etas, lambda, model, 0, 0).sweep;
}

}  // namespace

TEST(NoClick, Examples) {
    const auto p = poisson_pnd(0.5);
    EXPECT_NEAR(no_click_probability(p, 1.0, 0.0), p[0], 1e-16);
    EXPECT_NEAR(no_click_probability(p, 0.0, 0.0), 1.0, 1e-15);
    EXPECT_NEAR(no_click_probability(p, 1.0, 1e-6), 0.60653005318197371, 1e-15);
    EXPECT_NEAR(no_click_probability(p, 1.0, 0.2, DarkCountModel::Poisson), std::exp(-0.2) * p[0], 1e-16);
    // Poisson input: sum_n (1 - eta)^n p_n = exp(-eta mu).
    EXPECT_NEAR(no_click_probability(p, 0.3, 0.0), std::exp(-0.15), 1e-14);
    EXPECT_THROW(no_click_probability(p, 1.2, 0.0), InvalidParameter);
    EXPECT_THROW(no_click_probability(p, 0.5, 1.0), DegenerateDetector);
}

TEST(PPrimeBoundsTest, Vacuum) {
    const auto b = p_prime_bounds(exact_sweep(PhotonNumberDistribution::delta(0, 10), kDefaultEtas, 0.0));
    EXPECT_NEAR(b.p0, 1.0, 1e-15);
    EXPECT_NEAR(b.p1_lower, 0.0, 1e-15);
    EXPECT_NEAR(b.p1_upper, 0.0, 1e-15);
    EXPECT_NEAR(b.p2_lower, 0.0, 1e-15);
    EXPECT_NEAR(b.p2_upper, 0.0, 1e-15);
}

TEST(PPrimeBoundsTest, PoissonContainment) {
    const auto b = p_prime_bounds(exact_sweep(poisson_pnd(0.5), kDefaultEtas, 1e-6));
    EXPECT_NEAR(b.p0, std::exp(-0.5), 1e-15);
    EXPECT_LE(b.p1_lower, 0.30326532985631671);
    EXPECT_GE(b.p1_upper, 0.30326532985631671);
    EXPECT_LE(b.p2_lower, 0.075816332464079178);
    EXPECT_GE(b.p2_upper, 0.075816332464079178);
    EXPECT_TRUE(b.consistent);
}

TEST(PPrimeBoundsTest, ContainmentOverRandomDistributions) {
    std::mt19937_64 rng(101);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 10'000; ++trial) {
        const PhotonNumberDistribution pnd(oracle::random_pnd(rng, 20));
        const double eta1 = 0.05 + 0.9 * u(rng);
        const double eta2 = eta1 * (0.05 + 0.9 * u(rng));
        const double lambda = 0.5 * u(rng);
        const auto model = trial % 2 ? DarkCountModel::Poisson : DarkCountModel::Bernoulli;
        const auto b = p_prime_bounds(exact_sweep(pnd, {1.0, eta1, eta2}, lambda, model));
        ASSERT_NEAR(b.p0, pnd[0], 1e-12);
        EXPECT_LE(b.p1_lower, pnd[1] + kSlack) << trial;
        EXPECT_GE(b.p1_upper, pnd[1] - kSlack) << trial;
        EXPECT_LE(b.p2_lower, pnd[2] + kSlack) << trial;
        EXPECT_GE(b.p2_upper, pnd[2] - kSlack) << trial;
        EXPECT_LE(b.p1_lower, b.p1_upper + kSlack);
        EXPECT_LE(b.p2_lower, b.p2_upper + kSlack);
    }
}

TEST(PPrimeBoundsTest, ValidationErrors) {
    VoaSweep s;
    s.lambda = 1.0;
    EXPECT_THROW(p_prime_bounds(s), DegenerateDetector);
    s = VoaSweep{};
    s.etas = {1.0, 1.0, 0.5};
    EXPECT_THROW(p_prime_bounds(s), PreconditionError);
    s.etas = {1.0, 0.25, 0.5};
    EXPECT_THROW(p_prime_bounds(s), InvalidParameter);
    s.etas = {0.9, 0.5, 0.25};
    EXPECT_THROW(p_prime_bounds(s), InvalidParameter);
}

TEST(PPrimeBoundsTest, TwoPhotonBoundsTightenAsSettingsApproachUnity) {
    // The neglected n >= 3 terms carry weight (1 - eta)^n; with eta_1 = 1 - t and
    // eta_2 = 1 - 2t the p'_2 interval shrinks with t. At fixed eta_1 the width is
    // not monotone in eta_2.
    for (const double mu : {0.1, 0.5, 1.0}) {
        const auto pnd = poisson_pnd(mu);
        double prev_width = INFINITY;
        for (const double t : {0.4, 0.2, 0.1, 0.05, 0.02, 0.01}) {
            const auto b = p_prime_bounds(exact_sweep(pnd, {1.0, 1.0 - t, 1.0 - 2.0 * t}, 0.0));
            const double width = b.p2_upper - b.p2_lower;
            EXPECT_LE(width, prev_width + 1e-15) << mu << " " << t;
            prev_width = width;
        }
    }
    const auto pnd = poisson_pnd(0.5);
    const auto w = [&](double eta2) {
        const auto b = p_prime_bounds(exact_sweep(pnd, {1.0, 0.5, eta2}, 0.0));
        return b.p2_upper - b.p2_lower;
    };
    EXPECT_GT(w(0.01), w(0.3));
    EXPECT_GT(w(0.45), w(0.3));
}

TEST(SweepToSourceBounds, ExactSweepsSandwichTruth) {
    for (const double lambda : {0.0, 1e-6, 1e-3}) {
        const auto b = sweep_to_source_bounds(exact_sweep(poisson_pnd(0.5), kDefaultEtas, lambda),
                                              exact_sweep(poisson_pnd(0.1), kDefaultEtas, lambda), {0.0, 0.0});
        const auto truth = asymptotic_bounds(0.5, 0.1);
        EXPECT_NEAR(b.a0p_lower, truth.a0p_lower, 1e-12);
        EXPECT_LE(b.a1p_lower, truth.a1p_lower + kSlack);
        EXPECT_LE(b.a2p_lower, truth.a2p_lower + kSlack);
        EXPECT_NEAR(b.a0_upper, truth.a0_upper, 1e-12);
        EXPECT_GE(b.a1_upper, truth.a1_upper - kSlack);
        EXPECT_GE(b.a2_upper, truth.a2_upper - kSlack);
        EXPECT_EQ(b.confidence, 1.0);
    }
}

TEST(SweepToSourceBounds, WidensWithResolution) {
    const auto s = exact_sweep(poisson_pnd(0.5), {1.0, 0.9, 0.8}, 0.0);
    const auto d = exact_sweep(poisson_pnd(0.1), {1.0, 0.9, 0.8}, 0.0);
    const auto tight = sweep_to_source_bounds(s, d, {0.0, 0.0});
    const auto loose = sweep_to_source_bounds(s, d, {1e-4, 1e-4});
    EXPECT_LE(loose.a0p_lower, tight.a0p_lower);
    EXPECT_LE(loose.a1p_lower, tight.a1p_lower);
    EXPECT_LE(loose.a2p_lower, tight.a2p_lower);
    EXPECT_GE(loose.a0_upper, tight.a0_upper);
    EXPECT_GE(loose.a1_upper, tight.a1_upper);
    EXPECT_GE(loose.a2_upper, tight.a2_upper);
}

TEST(SweepToSourceBounds, CornerSearchCoversSampledSweeps) {
    // Any sweep inside the +-eps box yields bounds no tighter than the corner extremes.
    const auto s = exact_sweep(poisson_pnd(0.5), {1.0, 0.95, 0.85}, 1e-3);
    const auto d = exact_sweep(poisson_pnd(0.1), {1.0, 0.95, 0.85}, 1e-3);
    const double eps = 1e-3;
    const auto box = sweep_to_source_bounds(s, d, {eps, eps});
    std::mt19937_64 rng(111);
    std::uniform_real_distribution<double> u(-eps, eps);
    for (int i = 0; i < 2000; ++i) {
        VoaSweep sp = s, dp = d;
        for (std::size_t k = 0; k < 3; ++k) {
            sp.no_click[k] = std::clamp(sp.no_click[k] + u(rng), 0.0, 1.0);
            dp.no_click[k] = std::clamp(dp.no_click[k] + u(rng), 0.0, 1.0);
        }
        const auto point = sweep_to_source_bounds(sp, dp, {0.0, 0.0});
        EXPECT_LE(box.a1p_lower, point.a1p_lower + kSlack);
        EXPECT_LE(box.a2p_lower, point.a2p_lower + kSlack);
        EXPECT_GE(box.a1_upper, point.a1_upper - kSlack);
        EXPECT_GE(box.a2_upper, point.a2_upper - kSlack);
    }
}

TEST(SweepToSourceBounds, EndToEndPositiveRate) {
    // Sweep settings close to 1 keep the p'_2 lower bound informative.
    const std::array<double, 3> etas{1.0, 0.99, 0.9};
    const auto b = sweep_to_source_bounds(exact_sweep(poisson_pnd(0.5), etas, 1e-6),
                                          exact_sweep(poisson_pnd(0.1), etas, 1e-6), {0.0, 0.0});
    const auto obs = simulate_observables(0.5, 0.1, GysParameters{}, 10.0);
    const auto r = untrusted_rate(b, obs);
    EXPECT_GT(r.rate, 0.0);
    EXPECT_LE(r.rate, trusted_rate(0.5, 0.1, obs).rate + 1e-15);
}

TEST(SweepToSourceBounds, DefaultSettingsAreUninformative) {
    // With (0.5, 0.25) the p'_2 lower bound collapses and the decoy-state denominator vanishes.
    const auto b = sweep_to_source_bounds(exact_sweep(poisson_pnd(0.5), kDefaultEtas, 0.0),
                                          exact_sweep(poisson_pnd(0.1), kDefaultEtas, 0.0), {0.0, 0.0});
    const auto r = untrusted_rate(b, simulate_observables(0.5, 0.1, GysParameters{}, 0.0));
    EXPECT_EQ(r.rate, 0.0);
}

TEST(SimulateSweep, ReproducibleAndConsistent) {
    const auto pnd = poisson_pnd(0.5);
    const auto a = simulate_sweep(pnd, kDefaultEtas, 1e-3, DarkCountModel::Bernoulli, 1'000'000, 5);
    const auto b = simulate_sweep(pnd, kDefaultEtas, 1e-3, DarkCountModel::Bernoulli, 1'000'000, 5);
    EXPECT_EQ(a.no_clicks, b.no_clicks);
    for (std::size_t i = 0; i < 3; ++i) {
        EXPECT_EQ(a.clicks[i] + a.no_clicks[i], 1'000'000u);
        const double p = no_click_probability(pnd, kDefaultEtas[i], 1e-3);
        EXPECT_NEAR(a.sweep.no_click[i], p, 5.0 * std::sqrt(p * (1.0 - p) / 1e6));
    }
    const auto e = expected_sweep(pnd, kDefaultEtas, 1e-3, DarkCountModel::Bernoulli, 1'000'000);
    EXPECT_EQ(e.no_clicks[0], static_cast<std::uint64_t>(std::llround(1e6 * no_click_probability(pnd, 1.0, 1e-3))));
}

TEST(SweepToSourceBounds, FiniteSampleConfidence) {
    const auto pnd_s = poisson_pnd(0.5);
    const auto pnd_d = poisson_pnd(0.1);
    const std::uint64_t n = 1'000'000;
    const auto res = resolution_from_confidence(n, n, 0.99);
    const auto s = simulate_sweep(pnd_s, kDefaultEtas, 0.0, DarkCountModel::Bernoulli, n, 1).sweep;
    const auto d = simulate_sweep(pnd_d, kDefaultEtas, 0.0, DarkCountModel::Bernoulli, n, 2).sweep;
    const auto b = sweep_to_source_bounds(s, d, res);
    EXPECT_NEAR(b.confidence, 0.99, 1e-12);
    EXPECT_LE(b.a1p_lower, pnd_s[1]);
    EXPECT_GE(b.a1_upper, pnd_d[1]);
}
