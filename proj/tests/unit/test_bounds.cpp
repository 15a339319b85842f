#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "pnrqkd/bounds.hpp"
#include "pnrqkd/errors.hpp"
#include "pnrqkd/util.hpp"

using namespace pnrqkd;

namespace {

constexpr std::uint64_t kExactN = 1'000'000'000'000'000ULL;

// Histogram whose frequencies equal the given probabilities to ~1e-15.
CountHistogram exact_histogram(const PhotonNumberDistribution& pnd, const NoiseModel& noise) {
    return expected_histogram(pnd, noise, kExactN);
}

CountHistogram random_histogram(std::mt19937_64& rng) {
    std::uniform_int_distribution<std::uint64_t> k(0, 1'000'000);
    CountHistogram h{k(rng), k(rng), k(rng), k(rng), 0};
    h.n_pulses = h.k0 + h.k1 + h.k2 + h.k_more + 1;
    h.k_more += 1;
    return h;
}

ResolutionPair random_resolution(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 0.05);
    return {u(rng), u(rng)};
}

void expect_bounds_near(const SourceBounds& a, const SourceBounds& b, double tol) {
    EXPECT_NEAR(a.a0p_lower, b.a0p_lower, tol);
    EXPECT_NEAR(a.a1p_lower, b.a1p_lower, tol);
    EXPECT_NEAR(a.a2p_lower, b.a2p_lower, tol);
    EXPECT_NEAR(a.a0_upper, b.a0_upper, tol);
    EXPECT_NEAR(a.a1_upper, b.a1_upper, tol);
    EXPECT_NEAR(a.a2_upper, b.a2_upper, tol);
}

bool covers(const SourceBounds& b, double mu_s, double mu_d) {
    const auto s = oracle::poisson(mu_s, 10);
    const auto d = oracle::poisson(mu_d, 10);
    return b.a0p_lower <= s[0] && b.a1p_lower <= s[1] && b.a2p_lower <= s[2] && b.a0_upper >= d[0] &&
           b.a1_upper >= d[1] && b.a2_upper >= d[2];
}

SourceBounds asymptotic_like(double mu_s, double mu_d) {
    const auto s = oracle::poisson(mu_s, 10);
    const auto d = oracle::poisson(mu_d, 10);
    SourceBounds b;
    b.a0p_lower = s[0];
    b.a1p_lower = s[1];
    b.a2p_lower = s[2];
    b.a0_upper = d[0];
    b.a1_upper = d[1];
    b.a2_upper = d[2];
    return b;
}

}  // namespace

TEST(Resolution, FrozenValueAndScaling) {
    const auto r = resolution_from_confidence(100'000'000, 100'000'000, 1.0 - 1e-6);
    EXPECT_NEAR(r.eps_signal, 0.00057097140397312849, 1e-15);
    EXPECT_EQ(r.eps_signal, r.eps_decoy);
    const auto doubled = resolution_from_confidence(200'000'000, 100'000'000, 1.0 - 1e-6);
    EXPECT_NEAR(doubled.eps_signal, r.eps_signal / std::sqrt(2.0), 1e-15);
    EXPECT_LT(resolution_from_confidence(1ULL << 62, 10, 0.9).eps_signal, 1e-8);
}

TEST(Resolution, BudgetSpentExactly) {
    const auto r = resolution_from_confidence(1234567, 7654321, 0.999);
    EXPECT_NEAR(joint_confidence(r, 1234567, 7654321), 0.999, 1e-12);
}

TEST(Resolution, RejectsInvalid) {
    EXPECT_THROW(resolution_from_confidence(100, 100, 1.0), InvalidParameter);
    EXPECT_THROW(resolution_from_confidence(100, 100, 0.0), InvalidParameter);
    EXPECT_THROW(resolution_from_confidence(0, 100, 0.5), InvalidParameter);
}

TEST(NoiselessBounds, DirectFormula) {
    const CountHistogram s{300, 300, 300, 100, 1000};
    const CountHistogram d{500, 300, 100, 100, 1000};
    const auto b = noiseless_bounds(s, d, {0.01, 0.02});
    EXPECT_NEAR(b.a1p_lower, 0.29, 1e-15);
    EXPECT_NEAR(b.a0_upper, 0.52, 1e-15);
    EXPECT_NEAR(b.a2_upper, 0.12, 1e-15);
}

TEST(NoiselessBounds, ZeroResolutionReturnsTruth) {
    const auto s = exact_histogram(poisson_pnd(0.5), NoiseModel{});
    const auto d = exact_histogram(poisson_pnd(0.1), NoiseModel{});
    const auto b = noiseless_bounds(s, d, {0.0, 0.0});
    expect_bounds_near(b, asymptotic_like(0.5, 0.1), 1e-14);
}

TEST(NoiselessBounds, ClampedToUnitInterval) {
    const CountHistogram s{0, 0, 1, 0, 1};
    const CountHistogram d{1, 0, 0, 0, 1};
    const auto b = noiseless_bounds(s, d, {0.5, 0.5});
    EXPECT_EQ(b.a0p_lower, 0.0);
    EXPECT_EQ(b.a0_upper, 1.0);
    EXPECT_EQ(b.a2p_lower, 0.5);
}

TEST(NoiselessBounds, CoverageAtLargeN) {
    const PulseSplit split = split_budget({100'000'000});
    const auto res = resolution_from_confidence(split.n_signal, split.n_decoy, 1.0 - 1e-6);
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const auto s = sample_histogram(poisson_pnd(0.5), NoiseModel{}, split.n_signal, derive_seed(seed, 0));
        const auto d = sample_histogram(poisson_pnd(0.1), NoiseModel{}, split.n_decoy, derive_seed(seed, 1));
        EXPECT_TRUE(covers(noiseless_bounds(s, d, res), 0.5, 0.1)) << "seed " << seed;
    }
}

TEST(NoiselessBounds, ConsistentWithFrequencies) {
    std::mt19937_64 rng(21);
    for (int i = 0; i < 1000; ++i) {
        const auto s = random_histogram(rng);
        const auto d = random_histogram(rng);
        const auto b = poisson_noise_bounds(s, d, random_resolution(rng), 0.0);
        EXPECT_LE(b.a0p_lower, s.frequency(0));
        EXPECT_LE(b.a1p_lower, s.frequency(1));
        EXPECT_LE(b.a2p_lower, s.frequency(2));
        EXPECT_GE(b.a0_upper, d.frequency(0));
        EXPECT_GE(b.a1_upper, d.frequency(1));
        EXPECT_GE(b.a2_upper, d.frequency(2));
    }
}

TEST(PoissonNoiseBounds, ExactFrequenciesRecoverSource) {
    for (const double lambda : {0.1, 0.5, 1.0}) {
        const NoiseModel noise{PoissonDark{lambda}};
        const auto s = exact_histogram(poisson_pnd(0.5), noise);
        const auto d = exact_histogram(poisson_pnd(0.1), noise);
        expect_bounds_near(poisson_noise_bounds(s, d, {0.0, 0.0}, lambda), asymptotic_like(0.5, 0.1), 1e-12);
    }
}

TEST(PoissonNoiseBounds, MonotoneInResolution) {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> lam(0.0, 2.0);
    for (int i = 0; i < 1000; ++i) {
        const auto s = random_histogram(rng);
        const auto d = random_histogram(rng);
        const double lambda = lam(rng);
        const auto r1 = random_resolution(rng);
        const ResolutionPair r2{r1.eps_signal + 0.01, r1.eps_decoy + 0.01};
        for (const auto& [lo, hi] : {std::pair{poisson_noise_bounds(s, d, r1, lambda),
                                               poisson_noise_bounds(s, d, r2, lambda)},
                                     std::pair{general_noise_bounds(s, d, r1, poisson_pnd(lambda)),
                                               general_noise_bounds(s, d, r2, poisson_pnd(lambda))}}) {
            EXPECT_GE(lo.a0p_lower, hi.a0p_lower);
            EXPECT_GE(lo.a1p_lower, hi.a1p_lower);
            EXPECT_GE(lo.a2p_lower, hi.a2p_lower);
            EXPECT_LE(lo.a0_upper, hi.a0_upper);
            EXPECT_LE(lo.a1_upper, hi.a1_upper);
            EXPECT_LE(lo.a2_upper, hi.a2_upper);
        }
    }
}

TEST(PoissonNoiseBounds, RejectsNegativeLambda) {
    const CountHistogram h{1, 1, 1, 1, 4};
    EXPECT_THROW(poisson_noise_bounds(h, h, {0.0, 0.0}, -0.1), InvalidParameter);
    EXPECT_THROW(noiseless_bounds(h, h, {-0.1, 0.0}), InvalidParameter);
}

TEST(GeneralNoiseBounds, SpecializationChainIsExact) {
    std::mt19937_64 rng(41);
    const auto vacuum = PhotonNumberDistribution::delta(0, 4);
    for (int i = 0; i < 100; ++i) {
        const auto s = random_histogram(rng);
        const auto d = random_histogram(rng);
        const auto res = random_resolution(rng);
        const auto plain = noiseless_bounds(s, d, res);
        EXPECT_EQ(poisson_noise_bounds(s, d, res, 0.0), plain);
        EXPECT_EQ(general_noise_bounds(s, d, res, vacuum), plain);
        EXPECT_EQ(estimate_bounds(s, d, res, NoiseModel{}), plain);
    }
}

TEST(GeneralNoiseBounds, AgreesWithPoissonAtZeroResolution) {
    std::mt19937_64 rng(51);
    std::uniform_real_distribution<double> lam(0.0, 1.0);
    for (int i = 0; i < 500; ++i) {
        const auto s = random_histogram(rng);
        const auto d = random_histogram(rng);
        const double lambda = lam(rng);
        expect_bounds_near(general_noise_bounds(s, d, {0.0, 0.0}, poisson_pnd(lambda)),
                           poisson_noise_bounds(s, d, {0.0, 0.0}, lambda), 1e-12);
    }
}

TEST(GeneralNoiseBounds, SecondOrderCoefficientIdentity) {
    for (const double lambda : {0.0, 0.1, 0.5, 1.0, 3.0}) {
        const auto n = poisson_pnd(lambda);
        const double lhs = lambda * lambda * std::exp(lambda) / 2.0;
        const double rhs = n[1] * n[1] / (n[0] * n[0] * n[0]) - n[2] / (n[0] * n[0]);
        EXPECT_NEAR(lhs, rhs, 1e-12 * std::max(1.0, lhs));
    }
}

TEST(GeneralNoiseBounds, ExactFrequenciesRecoverArbitrarySource) {
    std::mt19937_64 rng(61);
    for (int i = 0; i < 200; ++i) {
        auto raw = oracle::random_pnd(rng, 5);
        raw[0] += 0.5;
        for (auto& x : raw) x /= 1.5;
        const PhotonNumberDistribution noise(raw);
        const PhotonNumberDistribution sig(oracle::random_pnd(rng, 10));
        const PhotonNumberDistribution dec(oracle::random_pnd(rng, 10));
        const auto b = general_noise_bounds(exact_histogram(sig, NoiseModel{GeneralNoise{noise}}),
                                            exact_histogram(dec, NoiseModel{GeneralNoise{noise}}), {0.0, 0.0}, noise);
        EXPECT_NEAR(b.a0p_lower, sig[0], 1e-12);
        EXPECT_NEAR(b.a1p_lower, sig[1], 1e-12);
        EXPECT_NEAR(b.a2p_lower, sig[2], 1e-12);
        EXPECT_NEAR(b.a0_upper, dec[0], 1e-12);
        EXPECT_NEAR(b.a1_upper, dec[1], 1e-12);
        EXPECT_NEAR(b.a2_upper, dec[2], 1e-12);
    }
}

TEST(GeneralNoiseBounds, SingularNoise) {
    const CountHistogram h{1, 1, 1, 1, 4};
    EXPECT_THROW(general_noise_bounds(h, h, {0.0, 0.0}, PhotonNumberDistribution::delta(1, 3)),
                 SingularDeconvolution);
}

TEST(Bounds, CoverageModerateN) {
    // Smaller companion of the acceptance coverage run.
    const double lambda = 0.1;
    const NoiseModel noise{PoissonDark{lambda}};
    const PulseSplit split = split_budget({1'000'000});
    const auto res = resolution_from_confidence(split.n_signal, split.n_decoy, 0.99);
    int covered = 0;
    const int trials = 200;
    for (int t = 0; t < trials; ++t) {
        const auto seed = static_cast<std::uint64_t>(t);
        const auto s = sample_histogram(poisson_pnd(0.5), noise, split.n_signal, derive_seed(seed, 0));
        const auto d = sample_histogram(poisson_pnd(0.1), noise, split.n_decoy, derive_seed(seed, 1));
        const auto b = poisson_noise_bounds(s, d, res, lambda);
        EXPECT_NEAR(b.confidence, 0.99, 1e-12);
        covered += covers(b, 0.5, 0.1) ? 1 : 0;
    }
    EXPECT_GE(covered, trials * 99 / 100);
}
