#include <gtest/gtest.h>

#include <cmath>

#include "pnrqkd/channel.hpp"
#include "pnrqkd/errors.hpp"

using namespace pnrqkd;

TEST(Channel, TransmittanceFrozenValue) {
    const GysParameters gys;
    EXPECT_NEAR(overall_transmittance(gys, 10.0), 0.027746775083766697, 1e-16);
    EXPECT_EQ(overall_transmittance(gys, 0.0), 0.045);
    EXPECT_THROW(overall_transmittance(gys, -1.0), InvalidParameter);
}

TEST(Channel, SignalGainAtZeroDistance) {
    const auto obs = simulate_observables(0.5, 0.1, GysParameters{}, 0.0);
    EXPECT_NEAR(obs.qs, 0.022250462806663636, 1e-15);
    EXPECT_EQ(obs.q0, 1.7e-6);
    EXPECT_EQ(obs.e0, 0.5);
    EXPECT_EQ(obs.distance_km, 0.0);
}

TEST(Channel, QberFormula) {
    const GysParameters gys;
    const auto obs = simulate_observables(0.5, 0.1, gys, 30.0);
    const double eta = overall_transmittance(gys, 30.0);
    const double click = 1.0 - std::exp(-eta * 0.5);
    EXPECT_NEAR(obs.es, (0.5 * gys.y0 + gys.e_det * click) / (gys.y0 + click), 1e-12);
}

TEST(Channel, MonotoneInDistance) {
    const GysParameters gys;
    auto prev = simulate_observables(0.5, 0.1, gys, 0.0);
    for (double d = 2.0; d <= 200.0; d += 2.0) {
        const auto obs = simulate_observables(0.5, 0.1, gys, d);
        EXPECT_LT(obs.qs, prev.qs) << d;
        EXPECT_LT(obs.qd, prev.qd) << d;
        EXPECT_GT(obs.es, prev.es) << d;
        EXPECT_GE(obs.ed, prev.ed) << d;
        EXPECT_LE(obs.es, 0.5);
        EXPECT_GT(obs.qs, obs.qd);
        prev = obs;
    }
}

TEST(Channel, LongDistanceLimit) {
    const auto obs = simulate_observables(0.5, 0.1, GysParameters{}, 1000.0);
    EXPECT_NEAR(obs.qs, 1.7e-6, 1e-15);
    EXPECT_NEAR(obs.es, 0.5, 1e-12);
}

TEST(Channel, ComplementModel) {
    const GysParameters gys;
    const auto add = simulate_observables(0.5, 0.1, gys, 20.0, GainModel::Additive);
    const auto comp = simulate_observables(0.5, 0.1, gys, 20.0, GainModel::Complement);
    const double eta = overall_transmittance(gys, 20.0);
    EXPECT_NEAR(comp.qs, 1.0 - (1.0 - gys.y0) * std::exp(-eta * 0.5), 1e-15);
    EXPECT_LT(comp.qs, add.qs);
    EXPECT_NEAR(comp.qs, add.qs, 1e-7);
}

TEST(Channel, ParameterValidation) {
    GysParameters bad;
    bad.alpha = 0.0;
    EXPECT_THROW(bad.validate(), InvalidParameter);
    bad = GysParameters{};
    bad.e_det = 1.2;
    EXPECT_THROW(bad.validate(), InvalidParameter);
    EXPECT_NO_THROW(GysParameters{}.validate());
    EXPECT_THROW(simulate_observables(-0.5, 0.1, GysParameters{}, 0.0), InvalidParameter);
}
