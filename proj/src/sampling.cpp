#include "pnrqkd/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "pnrqkd/errors.hpp"
#include "pnrqkd/util.hpp"

namespace pnrqkd {

namespace {

constexpr auto kMaxCount = static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max());

void check_capacity(std::uint64_t n) {
    if (n > kMaxCount) {
        throw CapacityError("pulse count " + std::to_string(n) + " exceeds the 63-bit counter range");
    }
}

double conditional(double p, double remaining) {
    if (!(remaining > 0.0)) return 0.0;
    return std::clamp(p / remaining, 0.0, 1.0);
}

}  // namespace

double CountHistogram::frequency(int m) const {
    if (n_pulses == 0) return 0.0;
    const std::uint64_t k = m == 0 ? k0 : m == 1 ? k1 : k2;
    return static_cast<double>(k) / static_cast<double>(n_pulses);
}

void PulseBudget::validate() const {
    for (const double f : {frac_signal, frac_decoy, frac_vacuum}) {
        if (!(f >= 0.0 && f <= 1.0)) throw InvalidParameter("pulse-budget fractions must lie in [0, 1]");
    }
    if (std::abs(frac_signal + frac_decoy + frac_vacuum - 1.0) > 1e-9) {
        throw InvalidParameter("pulse-budget fractions must sum to 1");
    }
    check_capacity(n_total);
}

PulseSplit split_budget(const PulseBudget& budget) {
    budget.validate();
    const std::array<long double, 3> fracs{budget.frac_signal, budget.frac_decoy, budget.frac_vacuum};
    const long double total = std::accumulate(fracs.begin(), fracs.end(), 0.0L);

    std::array<std::uint64_t, 3> parts{};
    std::array<long double, 3> remainders{};
    std::uint64_t assigned = 0;
    for (std::size_t i = 0; i < 3; ++i) {
        const long double quota = static_cast<long double>(budget.n_total) * fracs[i] / total;
        const long double whole = std::floor(quota);
        parts[i] = std::min(static_cast<std::uint64_t>(whole), budget.n_total - assigned);
        remainders[i] = quota - whole;
        assigned += parts[i];
    }
    std::array<std::size_t, 3> order{0, 1, 2};
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return remainders[a] > remainders[b]; });
    for (std::size_t i = 0; assigned < budget.n_total; i = (i + 1) % 3) {
        ++parts[order[i]];
        ++assigned;
    }
    return {parts[0], parts[1], parts[2]};
}

std::array<double, 4> outcome_probabilities(const PhotonNumberDistribution& pnd_p3, const NoiseModel& noise) {
    const auto observed = convolve_noise(pnd_p3, noise.distribution(std::max<std::size_t>(pnd_p3.n_max(), 3)));
    const double p0 = observed[0];
    const double p1 = observed[1];
    const double p2 = observed[2];
    return {p0, p1, p2, std::max(0.0, observed.tail_from(3))};
}

std::uint64_t sample_binomial(std::uint64_t n, double p, Engine& rng) {
    check_capacity(n);
    if (n == 0 || p <= 0.0) return 0;
    if (p >= 1.0) return n;
    std::binomial_distribution<std::int64_t> dist(static_cast<std::int64_t>(n), p);
    return static_cast<std::uint64_t>(dist(rng));
}

// Conditional-binomial multinomial draw; the last bin takes the remainder.
template <std::size_t K>
std::array<std::uint64_t, K> sample_multinomial(std::uint64_t n, const std::array<double, K>& probs, Engine& rng) {
    std::array<std::uint64_t, K> counts{};
    double remaining = 1.0;
    for (std::size_t i = 0; i + 1 < K; ++i) {
        counts[i] = sample_binomial(n, conditional(probs[i], remaining), rng);
        n -= counts[i];
        remaining -= probs[i];
    }
    counts[K - 1] = n;
    return counts;
}

CountHistogram sample_histogram(const PhotonNumberDistribution& pnd_p3, const NoiseModel& noise,
                                std::uint64_t n_pulses, std::uint64_t seed) {
    if (n_pulses < 1) throw InvalidParameter("n_pulses must be >= 1");
    check_capacity(n_pulses);

    // Photon numbers first, then the noise added to each photon-number class,
    // each from its own stream. Runs that differ only in the noise model share
    // the photon-number draw.
    Engine photons(derive_seed(seed, 0));
    Engine dark(derive_seed(seed, 1));
    const auto c = sample_multinomial<4>(
        n_pulses, {pnd_p3[0], pnd_p3[1], pnd_p3[2], std::max(0.0, pnd_p3.tail_from(3))}, photons);
    const auto y = noise.distribution(3);
    const double y_tail = std::max(0.0, y.tail_from(3));

    const auto from0 = sample_multinomial<4>(c[0], {y[0], y[1], y[2], y_tail}, dark);
    const auto from1 = sample_multinomial<3>(c[1], {y[0], y[1], y[2] + y_tail}, dark);
    const auto from2 = sample_multinomial<2>(c[2], {y[0], 1.0 - y[0]}, dark);

    CountHistogram h;
    h.n_pulses = n_pulses;
    h.k0 = from0[0];
    h.k1 = from0[1] + from1[0];
    h.k2 = from0[2] + from1[1] + from2[0];
    h.k_more = n_pulses - h.k0 - h.k1 - h.k2;
    return h;
}

CountHistogram expected_histogram(const PhotonNumberDistribution& pnd_p3, const NoiseModel& noise,
                                  std::uint64_t n_pulses) {
    if (n_pulses < 1) throw InvalidParameter("n_pulses must be >= 1");
    check_capacity(n_pulses);
    const auto q = outcome_probabilities(pnd_p3, noise);
    std::array<std::uint64_t, 3> k{};
    for (std::size_t m = 0; m < 3; ++m) {
        k[m] = static_cast<std::uint64_t>(std::llround(static_cast<long double>(n_pulses) * q[m]));
    }
    // Rounding up in all three bins can overshoot by a pulse or two when P(m'>=3) ~ 0.
    while (k[0] + k[1] + k[2] > n_pulses) {
        --*std::max_element(k.begin(), k.end());
    }
    return {k[0], k[1], k[2], n_pulses - k[0] - k[1] - k[2], n_pulses};
}

}  // namespace pnrqkd
