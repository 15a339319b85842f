#include "pnrqkd/photon_stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "pnrqkd/errors.hpp"
#include "pnrqkd/util.hpp"

namespace pnrqkd {

namespace {

// Rounding slack tolerated on individual entries before they are snapped into [0, 1].
constexpr double kEntrySlack = 1e-12;

double log_binomial_pmf(std::size_t m, std::size_t n, double log_eta, double log_one_minus_eta) {
    const auto md = static_cast<double>(m);
    const auto nd = static_cast<double>(n);
    return std::lgamma(md + 1.0) - std::lgamma(nd + 1.0) - std::lgamma(md - nd + 1.0) + nd * log_eta +
           (md - nd) * log_one_minus_eta;
}

}  // namespace

PhotonNumberDistribution::PhotonNumberDistribution(std::vector<double> probs) : probs_(std::move(probs)) {
    if (probs_.size() < 2) {
        throw InvalidParameter("photon-number distribution needs n_max >= 1");
    }
    double total = 0.0;
    for (std::size_t n = 0; n < probs_.size(); ++n) {
        double& p = probs_[n];
        if (!std::isfinite(p) || p < -kEntrySlack || p > 1.0 + kEntrySlack) {
            throw InvalidParameter("photon-number probability at n=" + std::to_string(n) + " is outside [0, 1]: " +
                                   format_double(p));
        }
        p = std::clamp(p, 0.0, 1.0);
        total += p;
    }
    if (std::abs(total - 1.0) > kNormTolerance) {
        throw InvalidParameter("photon-number distribution sums to " + format_double(total) + ", expected 1");
    }
}

PhotonNumberDistribution PhotonNumberDistribution::delta(std::size_t n, std::size_t n_max) {
    std::vector<double> probs(std::max({n_max, n, std::size_t{1}}) + 1, 0.0);
    probs[n] = 1.0;
    return PhotonNumberDistribution(std::move(probs));
}

double PhotonNumberDistribution::mean() const {
    double m = 0.0;
    for (std::size_t n = 0; n < probs_.size(); ++n) m += static_cast<double>(n) * probs_[n];
    return m;
}

double PhotonNumberDistribution::tail_from(std::size_t n) const {
    if (n >= probs_.size()) return 0.0;
    return std::accumulate(probs_.begin() + static_cast<std::ptrdiff_t>(n), probs_.end(), 0.0);
}

NoiseModel::NoiseModel(NoNoise) : kind_(NoNoise{}) {}

NoiseModel::NoiseModel(PoissonDark dark) : kind_(dark) {
    if (!std::isfinite(dark.lambda) || dark.lambda < 0.0) {
        throw InvalidParameter("dark-count mean must be finite and >= 0, got " + format_double(dark.lambda));
    }
}

NoiseModel::NoiseModel(GeneralNoise general) : kind_(std::move(general)) {}

PhotonNumberDistribution NoiseModel::distribution(std::size_t n_max) const {
    return std::visit(
        [n_max](const auto& k) -> PhotonNumberDistribution {
            using K = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<K, NoNoise>) {
                return PhotonNumberDistribution::delta(0, n_max);
            } else if constexpr (std::is_same_v<K, PoissonDark>) {
                return poisson_pnd(k.lambda, n_max);
            } else {
                return k.pnd;
            }
        },
        kind_);
}

std::string NoiseModel::describe() const {
    return std::visit(
        [](const auto& k) -> std::string {
            using K = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<K, NoNoise>) {
                return "none";
            } else if constexpr (std::is_same_v<K, PoissonDark>) {
                return "poisson:" + format_double(k.lambda);
            } else {
                std::ostringstream out;
                out << "general:";
                const auto probs = k.pnd.probs();
                for (std::size_t i = 0; i < probs.size(); ++i) {
                    out << (i ? "|" : "") << format_double(probs[i]);
                }
                return out.str();
            }
        },
        kind_);
}

PhotonNumberDistribution poisson_pnd(double mu, std::size_t n_max) {
    if (!std::isfinite(mu) || mu < 0.0) {
        throw InvalidParameter("Poisson mean must be finite and >= 0, got " + format_double(mu));
    }
    if (n_max < 1) throw InvalidParameter("n_max must be >= 1");

    std::vector<double> probs(n_max + 1, 0.0);
    if (mu < 500.0) {
        double p = std::exp(-mu);
        for (std::size_t n = 0; n < n_max; ++n) {
            probs[n] = p;
            p *= mu / static_cast<double>(n + 1);
        }
    } else {
        const double log_mu = std::log(mu);
        for (std::size_t n = 0; n < n_max; ++n) {
            const auto nd = static_cast<double>(n);
            probs[n] = std::exp(nd * log_mu - mu - std::lgamma(nd + 1.0));
        }
    }
    const double head = std::accumulate(probs.begin(), probs.end() - 1, 0.0);
    probs[n_max] = std::max(0.0, 1.0 - head);
    return PhotonNumberDistribution(std::move(probs));
}

PhotonNumberDistribution binomial_thin(const PhotonNumberDistribution& pnd, double eta) {
    if (!(eta >= 0.0 && eta <= 1.0)) {
        throw InvalidParameter("transmittance must lie in [0, 1], got " + format_double(eta));
    }
    const std::size_t n_max = pnd.n_max();
    if (eta == 1.0) return pnd;
    if (eta == 0.0) return PhotonNumberDistribution::delta(0, n_max);

    const double log_eta = std::log(eta);
    const double log_keep = std::log1p(-eta);
    std::vector<double> out(n_max + 1, 0.0);
    for (std::size_t m = 0; m <= n_max; ++m) {
        const double pm = pnd[m];
        if (pm == 0.0) continue;
        for (std::size_t n = 0; n <= m; ++n) {
            out[n] += pm * std::exp(log_binomial_pmf(m, n, log_eta, log_keep));
        }
    }
    return PhotonNumberDistribution(std::move(out));
}

PhotonNumberDistribution convolve_noise(const PhotonNumberDistribution& signal,
                                        const PhotonNumberDistribution& noise) {
    const std::size_t n_max = std::max(signal.n_max(), noise.n_max());
    std::vector<double> out(n_max + 1, 0.0);
    const auto a = signal.probs();
    const auto b = noise.probs();
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] == 0.0) continue;
        for (std::size_t j = 0; j < b.size(); ++j) {
            out[std::min(i + j, n_max)] += a[i] * b[j];
        }
    }
    return PhotonNumberDistribution(std::move(out));
}

FirstThree deconvolve_first_three(double p0, double p1, double p2, const NoiseModel& noise) {
    if (std::holds_alternative<NoNoise>(noise.kind())) return {p0, p1, p2};

    double n0 = 0.0;
    double n1 = 0.0;
    double n2 = 0.0;
    if (const auto* dark = std::get_if<PoissonDark>(&noise.kind())) {
        const double lambda = dark->lambda;
        n0 = std::exp(-lambda);
        n1 = lambda * n0;
        n2 = 0.5 * lambda * lambda * n0;
    } else {
        const auto& pnd = std::get<GeneralNoise>(noise.kind()).pnd;
        n0 = pnd[0];
        n1 = pnd[1];
        n2 = pnd[2];
    }
    if (!(n0 > 0.0)) throw SingularDeconvolution("noise probability N(y=0) is zero; deconvolution is singular");

    FirstThree d;
    d.d0 = p0 / n0;
    d.d1 = (p1 - n1 * d.d0) / n0;
    d.d2 = (p2 - n1 * d.d1 - n2 * d.d0) / n0;
    return d;
}

FirstThree deconvolve_first_three(const PhotonNumberDistribution& observed, const NoiseModel& noise) {
    return deconvolve_first_three(observed[0], observed[1], observed[2], noise);
}

double binary_entropy(double x) {
    if (!(x >= 0.0 && x <= 1.0)) {
        throw InvalidParameter("binary entropy argument must lie in [0, 1], got " + format_double(x));
    }
    if (x == 0.0 || x == 1.0) return 0.0;
    return -x * std::log2(x) - (1.0 - x) * std::log2(1.0 - x);
}

}  // namespace pnrqkd
