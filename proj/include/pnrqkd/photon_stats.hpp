#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace pnrqkd {

/// Diagonal photon-number statistics of a phase-randomized pulse, truncated at
/// `n_max`. The last entry holds all probability mass at n >= n_max.
class PhotonNumberDistribution {
  public:
    static constexpr double kNormTolerance = 1e-9;

    /// Validates every entry in [0, 1] and total mass 1 within kNormTolerance.
    explicit PhotonNumberDistribution(std::vector<double> probs);

    /// Point mass at `n`, truncated at max(n_max, n).
    static PhotonNumberDistribution delta(std::size_t n, std::size_t n_max);

    [[nodiscard]] std::size_t n_max() const { return probs_.size() - 1; }
    [[nodiscard]] std::span<const double> probs() const { return probs_; }
    /// Probability at `n`; zero beyond the truncation bound.
    [[nodiscard]] double operator[](std::size_t n) const { return n < probs_.size() ? probs_[n] : 0.0; }
    [[nodiscard]] double mean() const;
    /// Probability of n >= `n`.
    [[nodiscard]] double tail_from(std::size_t n) const;

    friend bool operator==(const PhotonNumberDistribution&, const PhotonNumberDistribution&) = default;

  private:
    std::vector<double> probs_;
};

inline constexpr std::size_t kDefaultNMax = 64;

struct NoNoise {};

struct PoissonDark {
    double lambda = 0.0;  // mean dark counts per pulse
};

struct GeneralNoise {
    PhotonNumberDistribution pnd;
};

/// Additive, source-independent detection noise.
class NoiseModel {
  public:
    using Kind = std::variant<NoNoise, PoissonDark, GeneralNoise>;

    NoiseModel() = default;
    NoiseModel(NoNoise);
    NoiseModel(PoissonDark dark);
    NoiseModel(GeneralNoise general);

    [[nodiscard]] const Kind& kind() const { return kind_; }

    /// Noise probabilities N(y) as an explicit distribution.
    [[nodiscard]] PhotonNumberDistribution distribution(std::size_t n_max = kDefaultNMax) const;

    /// Short text descriptor used in CSV output, e.g. "poisson:0.1".
    [[nodiscard]] std::string describe() const;

  private:
    Kind kind_{NoNoise{}};
};

PhotonNumberDistribution poisson_pnd(double mu, std::size_t n_max = kDefaultNMax);

/// Passes each photon independently with probability `eta`.
PhotonNumberDistribution binomial_thin(const PhotonNumberDistribution& pnd, double eta);

/// Distribution of m' = m + y for independent m ~ signal and y ~ noise.
PhotonNumberDistribution convolve_noise(const PhotonNumberDistribution& signal,
                                        const PhotonNumberDistribution& noise);

struct FirstThree {
    double d0 = 0.0;
    double d1 = 0.0;
    double d2 = 0.0;
};

/// Recovers D(0), D(1), D(2) of the noise-free distribution by forward
/// substitution on the lower-triangular convolution system. Negative outputs
/// are returned unchanged.
FirstThree deconvolve_first_three(const PhotonNumberDistribution& observed, const NoiseModel& noise);

/// Same as above on raw observed frequencies P(m'=0..2), which need not form a
/// distribution.
FirstThree deconvolve_first_three(double p0, double p1, double p2, const NoiseModel& noise);

/// H2(x) in bits, with H2(0) = H2(1) = 0.
double binary_entropy(double x);

}  // namespace pnrqkd
