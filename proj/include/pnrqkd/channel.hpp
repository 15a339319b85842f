#pragma once

namespace pnrqkd {

/// Fiber link and Bob-side detector parameters (GYS experiment values by default).
struct GysParameters {
    double eta_bob = 0.045;
    double alpha = 0.21;  // dB/km
    double y0 = 1.7e-6;
    double e_det = 0.033;
    double e0 = 0.5;

    void validate() const;
};

/// How the dark-count background combines with the signal detection probability.
enum class GainModel {
    Additive,    // Q = Y0 + 1 - exp(-eta mu)
    Complement,  // Q = 1 - (1 - Y0) exp(-eta mu)
};

struct ChannelObservables {
    double q0 = 0.0;
    double qd = 0.0;
    double qs = 0.0;
    double ed = 0.0;
    double es = 0.0;
    double e0 = 0.5;  // vacuum error rate
    double distance_km = 0.0;
};

double overall_transmittance(const GysParameters& params, double distance_km);

/// Analytic gains and error rates of vacuum, decoy and signal pulses at `distance_km`.
ChannelObservables simulate_observables(double mu_s, double mu_d, const GysParameters& params, double distance_km,
                                        GainModel model = GainModel::Additive);

}  // namespace pnrqkd
