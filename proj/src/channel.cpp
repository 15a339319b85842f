#include "pnrqkd/channel.hpp"

#include <algorithm>
#include <cmath>

#include "pnrqkd/errors.hpp"
#include "pnrqkd/util.hpp"

namespace pnrqkd {

namespace {

struct GainAndError {
    double gain;
    double qber;
};

GainAndError gain_and_error(double mu, double eta, const GysParameters& p, GainModel model) {
    // 1 - exp(-eta mu) without cancellation at small eta mu.
    const double signal_click = -std::expm1(-eta * mu);
    const double gain = model == GainModel::Additive ? p.y0 + signal_click : p.y0 + (1.0 - p.y0) * signal_click;
    const double signal_part = model == GainModel::Additive ? signal_click : (1.0 - p.y0) * signal_click;
    const double errors = p.e0 * p.y0 + p.e_det * signal_part;
    const double qber = gain > 0.0 ? std::min(errors / gain, 0.5) : 0.5;
    return {gain, qber};
}

}  // namespace

void GysParameters::validate() const {
    for (const auto& [name, v] :
         {std::pair{"eta_bob", eta_bob}, std::pair{"y0", y0}, std::pair{"e_det", e_det}, std::pair{"e0", e0}}) {
        if (!(v >= 0.0 && v <= 1.0)) {
            throw InvalidParameter(std::string(name) + " must lie in [0, 1], got " + format_double(v));
        }
    }
    if (!(alpha > 0.0) || !std::isfinite(alpha)) {
        throw InvalidParameter("alpha must be finite and > 0, got " + format_double(alpha));
    }
}

double overall_transmittance(const GysParameters& params, double distance_km) {
    if (!(distance_km >= 0.0)) throw InvalidParameter("distance must be >= 0");
    return params.eta_bob * std::pow(10.0, -params.alpha * distance_km / 10.0);
}

ChannelObservables simulate_observables(double mu_s, double mu_d, const GysParameters& params, double distance_km,
                                        GainModel model) {
    if (!(mu_s >= 0.0) || !(mu_d >= 0.0)) throw InvalidParameter("mean photon numbers must be >= 0");
    const double eta = overall_transmittance(params, distance_km);
    const auto vacuum = gain_and_error(0.0, eta, params, model);
    const auto decoy = gain_and_error(mu_d, eta, params, model);
    const auto signal = gain_and_error(mu_s, eta, params, model);
    return {vacuum.gain, decoy.gain, signal.gain, decoy.qber, signal.qber, vacuum.qber, distance_km};
}

}  // namespace pnrqkd
