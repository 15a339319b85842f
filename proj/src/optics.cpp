#include "pnrqkd/optics.hpp"

#include <cmath>

#include "pnrqkd/errors.hpp"
#include "pnrqkd/util.hpp"

namespace pnrqkd {

namespace {

void check_transmittance(const char* name, double value) {
    if (!(value > 0.0 && value <= 1.0)) {
        throw InvalidParameter(std::string(name) + " must lie in (0, 1], got " + format_double(value));
    }
}

const PoissonianSource& poissonian(const SourceSpec& spec) {
    const auto* p = std::get_if<PoissonianSource>(&spec.statistics);
    if (p == nullptr) {
        throw UnsupportedForCustom("custom sources carry their distributions directly; no mean is derived");
    }
    return *p;
}

}  // namespace

const char* to_string(SourceClass c) { return c == SourceClass::Signal ? "signal" : "decoy"; }

double OpticalPath::calibration_residual() const { return std::abs(eta_det * (1.0 - eta_bs) - eta_bs) / eta_bs; }

void OpticalPath::validate(double tolerance) const {
    check_transmittance("eta_s", eta_s);
    check_transmittance("eta_d", eta_d);
    check_transmittance("eta_bs", eta_bs);
    check_transmittance("eta_det", eta_det);
    const double residual = calibration_residual();
    if (residual > tolerance) {
        throw CalibrationError("calibration residual " + format_double(residual) + " exceeds tolerance " +
                               format_double(tolerance) + " (eta_det=" + format_double(eta_det) +
                               ", eta_bs=" + format_double(eta_bs) + ")");
    }
}

void SourceSpec::validate() const {
    if (const auto* p = std::get_if<PoissonianSource>(&statistics)) {
        if (!(p->apn_p1 > 0.0) || !std::isfinite(p->apn_p1)) {
            throw InvalidParameter("apn_p1 must be finite and > 0, got " + format_double(p->apn_p1));
        }
    }
}

double mean_at_p4(const SourceSpec& spec, const OpticalPath& path, SourceClass c) {
    return poissonian(spec).apn_p1 * path.attenuation(c) * path.eta_bs;
}

double mean_at_p3(const SourceSpec& spec, const OpticalPath& path, SourceClass c) {
    return poissonian(spec).apn_p1 * path.attenuation(c) * (1.0 - path.eta_bs) * path.eta_det;
}

PhotonNumberDistribution pnd_at_p3(const SourceSpec& spec, const OpticalPath& path, SourceClass c,
                                   std::size_t n_max, double calibration_tolerance) {
    path.validate(calibration_tolerance);
    if (std::holds_alternative<CustomSource>(spec.statistics)) {
        return c == SourceClass::Signal ? spec.custom().signal : spec.custom().decoy;
    }
    return poisson_pnd(mean_at_p3(spec, path, c), n_max);
}

PhotonNumberDistribution pnd_at_p4(const SourceSpec& spec, const OpticalPath& path, SourceClass c,
                                   std::size_t n_max) {
    if (std::holds_alternative<CustomSource>(spec.statistics)) {
        return c == SourceClass::Signal ? spec.custom().signal : spec.custom().decoy;
    }
    return poisson_pnd(mean_at_p4(spec, path, c), n_max);
}

}  // namespace pnrqkd
