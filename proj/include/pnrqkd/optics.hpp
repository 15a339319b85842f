#pragma once

#include <variant>

#include "pnrqkd/photon_stats.hpp"

namespace pnrqkd {

enum class SourceClass { Signal, Decoy };

const char* to_string(SourceClass c);

inline constexpr double kDefaultCalibrationTolerance = 0.01;

/// Alice's path: attenuator (eta_s / eta_d), then a beam splitter sending eta_bs
/// toward the channel and the rest to a PNR detector of efficiency eta_det.
/// Filter, phase randomizer and encoder do not change photon number.
struct OpticalPath {
    double eta_s = 5e-7;
    double eta_d = 1e-7;
    double eta_bs = 0.13;
    double eta_det = 0.15;

    [[nodiscard]] double attenuation(SourceClass c) const { return c == SourceClass::Signal ? eta_s : eta_d; }

    /// |eta_det (1 - eta_bs) - eta_bs| / eta_bs.
    [[nodiscard]] double calibration_residual() const;

    /// Throws InvalidParameter for transmittances outside (0, 1], CalibrationError
    /// when the residual exceeds `tolerance`.
    void validate(double tolerance = kDefaultCalibrationTolerance) const;

    /// Detector efficiency that makes the detector arm match the channel arm exactly.
    [[nodiscard]] static double calibrated_eta_det(double eta_bs) { return eta_bs / (1.0 - eta_bs); }
};

struct PoissonianSource {
    double apn_p1 = 7.69e6;
};

/// Distributions already referred to the monitoring/output positions.
struct CustomSource {
    PhotonNumberDistribution signal;
    PhotonNumberDistribution decoy;
};

struct SourceSpec {
    std::variant<PoissonianSource, CustomSource> statistics;

    [[nodiscard]] const CustomSource& custom() const { return std::get<CustomSource>(statistics); }
    void validate() const;
};

/// Mean photon number leaving Alice (position 4). Poissonian sources only.
double mean_at_p4(const SourceSpec& spec, const OpticalPath& path, SourceClass c);

/// Mean photon number seen by the detector (position 3, after eta_det). Poissonian sources only.
double mean_at_p3(const SourceSpec& spec, const OpticalPath& path, SourceClass c);

/// Distribution seen by the PNR detector. Validates calibration first.
PhotonNumberDistribution pnd_at_p3(const SourceSpec& spec, const OpticalPath& path, SourceClass c,
                                   std::size_t n_max = kDefaultNMax,
                                   double calibration_tolerance = kDefaultCalibrationTolerance);

/// Distribution leaving toward Bob.
PhotonNumberDistribution pnd_at_p4(const SourceSpec& spec, const OpticalPath& path, SourceClass c,
                                   std::size_t n_max = kDefaultNMax);

}  // namespace pnrqkd
