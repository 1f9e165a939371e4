#pragma once

#include <string>
#include <vector>

#include "qantenna/emission.hpp"

namespace qantenna {

// Physical unit system of the Rydberg layer. Frequencies are quoted as
// f = omega / 2pi in MHz, lengths in micrometres. Natural units divide by the
// linewidth gamma_e / 2pi and the wavelength lambda0.
struct UnitSystem {
    double wavelength_um = 0.0;
    double gamma_e_MHz = 0.0;

    void validate() const;
    double length_to_natural(double um) const { return um / wavelength_um; }
    double length_to_physical(double lambda) const { return lambda * wavelength_um; }
    double rate_to_natural(double MHz) const { return MHz / gamma_e_MHz; }
    double rate_to_physical(double gamma) const { return gamma * gamma_e_MHz; }
};

struct RydbergParams {
    double C3 = 0.0;     // master-antenna flip-flop, MHz um^3
    double C3p = 0.0;    // antenna-antenna, MHz um^3
    std::vector<cplx> omega_d;    // per-atom dressing Rabi frequency, MHz
    double delta_d = 0.0;         // MHz
    std::vector<double> omega_c;  // per-atom control Rabi frequency, MHz (size 1 = uniform)
    double delta_c = 0.0;         // MHz
    double gamma_r = 0.0;         // Rydberg decay, MHz
    Vec3 master_pos = Vec3::Zero();   // um
    UnitSystem units;
    double gate = 0.02;           // max |Omega_d / Delta_d|

    void validate(std::size_t n_atoms) const;
    double control_at(std::size_t i) const { return omega_c.size() == 1 ? omega_c[0] : omega_c.at(i); }
};

// C3 (1 - 3 cos^2 theta) / r^3 with cos theta = z . rhat; r in um.
double vdd(const Vec3& r_rel, double C3);

struct DressedCouplings {
    CouplingProfile J;   // natural units
    CMat Jp;             // antenna-antenna hops, natural units
};

DressedCouplings dressed_couplings(const ArrayGeometry& geom, const RydbergParams& params);

// Master atom on axis, z_m (um) in front of the first layer.
Vec3 master_on_axis(const ArrayGeometry& geom, double z_m_um, const UnitSystem& units);

// Dressing laser shaped like the prescription e^{i k0 z} u_target, scaled so
// the largest |Omega_d / Delta_d| equals ratio.
std::vector<cplx> lg_dressing_profile(const ArrayGeometry& geom, const LGMode& target,
                                      double delta_d, double ratio);

struct ThreeLevelResult {
    double beta = 0.0;
    double gamma_tot = 0.0;        // antenna emission + Rydberg loss in the antenna, natural units
    double gamma_target = 0.0;
    double gamma_master_loss = 0.0;
    bool eit_violated = false;     // min Omega_c < 10 max(|J_i|, |J'_ij|, gamma_r)
};

ThreeLevelResult three_level_purcell(const ArrayGeometry& geom, const RydbergParams& params,
                                     const LGMode& target,
                                     const Polarization& p = Polarization::circular());

struct DressingOptions {
    int outer_iterations = 3;
    int max_iterations = 3000;
};

struct DressingOptimum {
    std::vector<cplx> omega_d;    // MHz
    double beta = 0.0;
    double beta_initial = 0.0;
    std::vector<bool> saturated;  // |Omega_d / Delta_d| at the gate
};

// Projected gradient ascent on the per-atom couplings under the gate,
// seeded from params.omega_d; keeps the best exactly evaluated profile.
DressingOptimum optimize_dressing_profile(const ArrayGeometry& geom, const RydbergParams& params,
                                          const LGMode& target, const DressingOptions& options = {});

struct MasterDistanceRow {
    double z_m_um = 0.0;
    double beta_lg = 0.0;
    double beta_opt = 0.0;   // NaN when the profile is not optimized
};

// beta versus master distance with an LG dressing profile at the gate.
std::vector<MasterDistanceRow> scan_master_distance(const ArrayGeometry& geom,
                                                   const RydbergParams& params,
                                                   const LGMode& target,
                                                   const std::vector<double>& z_m_um,
                                                   bool optimize_profile, std::size_t jobs = 1);

}  // namespace qantenna
