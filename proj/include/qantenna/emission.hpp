#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "qantenna/dipole_kernel.hpp"
#include "qantenna/geometry.hpp"
#include "qantenna/paraxial.hpp"

namespace qantenna {

struct CouplingProfile {
    CVec J;
    // Optional temporal envelope f(t), |f| <= 1.
    std::function<double(double)> envelope;

    double jbar() const { return J.norm(); }
    double at(double t) const { return envelope ? envelope(t) : 1.0; }
};

// Exact inverse of H_nh, or the leading order in 1/Delta.
enum class SolvePath { exact, large_detuning };
enum class Direction { forward, backward };

std::string to_string(SolvePath path);
SolvePath solve_path_from_string(const std::string& s);

// J_j = c exp(i k0 z_j) u_target(rho_j, z_j) with |J| = jbar.
CouplingProfile prescribe_couplings(const ArrayGeometry& geom, const LGMode& target, double jbar);

struct RateResult {
    double epsilon = 0.0;
    double gamma_tot = 0.0;
};

// Collective response x = H_nh^-1 J (exact) or -J/Delta (large detuning).
CVec antenna_response(const CollectiveKernel& kernel, const CVec& J, SolvePath path);
// solver may be null on the large-detuning path.
CVec antenna_response(const KernelSolver* solver, const CollectiveKernel& kernel, const CVec& J,
                      SolvePath path);

RateResult effective_rate(const CollectiveKernel& kernel, const CouplingProfile& couplings,
                          SolvePath path = SolvePath::exact);
RateResult rate_from_response(const CollectiveKernel& kernel, const CVec& J, const CVec& x,
                              SolvePath path);

struct ModeRate {
    LGMode mode;
    double gamma = 0.0;
    // Large-detuning amplitude g_n = sqrt(3 pi gamma_e / 2) / (Delta k0) sum_i w_i J_i.
    cplx amplitude{0.0, 0.0};
};

// Per-atom weights u_n^*(r_i) e^{-i k0 z_i} (forward) or u_n(r_i) e^{+i k0 z_i} (backward).
CVec mode_weights(const std::vector<Vec3>& positions, const LGMode& mode, Direction dir);

std::vector<ModeRate> mode_rates(const CollectiveKernel& kernel, const CouplingProfile& couplings,
                                 const ParaxialBasis& basis, Direction dir,
                                 SolvePath path = SolvePath::exact);
std::vector<ModeRate> mode_rates_from_response(const CollectiveKernel& kernel, const CVec& J,
                                               const CVec& x, const ParaxialBasis& basis,
                                               Direction dir);

struct EmissionReport {
    double gamma_tot = 0.0;
    double epsilon = 0.0;
    std::vector<ModeRate> forward;
    std::vector<ModeRate> backward;
    std::size_t target_index = 0;
    double gamma_target = 0.0;
    double beta = 0.0;
    double gamma_prime = 0.0;
    double od_eff = 0.0;
    SolvePath path = SolvePath::exact;
    // The truncated paraxial mode sum exceeds gamma_tot. Happens for antennas
    // smaller than the high-order modes, whose angular spread leaves the
    // paraxial regime; gamma_prime is then negative and not meaningful.
    bool paraxial_overcount = false;
    // Relative change of the summed mode rates when the cut is doubled; set
    // only when the convergence check is requested.
    std::optional<double> basis_change;
};

struct PurcellOptions {
    SolvePath path = SolvePath::exact;
    bool check_basis_convergence = false;
};

double od_eff_from_beta(double beta);

EmissionReport purcell(const CollectiveKernel& kernel, const CouplingProfile& couplings,
                       const ParaxialBasis& basis, const PurcellOptions& options = {});
EmissionReport purcell_from_response(const CollectiveKernel& kernel, const CVec& J, const CVec& x,
                                     const ParaxialBasis& basis, const PurcellOptions& options);

// Fast beta for the target mode only.
double target_beta(const CollectiveKernel& kernel, const CVec& J, const CVec& x,
                   const LGMode& target, SolvePath path);

struct FieldMap {
    std::vector<Vec3> grid;
    std::vector<Eigen::Vector3cd> amplitude;
    // Flux convention: c |phi|^2 integrated over a surface gives a rate in gamma_e.
    std::string normalization = "photon-flux gamma_e";

    std::vector<double> magnitude() const;
};

inline constexpr double kFieldMinDistance = 0.05;

FieldMap field_map(const CollectiveKernel& kernel, const CouplingProfile& couplings,
                   const std::vector<Vec3>& grid, SolvePath path = SolvePath::exact);

// Field source for paraxial::overlap_rate built from a solved response.
FieldSource field_source(const CollectiveKernel& kernel, const CVec& x);

struct FarFieldFlux {
    double total = 0.0;
    double forward = 0.0;   // z > 0 hemisphere
    double backward = 0.0;
};

// c oint |phi|^2 r^2 dOmega on a Fibonacci sphere.
FarFieldFlux far_field_flux(const CollectiveKernel& kernel, const CVec& x, double radius = 500.0,
                            std::size_t n_points = 10000);

// Effective optical depth 8 + 32 w0^4 / sigma^2 of a lattice filling the mode.
double lattice_od_bound(double w0);

struct Trajectory {
    std::vector<double> t;
    std::vector<cplx> s;
    std::vector<double> norm;   // |s|^2 + sum |P_i|^2
    CVec P_final;
    double error_estimate = 0.0;  // max |s| difference against a half-step run
};

struct WWOptions {
    bool estimate_error = false;
};

// Master atom amplitude s and antenna amplitudes P_i from s(0) = 1, P(0) = 0.
Trajectory wigner_weisskopf(const CollectiveKernel& kernel, const CouplingProfile& couplings,
                            double t_end, double dt, const WWOptions& options = {});

// Antenna optimization over (w0, delta_perp).
struct OptimizeOptions {
    double delta_min = 0.3;
    double delta_max = 2.0;
    double w0_min = 0.3;
    double w0_max_factor = 2.0;   // w0 <= factor * L_perp
    int grid_w0 = 32;
    int grid_delta = 16;
    double min_step = 1e-3;
    double detuning = 100.0;
    std::optional<double> spacing_z;   // auto when empty
    SolvePath path = SolvePath::exact;
    Polarization polarization = Polarization::circular();
    int report_mode_cut = kDefaultModeCut;
    // Reject points where the truncated LG basis (cut report_mode_cut) carries more
    // flux than gamma_tot; small waists otherwise inflate beta.
    bool require_paraxial_consistency = true;
    std::size_t jobs = 1;
};

struct AntennaOptimum {
    double w0 = 0.0;
    double delta_perp = 0.0;
    double beta = 0.0;
    EmissionReport report;
    ArrayGeometry geometry;
    bool w0_at_bound = false;
    bool delta_at_bound = false;
    std::size_t evaluations = 0;
};

AntennaOptimum optimize_antenna(int n_perp, int n_layers, const OptimizeOptions& options = {});

// Optimal waist for a fixed geometry (1D search, factorization reused).
struct WaistOptimum {
    double w0 = 0.0;
    double beta = 0.0;
    bool at_bound = false;
};
// A null solver is factorized on demand for the exact path. A non-negative
// consistency_cut rejects waists where the LG basis truncated at that cut
// carries more flux than gamma_tot.
WaistOptimum optimize_waist(const CollectiveKernel& kernel, double w0_min, double w0_max,
                            double focus_z, SolvePath path, int grid = 32, double min_step = 1e-3,
                            const KernelSolver* solver = nullptr, int consistency_cut = -1);

// Mean beta over disorder/defect samples with fixed waist and prescription
// couplings evaluated at the perturbed positions.
struct DisorderAverage {
    double mean_beta = 0.0;
    double std_error = 0.0;
    std::vector<double> samples;
};

struct DisorderStudyOptions {
    double detuning = 100.0;
    SolvePath path = SolvePath::exact;
    Polarization polarization = Polarization::circular();
    std::size_t jobs = 1;
};

DisorderAverage disorder_average(const ArrayGeometry& base, const LGMode& target,
                                 const DisorderSpec& spec, const DisorderStudyOptions& options = {});

// Independent per-sample seeds derived from a base seed.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream, std::uint64_t index);

// Mean beta of random-box ensembles at optical depth od (density fixed,
// waist from od = sigma n 2 z_R).
struct EnsembleAverage {
    double od = 0.0;
    double waist = 0.0;
    double mean_beta = 0.0;
    double std_error = 0.0;
    double mean_atoms = 0.0;
};

struct EnsembleOptions {
    double density = 2.0;
    int n_seeds = 20;
    std::uint64_t seed = 1;
    // Transverse box side in units of w0; empty = sqrt(pi) (section pi w0^2).
    std::optional<double> side_over_waist;
    double detuning = 100.0;
    SolvePath path = SolvePath::large_detuning;
    std::size_t jobs = 1;
};

double waist_for_optical_depth(double od, double density);
EnsembleAverage random_ensemble_beta(double od, const EnsembleOptions& options = {});

}  // namespace qantenna
