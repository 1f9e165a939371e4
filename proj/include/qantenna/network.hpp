#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qantenna/emission.hpp"

namespace qantenna {

struct TwoNodeRates {
    double gamma1 = 0.0;
    double gamma2 = 0.0;
    double epsilon1 = 0.0;
    double epsilon2 = 0.0;
    double gamma_R = 0.0;
    double gamma_L = 0.0;
    double phi_R = 0.0;   // (-pi, pi]
    double phi_L = 0.0;
    double gamma_prime = 0.0;
    double separation = 0.0;
    bool symmetric = true;   // gamma1 == gamma2 within 1e-6 relative

    // Node rate; sqrt(gamma1 gamma2) for asymmetric links.
    double gamma() const;
    cplx right() const { return std::polar(gamma_R, phi_R); }
    cplx left() const { return std::polar(gamma_L, phi_L); }

    // Rates set by hand, e.g. for ideal cascaded links.
    static TwoNodeRates ideal(double gamma, double gamma_R, double gamma_L = 0.0,
                              double phi_R = 0.0, double phi_L = 0.0);
};

inline constexpr double kSymmetryTolerance = 1e-6;

// Phase wrapped to (-pi, pi].
double wrap_phase(double phi);

// Two matched antennas at z = -separation/2 (node 1) and +separation/2
// (node 2).
struct LinkGeometry {
    ArrayGeometry node1;
    ArrayGeometry node2;
    double separation = 0.0;
};

LinkGeometry make_link(int n_perp, int n_layers, double spacing_perp,
                       std::optional<double> spacing_z, double separation);

// Combined 2N-atom kernel and its factorization, reused across coupling
// profiles.
class LinkSolver {
public:
    LinkSolver(const ArrayGeometry& geomA, const ArrayGeometry& geomB, const Polarization& p,
               double detuning, SolvePath path = SolvePath::exact);

    TwoNodeRates rates(const CVec& JA, const CVec& JB) const;
    const CollectiveKernel& kernel() const { return kernel_; }
    const ArrayGeometry& node(int a) const { return a == 1 ? geomA_ : geomB_; }
    SolvePath path() const { return path_; }
    double separation() const { return separation_; }

private:
    ArrayGeometry geomA_, geomB_;
    CollectiveKernel kernel_;
    std::unique_ptr<KernelSolver> solver_;
    SolvePath path_;
    double separation_ = 0.0;
};

TwoNodeRates two_node_rates(const ArrayGeometry& geomA, const ArrayGeometry& geomB,
                            const CouplingProfile& couplingsA, const CouplingProfile& couplingsB,
                            const Polarization& p, double detuning,
                            SolvePath path = SolvePath::exact);

// Prescription couplings of both nodes to one shared mode.
std::pair<CouplingProfile, CouplingProfile> link_couplings(const LinkGeometry& link,
                                                           const LGMode& mode, double jbar);

struct NodeModes {
    std::vector<ModeRate> right;   // forward amplitudes g^R
    std::vector<ModeRate> left;    // backward amplitudes g^L
};

NodeModes node_modes(const ArrayGeometry& geom, const CouplingProfile& couplings,
                     const ParaxialBasis& basis, const Polarization& p, double detuning);

struct QsseResiduals {
    double residual_R = 0.0;
    double residual_L = 0.0;
    cplx mode_sum_R{0.0, 0.0};
    cplx mode_sum_L{0.0, 0.0};
    double g_prime1 = 0.0;
    double g_prime2 = 0.0;
};

QsseResiduals qsse_identity_check(const NodeModes& node1, const NodeModes& node2,
                                  const TwoNodeRates& rates);

// Qubit-pair density matrix over {GG, EG, GE, EE}.
struct QubitPairState {
    Eigen::Matrix4cd rho = Eigen::Matrix4cd::Zero();
    double t = 0.0;

    enum Basis { GG = 0, EG = 1, GE = 2, EE = 3 };
    static QubitPairState pure(Basis b, double t = 0.0);
    double excitation1() const;   // <s1+ s1->
    double excitation2() const;
    double trace() const { return rho.trace().real(); }
    double min_eigenvalue() const;
    Eigen::Matrix2cd reduced1() const;
};

struct PulsePair {
    std::function<double(double)> f1;
    std::function<double(double)> f2;
    double horizon = 0.0;   // protocol runs over [-T, T]
    bool symmetric = false;

    static PulsePair constant(double f1, double f2, double horizon);
    // f1 = sqrt(e^{gamma t} / (2 - e^{gamma t})) for t < 0, 1 after; f2(t) = f1(-t).
    static PulsePair state_transfer(double gamma, double gamma_T = 20.0);
};

// Shape of the state-transfer emission pulse, floored at 1e-8.
double transfer_pulse(double gamma, double t);

struct MasterEquationOptions {
    bool keep_shifts = false;
    std::size_t store_every = 1;
};

std::vector<QubitPairState> integrate_chiral_me(const TwoNodeRates& rates, const PulsePair& pulses,
                                                const QubitPairState& rho0, double t_end,
                                                double dt, const MasterEquationOptions& options = {});

struct AmplitudeTrajectory {
    std::vector<double> t;
    std::vector<cplx> c1;
    std::vector<cplx> c2;
    std::vector<std::string> warnings;
};

// dt defaults to 1e-3 / gamma.
AmplitudeTrajectory amplitude_ode(const TwoNodeRates& rates, const PulsePair& pulses,
                                  std::optional<double> dt = std::nullopt);

struct QstResult {
    double fidelity = 0.0;
    double reference = 0.0;   // (gamma_R / gamma)^2
    std::vector<std::string> warnings;
};

QstResult qst_fidelity(const TwoNodeRates& rates, const PulsePair& pulses,
                       std::optional<double> dt = std::nullopt);

// Link waist maximizing gamma_R / gamma for a shared mode focused at the
// midpoint.
struct LinkOptimum {
    double w0 = 0.0;
    TwoNodeRates rates;
    bool at_bound = false;
};

LinkOptimum optimize_link_waist(const LinkSolver& solver, const LinkGeometry& link, double w0_min,
                                double w0_max, int grid = 24, double min_step = 1e-3);

struct BetaDistanceRow {
    double z0 = 0.0;
    double beta = 0.0;
    double w0_opt = 0.0;
    double envelope = 0.0;       // erf(sqrt(L_perp^2 pi / (4 z0 lambda0)))^2
    double w0_large_z0 = 0.0;    // sqrt(z0 lambda0 / pi)
    bool at_bound = false;
};

struct BetaDistanceOptions {
    int n_layers = 2;
    std::optional<double> spacing_z;
    double detuning = 100.0;
    SolvePath path = SolvePath::exact;
    double w0_min = 0.3;
    int grid = 32;
    std::size_t jobs = 1;
};

double beta_envelope(double transverse_extent, double z0);
double large_distance_waist(double z0);

std::vector<BetaDistanceRow> beta_distance_curve(int n_perp, double spacing_perp,
                                                 const std::vector<double>& z0_list,
                                                 const BetaDistanceOptions& options = {});

}  // namespace qantenna
