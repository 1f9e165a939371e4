#include "qantenna/network.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <Eigen/Eigenvalues>

#include "qantenna/errors.hpp"
#include "qantenna/ode.hpp"
#include "qantenna/optimize.hpp"
#include "qantenna/parallel.hpp"

namespace qantenna {

double TwoNodeRates::gamma() const { return symmetric ? gamma1 : std::sqrt(gamma1 * gamma2); }

TwoNodeRates TwoNodeRates::ideal(double gamma, double gamma_R, double gamma_L, double phi_R,
                                 double phi_L) {
    TwoNodeRates r;
    r.gamma1 = r.gamma2 = gamma;
    r.gamma_R = gamma_R;
    r.gamma_L = gamma_L;
    r.phi_R = wrap_phase(phi_R);
    r.phi_L = wrap_phase(phi_L);
    r.gamma_prime = gamma - gamma_R - gamma_L;
    return r;
}

double wrap_phase(double phi) {
    double w = std::remainder(phi, 2.0 * kPi);   // [-pi, pi]
    if (w <= -kPi) w += 2.0 * kPi;
    return w;
}

LinkGeometry make_link(int n_perp, int n_layers, double spacing_perp,
                       std::optional<double> spacing_z, double separation) {
    if (!(separation > 0.0)) throw std::invalid_argument("make_link: separation must be > 0");
    LinkGeometry link;
    link.separation = separation;
    link.node1 = build_regular_array(n_perp, n_layers, spacing_perp, spacing_z);
    link.node2 = link.node1;
    link.node1.translate(Vec3(0.0, 0.0, -0.5 * separation));
    link.node2.translate(Vec3(0.0, 0.0, 0.5 * separation));
    link.node1.label += "; node 1 at z=" + std::to_string(-0.5 * separation);
    link.node2.label += "; node 2 at z=" + std::to_string(0.5 * separation);
    return link;
}

namespace {

double mean_z(const ArrayGeometry& g) {
    double z = 0.0;
    for (const auto& r : g.positions) z += r.z();
    return z / static_cast<double>(g.size());
}

ArrayGeometry combine(const ArrayGeometry& a, const ArrayGeometry& b) {
    double min_d = std::numeric_limits<double>::infinity();
    for (const auto& ra : a.positions)
        for (const auto& rb : b.positions) min_d = std::min(min_d, (ra - rb).norm());
    if (min_d < kWavelength)
        throw std::invalid_argument("two_node_rates: nodes closer than lambda0 (min distance " +
                                    std::to_string(min_d) + ")");
    ArrayGeometry c = a;
    c.positions.insert(c.positions.end(), b.positions.begin(), b.positions.end());
    c.label = "link[" + a.label + " | " + b.label + "]";
    return c;
}

}  // namespace

LinkSolver::LinkSolver(const ArrayGeometry& geomA, const ArrayGeometry& geomB,
                       const Polarization& p, double detuning, SolvePath path)
    : geomA_(geomA), geomB_(geomB), path_(path) {
    kernel_ = build_kernel(combine(geomA, geomB), p, detuning);
    if (path == SolvePath::exact) solver_ = std::make_unique<KernelSolver>(kernel_);
    else if (detuning == 0.0)
        throw std::invalid_argument("LinkSolver: large-detuning path needs Delta != 0");
    separation_ = std::abs(mean_z(geomB) - mean_z(geomA));
}

TwoNodeRates LinkSolver::rates(const CVec& JA, const CVec& JB) const {
    const Eigen::Index na = static_cast<Eigen::Index>(geomA_.size());
    const Eigen::Index nb = static_cast<Eigen::Index>(geomB_.size());
    if (JA.size() != na || JB.size() != nb) throw std::invalid_argument("LinkSolver: coupling size mismatch");
    const double ge = kernel_.gamma_e;
    const double delta = kernel_.detuning;

    cplx c11, c22, c21, c12;   // J_a^dagger H^-1 J_b
    TwoNodeRates r;
    if (path_ == SolvePath::exact) {
        CMat rhs = CMat::Zero(na + nb, 2);
        rhs.col(0).head(na) = JA;
        rhs.col(1).tail(nb) = JB;
        const CMat x = solver_->solve(rhs);
        c11 = JA.dot(x.col(0).head(na));
        c22 = JB.dot(x.col(1).tail(nb));
        c21 = JB.dot(x.col(0).tail(nb));
        c12 = JA.dot(x.col(1).head(na));
        r.gamma1 = 2.0 * c11.imag();
        r.gamma2 = 2.0 * c22.imag();
        r.epsilon1 = -c11.real();
        r.epsilon2 = -c22.real();
        const cplx right = -kI * c21;
        const cplx left = -kI * c12;
        r.gamma_R = std::abs(right);
        r.phi_R = wrap_phase(std::arg(right));
        r.gamma_L = std::abs(left);
        r.phi_L = wrap_phase(std::arg(left));
    } else {
        const auto& G = kernel_.G;
        const double d2 = delta * delta;
        const CVec dA = JA + G.topLeftCorner(na, na).real().cast<cplx>() * JA;
        const CVec dB = JB + G.bottomRightCorner(nb, nb).real().cast<cplx>() * JB;
        r.gamma1 = ge * JA.dot(dA).real() / d2;
        r.gamma2 = ge * JB.dot(dB).real() / d2;
        r.epsilon1 = JA.squaredNorm() / delta;
        r.epsilon2 = JB.squaredNorm() / delta;
        const cplx right = ge * JB.dot(G.bottomLeftCorner(nb, na) * JA) / (2.0 * d2);
        const cplx left = ge * JA.dot(G.topRightCorner(na, nb) * JB) / (2.0 * d2);
        r.gamma_R = std::abs(right);
        r.phi_R = wrap_phase(std::arg(right));
        r.gamma_L = std::abs(left);
        r.phi_L = wrap_phase(std::arg(left));
    }
    r.symmetric = std::abs(r.gamma1 - r.gamma2) <= kSymmetryTolerance * std::max(r.gamma1, r.gamma2);
    r.gamma_prime = r.gamma() - r.gamma_R - r.gamma_L;
    r.separation = separation_;
    return r;
}

TwoNodeRates two_node_rates(const ArrayGeometry& geomA, const ArrayGeometry& geomB,
                            const CouplingProfile& couplingsA, const CouplingProfile& couplingsB,
                            const Polarization& p, double detuning, SolvePath path) {
    return LinkSolver(geomA, geomB, p, detuning, path).rates(couplingsA.J, couplingsB.J);
}

std::pair<CouplingProfile, CouplingProfile> link_couplings(const LinkGeometry& link,
                                                           const LGMode& mode, double jbar) {
    return {prescribe_couplings(link.node1, mode, jbar), prescribe_couplings(link.node2, mode, jbar)};
}

NodeModes node_modes(const ArrayGeometry& geom, const CouplingProfile& couplings,
                     const ParaxialBasis& basis, const Polarization& p, double detuning) {
    if (detuning == 0.0) throw std::invalid_argument("node_modes: amplitudes need Delta != 0");
    CollectiveKernel k;
    k.positions = geom.positions;
    k.detuning = detuning;
    k.polarization = p;
    // Amplitudes g_n depend only on positions and couplings; no solve needed.
    const CVec x = -couplings.J / detuning;
    NodeModes m;
    m.right = mode_rates_from_response(k, couplings.J, x, basis, Direction::forward);
    m.left = mode_rates_from_response(k, couplings.J, x, basis, Direction::backward);
    return m;
}

QsseResiduals qsse_identity_check(const NodeModes& node1, const NodeModes& node2,
                                  const TwoNodeRates& rates) {
    if (node1.right.size() != node2.right.size() || node1.left.size() != node2.left.size())
        throw std::invalid_argument("qsse_identity_check: nodes use different bases");
    QsseResiduals res;
    for (std::size_t n = 0; n < node1.right.size(); ++n)
        res.mode_sum_R += node1.right[n].amplitude * std::conj(node2.right[n].amplitude);
    for (std::size_t n = 0; n < node1.left.size(); ++n)
        res.mode_sum_L += node2.left[n].amplitude * std::conj(node1.left[n].amplitude);
    res.residual_R = rates.gamma_R > 0.0 ? std::abs(res.mode_sum_R - rates.right()) / rates.gamma_R
                                         : std::abs(res.mode_sum_R);
    res.residual_L = rates.gamma_L > 0.0 ? std::abs(res.mode_sum_L - rates.left()) / rates.gamma_L
                                         : std::abs(res.mode_sum_L);
    auto g_prime = [](const NodeModes& m, double gamma) {
        double s = 0.0;
        for (const auto& x : m.right) s += std::norm(x.amplitude);
        for (const auto& x : m.left) s += std::norm(x.amplitude);
        const double rad = gamma - s;
        if (rad < -1e-6 * gamma)
            throw NumericalFailure("qsse_identity_check",
                                   "negative radicand for g' (mode sum exceeds node rate)", rad);
        return std::sqrt(std::max(0.0, rad));
    };
    res.g_prime1 = g_prime(node1, rates.gamma1);
    res.g_prime2 = g_prime(node2, rates.gamma2);
    return res;
}

// ---------------------------------------------------------------------------
// Qubit pair dynamics

namespace {

Eigen::Matrix4cd lowering1() {
    Eigen::Matrix4cd s = Eigen::Matrix4cd::Zero();
    s(QubitPairState::GG, QubitPairState::EG) = 1.0;
    s(QubitPairState::GE, QubitPairState::EE) = 1.0;
    return s;
}

Eigen::Matrix4cd lowering2() {
    Eigen::Matrix4cd s = Eigen::Matrix4cd::Zero();
    s(QubitPairState::GG, QubitPairState::GE) = 1.0;
    s(QubitPairState::EG, QubitPairState::EE) = 1.0;
    return s;
}

}  // namespace

QubitPairState QubitPairState::pure(Basis b, double t) {
    QubitPairState s;
    s.rho(b, b) = 1.0;
    s.t = t;
    return s;
}

double QubitPairState::excitation1() const {
    return (rho(EG, EG) + rho(EE, EE)).real();
}

double QubitPairState::excitation2() const {
    return (rho(GE, GE) + rho(EE, EE)).real();
}

double QubitPairState::min_eigenvalue() const {
    const Eigen::Matrix4cd h = 0.5 * (rho + rho.adjoint());
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es(h, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

Eigen::Matrix2cd QubitPairState::reduced1() const {
    // Qubit 1 index: G for {GG, GE}, E for {EG, EE}; trace over qubit 2.
    Eigen::Matrix2cd r;
    r(0, 0) = rho(GG, GG) + rho(GE, GE);
    r(1, 1) = rho(EG, EG) + rho(EE, EE);
    r(0, 1) = rho(GG, EG) + rho(GE, EE);
    r(1, 0) = rho(EG, GG) + rho(EE, GE);
    return r;
}

double transfer_pulse(double gamma, double t) {
    if (t >= 0.0) return 1.0;
    const double e = std::exp(gamma * t);
    const double f = std::sqrt(e / (2.0 - e));
    return std::clamp(f, 1e-8, 1.0);
}

PulsePair PulsePair::constant(double f1, double f2, double horizon) {
    if (f1 < 0.0 || f1 > 1.0 || f2 < 0.0 || f2 > 1.0)
        throw std::invalid_argument("PulsePair: envelopes must lie in [0, 1]");
    PulsePair p;
    p.f1 = [f1](double) { return f1; };
    p.f2 = [f2](double) { return f2; };
    p.horizon = horizon;
    p.symmetric = f1 == f2;
    return p;
}

PulsePair PulsePair::state_transfer(double gamma, double gamma_T) {
    if (!(gamma > 0.0) || !(gamma_T > 0.0))
        throw std::invalid_argument("PulsePair: gamma and gamma*T must be > 0");
    PulsePair p;
    p.f1 = [gamma](double t) { return transfer_pulse(gamma, t); };
    p.f2 = [gamma](double t) { return transfer_pulse(gamma, -t); };
    p.horizon = gamma_T / gamma;
    p.symmetric = true;
    return p;
}

std::vector<QubitPairState> integrate_chiral_me(const TwoNodeRates& rates, const PulsePair& pulses,
                                                const QubitPairState& rho0, double t_end,
                                                double dt, const MasterEquationOptions& options) {
    const double rate_scale =
        std::max({rates.gamma1, rates.gamma2, rates.gamma_R, rates.gamma_L, 1e-300});
    if (!(dt > 0.0) || dt > 1e-3 / rate_scale * (1.0 + 1e-12))
        throw std::invalid_argument("integrate_chiral_me: dt must be <= 1e-3/gamma");
    if (!(t_end >= rho0.t)) throw std::invalid_argument("integrate_chiral_me: t_end before start");

    const Eigen::Matrix4cd s1 = lowering1(), s2 = lowering2();
    const Eigen::Matrix4cd n1 = s1.adjoint() * s1, n2 = s2.adjoint() * s2;
    const Eigen::Matrix4cd hop_L = s1.adjoint() * s2;   // s1+ s2-
    const Eigen::Matrix4cd hop_R = s2.adjoint() * s1;   // s2+ s1-
    const cplx eR = rates.right(), eL = rates.left();
    const cplx jump12 = eR + std::conj(eL);   // s1- rho s2+
    const double eps1 = options.keep_shifts ? rates.epsilon1 : 0.0;
    const double eps2 = options.keep_shifts ? rates.epsilon2 : 0.0;

    auto rhs = [&](double t, const Eigen::Matrix4cd& rho) -> Eigen::Matrix4cd {
        const double f1 = pulses.f1(t), f2 = pulses.f2(t);
        const double a1 = f1 * f1, a2 = f2 * f2, a12 = f1 * f2;
        const Eigen::Matrix4cd H = (eps1 - 0.5 * kI * rates.gamma1) * a1 * n1 +
                                   (eps2 - 0.5 * kI * rates.gamma2) * a2 * n2 -
                                   kI * a12 * (eL * hop_L + eR * hop_R);
        Eigen::Matrix4cd d = -kI * (H * rho - rho * H.adjoint());
        d += a1 * rates.gamma1 * s1 * rho * s1.adjoint() + a2 * rates.gamma2 * s2 * rho * s2.adjoint();
        const Eigen::Matrix4cd cross = a12 * jump12 * s1 * rho * s2.adjoint();
        d += cross + cross.adjoint();
        return d;
    };

    const std::size_t steps = step_count(rho0.t, t_end, dt);
    const double h = (t_end - rho0.t) / static_cast<double>(steps);
    const std::size_t every = std::max<std::size_t>(1, options.store_every);
    std::vector<QubitPairState> traj;
    traj.reserve(steps / every + 2);
    traj.push_back(rho0);
    Eigen::Matrix4cd rho = rho0.rho;
    const double tr0 = rho0.trace();
    for (std::size_t k = 0; k < steps && h > 0.0; ++k) {
        const double t = rho0.t + k * h;
        rk4_step(rhs, t, rho, h);
        const double drift = std::abs(rho.trace().real() - tr0);
        if (!(drift <= 1e-6))
            throw NumericalFailure("integrate_chiral_me", "trace drift " + std::to_string(drift), drift);
        if ((k + 1) % every == 0 || k + 1 == steps) {
            QubitPairState s;
            s.rho = rho;
            s.t = rho0.t + (k + 1) * h;
            traj.push_back(s);
        }
    }
    return traj;
}

AmplitudeTrajectory amplitude_ode(const TwoNodeRates& rates, const PulsePair& pulses,
                                  std::optional<double> dt) {
    AmplitudeTrajectory out;
    const double gamma = rates.gamma();
    if (!(gamma > 0.0)) throw std::invalid_argument("amplitude_ode: gamma must be > 0");
    if (rates.gamma_L > 0.01 * rates.gamma_R)
        out.warnings.push_back("gamma_L > 0.01 gamma_R: left-moving coupling neglected");
    const double step = dt.value_or(1e-3 / gamma);
    const double T = pulses.horizon;
    const cplx eR = rates.right();
    using State = Eigen::Vector2cd;
    auto rhs = [&](double t, const State& c) -> State {
        const double f1 = pulses.f1(t), f2 = pulses.f2(t);
        State d;
        d[0] = -0.5 * rates.gamma1 * f1 * f1 * c[0];
        d[1] = -0.5 * rates.gamma2 * f2 * f2 * c[1] - eR * f1 * f2 * c[0];
        return d;
    };
    const std::size_t steps = step_count(-T, T, step);
    const double h = 2.0 * T / static_cast<double>(steps);
    State c(1.0, 0.0);
    out.t.reserve(steps + 1);
    out.t.push_back(-T);
    out.c1.push_back(c[0]);
    out.c2.push_back(c[1]);
    for (std::size_t k = 0; k < steps; ++k) {
        rk4_step(rhs, -T + k * h, c, h);
        out.t.push_back(-T + (k + 1) * h);
        out.c1.push_back(c[0]);
        out.c2.push_back(c[1]);
    }
    return out;
}

QstResult qst_fidelity(const TwoNodeRates& rates, const PulsePair& pulses, std::optional<double> dt) {
    const AmplitudeTrajectory traj = amplitude_ode(rates, pulses, dt);
    QstResult r;
    r.fidelity = std::norm(traj.c2.back());
    r.reference = rates.gamma_R * rates.gamma_R / (rates.gamma1 * rates.gamma2);
    r.warnings = traj.warnings;
    return r;
}

LinkOptimum optimize_link_waist(const LinkSolver& solver, const LinkGeometry& link, double w0_min,
                                double w0_max, int grid, double min_step) {
    if (!(w0_min > 0.0) || !(w0_max > w0_min))
        throw std::invalid_argument("optimize_link_waist: need 0 < w0_min < w0_max");
    const double focus = 0.5 * (mean_z(link.node1) + mean_z(link.node2));
    auto rates_at = [&](double w0) {
        const LGMode m{0, 0, w0, focus};
        const auto [a, b] = link_couplings(link, m, 1.0);
        return solver.rates(a.J, b.J);
    };
    MemoizedObjective f(
        [&](const std::vector<double>& v) {
            const TwoNodeRates r = rates_at(v[0]);
            return r.gamma_R / r.gamma();
        },
        min_step / 4.0);
    const auto ws = linspace(w0_min, w0_max, grid);
    double best = -1.0, best_w = ws.front();
    for (double w : ws) {
        const double v = f({w});
        if (v > best) {
            best = v;
            best_w = w;
        }
    }
    PatternSearchOptions po;
    po.initial_step = {ws[1] - ws[0]};
    po.min_step = min_step;
    const auto res = pattern_search(f, {best_w}, {w0_min}, {w0_max}, po);
    LinkOptimum out;
    out.w0 = res.x[0];
    out.rates = rates_at(out.w0);
    out.at_bound = res.at_lower[0] || res.at_upper[0];
    return out;
}

double beta_envelope(double transverse_extent, double z0) {
    if (!(z0 > 0.0)) throw std::invalid_argument("beta_envelope: z0 must be > 0");
    const double e = std::erf(std::sqrt(transverse_extent * transverse_extent * kPi /
                                        (4.0 * z0 * kWavelength)));
    return e * e;
}

double large_distance_waist(double z0) {
    if (!(z0 > 0.0)) throw std::invalid_argument("large_distance_waist: z0 must be > 0");
    return std::sqrt(z0 * kWavelength / kPi);
}

std::vector<BetaDistanceRow> beta_distance_curve(int n_perp, double spacing_perp,
                                                 const std::vector<double>& z0_list,
                                                 const BetaDistanceOptions& o) {
    const ArrayGeometry g = build_regular_array(n_perp, o.n_layers, spacing_perp, o.spacing_z);
    const CollectiveKernel k = build_kernel(g, Polarization::circular(), o.detuning);
    std::unique_ptr<KernelSolver> solver;
    if (o.path == SolvePath::exact) solver = std::make_unique<KernelSolver>(k);
    const double L = g.transverse_extent();
    std::vector<BetaDistanceRow> rows(z0_list.size());
    parallel_for(z0_list.size(), o.jobs, [&](std::size_t i) {
        const double z0 = z0_list[i];
        // Node centred at -z0, focus at 0: equivalently node at 0, focus at +z0.
        const double w_max = std::max(2.0 * L, 3.0 * large_distance_waist(z0));
        const WaistOptimum w = optimize_waist(k, o.w0_min, w_max, z0, o.path, o.grid, 1e-3, solver.get());
        BetaDistanceRow& r = rows[i];
        r.z0 = z0;
        r.beta = w.beta;
        r.w0_opt = w.w0;
        r.at_bound = w.at_bound;
        r.envelope = beta_envelope(L, z0);
        r.w0_large_z0 = large_distance_waist(z0);
    });
    return rows;
}

}  // namespace qantenna
