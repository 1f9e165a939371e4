#include "qantenna/rydberg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "qantenna/errors.hpp"
#include "qantenna/parallel.hpp"

namespace qantenna {

void UnitSystem::validate() const {
    if (!(wavelength_um > 0.0) || !(gamma_e_MHz > 0.0))
        throw std::invalid_argument("units: wavelength_um and gamma_e_MHz must be > 0");
}

void RydbergParams::validate(std::size_t n_atoms) const {
    units.validate();
    if (omega_d.size() != n_atoms)
        throw std::invalid_argument("rydberg: omega_d needs one entry per atom (" +
                                    std::to_string(n_atoms) + ")");
    if (omega_c.size() != 1 && omega_c.size() != n_atoms)
        throw std::invalid_argument("rydberg: omega_c needs 1 or N entries");
    if (delta_d == 0.0) throw std::invalid_argument("rydberg: delta_d must be nonzero");
    if (!(gamma_r >= 0.0)) throw std::invalid_argument("rydberg: gamma_r must be >= 0");
    if (!(gate > 0.0)) throw std::invalid_argument("rydberg: gate must be > 0");
}

double vdd(const Vec3& r_rel, double C3) {
    const double r = r_rel.norm();
    if (!(r > 0.0)) throw std::domain_error("vdd: r = 0");
    const double c = r_rel.z() / r;
    return C3 * (1.0 - 3.0 * c * c) / (r * r * r);
}

Vec3 master_on_axis(const ArrayGeometry& geom, double z_m_um, const UnitSystem& units) {
    units.validate();
    return Vec3(0.0, 0.0, units.length_to_physical(geom.z_min()) - z_m_um);
}

std::vector<cplx> lg_dressing_profile(const ArrayGeometry& geom, const LGMode& target,
                                      double delta_d, double ratio) {
    const CouplingProfile pres = prescribe_couplings(geom, target, 1.0);
    const double peak = pres.J.cwiseAbs().maxCoeff();
    std::vector<cplx> od(geom.size());
    for (std::size_t i = 0; i < od.size(); ++i)
        od[i] = ratio * delta_d * pres.J[static_cast<Eigen::Index>(i)] / peak;
    return od;
}

namespace {

Vec3 physical(const ArrayGeometry& g, std::size_t i, const UnitSystem& u) {
    return g.positions[i] * u.wavelength_um;
}

void check_gate(const RydbergParams& p) {
    double worst = 0.0;
    std::size_t idx = 0;
    for (std::size_t i = 0; i < p.omega_d.size(); ++i) {
        const double r = std::abs(p.omega_d[i] / p.delta_d);
        if (r > worst) {
            worst = r;
            idx = i;
        }
    }
    if (worst > p.gate * (1.0 + 1e-9)) {
        std::ostringstream msg;
        msg << "dressed_couplings: |Omega_d/Delta_d| = " << worst << " at atom " << idx
            << " exceeds the perturbative gate " << p.gate;
        throw std::invalid_argument(msg.str());
    }
}

// Master-antenna couplings V_i (natural units) for unit Omega_d / Delta_d.
CVec master_potentials(const ArrayGeometry& geom, const RydbergParams& p) {
    CVec V(static_cast<Eigen::Index>(geom.size()));
    for (std::size_t i = 0; i < geom.size(); ++i)
        V[static_cast<Eigen::Index>(i)] =
            p.units.rate_to_natural(vdd(physical(geom, i, p.units) - p.master_pos, p.C3));
    return V;
}

CMat antenna_hops(const ArrayGeometry& geom, const RydbergParams& p) {
    const auto n = static_cast<Eigen::Index>(geom.size());
    CMat Jp = CMat::Zero(n, n);
    const double d2 = p.delta_d * p.delta_d;
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double v = p.units.rate_to_natural(
                vdd(physical(geom, i, p.units) - physical(geom, j, p.units), p.C3p));
            Jp(i, j) = v * p.omega_d[i] * std::conj(p.omega_d[j]) / d2;
            Jp(j, i) = std::conj(Jp(i, j));
        }
    return Jp;
}

// Antenna block M over (R_1..R_N, e_1..e_N).
CMat three_level_matrix(const CollectiveKernel& k, const CMat& Jp, const RydbergParams& p) {
    const auto n = k.size();
    CMat M = CMat::Zero(2 * n, 2 * n);
    M.topLeftCorner(n, n) = Jp;
    M.topLeftCorner(n, n).diagonal().array() += cplx(0.0, -0.5 * p.units.rate_to_natural(p.gamma_r));
    for (Eigen::Index i = 0; i < n; ++i) {
        const double oc = p.units.rate_to_natural(p.control_at(static_cast<std::size_t>(i)));
        M(i, n + i) = oc;
        M(n + i, i) = oc;
    }
    M.bottomRightCorner(n, n) = k.H_nh;
    return M;
}

double solve_beta(const CollectiveKernel& k, const CMat& M, const CVec& J, const LGMode& target,
                  double gamma_r_nat, ThreeLevelResult* out) {
    const auto n = k.size();
    Eigen::PartialPivLU<CMat> lu(M);
    const double rc = lu.rcond();
    if (!(rc > 1.0 / KernelSolver::kMaxCondition))
        throw NumericalFailure("three_level_purcell", "antenna matrix ill-conditioned", 1.0 / rc);
    CVec rhs = CVec::Zero(2 * n);
    rhs.head(n) = J;
    const CVec X = lu.solve(rhs);
    const double gamma_tot = 2.0 * rhs.dot(X).imag();
    const CVec w = mode_weights(k.positions, target, Direction::forward);
    const double pref = std::sqrt(3.0 * kPi * k.gamma_e / 2.0) / kWavenumber;
    const double g_target = std::norm(pref * (w.transpose() * X.tail(n))(0));
    const double beta = g_target / (gamma_tot + gamma_r_nat);
    if (out) {
        out->beta = beta;
        out->gamma_tot = gamma_tot;
        out->gamma_target = g_target;
        out->gamma_master_loss = gamma_r_nat;
    }
    return beta;
}

}  // namespace

DressedCouplings dressed_couplings(const ArrayGeometry& geom, const RydbergParams& params) {
    params.validate(geom.size());
    check_gate(params);
    const CVec V = master_potentials(geom, params);
    DressedCouplings d;
    d.J.J.resize(V.size());
    for (Eigen::Index i = 0; i < V.size(); ++i) d.J.J[i] = V[i] * params.omega_d[i] / params.delta_d;
    d.Jp = antenna_hops(geom, params);
    return d;
}

ThreeLevelResult three_level_purcell(const ArrayGeometry& geom, const RydbergParams& params,
                                     const LGMode& target, const Polarization& p) {
    const DressedCouplings d = dressed_couplings(geom, params);
    const CollectiveKernel k =
        build_kernel(geom, p, params.units.rate_to_natural(params.delta_c));
    const CMat M = three_level_matrix(k, d.Jp, params);
    ThreeLevelResult res;
    const double gr = params.units.rate_to_natural(params.gamma_r);
    solve_beta(k, M, d.J.J, target, gr, &res);

    double oc_min = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < geom.size(); ++i)
        oc_min = std::min(oc_min, std::abs(params.units.rate_to_natural(params.control_at(i))));
    const double scale = std::max({d.J.J.cwiseAbs().maxCoeff(),
                                   d.Jp.size() ? d.Jp.cwiseAbs().maxCoeff() : 0.0, gr});
    res.eit_violated = oc_min < 10.0 * scale;
    return res;
}

DressingOptimum optimize_dressing_profile(const ArrayGeometry& geom, const RydbergParams& params,
                                          const LGMode& target, const DressingOptions& options) {
    if (!(params.gate > 0.0) || params.delta_d == 0.0)
        throw std::invalid_argument("optimize_dressing_profile: infeasible bound (gate <= 0 or Delta_d = 0)");
    params.validate(geom.size());
    check_gate(params);
    const auto n = static_cast<Eigen::Index>(geom.size());
    const CVec V = master_potentials(geom, params);
    const Eigen::VectorXd bound = params.gate * V.cwiseAbs();
    const double gr = params.units.rate_to_natural(params.gamma_r);
    const CollectiveKernel k = build_kernel(geom, Polarization::circular(),
                                            params.units.rate_to_natural(params.delta_c));
    const CVec w = mode_weights(k.positions, target, Direction::forward);
    const double pref = std::sqrt(3.0 * kPi * k.gamma_e / 2.0) / kWavenumber;

    RydbergParams cur = params;
    auto profile_from = [&](const CVec& J) {
        std::vector<cplx> od = cur.omega_d;
        for (Eigen::Index i = 0; i < n; ++i)
            if (V[i] != 0.0) od[i] = J[i] / V[i] * params.delta_d;
        return od;
    };
    auto exact_beta = [&](const std::vector<cplx>& od) {
        RydbergParams q = params;
        q.omega_d = od;
        return three_level_purcell(geom, q, target).beta;
    };

    DressingOptimum best;
    best.omega_d = params.omega_d;
    best.beta_initial = exact_beta(params.omega_d);
    best.beta = best.beta_initial;

    CVec J(n);
    for (Eigen::Index i = 0; i < n; ++i) J[i] = V[i] * params.omega_d[i] / params.delta_d;
    const double bmax = bound.maxCoeff();

    for (int outer = 0; outer < options.outer_iterations; ++outer) {
        // Quadratic model with J' frozen at the current profile.
        const CMat M = three_level_matrix(k, antenna_hops(geom, cur), cur);
        Eigen::PartialPivLU<CMat> lu(M);
        CMat E = CMat::Zero(2 * n, n);
        E.topRows(n).setIdentity();
        const CMat inv = lu.solve(E);
        const CMat K = inv.topRows(n);
        const CMat B = -kI * (K - K.adjoint());
        const Eigen::RowVectorXcd r = pref * (w.transpose() * inv.bottomRows(n));

        auto objective = [&](const CVec& x, cplx& num, double& den) {
            num = (r * x)(0);
            den = x.dot(B * x).real() + gr;
            return std::norm(num) / den;
        };
        cplx num;
        double den;
        double f = objective(J, num, den);
        double step = 1.0;
        for (int it = 0; it < options.max_iterations && step > 1e-8; ++it) {
            const CVec grad = r.adjoint() * num / den - std::norm(num) / (den * den) * (B * J);
            const double scale = std::abs(num) > 0.0 ? den / std::abs(num) * bmax : bmax;
            CVec trial = J + step * scale * grad;
            for (Eigen::Index i = 0; i < n; ++i) {
                const double m = std::abs(trial[i]);
                if (m > bound[i]) trial[i] *= bound[i] / m;
            }
            cplx tn;
            double td;
            const double ft = objective(trial, tn, td);
            if (ft > f) {
                J = trial;
                f = ft;
                num = tn;
                den = td;
                step *= 1.2;
            } else {
                step *= 0.5;
            }
        }
        cur.omega_d = profile_from(J);
        const double b = exact_beta(cur.omega_d);
        if (b > best.beta) {
            best.beta = b;
            best.omega_d = cur.omega_d;
        }
    }
    best.saturated.resize(best.omega_d.size());
    for (std::size_t i = 0; i < best.omega_d.size(); ++i)
        best.saturated[i] = std::abs(best.omega_d[i] / params.delta_d) >= params.gate * (1.0 - 1e-3);
    return best;
}

std::vector<MasterDistanceRow> scan_master_distance(const ArrayGeometry& geom,
                                                   const RydbergParams& params,
                                                   const LGMode& target,
                                                   const std::vector<double>& z_m_um,
                                                   bool optimize_profile, std::size_t jobs) {
    std::vector<MasterDistanceRow> rows(z_m_um.size());
    parallel_for(rows.size(), jobs, [&](std::size_t i) {
        RydbergParams q = params;
        q.master_pos = master_on_axis(geom, z_m_um[i], params.units);
        q.omega_d = lg_dressing_profile(geom, target, params.delta_d, params.gate);
        rows[i].z_m_um = z_m_um[i];
        rows[i].beta_lg = three_level_purcell(geom, q, target).beta;
        rows[i].beta_opt = optimize_profile ? optimize_dressing_profile(geom, q, target).beta
                                            : std::nan("");
    });
    return rows;
}

}  // namespace qantenna
