#include "qantenna/emission.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <sstream>
#include <stdexcept>

#include "qantenna/errors.hpp"
#include "qantenna/ode.hpp"
#include "qantenna/optimize.hpp"
#include "qantenna/parallel.hpp"

namespace qantenna {

std::string to_string(SolvePath path) {
    return path == SolvePath::exact ? "exact" : "large-detuning";
}

SolvePath solve_path_from_string(const std::string& s) {
    if (s == "exact") return SolvePath::exact;
    if (s == "large-detuning") return SolvePath::large_detuning;
    throw std::invalid_argument("unknown solve path '" + s + "' (exact | large-detuning)");
}

CouplingProfile prescribe_couplings(const ArrayGeometry& geom, const LGMode& target, double jbar) {
    target.validate();
    if (!(jbar >= 0.0)) throw std::invalid_argument("prescribe_couplings: jbar must be >= 0");
    const auto n = static_cast<Eigen::Index>(geom.size());
    CouplingProfile c;
    c.J.resize(n);
    for (Eigen::Index j = 0; j < n; ++j) {
        const Vec3& r = geom.positions[j];
        c.J[j] = std::exp(kI * (kWavenumber * r.z())) *
                 lg_eval(target, Eigen::Vector2d(r.x(), r.y()), r.z());
    }
    const double norm = c.J.norm();
    if (!(norm > 0.0) || !std::isfinite(norm))
        throw std::invalid_argument("prescribe_couplings: target mode vanishes on every atom");
    c.J *= jbar / norm;
    return c;
}

namespace {

void require_detuning(const CollectiveKernel& k, const char* op) {
    if (k.detuning == 0.0)
        throw std::invalid_argument(std::string(op) + ": large-detuning path needs Delta != 0");
}

double mode_prefactor(const CollectiveKernel& k) {
    return std::sqrt(3.0 * kPi * k.gamma_e / 2.0) / kWavenumber;
}

}  // namespace

CVec antenna_response(const KernelSolver* solver, const CollectiveKernel& kernel, const CVec& J,
                      SolvePath path) {
    if (J.size() != kernel.size()) throw std::invalid_argument("couplings/kernel size mismatch");
    if (path == SolvePath::large_detuning) {
        require_detuning(kernel, "antenna_response");
        return -J / kernel.detuning;
    }
    if (!solver) throw std::invalid_argument("antenna_response: exact path needs a solver");
    return solver->solve(J);
}

CVec antenna_response(const CollectiveKernel& kernel, const CVec& J, SolvePath path) {
    if (J.size() != kernel.size()) throw std::invalid_argument("couplings/kernel size mismatch");
    if (path == SolvePath::large_detuning) {
        require_detuning(kernel, "antenna_response");
        return -J / kernel.detuning;
    }
    return solve_kernel(kernel, J);
}

RateResult rate_from_response(const CollectiveKernel& kernel, const CVec& J, const CVec& x,
                              SolvePath path) {
    RateResult r;
    if (path == SolvePath::large_detuning) {
        require_detuning(kernel, "effective_rate");
        const CVec dj = kernel.decay_matrix().cast<cplx>() * J;
        r.gamma_tot = kernel.gamma_e * J.dot(dj).real() / (kernel.detuning * kernel.detuning);
        r.epsilon = J.squaredNorm() / kernel.detuning;
        return r;
    }
    const cplx c = J.dot(x);  // J^dagger H^-1 J
    r.gamma_tot = 2.0 * c.imag();
    r.epsilon = -c.real();
    return r;
}

RateResult effective_rate(const CollectiveKernel& kernel, const CouplingProfile& couplings,
                          SolvePath path) {
    const CVec x = antenna_response(kernel, couplings.J, path);
    return rate_from_response(kernel, couplings.J, x, path);
}

CVec mode_weights(const std::vector<Vec3>& positions, const LGMode& mode, Direction dir) {
    CVec w(static_cast<Eigen::Index>(positions.size()));
    for (std::size_t i = 0; i < positions.size(); ++i) {
        const Vec3& r = positions[i];
        const cplx u = lg_eval(mode, Eigen::Vector2d(r.x(), r.y()), r.z());
        const cplx prop = std::exp(kI * (kWavenumber * r.z()));
        w[static_cast<Eigen::Index>(i)] =
            dir == Direction::forward ? std::conj(u) * std::conj(prop) : u * prop;
    }
    return w;
}

std::vector<ModeRate> mode_rates_from_response(const CollectiveKernel& kernel, const CVec& J,
                                               const CVec& x, const ParaxialBasis& basis,
                                               Direction dir) {
    basis.validate();
    const double pref = mode_prefactor(kernel);
    std::vector<ModeRate> out;
    out.reserve(basis.modes.size());
    for (const auto& m : basis.modes) {
        const CVec w = mode_weights(kernel.positions, m, dir);
        ModeRate mr;
        mr.mode = m;
        mr.gamma = std::norm(pref * (w.transpose() * x)(0));
        mr.amplitude = kernel.detuning != 0.0
                           ? pref / kernel.detuning * (w.transpose() * J)(0)
                           : cplx(std::nan(""), std::nan(""));
        out.push_back(mr);
    }
    return out;
}

std::vector<ModeRate> mode_rates(const CollectiveKernel& kernel, const CouplingProfile& couplings,
                                 const ParaxialBasis& basis, Direction dir, SolvePath path) {
    const CVec x = antenna_response(kernel, couplings.J, path);
    return mode_rates_from_response(kernel, couplings.J, x, basis, dir);
}

double od_eff_from_beta(double beta) {
    return beta < 1.0 ? 4.0 * beta / (1.0 - beta) : std::numeric_limits<double>::infinity();
}

namespace {

double summed_rates(const std::vector<ModeRate>& v) {
    double s = 0.0;
    for (const auto& m : v) s += m.gamma;
    return s;
}

std::pair<int, int> basis_cut(const ParaxialBasis& b) {
    int pm = 0, lm = 0;
    for (const auto& m : b.modes) {
        pm = std::max(pm, m.p_index);
        lm = std::max(lm, std::abs(m.l_index));
    }
    return {pm, lm};
}

}  // namespace

EmissionReport purcell_from_response(const CollectiveKernel& kernel, const CVec& J, const CVec& x,
                                     const ParaxialBasis& basis, const PurcellOptions& options) {
    EmissionReport rep;
    rep.path = options.path;
    const RateResult rate = rate_from_response(kernel, J, x, options.path);
    rep.gamma_tot = rate.gamma_tot;
    rep.epsilon = rate.epsilon;
    if (!(rep.gamma_tot > 0.0))
        throw NumericalFailure("purcell", "non-positive total rate", rep.gamma_tot);
    rep.forward = mode_rates_from_response(kernel, J, x, basis, Direction::forward);
    rep.backward = mode_rates_from_response(kernel, J, x, basis, Direction::backward);
    rep.target_index = basis.target_index;
    rep.gamma_target = rep.forward[basis.target_index].gamma;
    rep.beta = rep.gamma_target / rep.gamma_tot;
    if (rep.beta >= 1.0 + 1e-9)
        throw NumericalFailure("purcell",
                               "beta >= 1: paraxial target rate exceeds the total rate "
                               "(waist too small for the paraxial description)",
                               rep.beta);
    rep.beta = std::min(rep.beta, 1.0);
    const double total_modes = summed_rates(rep.forward) + summed_rates(rep.backward);
    rep.gamma_prime = rep.gamma_tot - total_modes;
    rep.paraxial_overcount = total_modes > rep.gamma_tot * (1.0 + 1e-6);
    rep.od_eff = od_eff_from_beta(rep.beta);
    if (options.check_basis_convergence) {
        const auto [pm, lm] = basis_cut(basis);
        const LGMode& t = basis.target();
        const ParaxialBasis wide = ParaxialBasis::truncated(2 * pm, 2 * lm, t.waist, t.focus_z,
                                                            t.p_index, t.l_index);
        const double wide_sum =
            summed_rates(mode_rates_from_response(kernel, J, x, wide, Direction::forward)) +
            summed_rates(mode_rates_from_response(kernel, J, x, wide, Direction::backward));
        rep.basis_change = std::abs(wide_sum - total_modes) / rep.gamma_tot;
    }
    return rep;
}

EmissionReport purcell(const CollectiveKernel& kernel, const CouplingProfile& couplings,
                       const ParaxialBasis& basis, const PurcellOptions& options) {
    const CVec x = antenna_response(kernel, couplings.J, options.path);
    return purcell_from_response(kernel, couplings.J, x, basis, options);
}

double target_beta(const CollectiveKernel& kernel, const CVec& J, const CVec& x,
                   const LGMode& target, SolvePath path) {
    const RateResult rate = rate_from_response(kernel, J, x, path);
    const CVec w = mode_weights(kernel.positions, target, Direction::forward);
    const double pref = mode_prefactor(kernel);
    return std::norm(pref * (w.transpose() * x)(0)) / rate.gamma_tot;
}

std::vector<double> FieldMap::magnitude() const {
    std::vector<double> m(amplitude.size());
    for (std::size_t i = 0; i < amplitude.size(); ++i) m[i] = amplitude[i].norm();
    return m;
}

namespace {

Eigen::Vector3cd field_at(const CollectiveKernel& kernel, const CVec& x, const Vec3& r) {
    const double pref = -std::sqrt(kernel.gamma_e / (6.0 * kPi)) * kWavenumber;
    const Eigen::Vector3cd& p = kernel.polarization.vector();
    Eigen::Vector3cd phi = Eigen::Vector3cd::Zero();
    for (std::size_t i = 0; i < kernel.positions.size(); ++i)
        phi += green_tensor(r - kernel.positions[i]) * (p * x[static_cast<Eigen::Index>(i)]);
    return pref * phi;
}

}  // namespace

FieldSource field_source(const CollectiveKernel& kernel, const CVec& x) {
    return [&kernel, x](const Vec3& r) { return field_at(kernel, x, r); };
}

FieldMap field_map(const CollectiveKernel& kernel, const CouplingProfile& couplings,
                   const std::vector<Vec3>& grid, SolvePath path) {
    std::vector<std::size_t> bad;
    for (std::size_t g = 0; g < grid.size(); ++g)
        for (const auto& r : kernel.positions)
            if ((grid[g] - r).norm() < kFieldMinDistance) {
                bad.push_back(g);
                break;
            }
    if (!bad.empty()) {
        std::ostringstream msg;
        msg << "field_map: " << bad.size() << " grid point(s) closer than " << kFieldMinDistance
            << " to an atom:";
        for (std::size_t i = 0; i < std::min<std::size_t>(bad.size(), 8); ++i) {
            const Vec3& p = grid[bad[i]];
            msg << " #" << bad[i] << "(" << p.x() << "," << p.y() << "," << p.z() << ")";
        }
        if (bad.size() > 8) msg << " ...";
        throw std::invalid_argument(msg.str());
    }
    const CVec x = antenna_response(kernel, couplings.J, path);
    FieldMap fm;
    fm.grid = grid;
    fm.amplitude.resize(grid.size());
    for (std::size_t g = 0; g < grid.size(); ++g) fm.amplitude[g] = field_at(kernel, x, grid[g]);
    return fm;
}

FarFieldFlux far_field_flux(const CollectiveKernel& kernel, const CVec& x, double radius,
                            std::size_t n_points) {
    if (n_points == 0 || !(radius > 0.0)) throw std::invalid_argument("far_field_flux: bad sphere");
    const double golden = kPi * (3.0 - std::sqrt(5.0));
    const double weight = 4.0 * kPi * radius * radius / static_cast<double>(n_points);
    FarFieldFlux f;
    for (std::size_t i = 0; i < n_points; ++i) {
        const double z = 1.0 - (2.0 * i + 1.0) / static_cast<double>(n_points);
        const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
        const double az = golden * static_cast<double>(i);
        const Vec3 r = radius * Vec3(rho * std::cos(az), rho * std::sin(az), z);
        const double flux = weight * field_at(kernel, x, r).squaredNorm();
        f.total += flux;
        (z > 0.0 ? f.forward : f.backward) += flux;
    }
    return f;
}

double lattice_od_bound(double w0) {
    if (!(w0 > 0.0)) throw std::invalid_argument("lattice_od_bound: w0 must be > 0");
    return 8.0 + 32.0 * std::pow(w0, 4) / (kCrossSection * kCrossSection);
}

Trajectory wigner_weisskopf(const CollectiveKernel& kernel, const CouplingProfile& couplings,
                            double t_end, double dt, const WWOptions& options) {
    const Eigen::Index n = kernel.size();
    if (couplings.J.size() != n) throw std::invalid_argument("wigner_weisskopf: size mismatch");
    if (!(t_end >= 0.0) || !(dt > 0.0)) throw std::invalid_argument("wigner_weisskopf: bad times");
    const double rate_scale =
        std::max({std::abs(kernel.detuning), kernel.gamma_e, couplings.jbar()});
    if (dt > 0.01 / rate_scale * (1.0 + 1e-12))
        throw std::invalid_argument("wigner_weisskopf: dt must be <= 0.01/max(|Delta|, gamma_e, jbar)");

    // State vector (s, P_1..P_N).
    const CVec& J = couplings.J;
    const CMat& H = kernel.H_nh;
    auto rhs = [&](double t, const CVec& y) {
        const double f = couplings.at(t);
        CVec d(n + 1);
        const auto P = y.tail(n);
        d[0] = -kI * f * J.dot(P);
        d.tail(n) = -kI * f * J * y[0] - kI * (H * P);
        return d;
    };
    auto run = [&](double step, Trajectory* traj) {
        CVec y = CVec::Zero(n + 1);
        y[0] = 1.0;
        const std::size_t steps = step_count(0.0, t_end, step);
        const double h = t_end > 0.0 ? t_end / static_cast<double>(steps) : 0.0;
        double last_norm = 1.0;
        if (traj) {
            traj->t.push_back(0.0);
            traj->s.push_back(y[0]);
            traj->norm.push_back(1.0);
        }
        for (std::size_t k = 0; k < steps && h > 0.0; ++k) {
            rk4_step(rhs, k * h, y, h);
            const double nrm = y.squaredNorm();
            if (!std::isfinite(nrm) || nrm > last_norm * (1.0 + 1e-9) || nrm > 1.0 + 1e-9)
                throw NumericalFailure("wigner_weisskopf", "norm growth: step size unstable", nrm);
            last_norm = nrm;
            if (traj) {
                traj->t.push_back((k + 1) * h);
                traj->s.push_back(y[0]);
                traj->norm.push_back(nrm);
            }
        }
        return y;
    };
    Trajectory traj;
    const CVec y = run(dt, &traj);
    traj.P_final = y.tail(n);
    if (options.estimate_error) {
        const CVec yh = run(0.5 * dt, nullptr);
        traj.error_estimate = (yh - y).cwiseAbs().maxCoeff();
    }
    return traj;
}

// ---------------------------------------------------------------------------
// Optimization

WaistOptimum optimize_waist(const CollectiveKernel& kernel, double w0_min, double w0_max,
                            double focus_z, SolvePath path, int grid, double min_step,
                            const KernelSolver* solver, int consistency_cut) {
    if (!(w0_min > 0.0) || !(w0_max > w0_min))
        throw std::invalid_argument("optimize_waist: need 0 < w0_min < w0_max");
    std::unique_ptr<KernelSolver> own;
    if (path == SolvePath::exact && !solver) {
        own = std::make_unique<KernelSolver>(kernel);
        solver = own.get();
    }
    ArrayGeometry g;
    g.positions = kernel.positions;
    auto beta_at = [&](double w0) {
        const LGMode target{0, 0, w0, focus_z};
        const CVec J = prescribe_couplings(g, target, 1.0).J;
        const CVec x = antenna_response(solver, kernel, J, path);
        const double b = target_beta(kernel, J, x, target, path);
        constexpr double infeasible = -std::numeric_limits<double>::infinity();
        if (!(b < 1.0)) return infeasible;
        if (consistency_cut >= 0) {
            const auto basis = ParaxialBasis::truncated(consistency_cut, consistency_cut, w0, focus_z);
            const double total =
                summed_rates(mode_rates_from_response(kernel, J, x, basis, Direction::forward)) +
                summed_rates(mode_rates_from_response(kernel, J, x, basis, Direction::backward));
            if (total > rate_from_response(kernel, J, x, path).gamma_tot) return infeasible;
        }
        return b;
    };
    MemoizedObjective f([&](const std::vector<double>& v) { return beta_at(v[0]); }, min_step / 4.0);
    const auto ws = linspace(w0_min, w0_max, grid);
    double best = -1.0, best_w = ws.front();
    for (double w : ws) {
        const double b = f({w});
        if (b > best) {
            best = b;
            best_w = w;
        }
    }
    if (best < 0.0)
        throw NumericalFailure("optimize_waist", "no waist in range satisfies the paraxial description", w0_max);
    PatternSearchOptions po;
    po.initial_step = {grid > 1 ? ws[1] - ws[0] : 0.1 * w0_min};
    po.min_step = min_step;
    const auto res = pattern_search(f, {best_w}, {w0_min}, {w0_max}, po);
    return WaistOptimum{res.x[0], res.value, res.at_lower[0] || res.at_upper[0]};
}

namespace {

struct LatticeCase {
    ArrayGeometry geometry;
    CollectiveKernel kernel;
    std::unique_ptr<KernelSolver> solver;
};

class AntennaObjective {
public:
    AntennaObjective(int n_perp, int n_layers, const OptimizeOptions& o)
        : n_perp_(n_perp), n_layers_(n_layers), opt_(o) {}

    double w0_max(double delta) const { return opt_.w0_max_factor * n_perp_ * delta; }

    std::shared_ptr<LatticeCase> lattice(double delta) {
        const long long key = std::llround(delta / (opt_.min_step / 4.0));
        {
            std::lock_guard<std::mutex> lock(mutex_);
            auto it = cache_.find(key);
            if (it != cache_.end()) return it->second;
        }
        auto c = std::make_shared<LatticeCase>();
        c->geometry = build_regular_array(n_perp_, n_layers_, delta, opt_.spacing_z);
        c->kernel = build_kernel(c->geometry, opt_.polarization, opt_.detuning);
        if (opt_.path == SolvePath::exact) c->solver = std::make_unique<KernelSolver>(c->kernel);
        std::lock_guard<std::mutex> lock(mutex_);
        if (cache_.size() >= 32) cache_.erase(cache_.begin());
        cache_.emplace(key, c);
        return c;
    }

    double beta(double w0, double delta) {
        if (w0 > w0_max(delta) + 1e-12 || w0 < opt_.w0_min - 1e-12)
            return -std::numeric_limits<double>::infinity();
        auto c = lattice(delta);
        const LGMode target{0, 0, w0, 0.0};
        const CVec J = prescribe_couplings(c->geometry, target, 1.0).J;
        const CVec x = antenna_response(c->solver.get(), c->kernel, J, opt_.path);
        const double b = target_beta(c->kernel, J, x, target, opt_.path);
        constexpr double infeasible = -std::numeric_limits<double>::infinity();
        // beta >= 1 means the paraxial description has broken down at this waist
        if (!(b < 1.0)) return infeasible;
        if (opt_.require_paraxial_consistency) {
            const auto basis =
                ParaxialBasis::truncated(opt_.report_mode_cut, opt_.report_mode_cut, w0, 0.0);
            const double total =
                summed_rates(mode_rates_from_response(c->kernel, J, x, basis, Direction::forward)) +
                summed_rates(mode_rates_from_response(c->kernel, J, x, basis, Direction::backward));
            if (total > rate_from_response(c->kernel, J, x, opt_.path).gamma_tot) return infeasible;
        }
        return b;
    }

private:
    int n_perp_, n_layers_;
    OptimizeOptions opt_;
    std::mutex mutex_;
    std::map<long long, std::shared_ptr<LatticeCase>> cache_;
};

}  // namespace

AntennaOptimum optimize_antenna(int n_perp, int n_layers, const OptimizeOptions& o) {
    if (!(o.delta_min > 0.0) || !(o.delta_max > o.delta_min) || !(o.w0_min > 0.0))
        throw std::invalid_argument("optimize_antenna: invalid bounds");
    if (o.grid_w0 < 2 || o.grid_delta < 2) throw std::invalid_argument("optimize_antenna: grid too small");
    AntennaObjective obj(n_perp, n_layers, o);
    const double pitch = o.min_step / 4.0;
    MemoizedObjective f([&](const std::vector<double>& v) { return obj.beta(v[0], v[1]); }, pitch);

    // Coarse grid; rows share one factorization.
    const auto deltas = linspace(o.delta_min, o.delta_max, o.grid_delta);
    std::vector<std::vector<double>> rows(deltas.size());
    std::vector<std::vector<double>> row_w(deltas.size());
    parallel_for(deltas.size(), o.jobs, [&](std::size_t r) {
        const double d = f.snap({0.0, deltas[r]})[1];
        row_w[r] = linspace(o.w0_min, obj.w0_max(d), o.grid_w0);
        for (double& w : row_w[r]) w = f.snap({w, d})[0];
        row_w[r].back() = std::min(row_w[r].back(), obj.w0_max(d));
        rows[r].resize(row_w[r].size());
        for (std::size_t i = 0; i < row_w[r].size(); ++i) rows[r][i] = obj.beta(row_w[r][i], d);
    });
    double best = -1.0;
    std::vector<double> x0;
    for (std::size_t r = 0; r < deltas.size(); ++r)
        for (std::size_t i = 0; i < rows[r].size(); ++i)
            if (rows[r][i] > best) {
                best = rows[r][i];
                x0 = {row_w[r][i], deltas[r]};
            }

    if (x0.empty())
        throw NumericalFailure("optimize_antenna", "no grid point satisfies the paraxial description", best);
    const double step_w = (obj.w0_max(x0[1]) - o.w0_min) / (o.grid_w0 - 1);
    const double step_d = (o.delta_max - o.delta_min) / (o.grid_delta - 1);
    PatternSearchOptions po;
    po.initial_step = {step_w, step_d};
    po.min_step = o.min_step;
    const double w_upper = o.w0_max_factor * n_perp * o.delta_max;
    const auto res = pattern_search(f, x0, {o.w0_min, o.delta_min}, {w_upper, o.delta_max}, po);

    AntennaOptimum out;
    out.w0 = res.x[0];
    out.delta_perp = res.x[1];
    out.evaluations = res.evaluations + deltas.size() * o.grid_w0;
    out.w0_at_bound = res.at_lower[0] || obj.w0_max(out.delta_perp) - out.w0 < o.min_step;
    out.delta_at_bound = res.at_lower[1] || res.at_upper[1];
    auto c = obj.lattice(out.delta_perp);
    out.geometry = c->geometry;
    const LGMode target{0, 0, out.w0, 0.0};
    const CouplingProfile J = prescribe_couplings(c->geometry, target, 1.0);
    const CVec x = antenna_response(c->solver.get(), c->kernel, J.J, o.path);
    const ParaxialBasis basis =
        ParaxialBasis::truncated(o.report_mode_cut, o.report_mode_cut, out.w0, 0.0);
    PurcellOptions popt;
    popt.path = o.path;
    out.report = purcell_from_response(c->kernel, J.J, x, basis, popt);
    out.beta = out.report.beta;
    return out;
}

// ---------------------------------------------------------------------------
// Disorder and random ensembles

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream, std::uint64_t index) {
    // splitmix64 over a combined key
    std::uint64_t z = base * 0x9E3779B97F4A7C15ULL + stream * 0xD1B54A32D192ED03ULL + index + 1;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

namespace {

void mean_and_error(const std::vector<double>& v, double& mean, double& err) {
    const double n = static_cast<double>(v.size());
    mean = 0.0;
    for (double x : v) mean += x;
    mean /= n;
    double var = 0.0;
    for (double x : v) var += (x - mean) * (x - mean);
    err = v.size() > 1 ? std::sqrt(var / (n - 1.0) / n) : 0.0;
}

}  // namespace

DisorderAverage disorder_average(const ArrayGeometry& base, const LGMode& target,
                                 const DisorderSpec& spec, const DisorderStudyOptions& o) {
    spec.validate();
    DisorderAverage avg;
    avg.samples.resize(static_cast<std::size_t>(spec.n_samples));
    parallel_for(avg.samples.size(), o.jobs, [&](std::size_t i) {
        ArrayGeometry g = apply_defects(base, spec.defect_fraction, derive_seed(spec.seed, 0, i));
        g = apply_disorder(g, spec.sigma_th, derive_seed(spec.seed, 1, i));
        const CollectiveKernel k = build_kernel(g, o.polarization, o.detuning);
        const CVec J = prescribe_couplings(g, target, 1.0).J;
        const CVec x = antenna_response(k, J, o.path);
        avg.samples[i] = target_beta(k, J, x, target, o.path);
    });
    mean_and_error(avg.samples, avg.mean_beta, avg.std_error);
    return avg;
}

double waist_for_optical_depth(double od, double density) {
    if (!(od > 0.0) || !(density > 0.0))
        throw std::invalid_argument("waist_for_optical_depth: od and density must be > 0");
    // od = sigma n 2 z_R = sigma n 2 pi w0^2 / lambda0
    return std::sqrt(od * kWavelength / (kCrossSection * density * 2.0 * kPi));
}

EnsembleAverage random_ensemble_beta(double od, const EnsembleOptions& o) {
    if (o.n_seeds < 1) throw std::invalid_argument("random_ensemble_beta: n_seeds < 1");
    EnsembleAverage out;
    out.od = od;
    out.waist = waist_for_optical_depth(od, o.density);
    std::optional<double> side;
    if (o.side_over_waist) side = *o.side_over_waist * out.waist;
    const LGMode target{0, 0, out.waist, 0.0};
    std::vector<double> betas(static_cast<std::size_t>(o.n_seeds));
    std::vector<double> atoms(betas.size());
    parallel_for(betas.size(), o.jobs, [&](std::size_t s) {
        const ArrayGeometry g =
            sample_random_ensemble(o.density, out.waist, derive_seed(o.seed, 2, s), side);
        const CollectiveKernel k = build_kernel(g, Polarization::circular(), o.detuning);
        const CVec J = prescribe_couplings(g, target, 1.0).J;
        const CVec x = antenna_response(k, J, o.path);
        betas[s] = target_beta(k, J, x, target, o.path);
        atoms[s] = static_cast<double>(g.size());
    });
    mean_and_error(betas, out.mean_beta, out.std_error);
    for (double a : atoms) out.mean_atoms += a / atoms.size();
    return out;
}

}  // namespace qantenna
