#include "qantenna/cli/runner.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <mutex>
#include <ostream>

#include <CLI11.hpp>

#include "qantenna/cli/manifest.hpp"
#include "qantenna/cli/presets.hpp"
#include "qantenna/errors.hpp"
#include "qantenna/network.hpp"
#include "qantenna/parallel.hpp"
#include "qantenna/rydberg.hpp"

namespace qantenna::cli {

namespace fs = std::filesystem;

const std::vector<std::string>& purcell_columns() {
    static const std::vector<std::string> c = {
        "n_perp",     "n_layers",    "spacing_perp",   "spacing_z",     "n_atoms",
        "waist",      "detuning",    "jbar",           "sigma_th",      "defect_fraction",
        "samples",    "gamma_tot",   "epsilon",        "gamma_target",  "beta",
        "beta_std_error", "gamma_prime", "od_eff",     "od_lattice_bound", "w0_at_bound",
        "delta_at_bound", "path"};
    return c;
}

const std::vector<std::string>& field_map_columns() {
    static const std::vector<std::string> c = {"x",        "y",        "z",        "abs_phi",
                                               "re_phi_x", "im_phi_x", "re_phi_y", "im_phi_y",
                                               "re_phi_z", "im_phi_z"};
    return c;
}

const std::vector<std::string>& network_columns() {
    static const std::vector<std::string> c = {"z0",      "n_perp",  "spacing_perp", "spacing_z",
                                               "gamma",   "gamma_R", "gamma_L",      "phi_R",
                                               "phi_L",   "fidelity", "waist",       "gamma_prime",
                                               "reference"};
    return c;
}

const std::vector<std::string>& ensemble_columns() {
    static const std::vector<std::string> c = {"optical_depth", "density",        "waist",
                                               "mean_atoms",    "seeds",          "mean_beta",
                                               "beta_std_error", "reference"};
    return c;
}

const std::vector<std::string>& beta_distance_columns() {
    static const std::vector<std::string> c = {"z0",       "n_perp",      "spacing_perp", "beta",
                                               "w0_opt",   "envelope",    "w0_large_z0",  "at_bound"};
    return c;
}

const std::vector<std::string>& rydberg_columns() {
    static const std::vector<std::string> c = {"n_perp", "z_m_um", "beta_lg", "beta_opt", "beta_two_level"};
    return c;
}

std::size_t resolve_jobs(std::optional<std::size_t> requested) {
    if (requested && *requested > 0) return *requested;
    if (const char* env = std::getenv("ANTENNA_JOBS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
    }
    return 1;
}

namespace {

using Point = std::map<std::string, double>;

struct Context {
    explicit Context(const ExperimentConfig& c) : config(c) {}

    const ExperimentConfig& config;
    std::size_t jobs = 1;
    std::uint64_t seed = 1;
    fs::path dir;
    std::ostream* log = nullptr;
    std::vector<std::string> outputs;
    std::vector<std::string> warnings;
    std::mutex mutex;

    void note(const std::string& msg) {
        std::lock_guard<std::mutex> lock(mutex);
        if (log) *log << msg << '\n';
    }
    void warn(const std::string& msg) {
        std::lock_guard<std::mutex> lock(mutex);
        warnings.push_back(msg);
        if (log) *log << "warning: " << msg << '\n';
    }
};

void write_table(Context& ctx, const std::string& file, const CsvTable& table) {
    std::ofstream out(ctx.dir / file, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + (ctx.dir / file).string());
    table.write(out);
    ctx.outputs.push_back(file);
}

void write_geometry_file(Context& ctx, const std::string& file, const ArrayGeometry& g) {
    std::ofstream out(ctx.dir / file, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + (ctx.dir / file).string());
    write_geometry(out, g);
    ctx.outputs.push_back(file);
}

// Cartesian product of the sweep axes, first axis outermost.
std::vector<Point> expand(const ExperimentConfig& c) {
    std::vector<Point> pts(1);
    if (!c.sweep) return pts;
    for (const auto& ax : c.sweep->axes) {
        std::vector<Point> next;
        for (const auto& p : pts)
            for (double v : ax.values) {
                Point q = p;
                q[ax.parameter] = v;
                next.push_back(std::move(q));
            }
        pts = std::move(next);
    }
    return pts;
}

struct Params {
    int n_perp = 1;
    int n_layers = 1;
    double spacing_perp = 0.7;
    std::optional<double> spacing_z;
    double detuning = 100.0;
    double jbar = 1.0;
    std::optional<double> waist;
    double sigma_th = 0.0;
    double defect_fraction = 0.0;
    std::optional<double> separation;

    double layer_spacing() const { return spacing_z.value_or(auto_layer_spacing(n_layers)); }
    ArrayGeometry lattice() const { return build_regular_array(n_perp, n_layers, spacing_perp, spacing_z); }
};

Params resolve(const ExperimentConfig& c, const Point& pt) {
    Params p;
    p.n_perp = c.geometry.n_perp;
    p.n_layers = c.geometry.n_layers;
    p.spacing_perp = c.geometry.spacing_perp;
    p.spacing_z = c.geometry.spacing_z;
    p.separation = c.geometry.separation;
    p.detuning = c.couplings.detuning;
    p.jbar = c.couplings.jbar;
    p.waist = c.basis.waist;
    if (c.disorder) {
        p.sigma_th = c.disorder->sigma_th;
        p.defect_fraction = c.disorder->defect_fraction;
    }
    for (const auto& [k, v] : pt) {
        if (k == "n_perp") p.n_perp = static_cast<int>(v);
        else if (k == "n_layers") p.n_layers = static_cast<int>(v);
        else if (k == "spacing_perp") p.spacing_perp = v;
        else if (k == "spacing_z") p.spacing_z = v;
        else if (k == "separation") p.separation = v;
        else if (k == "detuning") p.detuning = v;
        else if (k == "jbar") p.jbar = v;
        else if (k == "waist") p.waist = v;
        else if (k == "sigma_th") p.sigma_th = v;
        else if (k == "defect_fraction") p.defect_fraction = v;
    }
    return p;
}

OptimizeOptions optimize_options(const ExperimentConfig& c, const Params& p, std::size_t jobs) {
    OptimizeOptions o;
    if (c.optimize) {
        o.delta_min = c.optimize->delta_min;
        o.delta_max = c.optimize->delta_max;
        o.w0_min = c.optimize->w0_min;
        o.w0_max_factor = c.optimize->w0_max_factor;
        o.grid_w0 = c.optimize->grid_w0;
        o.grid_delta = c.optimize->grid_delta;
        o.min_step = c.optimize->min_step;
        o.require_paraxial_consistency = c.optimize->require_paraxial_consistency;
    }
    o.detuning = p.detuning;
    o.spacing_z = p.spacing_z;
    o.path = c.couplings.path;
    o.polarization = c.couplings.make_polarization();
    o.report_mode_cut = std::max(c.basis.p_max, c.basis.l_max);
    o.jobs = jobs;
    return o;
}

double waist_lower(const ExperimentConfig& c) { return c.optimize ? c.optimize->w0_min : 0.3; }

double nan() { return std::numeric_limits<double>::quiet_NaN(); }

bool disordered(const Params& p) { return p.sigma_th > 0.0 || p.defect_fraction > 0.0; }

// Purcell row: clean-lattice rates, or disorder means with rates left NaN.
std::vector<std::string> purcell_row(const ExperimentConfig& c, Context& ctx, const Params& p,
                                     const ArrayGeometry& g, double waist, double spacing_perp,
                                     const EmissionReport& rep, bool w0_bound, bool delta_bound) {
    const LGMode target{0, 0, waist, c.basis.focus_z};
    RowBuilder row;
    row << p.n_perp << p.n_layers << spacing_perp << p.layer_spacing() << g.size() << waist << p.detuning
        << p.jbar << p.sigma_th << p.defect_fraction;
    if (disordered(p)) {
        DisorderSpec spec;
        spec.sigma_th = p.sigma_th;
        spec.defect_fraction = p.defect_fraction;
        spec.seed = ctx.seed;
        spec.n_samples = c.disorder ? c.disorder->samples : 100;
        DisorderStudyOptions o;
        o.detuning = p.detuning;
        o.path = c.couplings.path;
        o.polarization = c.couplings.make_polarization();
        const DisorderAverage avg = disorder_average(g, target, spec, o);
        const double b = std::min(avg.mean_beta, 1.0 - 1e-15);
        row << spec.n_samples << nan() << nan() << nan() << avg.mean_beta << avg.std_error << nan()
            << od_eff_from_beta(b);
    } else {
        row << std::size_t{1} << rep.gamma_tot << rep.epsilon << rep.gamma_target << rep.beta << 0.0
            << rep.gamma_prime << rep.od_eff;
        if (rep.paraxial_overcount)
            ctx.warn("n_perp=" + std::to_string(p.n_perp) + " waist=" + format_double(waist) +
                     ": truncated mode sum exceeds gamma_tot (paraxial overcount)");
    }
    row << lattice_od_bound(waist) << int(w0_bound) << int(delta_bound) << to_string(c.couplings.path);
    return row.take();
}

std::vector<std::string> purcell_point(const ExperimentConfig& c, Context& ctx, const Params& p) {
    const ArrayGeometry g = p.lattice();
    const CollectiveKernel k = build_kernel(g, c.couplings.make_polarization(), p.detuning);
    std::unique_ptr<KernelSolver> solver;
    if (c.couplings.path == SolvePath::exact) solver = std::make_unique<KernelSolver>(k);
    double waist = 0.0;
    bool at_bound = false;
    if (p.waist) {
        waist = *p.waist;
    } else {
        const double w_max = std::max(2.0 * g.transverse_extent(), 2.0 * p.spacing_perp);
        const WaistOptimum w = optimize_waist(k, waist_lower(c), w_max, c.basis.focus_z, c.couplings.path, 32,
                                              1e-3, solver.get(), std::max(c.basis.p_max, c.basis.l_max));
        waist = w.w0;
        at_bound = w.at_bound;
    }
    const LGMode target{0, 0, waist, c.basis.focus_z};
    const CouplingProfile J = prescribe_couplings(g, target, p.jbar);
    const CVec x = antenna_response(solver.get(), k, J.J, c.couplings.path);
    PurcellOptions po;
    po.path = c.couplings.path;
    po.check_basis_convergence = c.basis.check_convergence;
    const auto basis = ParaxialBasis::truncated(c.basis.p_max, c.basis.l_max, waist, c.basis.focus_z);
    const EmissionReport rep = purcell_from_response(k, J.J, x, basis, po);
    if (rep.basis_change && *rep.basis_change > 1e-2)
        ctx.warn("mode sum changes by " + format_double(*rep.basis_change) + " gamma_tot when the cut is doubled");
    return purcell_row(c, ctx, p, g, waist, p.spacing_perp, rep, at_bound, false);
}

std::vector<std::string> optimize_point(const ExperimentConfig& c, Context& ctx, const Params& p,
                                        std::size_t jobs) {
    const AntennaOptimum opt = optimize_antenna(p.n_perp, p.n_layers, optimize_options(c, p, jobs));
    Params at = p;
    at.spacing_perp = opt.delta_perp;
    if (opt.w0_at_bound || opt.delta_at_bound)
        ctx.warn("n_perp=" + std::to_string(p.n_perp) + " n_layers=" + std::to_string(p.n_layers) +
                 ": optimum on a search bound");
    return purcell_row(c, ctx, at, opt.geometry, opt.w0, opt.delta_perp, opt.report, opt.w0_at_bound,
                       opt.delta_at_bound);
}

// Rows in point order; points run concurrently when there are several.
template <class F>
std::vector<std::vector<std::string>> map_points(Context& ctx, const std::vector<Point>& pts, F&& f) {
    std::vector<std::vector<std::string>> rows(pts.size());
    const std::size_t outer = pts.size() > 1 ? ctx.jobs : 1;
    const std::size_t inner = pts.size() > 1 ? 1 : ctx.jobs;
    parallel_for(pts.size(), outer, [&](std::size_t i) {
        rows[i] = f(pts[i], inner);
        ctx.note("point " + std::to_string(i + 1) + "/" + std::to_string(pts.size()) + " done");
    });
    return rows;
}

void run_purcell_like(Context& ctx, bool optimize) {
    const auto& c = ctx.config;
    const auto pts = expand(c);
    CsvTable table(purcell_columns());
    for (auto& r : map_points(ctx, pts, [&](const Point& pt, std::size_t inner) {
             const Params p = resolve(c, pt);
             return optimize ? optimize_point(c, ctx, p, inner) : purcell_point(c, ctx, p);
         }))
        table.add_row(std::move(r));
    const char* file = optimize ? "optimize.csv" : "purcell.csv";
    write_table(ctx, file, table);
    if (pts.size() == 1 && !optimize) write_geometry_file(ctx, "geometry.csv", resolve(c, pts[0]).lattice());
}

void run_ensemble(Context& ctx) {
    const auto& c = ctx.config;
    const EnsembleBlock e = c.ensemble.value_or(EnsembleBlock{});
    CsvTable table(ensemble_columns());
    for (const auto& pt : expand(c)) {
        const double od = pt.at("optical_depth");
        EnsembleOptions o;
        o.density = e.density;
        o.n_seeds = e.seeds;
        o.seed = ctx.seed;
        o.side_over_waist = e.side_over_waist;
        o.detuning = c.couplings.detuning;
        o.path = c.couplings.path;
        o.jobs = ctx.jobs;
        const EnsembleAverage avg = random_ensemble_beta(od, o);
        RowBuilder row;
        row << od << e.density << avg.waist << avg.mean_atoms << e.seeds << avg.mean_beta << avg.std_error
            << od / (4.0 + od);
        table.add_row(row.take());
        ctx.note("optical depth " + format_double(od) + " done");
    }
    write_table(ctx, "ensemble.csv", table);
}

void run_beta_distance(Context& ctx) {
    const auto& c = ctx.config;
    std::vector<double> z0s;
    std::vector<int> nps{c.geometry.n_perp};
    std::vector<double> dps{c.geometry.spacing_perp};
    for (const auto& ax : c.sweep->axes) {
        if (ax.parameter == "z0") z0s = ax.values;
        if (ax.parameter == "n_perp") nps.assign(ax.values.begin(), ax.values.end());
        if (ax.parameter == "spacing_perp") dps = ax.values;
    }
    CsvTable table(beta_distance_columns());
    for (int n : nps)
        for (double d : dps) {
            BetaDistanceOptions o;
            o.n_layers = c.geometry.n_layers;
            o.spacing_z = c.geometry.spacing_z;
            o.detuning = c.couplings.detuning;
            o.path = c.couplings.path;
            o.w0_min = waist_lower(c);
            o.jobs = ctx.jobs;
            for (const auto& r : beta_distance_curve(n, d, z0s, o)) {
                RowBuilder row;
                row << r.z0 << n << d << r.beta << r.w0_opt << r.envelope << r.w0_large_z0 << int(r.at_bound);
                table.add_row(row.take());
            }
            ctx.note("n_perp " + std::to_string(n) + " done");
        }
    write_table(ctx, "beta_distance.csv", table);
}

struct LinkPoint {
    LinkGeometry link;
    TwoNodeRates rates;
    double waist = 0.0;
};

LinkPoint solve_link(const ExperimentConfig& c, const Params& p) {
    LinkPoint lp;
    lp.link = make_link(p.n_perp, p.n_layers, p.spacing_perp, p.spacing_z, *p.separation);
    const LinkSolver solver(lp.link.node1, lp.link.node2, c.couplings.make_polarization(), p.detuning,
                            c.couplings.path);
    if (p.waist) {
        lp.waist = *p.waist;
        const auto [a, b] = link_couplings(lp.link, LGMode{0, 0, lp.waist, 0.0}, p.jbar);
        lp.rates = solver.rates(a.J, b.J);
    } else {
        const double L = lp.link.node1.transverse_extent();
        const double w_max = std::max({2.0 * L, 3.0 * large_distance_waist(0.5 * *p.separation), 1.0});
        lp.waist = optimize_link_waist(solver, lp.link, waist_lower(c), w_max).w0;
        const auto [a, b] = link_couplings(lp.link, LGMode{0, 0, lp.waist, 0.0}, p.jbar);
        lp.rates = solver.rates(a.J, b.J);
    }
    return lp;
}

void run_link(Context& ctx, bool qst) {
    const auto& c = ctx.config;
    const auto pts = expand(c);
    std::vector<LinkPoint> solved(pts.size());
    CsvTable table(network_columns());
    for (auto& r : map_points(ctx, pts, [&](const Point& pt, std::size_t) {
             const Params p = resolve(c, pt);
             const LinkPoint lp = solve_link(c, p);
             const TwoNodeRates& r = lp.rates;
             const QstResult q = qst_fidelity(r, PulsePair::state_transfer(r.gamma(), c.pulses.gamma_T));
             RowBuilder row;
             row << 0.5 * *p.separation << p.n_perp << p.spacing_perp << p.layer_spacing() << r.gamma()
                 << r.gamma_R << r.gamma_L << r.phi_R << r.phi_L << q.fidelity << lp.waist << r.gamma_prime
                 << q.reference;
             return row.take();
         }))
        table.add_row(std::move(r));
    write_table(ctx, "network.csv", table);
    if (qst && pts.size() == 1) {
        const Params p = resolve(c, pts[0]);
        const LinkPoint lp = solve_link(c, p);
        const auto traj = amplitude_ode(lp.rates, PulsePair::state_transfer(lp.rates.gamma(), c.pulses.gamma_T));
        for (const auto& w : traj.warnings) ctx.warn(w);
        CsvTable t({"t", "abs_c1_sq", "abs_c2_sq"});
        const std::size_t stride = std::max<std::size_t>(1, traj.t.size() / 2000);
        for (std::size_t i = 0; i < traj.t.size(); i += stride) {
            RowBuilder row;
            row << traj.t[i] << std::norm(traj.c1[i]) << std::norm(traj.c2[i]);
            t.add_row(row.take());
        }
        write_table(ctx, "qst_trajectory.csv", t);
    }
}

void run_field_map(Context& ctx) {
    const auto& c = ctx.config;
    const Params p = resolve(c, {});
    const auto& f = *c.field_map;
    ArrayGeometry all;
    CouplingProfile J;
    double waist = 0.0;
    if (p.separation) {
        const LinkPoint lp = solve_link(c, p);
        waist = lp.waist;
        const auto [a, b] = link_couplings(lp.link, LGMode{0, 0, waist, 0.0}, p.jbar);
        all = lp.link.node1;
        all.positions.insert(all.positions.end(), lp.link.node2.positions.begin(), lp.link.node2.positions.end());
        J.J = CVec::Zero(static_cast<Eigen::Index>(all.size()));
        J.J.head(a.J.size()) = a.J;   // node 1 emits, node 2 absorbs
    } else {
        all = p.lattice();
        const CollectiveKernel k = build_kernel(all, c.couplings.make_polarization(), p.detuning);
        waist = p.waist ? *p.waist
                        : optimize_waist(k, waist_lower(c), std::max(2.0 * all.transverse_extent(), 1.0),
                                         c.basis.focus_z, c.couplings.path, 32, 1e-3, nullptr,
                                         std::max(c.basis.p_max, c.basis.l_max))
                              .w0;
        J = prescribe_couplings(all, LGMode{0, 0, waist, c.basis.focus_z}, p.jbar);
    }
    const CollectiveKernel k = build_kernel(all, c.couplings.make_polarization(), p.detuning);

    std::vector<Vec3> grid;
    std::vector<bool> masked;
    for (int j = 0; j < f.nv; ++j)
        for (int i = 0; i < f.nu; ++i) {
            const double u = f.nu > 1 ? f.u_min + (f.u_max - f.u_min) * i / (f.nu - 1) : f.u_min;
            const double v = f.nv > 1 ? f.v_min + (f.v_max - f.v_min) * j / (f.nv - 1) : f.v_min;
            const Vec3 r = f.plane == "xz" ? Vec3(u, f.offset, v) : Vec3(u, v, f.offset);
            bool close = false;
            for (const auto& a : all.positions) close |= (r - a).norm() < kFieldMinDistance;
            grid.push_back(r);
            masked.push_back(close);
        }
    std::vector<Vec3> valid;
    for (std::size_t i = 0; i < grid.size(); ++i)
        if (!masked[i]) valid.push_back(grid[i]);
    const std::size_t n_masked = grid.size() - valid.size();
    if (n_masked)
        ctx.warn(std::to_string(n_masked) + " grid points within " + format_double(kFieldMinDistance) +
                 " of an atom written as NaN");
    const FieldMap fm = field_map(k, J, valid, c.couplings.path);
    CsvTable table(field_map_columns());
    std::size_t vi = 0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        RowBuilder row;
        row << grid[i].x() << grid[i].y() << grid[i].z();
        if (masked[i]) {
            for (int q = 0; q < 7; ++q) row << nan();
        } else {
            const auto& a = fm.amplitude[vi++];
            row << a.norm();
            for (int q = 0; q < 3; ++q) row << a[q].real() << a[q].imag();
        }
        table.add_row(row.take());
    }
    write_table(ctx, "field_map.csv", table);
    write_geometry_file(ctx, "geometry.csv", all);
    ctx.note("field map waist " + format_double(waist));
}

void run_rydberg(Context& ctx) {
    const auto& c = ctx.config;
    const RydbergBlock& y = *c.rydberg;
    CsvTable table(rydberg_columns());
    for (const auto& pt : expand(c)) {
        const Params p = resolve(c, pt);
        const ArrayGeometry g = p.lattice();
        const CollectiveKernel k = build_kernel(g, Polarization::circular(), 100.0);
        double waist = 0.0, beta2 = 0.0;
        const WaistOptimum w = optimize_waist(k, waist_lower(c), std::max(2.0 * g.transverse_extent(), 1.0), 0.0,
                                              SolvePath::large_detuning, 32, 1e-3, nullptr,
                                              std::max(c.basis.p_max, c.basis.l_max));
        if (p.waist) {
            waist = *p.waist;
            const LGMode t{0, 0, waist, 0.0};
            const CVec J = prescribe_couplings(g, t, 1.0).J;
            beta2 = target_beta(k, J, antenna_response(nullptr, k, J, SolvePath::large_detuning), t,
                                SolvePath::large_detuning);
        } else {
            waist = w.w0;
            beta2 = w.beta;
        }
        RydbergParams rp;
        rp.C3 = y.C3;
        rp.C3p = y.C3p;
        rp.delta_d = y.delta_d;
        rp.omega_c = {y.omega_c};
        rp.delta_c = y.delta_c;
        rp.gamma_r = y.gamma_r;
        rp.gate = y.gate;
        rp.units = UnitSystem{y.wavelength_um, y.gamma_e_MHz};
        rp.omega_d.assign(g.size(), cplx(0.0, 0.0));
        const LGMode target{0, 0, waist, 0.0};
        const auto rows = scan_master_distance(g, rp, target, y.z_m_um, y.optimize_profile, ctx.jobs);
        for (const auto& r : rows) {
            RowBuilder row;
            row << p.n_perp << r.z_m_um << r.beta_lg << r.beta_opt << beta2;
            table.add_row(row.take());
        }
        ctx.note("n_perp " + std::to_string(p.n_perp) + " done");
    }
    write_table(ctx, "rydberg.csv", table);
}

}  // namespace

RunResult run(const ExperimentConfig& config, const RunOptions& options) {
    const ValidationReport report = validate(config);
    if (!report.ok()) {
        const std::string& first = report.errors.front();
        const auto colon = first.find(": ");
        throw ConfigError(first.substr(0, colon), colon == std::string::npos ? first : first.substr(colon + 2));
    }
    const auto start = std::chrono::steady_clock::now();
    Context ctx(config);
    ctx.jobs = resolve_jobs(options.jobs);
    ctx.seed = options.seed.value_or(config.seed);
    ctx.dir = options.out_dir.value_or(fs::path(config.output));
    ctx.log = options.log;
    for (const auto& w : report.warnings) ctx.warn(w);
    fs::create_directories(ctx.dir);

    switch (config.kind) {
    case RunKind::purcell: run_purcell_like(ctx, false); break;
    case RunKind::optimize: run_purcell_like(ctx, true); break;
    case RunKind::sweep:
        if (config.sweep->target == "purcell") run_purcell_like(ctx, false);
        else if (config.sweep->target == "optimize") run_purcell_like(ctx, true);
        else if (config.sweep->target == "ensemble") run_ensemble(ctx);
        else run_beta_distance(ctx);
        break;
    case RunKind::two_node: run_link(ctx, false); break;
    case RunKind::qst: run_link(ctx, true); break;
    case RunKind::field_map: run_field_map(ctx); break;
    case RunKind::rydberg: run_rydberg(ctx); break;
    }

    RunManifest m;
    m.name = config.name;
    m.kind = to_string(config.kind);
    m.version = version();
    m.seed = ctx.seed;
    m.config = config.source;
    m.warnings = ctx.warnings;
    m.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    RunResult res;
    res.out_dir = ctx.dir;
    res.outputs = ctx.outputs;
    res.warnings = ctx.warnings;
    res.manifest = write_manifest(ctx.dir, m, ctx.outputs);
    return res;
}

namespace {

std::string read_source(const std::string& arg) {
    const std::string prefix = "preset:";
    if (arg.rfind(prefix, 0) == 0) return find_preset(arg.substr(prefix.size())).config;
    std::ifstream in(arg, std::ios::binary);
    if (!in) throw ConfigError(arg, "cannot open config file");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

int main_entry(int argc, char** argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Atom-array quantum antenna simulator", "antenna"};
    app.require_subcommand(1);
    app.set_version_flag("--version", version());

    std::string config_arg;
    std::optional<std::size_t> jobs;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
    bool quiet = false;
    auto* run_cmd = app.add_subcommand("run", "Run a config file (or preset:NAME)");
    run_cmd->add_option("config", config_arg, "Config file or preset:NAME")->required();
    run_cmd->add_option("--jobs,-j", jobs, "Worker threads (default ANTENNA_JOBS or 1)");
    run_cmd->add_option("--seed", seed, "Override the config seed");
    run_cmd->add_option("--out", out_dir, "Output directory (default: config output)");
    run_cmd->add_flag("--quiet,-q", quiet, "No progress output");

    std::string preset_name;
    auto* presets_cmd = app.add_subcommand("presets", "List presets, or print one config");
    presets_cmd->add_option("name", preset_name, "Preset to print");

    std::string validate_arg;
    auto* validate_cmd = app.add_subcommand("validate", "Check a config and report warnings");
    validate_cmd->add_option("config", validate_arg, "Config file or preset:NAME")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitValidation;
    }

    try {
        if (*presets_cmd) {
            if (preset_name.empty()) {
                for (const auto& p : presets()) out << p.name << "\t" << p.description << '\n';
            } else {
                out << find_preset(preset_name).config;
            }
            return kExitOk;
        }
        if (*validate_cmd) {
            const ValidationReport r = validate_text(read_source(validate_arg));
            for (const auto& e : r.errors) out << "error: " << e << '\n';
            for (const auto& w : r.warnings) out << "warning: " << w << '\n';
            if (r.ok()) out << "ok (" << r.warnings.size() << " warnings)\n";
            return r.ok() ? kExitOk : kExitValidation;
        }
        const ExperimentConfig cfg = parse_config(read_source(config_arg));
        RunOptions o;
        o.jobs = jobs;
        o.seed = seed;
        if (out_dir) o.out_dir = fs::path(*out_dir);
        o.log = quiet ? nullptr : &err;
        const RunResult r = run(cfg, o);
        for (const auto& f : r.outputs) out << (r.out_dir / f).string() << '\n';
        out << r.manifest.string() << '\n';
        return kExitOk;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const NumericalFailure& e) {
        err << "numerical failure in " << e.operation() << ": " << e.what() << '\n';
        return kExitNumerical;
    } catch (const std::invalid_argument& e) {
        err << "invalid input: " << e.what() << '\n';
        return kExitValidation;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitFailure;
    }
}

}  // namespace qantenna::cli
