#include "qantenna/cli/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace qantenna::cli {

using nlohmann::json;

namespace {

const std::map<std::string, RunKind>& kind_names() {
    static const std::map<std::string, RunKind> names = {
        {"field-map", RunKind::field_map}, {"purcell", RunKind::purcell},
        {"optimize", RunKind::optimize},   {"sweep", RunKind::sweep},
        {"two-node", RunKind::two_node},   {"qst", RunKind::qst},
        {"rydberg", RunKind::rydberg}};
    return names;
}

std::string join(const std::vector<std::string>& v) {
    std::string s;
    for (const auto& x : v) s += (s.empty() ? "" : ", ") + x;
    return s;
}

// Object reader that tracks consumed keys so leftovers can be reported.
class Obj {
public:
    Obj(const json& j, std::string ptr) : j_(j), ptr_(std::move(ptr)) {
        if (!j.is_object()) throw ConfigError(where(), "expected an object");
    }

    bool has(const std::string& k) const { return j_.contains(k); }
    std::string at(const std::string& k) const { return ptr_ + "/" + k; }

    const json* get(const std::string& k) {
        used_.insert(k);
        auto it = j_.find(k);
        return it == j_.end() ? nullptr : &*it;
    }

    void number(const std::string& k, double& out) {
        if (const json* v = get(k)) out = as_number(*v, at(k));
    }
    void number(const std::string& k, std::optional<double>& out) {
        if (const json* v = get(k)) out = as_number(*v, at(k));
    }
    void integer(const std::string& k, int& out) {
        if (const json* v = get(k)) out = as_int(*v, at(k));
    }
    void size(const std::string& k, std::size_t& out) {
        if (const json* v = get(k)) {
            const int n = as_int(*v, at(k));
            if (n < 0) throw ConfigError(at(k), "must be >= 0");
            out = static_cast<std::size_t>(n);
        }
    }
    void boolean(const std::string& k, bool& out) {
        if (const json* v = get(k)) {
            if (!v->is_boolean()) throw ConfigError(at(k), "expected true or false");
            out = v->get<bool>();
        }
    }
    void string(const std::string& k, std::string& out) {
        if (const json* v = get(k)) out = as_string(*v, at(k));
    }
    void numbers(const std::string& k, std::vector<double>& out) {
        if (const json* v = get(k)) out = as_numbers(*v, at(k));
    }

    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!used_.count(it.key())) throw ConfigError(at(it.key()), "unknown key");
    }

    std::string where() const { return ptr_.empty() ? "/" : ptr_; }

    static double as_number(const json& v, const std::string& ptr) {
        if (!v.is_number()) throw ConfigError(ptr, "expected a number");
        const double x = v.get<double>();
        if (!std::isfinite(x)) throw ConfigError(ptr, "must be finite");
        return x;
    }
    static int as_int(const json& v, const std::string& ptr) {
        if (!v.is_number_integer()) throw ConfigError(ptr, "expected an integer");
        return v.get<int>();
    }
    static std::string as_string(const json& v, const std::string& ptr) {
        if (!v.is_string()) throw ConfigError(ptr, "expected a string");
        return v.get<std::string>();
    }
    static std::vector<double> as_numbers(const json& v, const std::string& ptr) {
        if (!v.is_array()) throw ConfigError(ptr, "expected an array of numbers");
        std::vector<double> out;
        for (std::size_t i = 0; i < v.size(); ++i)
            out.push_back(as_number(v[i], ptr + "/" + std::to_string(i)));
        return out;
    }

private:
    const json& j_;
    std::string ptr_;
    std::set<std::string> used_;
};

std::string line_column(const std::string& text, std::size_t byte) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < std::min(byte, text.size()); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    // nlohmann reports the position after the offending character
    if (col > 1) --col;
    return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

GeometryBlock read_geometry(const json& j) {
    Obj o(j, "/geometry");
    GeometryBlock g;
    o.integer("n_perp", g.n_perp);
    o.integer("n_layers", g.n_layers);
    o.number("spacing_perp", g.spacing_perp);
    if (const json* v = o.get("spacing_z")) {
        if (v->is_string()) {
            if (v->get<std::string>() != "auto") throw ConfigError(o.at("spacing_z"), "expected a number or \"auto\"");
        } else {
            g.spacing_z = Obj::as_number(*v, o.at("spacing_z"));
        }
    }
    o.number("separation", g.separation);
    o.finish();
    return g;
}

CouplingsBlock read_couplings(const json& j) {
    Obj o(j, "/couplings");
    CouplingsBlock c;
    o.number("detuning", c.detuning);
    o.number("jbar", c.jbar);
    o.string("polarization", c.polarization);
    if (c.polarization != "circular" && c.polarization != "linear-x")
        throw ConfigError(o.at("polarization"), "expected \"circular\" or \"linear-x\"");
    std::string path = to_string(c.path);
    o.string("path", path);
    try {
        c.path = solve_path_from_string(path);
    } catch (const std::invalid_argument&) {
        throw ConfigError(o.at("path"), "expected \"exact\" or \"large-detuning\"");
    }
    o.finish();
    return c;
}

BasisBlock read_basis(const json& j) {
    Obj o(j, "/basis");
    BasisBlock b;
    if (const json* v = o.get("waist")) {
        if (v->is_string()) {
            if (v->get<std::string>() != "optimize") throw ConfigError(o.at("waist"), "expected a number or \"optimize\"");
        } else {
            b.waist = Obj::as_number(*v, o.at("waist"));
        }
    }
    o.number("focus_z", b.focus_z);
    o.integer("p_max", b.p_max);
    o.integer("l_max", b.l_max);
    o.boolean("check_convergence", b.check_convergence);
    o.finish();
    return b;
}

OptimizeBlock read_optimize(const json& j) {
    Obj o(j, "/optimize");
    OptimizeBlock b;
    o.number("delta_min", b.delta_min);
    o.number("delta_max", b.delta_max);
    o.number("w0_min", b.w0_min);
    o.number("w0_max_factor", b.w0_max_factor);
    o.integer("grid_w0", b.grid_w0);
    o.integer("grid_delta", b.grid_delta);
    o.number("min_step", b.min_step);
    o.boolean("require_paraxial_consistency", b.require_paraxial_consistency);
    o.finish();
    return b;
}

SweepBlock read_sweep(const json& j) {
    Obj o(j, "/sweep");
    SweepBlock s;
    o.string("target", s.target);
    if (const json* axes = o.get("axes")) {
        if (!axes->is_array()) throw ConfigError(o.at("axes"), "expected an array of axes");
        for (std::size_t i = 0; i < axes->size(); ++i) {
            Obj a((*axes)[i], "/sweep/axes/" + std::to_string(i));
            SweepAxis ax;
            a.string("parameter", ax.parameter);
            a.numbers("values", ax.values);
            a.finish();
            if (ax.parameter.empty()) throw ConfigError(a.at("parameter"), "missing parameter name");
            s.axes.push_back(std::move(ax));
        }
    }
    o.finish();
    return s;
}

DisorderBlock read_disorder(const json& j) {
    Obj o(j, "/disorder");
    DisorderBlock d;
    o.number("sigma_th", d.sigma_th);
    o.number("defect_fraction", d.defect_fraction);
    o.size("samples", d.samples);
    o.finish();
    return d;
}

FieldMapBlock read_field_map(const json& j) {
    Obj o(j, "/field_map");
    FieldMapBlock f;
    o.string("plane", f.plane);
    if (f.plane != "xz" && f.plane != "xy") throw ConfigError(o.at("plane"), "expected \"xz\" or \"xy\"");
    o.number("u_min", f.u_min);
    o.number("u_max", f.u_max);
    o.number("v_min", f.v_min);
    o.number("v_max", f.v_max);
    o.integer("nu", f.nu);
    o.integer("nv", f.nv);
    o.number("offset", f.offset);
    o.finish();
    return f;
}

PulseBlock read_pulses(const json& j) {
    Obj o(j, "/pulses");
    PulseBlock p;
    o.number("gamma_T", p.gamma_T);
    o.finish();
    return p;
}

EnsembleBlock read_ensemble(const json& j) {
    Obj o(j, "/ensemble");
    EnsembleBlock e;
    o.number("density", e.density);
    o.integer("seeds", e.seeds);
    o.number("side_over_waist", e.side_over_waist);
    o.finish();
    return e;
}

RydbergBlock read_rydberg(const json& j) {
    Obj o(j, "/rydberg");
    RydbergBlock r;
    o.number("wavelength_um", r.wavelength_um);
    o.number("gamma_e_MHz", r.gamma_e_MHz);
    o.number("C3", r.C3);
    o.number("C3p", r.C3p);
    o.number("delta_d", r.delta_d);
    o.number("omega_c", r.omega_c);
    o.number("delta_c", r.delta_c);
    o.number("gamma_r", r.gamma_r);
    o.number("gate", r.gate);
    o.numbers("z_m_um", r.z_m_um);
    o.boolean("optimize_profile", r.optimize_profile);
    o.finish();
    return r;
}

// Parameters each sweep target or kind accepts as an axis.
const std::set<std::string>& allowed_axes(const ExperimentConfig& c) {
    static const std::set<std::string> purcell = {"n_perp", "n_layers", "spacing_perp", "spacing_z", "detuning",
                                                  "waist", "jbar", "sigma_th", "defect_fraction"};
    static const std::set<std::string> optimize = {"n_perp", "n_layers", "spacing_z", "detuning", "sigma_th",
                                                   "defect_fraction"};
    static const std::set<std::string> ensemble = {"optical_depth"};
    static const std::set<std::string> distance = {"z0", "n_perp", "spacing_perp"};
    static const std::set<std::string> link = {"n_perp", "spacing_perp", "spacing_z", "separation", "detuning"};
    static const std::set<std::string> rydberg = {"n_perp"};
    static const std::set<std::string> none;
    switch (c.kind) {
    case RunKind::two_node:
    case RunKind::qst: return link;
    case RunKind::rydberg: return rydberg;
    case RunKind::sweep:
        if (c.sweep->target == "purcell") return purcell;
        if (c.sweep->target == "optimize") return optimize;
        if (c.sweep->target == "ensemble") return ensemble;
        if (c.sweep->target == "beta-distance") return distance;
        return none;
    default: return none;
    }
}

std::string num(double v) {
    std::ostringstream s;
    s << v;
    return s.str();
}

bool is_integer_parameter(const std::string& p) { return p == "n_perp" || p == "n_layers"; }

}  // namespace

std::string to_string(RunKind kind) {
    for (const auto& [name, k] : kind_names())
        if (k == kind) return name;
    return "?";
}

RunKind run_kind_from_string(const std::string& s) {
    auto it = kind_names().find(s);
    if (it == kind_names().end()) throw std::invalid_argument("unknown kind '" + s + "'");
    return it->second;
}

Polarization CouplingsBlock::make_polarization() const {
    return polarization == "linear-x" ? Polarization::linear_x() : Polarization::circular();
}

ExperimentConfig parse_config(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text, nullptr, true, true);
    } catch (const json::parse_error& e) {
        std::string msg = e.what();
        // strip the library prefix "[json.exception.parse_error.101] parse error at line .., column ..: "
        const auto colon = msg.find(": ", msg.find("column"));
        if (colon != std::string::npos) msg = msg.substr(colon + 2);
        throw ConfigError(line_column(text, e.byte), msg);
    }
    Obj o(doc, "");
    ExperimentConfig c;
    c.source = doc;
    const json* kind = o.get("kind");
    if (!kind) throw ConfigError("/kind", "missing (one of field-map, purcell, optimize, sweep, two-node, qst, rydberg)");
    try {
        c.kind = run_kind_from_string(Obj::as_string(*kind, "/kind"));
    } catch (const std::invalid_argument& e) {
        throw ConfigError("/kind", e.what());
    }
    o.string("name", c.name);
    if (const json* v = o.get("seed")) {
        if (!v->is_number_unsigned()) throw ConfigError("/seed", "expected a non-negative integer");
        c.seed = v->get<std::uint64_t>();
    }
    o.string("output", c.output);
    if (const json* v = o.get("geometry")) c.geometry = read_geometry(*v);
    if (const json* v = o.get("couplings")) c.couplings = read_couplings(*v);
    if (const json* v = o.get("basis")) c.basis = read_basis(*v);
    if (const json* v = o.get("optimize")) c.optimize = read_optimize(*v);
    if (const json* v = o.get("sweep")) c.sweep = read_sweep(*v);
    if (const json* v = o.get("disorder")) c.disorder = read_disorder(*v);
    if (const json* v = o.get("field_map")) c.field_map = read_field_map(*v);
    if (const json* v = o.get("pulses")) c.pulses = read_pulses(*v);
    if (const json* v = o.get("ensemble")) c.ensemble = read_ensemble(*v);
    if (const json* v = o.get("rydberg")) c.rydberg = read_rydberg(*v);
    o.finish();

    // blocks required by the kind
    switch (c.kind) {
    case RunKind::field_map:
        if (!c.field_map) throw ConfigError("/field_map", "required for kind field-map");
        break;
    case RunKind::sweep:
        if (!c.sweep) throw ConfigError("/sweep", "required for kind sweep");
        if (c.sweep->axes.empty()) throw ConfigError("/sweep/axes", "at least one axis is required");
        break;
    case RunKind::two_node:
    case RunKind::qst:
        if (!c.geometry.separation) throw ConfigError("/geometry/separation", "required for kind " + to_string(c.kind));
        break;
    case RunKind::rydberg:
        if (!c.rydberg) throw ConfigError("/rydberg", "required for kind rydberg");
        if (c.rydberg->z_m_um.empty()) throw ConfigError("/rydberg/z_m_um", "at least one master distance is required");
        break;
    default: break;
    }
    if (c.sweep) {
        if (c.kind != RunKind::sweep && c.kind != RunKind::two_node && c.kind != RunKind::qst &&
            c.kind != RunKind::rydberg)
            throw ConfigError("/sweep", "sweep axes are not supported for kind " + to_string(c.kind));
        static const std::set<std::string> targets = {"purcell", "optimize", "ensemble", "beta-distance"};
        if (c.kind == RunKind::sweep && !targets.count(c.sweep->target))
            throw ConfigError("/sweep/target", "expected one of purcell, optimize, ensemble, beta-distance");
        const auto& allowed = allowed_axes(c);
        std::set<std::string> seen;
        for (std::size_t i = 0; i < c.sweep->axes.size(); ++i) {
            const auto& ax = c.sweep->axes[i];
            const std::string ptr = "/sweep/axes/" + std::to_string(i);
            if (!allowed.count(ax.parameter))
                throw ConfigError(ptr + "/parameter", "'" + ax.parameter + "' cannot be swept here (allowed: " +
                                                          join({allowed.begin(), allowed.end()}) + ")");
            if (!seen.insert(ax.parameter).second) throw ConfigError(ptr + "/parameter", "duplicate axis");
            if (ax.values.empty()) throw ConfigError(ptr + "/values", "must not be empty");
            if (is_integer_parameter(ax.parameter))
                for (std::size_t k = 0; k < ax.values.size(); ++k)
                    if (ax.values[k] != std::round(ax.values[k]))
                        throw ConfigError(ptr + "/values/" + std::to_string(k), "expected an integer");
        }
        if (c.kind == RunKind::sweep && c.sweep->target == "beta-distance" && !seen.count("z0"))
            throw ConfigError("/sweep/axes", "beta-distance needs a z0 axis");
        if (c.kind == RunKind::sweep && c.sweep->target == "ensemble" && !seen.count("optical_depth"))
            throw ConfigError("/sweep/axes", "ensemble needs an optical_depth axis");
    }
    return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError(path.string(), "cannot open config file");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

namespace {

void check_positive(ValidationReport& r, const std::string& ptr, double v) {
    if (!(v > 0.0)) r.errors.push_back(ptr + ": must be > 0");
}

std::vector<double> axis_values(const ExperimentConfig& c, const std::string& p, double base) {
    if (c.sweep)
        for (const auto& ax : c.sweep->axes)
            if (ax.parameter == p) return ax.values;
    return {base};
}

}  // namespace

ValidationReport validate(const ExperimentConfig& c) {
    ValidationReport r;
    const auto& g = c.geometry;
    for (double n : axis_values(c, "n_perp", g.n_perp))
        if (n < 1) r.errors.push_back("/geometry/n_perp: must be >= 1");
    for (double n : axis_values(c, "n_layers", g.n_layers))
        if (n < 1) r.errors.push_back("/geometry/n_layers: must be >= 1");
    for (double d : axis_values(c, "spacing_perp", g.spacing_perp)) {
        check_positive(r, "/geometry/spacing_perp", d);
        if (d >= 1.0)
            r.warnings.push_back("/geometry/spacing_perp: " + num(d) +
                                 " >= lambda0, the array is not sub-wavelength");
    }
    if (g.spacing_z) check_positive(r, "/geometry/spacing_z", *g.spacing_z);
    if (c.sweep)
        for (const auto& ax : c.sweep->axes)
            if (ax.parameter == "spacing_z" || ax.parameter == "separation" || ax.parameter == "z0" ||
                ax.parameter == "optical_depth")
                for (double v : ax.values) check_positive(r, "/sweep/axes/" + ax.parameter, v);
    if (g.separation) check_positive(r, "/geometry/separation", *g.separation);

    const auto& cp = c.couplings;
    for (double delta : axis_values(c, "detuning", cp.detuning)) {
        if (cp.path == SolvePath::large_detuning && delta == 0.0)
            r.errors.push_back("/couplings/detuning: the large-detuning path needs a nonzero detuning");
        for (double jbar : axis_values(c, "jbar", cp.jbar)) {
            check_positive(r, "/couplings/jbar", jbar);
            if (jbar > kJbarGate * std::abs(delta))
                r.warnings.push_back("/couplings/jbar: jbar = " + num(jbar) + " exceeds " +
                                     num(kJbarGate) + " |detuning|; perturbative elimination is doubtful");
        }
    }
    if (c.basis.waist) check_positive(r, "/basis/waist", *c.basis.waist);
    if (c.basis.p_max < 0 || c.basis.l_max < 0) r.errors.push_back("/basis: p_max and l_max must be >= 0");
    if (c.optimize) {
        const auto& o = *c.optimize;
        if (!(o.delta_min > 0.0) || !(o.delta_max > o.delta_min))
            r.errors.push_back("/optimize: need 0 < delta_min < delta_max");
        check_positive(r, "/optimize/w0_min", o.w0_min);
        check_positive(r, "/optimize/min_step", o.min_step);
        if (o.grid_w0 < 2 || o.grid_delta < 2) r.errors.push_back("/optimize: grids need at least 2 points");
    }
    if (c.disorder) {
        const auto& d = *c.disorder;
        if (d.sigma_th < 0.0) r.errors.push_back("/disorder/sigma_th: must be >= 0");
        if (d.defect_fraction < 0.0 || d.defect_fraction >= 1.0)
            r.errors.push_back("/disorder/defect_fraction: must lie in [0, 1)");
        if (d.samples < 1) r.errors.push_back("/disorder/samples: must be >= 1");
    }
    if (c.sweep)
        for (const auto& ax : c.sweep->axes)
            if (ax.parameter == "sigma_th" || ax.parameter == "defect_fraction")
                for (double v : ax.values)
                    if (v < 0.0 || (ax.parameter == "defect_fraction" && v >= 1.0))
                        r.errors.push_back("/sweep/axes/" + ax.parameter + ": value " + num(v) + " out of range");
    if (c.field_map) {
        const auto& f = *c.field_map;
        if (f.nu < 1 || f.nv < 1) r.errors.push_back("/field_map: nu and nv must be >= 1");
        if (f.u_max < f.u_min || f.v_max < f.v_min) r.errors.push_back("/field_map: empty extent");
    }
    check_positive(r, "/pulses/gamma_T", c.pulses.gamma_T);
    if (c.ensemble) {
        check_positive(r, "/ensemble/density", c.ensemble->density);
        if (c.ensemble->seeds < 1) r.errors.push_back("/ensemble/seeds: must be >= 1");
    }
    if (c.rydberg) {
        const auto& y = *c.rydberg;
        check_positive(r, "/rydberg/wavelength_um", y.wavelength_um);
        check_positive(r, "/rydberg/gamma_e_MHz", y.gamma_e_MHz);
        check_positive(r, "/rydberg/omega_c", y.omega_c);
        check_positive(r, "/rydberg/gate", y.gate);
        if (y.delta_d == 0.0) r.errors.push_back("/rydberg/delta_d: must be nonzero");
        if (y.gamma_r < 0.0) r.errors.push_back("/rydberg/gamma_r: must be >= 0");
        for (double z : y.z_m_um) check_positive(r, "/rydberg/z_m_um", z);
        if (y.gate > 0.02)
            r.warnings.push_back("/rydberg/gate: |Omega_d/Delta_d| up to " + num(y.gate) +
                                 " exceeds the 0.02 dressing gate");
    }
    return r;
}

ValidationReport validate_text(const std::string& text) {
    try {
        return validate(parse_config(text));
    } catch (const ConfigError& e) {
        ValidationReport r;
        r.errors.push_back(e.what());
        return r;
    }
}

}  // namespace qantenna::cli
