#include "qantenna/cli/presets.hpp"

#include <stdexcept>

namespace qantenna::cli {

namespace {

const char* kFig1b = R"({
  // Field radiated by node 1 of a matched link; node 2 only absorbs.
  "kind": "field-map",
  "name": "fig1b",
  "output": "out/fig1b",
  "geometry": {"n_perp": 17, "n_layers": 2, "spacing_perp": 0.7, "separation": 90},
  "couplings": {"detuning": 100, "jbar": 1, "path": "large-detuning"},
  "basis": {"waist": "optimize"},
  "field_map": {"plane": "xz", "u_min": -12, "u_max": 12, "nu": 97,
                "v_min": -50, "v_max": 50, "nv": 201}
}
)";

const char* kFig1e = R"({
  "kind": "qst",
  "name": "fig1e",
  "output": "out/fig1e",
  "geometry": {"n_perp": 8, "n_layers": 2, "spacing_perp": 0.8, "separation": 2},
  "couplings": {"detuning": 100, "jbar": 1, "path": "large-detuning"},
  "pulses": {"gamma_T": 20},
  "sweep": {"axes": [
    {"parameter": "n_perp", "values": [8, 10, 12, 16, 20]},
    {"parameter": "separation", "values": [2, 10, 25, 50, 100, 150, 200]}
  ]}
}
)";

std::string optimize_sweep(const std::string& name, const std::string& extra) {
    return R"({
  "kind": "sweep",
  "name": ")" + name + R"(",
  "output": "out/)" + name + R"(",
  "couplings": {"detuning": 100, "jbar": 1, "path": "large-detuning"},
  "optimize": {"delta_min": 0.3, "delta_max": 2, "grid_w0": 32, "grid_delta": 16},)" + extra + R"(
  "sweep": {"target": "optimize", "axes": [
    {"parameter": "n_perp", "values": [2, 3, 4, 5, 6, 8, 10]},
    {"parameter": "n_layers", "values": [2, 4, 8]}
  ]}
}
)";
}

const char* kFig2aRandom = R"({
  // Random-box ensembles at fixed density; the box side is 4 w0.
  "kind": "sweep",
  "name": "fig2a-random",
  "output": "out/fig2a-random",
  "seed": 7,
  "couplings": {"detuning": 100, "path": "large-detuning"},
  "ensemble": {"density": 2, "seeds": 20, "side_over_waist": 4},
  "sweep": {"target": "ensemble", "axes": [
    {"parameter": "optical_depth", "values": [5, 10, 20, 40, 80, 160]}
  ]}
}
)";

const char* kFig2 = R"({
  // Optimized antennas under thermal position noise.
  "kind": "sweep",
  "name": "fig2",
  "output": "out/fig2",
  "seed": 11,
  "couplings": {"detuning": 100, "jbar": 1, "path": "large-detuning"},
  "disorder": {"samples": 100},
  "sweep": {"target": "optimize", "axes": [
    {"parameter": "n_perp", "values": [4, 6, 8, 10]},
    {"parameter": "sigma_th", "values": [0.01, 0.02]}
  ]}
}
)";

const char* kFig2d = R"({
  "kind": "sweep",
  "name": "fig2d",
  "output": "out/fig2d",
  "seed": 13,
  "geometry": {"n_perp": 10},
  "couplings": {"detuning": 100, "jbar": 1, "path": "large-detuning"},
  "disorder": {"samples": 100},
  "sweep": {"target": "optimize", "axes": [
    {"parameter": "n_layers", "values": [2, 4, 8]},
    {"parameter": "defect_fraction", "values": [0, 0.05, 0.1, 0.2, 0.3]}
  ]}
}
)";

const char* kFig2e = R"({
  "kind": "sweep",
  "name": "fig2e",
  "output": "out/fig2e",
  "seed": 17,
  "geometry": {"n_perp": 10},
  "couplings": {"detuning": 100, "jbar": 1, "path": "large-detuning"},
  "disorder": {"samples": 100},
  "sweep": {"target": "optimize", "axes": [
    {"parameter": "n_layers", "values": [2, 4, 8]},
    {"parameter": "sigma_th", "values": [0, 0.01, 0.02, 0.04, 0.06]}
  ]}
}
)";

const char* kFig2f = R"({
  // Exact solve, so beta depends on the detuning through H_nh.
  "kind": "sweep",
  "name": "fig2f",
  "output": "out/fig2f",
  "geometry": {"n_perp": 8, "n_layers": 2},
  "couplings": {"jbar": 1, "path": "exact"},
  "sweep": {"target": "optimize", "axes": [
    {"parameter": "detuning", "values": [-100, -30, -10, -3, -1, 1, 3, 10, 30, 100]}
  ]}
}
)";

const char* kFig4a = R"({
  "kind": "sweep",
  "name": "fig4a",
  "output": "out/fig4a",
  "geometry": {"n_perp": 6, "n_layers": 2, "spacing_perp": 0.75},
  "couplings": {"detuning": 100, "path": "large-detuning"},
  "sweep": {"target": "beta-distance", "axes": [
    {"parameter": "n_perp", "values": [6, 10, 14, 17]},
    {"parameter": "z0", "values": [1, 2, 5, 10, 20, 40, 60, 80, 100]}
  ]}
}
)";

const char* kFig4b = R"({
  "kind": "qst",
  "name": "fig4b",
  "output": "out/fig4b",
  "geometry": {"n_perp": 10, "n_layers": 2, "spacing_perp": 0.8, "spacing_z": 0.75, "separation": 20},
  "couplings": {"detuning": 100, "jbar": 1, "path": "large-detuning"},
  "sweep": {"axes": [
    {"parameter": "spacing_perp", "values": [0.5, 0.6, 0.7, 0.8, 0.9]},
    {"parameter": "separation", "values": [20, 20.25, 20.5, 20.75, 21]}
  ]}
}
)";

const char* kFig4c = R"({
  "kind": "qst",
  "name": "fig4c",
  "output": "out/fig4c",
  "geometry": {"n_perp": 10, "n_layers": 2, "spacing_perp": 0.8, "separation": 20},
  "couplings": {"detuning": 100, "jbar": 1, "path": "large-detuning"},
  "sweep": {"axes": [
    {"parameter": "spacing_z", "values": [0.25, 0.5, 0.75, 1.0, 1.25]},
    {"parameter": "separation", "values": [20, 20.25, 20.5, 20.75, 21]}
  ]}
}
)";

std::string rydberg(const std::string& name, bool optimize, const std::string& z_m, const std::string& sweep) {
    return R"({
  "kind": "rydberg",
  "name": ")" + name + R"(",
  "output": "out/)" + name + R"(",
  "geometry": {"n_perp": 10, "n_layers": 2, "spacing_perp": 0.7, "spacing_z": 1.25},
  "couplings": {"path": "large-detuning"},
  "rydberg": {"wavelength_um": 0.78, "gamma_e_MHz": 6.07, "C3": 49.3, "C3p": 41.5,
              "delta_d": 200, "omega_c": 2.5, "gamma_r": 0.0036, "gate": 0.02,
              "z_m_um": )" + z_m + R"(, "optimize_profile": )" + (optimize ? "true" : "false") + "}" + sweep + R"(
}
)";
}

std::vector<Preset> build() {
    const std::string z_scan = "[1, 2, 3, 4, 5, 6, 8, 10, 12, 15]";
    std::vector<Preset> p;
    p.push_back({"fig1b", "field of a 17x17x2 link antenna, xz plane", kFig1b});
    p.push_back({"fig1e", "QST fidelity vs link distance and array size", kFig1e});
    p.push_back({"fig2a", "optimized beta vs N_perp and N_z", optimize_sweep("fig2a", "")});
    p.push_back({"fig2a-random", "random-box ensembles vs optical depth", kFig2aRandom});
    p.push_back({"fig2b", "optimal waist vs N_perp and N_z", optimize_sweep("fig2b", "")});
    p.push_back({"fig2c", "optimal spacing vs N_perp and N_z", optimize_sweep("fig2c", "")});
    p.push_back({"fig2", "optimized antennas with thermal disorder", kFig2});
    p.push_back({"fig2d", "beta vs defect fraction", kFig2d});
    p.push_back({"fig2e", "beta vs thermal position spread", kFig2e});
    p.push_back({"fig2f", "beta vs detuning, exact solve", kFig2f});
    p.push_back({"fig4a", "beta vs link half-distance", kFig4a});
    p.push_back({"fig4b", "QST fidelity vs transverse spacing and distance", kFig4b});
    p.push_back({"fig4c", "QST fidelity vs layer spacing and distance", kFig4c});
    p.push_back({"fig5", "Rydberg-dressed antenna vs master distance, LG profile",
                 rydberg("fig5", false, z_scan, "")});
    p.push_back({"fig5b", "Rydberg-dressed antenna vs master distance, optimized profile",
                 rydberg("fig5b", true, z_scan, "")});
    p.push_back({"fig5c", "Rydberg-dressed antenna vs array size at z_m = 3 um",
                 rydberg("fig5c", true, "[3]",
                         R"(,
  "sweep": {"axes": [{"parameter": "n_perp", "values": [4, 6, 8, 10]}]})")});
    return p;
}

}  // namespace

const std::vector<Preset>& presets() {
    static const std::vector<Preset> all = build();
    return all;
}

const Preset& find_preset(const std::string& name) {
    for (const auto& p : presets())
        if (p.name == name) return p;
    std::string known;
    for (const auto& p : presets()) known += (known.empty() ? "" : ", ") + p.name;
    throw std::invalid_argument("unknown preset \"" + name + "\" (known: " + known + ")");
}

}  // namespace qantenna::cli
