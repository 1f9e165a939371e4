#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "qantenna/emission.hpp"

namespace qantenna::cli {

// Schema or syntax problem. location is "line L, column C" for syntax errors
// and a JSON pointer such as /geometry/n_perp for field errors.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string location, const std::string& what)
        : std::runtime_error(location + ": " + what), location_(std::move(location)) {}
    const std::string& location() const { return location_; }

private:
    std::string location_;
};

enum class RunKind { field_map, purcell, optimize, sweep, two_node, qst, rydberg };

std::string to_string(RunKind kind);
RunKind run_kind_from_string(const std::string& s);

struct GeometryBlock {
    int n_perp = 4;
    int n_layers = 2;
    double spacing_perp = 0.7;
    std::optional<double> spacing_z;    // auto when empty
    std::optional<double> separation;   // 2 z0 for links
};

struct CouplingsBlock {
    double detuning = 100.0;
    double jbar = 1.0;
    std::string polarization = "circular";   // circular | linear-x
    SolvePath path = SolvePath::exact;

    Polarization make_polarization() const;
};

struct BasisBlock {
    std::optional<double> waist;   // optimized when empty
    double focus_z = 0.0;
    int p_max = kDefaultModeCut;
    int l_max = kDefaultModeCut;
    bool check_convergence = false;
};

struct OptimizeBlock {
    double delta_min = 0.3;
    double delta_max = 2.0;
    double w0_min = 0.3;
    double w0_max_factor = 2.0;
    int grid_w0 = 32;
    int grid_delta = 16;
    double min_step = 1e-3;
    bool require_paraxial_consistency = true;
};

struct SweepAxis {
    std::string parameter;
    std::vector<double> values;
};

struct SweepBlock {
    std::string target = "purcell";   // purcell | optimize | ensemble | beta-distance
    std::vector<SweepAxis> axes;
};

struct DisorderBlock {
    double sigma_th = 0.0;
    double defect_fraction = 0.0;
    std::size_t samples = 100;
};

// Rectangular grid in a plane through the origin. plane "xz" spans (x, z)
// at y = offset; "xy" spans (x, y) at z = offset.
struct FieldMapBlock {
    std::string plane = "xz";
    double u_min = -5.0, u_max = 5.0;
    double v_min = -5.0, v_max = 5.0;
    int nu = 51, nv = 51;
    double offset = 0.0;
};

struct PulseBlock {
    double gamma_T = 20.0;
};

struct EnsembleBlock {
    double density = 2.0;
    int seeds = 20;
    std::optional<double> side_over_waist;
};

// Physical units: MHz (f = omega / 2pi), micrometres.
struct RydbergBlock {
    double wavelength_um = 0.78;
    double gamma_e_MHz = 6.07;
    double C3 = 49.3;
    double C3p = 41.5;
    double delta_d = 200.0;
    double omega_c = 2.5;
    double delta_c = 0.0;
    double gamma_r = 3.6e-3;
    double gate = 0.02;
    std::vector<double> z_m_um;
    bool optimize_profile = false;
};

struct ExperimentConfig {
    RunKind kind = RunKind::purcell;
    std::string name;
    std::uint64_t seed = 1;
    std::string output = "out";
    GeometryBlock geometry;
    CouplingsBlock couplings;
    BasisBlock basis;
    std::optional<OptimizeBlock> optimize;
    std::optional<SweepBlock> sweep;
    std::optional<DisorderBlock> disorder;
    std::optional<FieldMapBlock> field_map;
    PulseBlock pulses;
    std::optional<EnsembleBlock> ensemble;
    std::optional<RydbergBlock> rydberg;
    nlohmann::json source;   // parsed document, echoed into the manifest
};

// Parses JSON with // and /* */ comments. Unknown keys are errors.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

struct ValidationReport {
    std::vector<std::string> errors;
    std::vector<std::string> warnings;
    bool ok() const { return errors.empty(); }
};

inline constexpr double kJbarGate = 0.2;   // warn when jbar > gate * |Delta|

// Cross-block checks and physics warnings on a parsed config.
ValidationReport validate(const ExperimentConfig& config);

// Parses and validates; syntax/schema problems land in errors.
ValidationReport validate_text(const std::string& text);

}  // namespace qantenna::cli
