#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace qantenna {

using Vec3 = Eigen::Vector3d;

struct ArrayGeometry {
    std::vector<Vec3> positions;
    int n_transverse = 0;
    int n_layers = 0;
    double spacing_transverse = 0.0;
    double spacing_longitudinal = 0.0;
    std::string label;

    std::size_t size() const { return positions.size(); }
    double transverse_extent() const { return n_transverse * spacing_transverse; }
    double z_min() const;
    double z_max() const;
    void translate(const Vec3& shift);
};

struct DisorderSpec {
    double sigma_th = 0.0;
    double defect_fraction = 0.0;
    std::uint64_t seed = 1;
    int n_samples = 100;

    void validate() const;
};

// Layer spacing that puts the front and back layers of an n_layers stack in
// phase for forward emission: lambda0 (2 N_z - 1) / (2 N_z).
double auto_layer_spacing(int n_layers);

// Regular N_perp x N_perp x N_z lattice centred on the origin. spacing_z
// defaults to auto_layer_spacing(n_layers).
ArrayGeometry build_regular_array(int n_perp, int n_layers, double spacing_perp,
                                  std::optional<double> spacing_z = std::nullopt);

// Removes round(fraction * N) atoms, ties rounded half-up. Survivors keep
// their relative order.
ArrayGeometry apply_defects(const ArrayGeometry& geom, double fraction, std::uint64_t seed);

ArrayGeometry apply_disorder(const ArrayGeometry& geom, double sigma_th, std::uint64_t seed);

struct RandomBox {
    double transverse_side = 0.0;
    double length = 0.0;
    std::size_t n_atoms = 0;
};

// Box used by sample_random_ensemble. By default the section is S = pi w0^2
// (square of side sqrt(S)); transverse_side overrides the side while keeping
// the density.
RandomBox random_box(double density, double waist,
                     std::optional<double> transverse_side = std::nullopt);

ArrayGeometry sample_random_ensemble(double density, double waist, std::uint64_t seed,
                                     std::optional<double> transverse_side = std::nullopt);

// Optical depth sigma * n_a * L_z of the random box along z.
double random_box_optical_depth(double density, double waist);

void write_geometry(std::ostream& out, const ArrayGeometry& geom);
ArrayGeometry read_geometry(std::istream& in);

}  // namespace qantenna
