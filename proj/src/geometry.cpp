#include "qantenna/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>

#include "qantenna/csv.hpp"
#include "qantenna/units.hpp"

namespace qantenna {

namespace {

std::string fmt(double v) { return format_double(v); }

void check_finite(const ArrayGeometry& g) {
    for (const auto& r : g.positions)
        if (!r.allFinite()) throw std::invalid_argument("geometry: non-finite coordinate");
}

}  // namespace

double ArrayGeometry::z_min() const {
    if (positions.empty()) throw std::invalid_argument("geometry: empty");
    double z = positions.front().z();
    for (const auto& r : positions) z = std::min(z, r.z());
    return z;
}

double ArrayGeometry::z_max() const {
    if (positions.empty()) throw std::invalid_argument("geometry: empty");
    double z = positions.front().z();
    for (const auto& r : positions) z = std::max(z, r.z());
    return z;
}

void ArrayGeometry::translate(const Vec3& shift) {
    for (auto& r : positions) r += shift;
}

void DisorderSpec::validate() const {
    if (!(sigma_th >= 0.0)) throw std::invalid_argument("disorder: sigma_th must be >= 0");
    if (!(defect_fraction >= 0.0 && defect_fraction <= 1.0))
        throw std::invalid_argument("disorder: defect_fraction must lie in [0, 1]");
    if (n_samples < 1) throw std::invalid_argument("disorder: n_samples must be >= 1");
}

double auto_layer_spacing(int n_layers) {
    if (n_layers < 1) throw std::invalid_argument("auto_layer_spacing: n_layers must be >= 1");
    return kWavelength * (2.0 * n_layers - 1.0) / (2.0 * n_layers);
}

ArrayGeometry build_regular_array(int n_perp, int n_layers, double spacing_perp,
                                  std::optional<double> spacing_z) {
    if (n_perp < 1 || n_layers < 1)
        throw std::invalid_argument("build_regular_array: n_perp and n_layers must be >= 1");
    const double dz = spacing_z.value_or(auto_layer_spacing(n_layers));
    if (!(spacing_perp > 0.0) || !(dz > 0.0) || !std::isfinite(spacing_perp) || !std::isfinite(dz))
        throw std::invalid_argument("build_regular_array: spacings must be positive and finite");

    ArrayGeometry g;
    g.n_transverse = n_perp;
    g.n_layers = n_layers;
    g.spacing_transverse = spacing_perp;
    g.spacing_longitudinal = dz;
    g.positions.reserve(static_cast<std::size_t>(n_perp) * n_perp * n_layers);
    const double cx = 0.5 * (n_perp - 1);
    const double cz = 0.5 * (n_layers - 1);
    for (int k = 0; k < n_layers; ++k)
        for (int i = 0; i < n_perp; ++i)
            for (int j = 0; j < n_perp; ++j)
                g.positions.emplace_back((i - cx) * spacing_perp, (j - cx) * spacing_perp,
                                         (k - cz) * dz);
    g.label = "regular " + std::to_string(n_perp) + "x" + std::to_string(n_perp) + "x" +
              std::to_string(n_layers) + " d_perp=" + fmt(spacing_perp) + " d_z=" + fmt(dz);
    return g;
}

ArrayGeometry apply_defects(const ArrayGeometry& geom, double fraction, std::uint64_t seed) {
    if (!(fraction >= 0.0 && fraction <= 1.0))
        throw std::invalid_argument("apply_defects: fraction must lie in [0, 1]");
    const std::size_t n = geom.size();
    const auto n_remove = static_cast<std::size_t>(std::floor(fraction * n + 0.5));

    ArrayGeometry out = geom;
    out.label += "; defects fraction=" + fmt(fraction) + " seed=" + std::to_string(seed);
    if (n_remove == 0) return out;

    // Partial Fisher-Yates: the first n_remove slots hold the removed indices.
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::mt19937_64 rng(seed);
    for (std::size_t i = 0; i < n_remove; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, n - 1);
        std::swap(idx[i], idx[pick(rng)]);
    }
    std::vector<bool> removed(n, false);
    for (std::size_t i = 0; i < n_remove; ++i) removed[idx[i]] = true;

    out.positions.clear();
    for (std::size_t i = 0; i < n; ++i)
        if (!removed[i]) out.positions.push_back(geom.positions[i]);
    return out;
}

ArrayGeometry apply_disorder(const ArrayGeometry& geom, double sigma_th, std::uint64_t seed) {
    if (!(sigma_th >= 0.0)) throw std::invalid_argument("apply_disorder: sigma_th must be >= 0");
    ArrayGeometry out = geom;
    out.label += "; disorder sigma_th=" + fmt(sigma_th) + " seed=" + std::to_string(seed);
    if (sigma_th == 0.0) return out;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, sigma_th);
    for (auto& r : out.positions) {
        const Vec3 d(gauss(rng), gauss(rng), gauss(rng));
        r += d;
    }
    check_finite(out);
    return out;
}

RandomBox random_box(double density, double waist, std::optional<double> transverse_side) {
    if (!(density > 0.0)) throw std::invalid_argument("random ensemble: density must be > 0");
    if (!(waist > 0.0)) throw std::invalid_argument("random ensemble: waist must be > 0");
    const double section = kPi * waist * waist;
    const double z_r = kPi * waist * waist / kWavelength;
    RandomBox box;
    box.transverse_side = transverse_side.value_or(std::sqrt(section));
    if (!(box.transverse_side > 0.0))
        throw std::invalid_argument("random ensemble: transverse side must be > 0");
    box.length = 2.0 * z_r;
    const double area = box.transverse_side * box.transverse_side;
    box.n_atoms = static_cast<std::size_t>(std::floor(density * area * box.length + 0.5));
    return box;
}

double random_box_optical_depth(double density, double waist) {
    return kCrossSection * density * random_box(density, waist).length;
}

ArrayGeometry sample_random_ensemble(double density, double waist, std::uint64_t seed,
                                     std::optional<double> transverse_side) {
    const RandomBox box = random_box(density, waist, transverse_side);
    if (box.n_atoms == 0) throw std::invalid_argument("random ensemble: box holds zero atoms");

    ArrayGeometry g;
    g.n_transverse = 0;
    g.n_layers = 0;
    g.label = "random density=" + fmt(density) + " waist=" + fmt(waist) +
              " side=" + fmt(box.transverse_side) + " seed=" + std::to_string(seed);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> ux(-0.5 * box.transverse_side, 0.5 * box.transverse_side);
    std::uniform_real_distribution<double> uz(-0.5 * box.length, 0.5 * box.length);
    g.positions.reserve(box.n_atoms);
    for (std::size_t i = 0; i < box.n_atoms; ++i) {
        const double x = ux(rng);
        const double y = ux(rng);
        g.positions.emplace_back(x, y, uz(rng));
    }
    return g;
}

void write_geometry(std::ostream& out, const ArrayGeometry& geom) {
    out << "# label: " << geom.label << "\n";
    out << "# n_transverse: " << geom.n_transverse << "\n";
    out << "# n_layers: " << geom.n_layers << "\n";
    out << "# spacing_transverse: " << fmt(geom.spacing_transverse) << "\n";
    out << "# spacing_longitudinal: " << fmt(geom.spacing_longitudinal) << "\n";
    out << "x,y,z\n";
    for (const auto& r : geom.positions)
        out << fmt(r.x()) << "," << fmt(r.y()) << "," << fmt(r.z()) << "\n";
}

ArrayGeometry read_geometry(std::istream& in) {
    ArrayGeometry g;
    std::string line;
    bool header_seen = false;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            const auto colon = line.find(':');
            if (colon == std::string::npos) continue;
            const std::string key = line.substr(2, colon - 2);
            std::string value = line.substr(colon + 1);
            if (!value.empty() && value[0] == ' ') value.erase(0, 1);
            if (key == "label") g.label = value;
            else if (key == "n_transverse") g.n_transverse = std::stoi(value);
            else if (key == "n_layers") g.n_layers = std::stoi(value);
            else if (key == "spacing_transverse") g.spacing_transverse = std::stod(value);
            else if (key == "spacing_longitudinal") g.spacing_longitudinal = std::stod(value);
            continue;
        }
        if (!header_seen) {
            if (line != "x,y,z") throw std::invalid_argument("read_geometry: expected header x,y,z");
            header_seen = true;
            continue;
        }
        std::istringstream row(line);
        std::string cell;
        double v[3];
        for (int c = 0; c < 3; ++c) {
            if (!std::getline(row, cell, ','))
                throw std::invalid_argument("read_geometry: short row '" + line + "'");
            v[c] = parse_double(cell);
        }
        g.positions.emplace_back(v[0], v[1], v[2]);
    }
    if (!header_seen) throw std::invalid_argument("read_geometry: missing header");
    check_finite(g);
    return g;
}

}  // namespace qantenna
