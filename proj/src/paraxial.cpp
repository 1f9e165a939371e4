#include "qantenna/paraxial.hpp"

#include <cmath>
#include <set>
#include <stdexcept>
#include <utility>

#include "qantenna/errors.hpp"

namespace qantenna {

double LGMode::rayleigh_length() const { return kPi * waist * waist / kWavelength; }

double LGMode::width(double z) const {
    const double dz = (z - focus_z) / rayleigh_length();
    return waist * std::sqrt(1.0 + dz * dz);
}

double LGMode::inverse_radius(double z) const {
    const double dz = z - focus_z;
    const double zr = rayleigh_length();
    return dz / (dz * dz + zr * zr);
}

double LGMode::gouy_phase(double z) const { return std::atan((z - focus_z) / rayleigh_length()); }

void LGMode::validate() const {
    if (!(waist > 0.0) || !std::isfinite(waist)) throw std::invalid_argument("LGMode: waist must be > 0");
    if (p_index < 0) throw std::invalid_argument("LGMode: p must be >= 0");
}

std::string mode_id(const LGMode& m) {
    return "LG_p" + std::to_string(m.p_index) + "_l" + std::to_string(m.l_index);
}

double generalized_laguerre(int n, double alpha, double x) {
    if (n < 0) throw std::invalid_argument("generalized_laguerre: n < 0");
    if (n == 0) return 1.0;
    double prev = 1.0;
    double cur = 1.0 + alpha - x;
    for (int k = 1; k < n; ++k) {
        const double next = ((2.0 * k + 1.0 + alpha - x) * cur - (k + alpha) * prev) / (k + 1.0);
        prev = cur;
        cur = next;
    }
    return cur;
}

namespace {

// sqrt(2 p! / (pi (p+|l|)!))
double lg_norm(int p, int al) {
    return std::sqrt(2.0 / kPi * std::exp(std::lgamma(p + 1.0) - std::lgamma(p + al + 1.0)));
}

}  // namespace

cplx lg_eval(const LGMode& mode, const Eigen::Vector2d& rho, double z) {
    const int al = std::abs(mode.l_index);
    const double w = mode.width(z);
    const double r2 = rho.squaredNorm();
    const double s = 2.0 * r2 / (w * w);
    const double radial = lg_norm(mode.p_index, al) / w * std::pow(std::sqrt(s), al) *
                          std::exp(-r2 / (w * w)) * generalized_laguerre(mode.p_index, al, s);
    const double azimuth = (al == 0) ? 0.0 : std::atan2(rho.y(), rho.x());
    const double phase = 0.5 * kWavenumber * r2 * mode.inverse_radius(z) + mode.l_index * azimuth -
                         (2.0 * mode.p_index + al + 1.0) * mode.gouy_phase(z);
    return std::polar(radial, phase);
}

ParaxialBasis ParaxialBasis::truncated(int p_max, int l_max, double waist, double focus_z,
                                       int target_p, int target_l) {
    if (p_max < 0 || l_max < 0) throw std::invalid_argument("ParaxialBasis: negative cut");
    ParaxialBasis b;
    for (int p = 0; p <= p_max; ++p)
        for (int l = -l_max; l <= l_max; ++l) {
            if (p == target_p && l == target_l) b.target_index = b.modes.size();
            b.modes.push_back(LGMode{p, l, waist, focus_z});
        }
    if (target_p < 0 || target_p > p_max || std::abs(target_l) > l_max)
        throw std::invalid_argument("ParaxialBasis: target outside the truncation");
    b.validate();
    return b;
}

ParaxialBasis ParaxialBasis::target_only(const LGMode& target) {
    ParaxialBasis b;
    b.modes.push_back(target);
    b.validate();
    return b;
}

void ParaxialBasis::validate() const {
    if (modes.empty() || target_index >= modes.size())
        throw std::invalid_argument("ParaxialBasis: target not present");
    std::set<std::pair<int, int>> seen;
    for (const auto& m : modes) {
        m.validate();
        if (m.waist != modes.front().waist || m.focus_z != modes.front().focus_z)
            throw std::invalid_argument("ParaxialBasis: modes must share waist and focus");
        if (!seen.emplace(m.p_index, m.l_index).second)
            throw std::invalid_argument("ParaxialBasis: duplicate mode " + mode_id(m));
    }
}

cplx paraxial_green(const Eigen::Vector2d& rho, double dz) {
    if (!(dz > 0.0)) throw std::domain_error("paraxial_green: dz must be > 0");
    const double phase = kWavenumber * (dz + rho.squaredNorm() / (2.0 * dz));
    return kWavenumber * std::exp(kI * phase) / (2.0 * kI * kPi * dz);
}

double opening_angle(double w0) {
    if (!(w0 > 0.0)) throw std::invalid_argument("opening_angle: w0 must be > 0");
    return std::atan(kWavelength / (kPi * w0));
}

PlaneGrid PlaneGrid::for_mode(const LGMode& mode, double plane_z) {
    const double w = mode.width(plane_z);
    PlaneGrid g;
    g.plane_z = plane_z;
    g.spacing = std::min(w / 32.0, kWavelength / 8.0);
    g.half_count = static_cast<int>(std::ceil(4.0 * w / g.spacing));
    return g;
}

PlaneGrid PlaneGrid::refined() const {
    PlaneGrid g = *this;
    g.spacing = 0.5 * spacing;
    g.half_count = 2 * half_count;
    return g;
}

Vec3 PlaneGrid::point(int i, int j) const {
    return Vec3(center.x() + i * spacing, center.y() + j * spacing, plane_z);
}

std::vector<Vec3> PlaneGrid::points() const {
    std::vector<Vec3> pts;
    pts.reserve(side() * side());
    for (int i = -half_count; i <= half_count; ++i)
        for (int j = -half_count; j <= half_count; ++j) pts.push_back(point(i, j));
    return pts;
}

OverlapResult overlap_rate(const FieldSource& field, const Polarization& p, const LGMode& mode,
                           double plane_z, double max_change) {
    mode.validate();
    const PlaneGrid coarse = PlaneGrid::for_mode(mode, plane_z);
    const PlaneGrid fine = coarse.refined();
    const Eigen::Vector3cd pc = p.vector();

    // Fine grid contains the coarse grid at even indices.
    cplx sum_fine = 0.0, sum_coarse = 0.0;
    double norm_fine = 0.0;
    for (int i = -fine.half_count; i <= fine.half_count; ++i) {
        for (int j = -fine.half_count; j <= fine.half_count; ++j) {
            const Vec3 r = fine.point(i, j);
            const cplx proj = pc.dot(field(r));  // p^dagger phi
            const cplx term = std::conj(lg_eval(mode, Eigen::Vector2d(r.x(), r.y()), plane_z)) * proj;
            sum_fine += term;
            norm_fine += std::norm(proj);
            if (i % 2 == 0 && j % 2 == 0) sum_coarse += term;
        }
    }
    const double h2f = fine.spacing * fine.spacing;
    const double h2c = coarse.spacing * coarse.spacing;
    const cplx a_fine = sum_fine * h2f;
    const cplx a_coarse = sum_coarse * h2c;
    const double scale = std::max(std::abs(a_fine), std::sqrt(norm_fine * h2f));

    OverlapResult res;
    res.amplitude = a_fine;
    res.rate = std::norm(a_fine);
    res.relative_change = scale > 0.0 ? std::abs(a_fine - a_coarse) / scale : 0.0;
    res.points = fine.side() * fine.side();
    if (res.relative_change > max_change)
        throw NumericalFailure("overlap_rate", "quadrature did not converge (change " +
                                                   std::to_string(res.relative_change) + ")",
                               res.relative_change);
    return res;
}

}  // namespace qantenna
