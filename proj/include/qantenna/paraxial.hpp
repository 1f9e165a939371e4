#pragma once

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "qantenna/dipole_kernel.hpp"
#include "qantenna/units.hpp"

namespace qantenna {

struct LGMode {
    int p_index = 0;
    int l_index = 0;
    double waist = 1.0;
    double focus_z = 0.0;

    double rayleigh_length() const;
    double width(double z) const;            // w(z), z absolute
    double inverse_radius(double z) const;   // 1/R(z) = dz / (dz^2 + z_R^2)
    double gouy_phase(double z) const;       // atan(dz / z_R)
    void validate() const;
};

std::string mode_id(const LGMode& m);

// Generalized Laguerre polynomial L_n^alpha(x), three-term recurrence.
double generalized_laguerre(int n, double alpha, double x);

cplx lg_eval(const LGMode& mode, const Eigen::Vector2d& rho, double z);

struct ParaxialBasis {
    std::vector<LGMode> modes;
    std::size_t target_index = 0;

    // All (p, l) with p <= p_max, |l| <= l_max sharing waist and focus.
    static ParaxialBasis truncated(int p_max, int l_max, double waist, double focus_z,
                                   int target_p = 0, int target_l = 0);
    static ParaxialBasis target_only(const LGMode& target);

    const LGMode& target() const { return modes.at(target_index); }
    void validate() const;
};

inline constexpr int kDefaultModeCut = 5;

// G_par(rho, dz) = k0 exp(i k0 [dz + |rho|^2/(2 dz)]) / (2 i pi dz), dz > 0.
cplx paraxial_green(const Eigen::Vector2d& rho, double dz);

// tan^-1(lambda0 / (pi w0)).
double opening_angle(double w0);

// Square grid in a transverse plane: points at center + (i h, j h) for
// i, j in [-n, n].
struct PlaneGrid {
    double plane_z = 0.0;
    Eigen::Vector2d center = Eigen::Vector2d::Zero();
    double spacing = 0.0;
    int half_count = 0;

    // Default quadrature for a mode: extent +-4 w(z), spacing min(w/32, lambda0/8).
    static PlaneGrid for_mode(const LGMode& mode, double plane_z);
    PlaneGrid refined() const;   // halves the spacing over the same extent
    std::size_t side() const { return static_cast<std::size_t>(2 * half_count + 1); }
    Vec3 point(int i, int j) const;
    std::vector<Vec3> points() const;
};

// Vector field amplitude phi(r); same normalization as emission::field_map.
using FieldSource = std::function<Eigen::Vector3cd(const Vec3&)>;

struct OverlapResult {
    double rate = 0.0;
    cplx amplitude{0.0, 0.0};
    double relative_change = 0.0;  // change on grid refinement, relative to the field norm
    std::size_t points = 0;
};

// gamma_n = c |int d^2rho u_n^*(rho, z_p) p^* . phi(r)|^2 by quadrature,
// checked against one refinement. Throws NumericalFailure when the estimate
// moves by more than max_change.
OverlapResult overlap_rate(const FieldSource& field, const Polarization& p, const LGMode& mode,
                           double plane_z, double max_change = 1e-2);

}  // namespace qantenna
