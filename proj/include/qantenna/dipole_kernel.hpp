#pragma once

#include <Eigen/Dense>

#include "qantenna/geometry.hpp"
#include "qantenna/units.hpp"

namespace qantenna {

using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;

class Polarization {
public:
    // Normalizes v; throws std::invalid_argument for the zero vector.
    explicit Polarization(const Eigen::Vector3cd& v);

    // (1, i, 0)/sqrt(2): sigma+ about z.
    static Polarization circular();
    static Polarization linear_x();

    const Eigen::Vector3cd& vector() const { return p_; }

private:
    Eigen::Vector3cd p_;
};

// Free-space dyadic Green tensor; r != 0.
Eigen::Matrix3cd green_tensor(const Vec3& r);

// p^dagger G(r) p. Throws std::domain_error at r = 0.
cplx green_scalar(const Vec3& r, const Polarization& p);

struct CollectiveKernel {
    std::vector<Vec3> positions;
    CMat G;      // G_ii = 0
    CMat H_nh;   // -Delta I - i gamma_e/2 (I + G)
    double detuning = 0.0;
    double gamma_e = kGammaE;
    Polarization polarization = Polarization::circular();

    Eigen::Index size() const { return G.rows(); }
    // Decay matrix I + Re G used by the large-detuning formulas.
    Eigen::MatrixXd decay_matrix() const;
};

// Positions below this distance count as coincident.
inline constexpr double kCoincidenceTolerance = 1e-6;

CollectiveKernel build_kernel(const ArrayGeometry& geom, const Polarization& p, double detuning,
                              double gamma_e = kGammaE);

// Rebuilds H_nh for a new detuning without touching G.
CollectiveKernel with_detuning(const CollectiveKernel& kernel, double detuning);

// LU factorization of H_nh, reusable across right-hand sides.
class KernelSolver {
public:
    static constexpr double kMaxCondition = 1e12;
    static constexpr double kResidualTolerance = 1e-10;

    explicit KernelSolver(const CollectiveKernel& kernel);

    CVec solve(const CVec& rhs) const;
    CMat solve(const CMat& rhs) const;
    double condition_estimate() const { return condition_; }

private:
    CMat H_;
    Eigen::PartialPivLU<CMat> lu_;
    double condition_ = 0.0;
};

CVec solve_kernel(const CollectiveKernel& kernel, const CVec& rhs);

}  // namespace qantenna
