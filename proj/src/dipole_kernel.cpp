#include "qantenna/dipole_kernel.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "qantenna/errors.hpp"

namespace qantenna {

Polarization::Polarization(const Eigen::Vector3cd& v) {
    const double n = v.norm();
    if (!(n > 0.0) || !std::isfinite(n)) throw std::invalid_argument("polarization: zero vector");
    p_ = v / n;
}

Polarization Polarization::circular() {
    return Polarization(Eigen::Vector3cd(cplx(1.0, 0.0), cplx(0.0, 1.0), cplx(0.0, 0.0)));
}

Polarization Polarization::linear_x() {
    return Polarization(Eigen::Vector3cd(cplx(1.0, 0.0), cplx(0.0, 0.0), cplx(0.0, 0.0)));
}

namespace {

// Coefficients a, b with G = a I + b rhat rhat^T.
inline void green_coefficients(double r, cplx& a, cplx& b) {
    const double kr = kWavenumber * r;
    const cplx ikr(0.0, kr);
    const cplx pref = 3.0 * std::exp(ikr) / (2.0 * kI * kr * kr * kr);
    a = pref * (kr * kr + ikr - 1.0);
    b = pref * (-kr * kr - 3.0 * ikr + 3.0);
}

}  // namespace

Eigen::Matrix3cd green_tensor(const Vec3& r) {
    const double d = r.norm();
    if (!(d > 0.0)) throw std::domain_error("green_tensor: r = 0");
    cplx a, b;
    green_coefficients(d, a, b);
    const Vec3 u = r / d;
    Eigen::Matrix3cd g = b * (u * u.transpose()).cast<cplx>();
    g.diagonal().array() += a;
    return g;
}

cplx green_scalar(const Vec3& r, const Polarization& p) {
    const double d = r.norm();
    if (!(d > 0.0)) throw std::domain_error("green_scalar: r = 0");
    cplx a, b;
    green_coefficients(d, a, b);
    const Vec3 u = r / d;
    const cplx proj = u.cast<cplx>().dot(p.vector());  // conj(u) . p = u . p for real u
    return a * p.vector().squaredNorm() + b * std::norm(proj);
}

Eigen::MatrixXd CollectiveKernel::decay_matrix() const {
    Eigen::MatrixXd m = G.real();
    m.diagonal().array() += 1.0;
    return m;
}

CollectiveKernel build_kernel(const ArrayGeometry& geom, const Polarization& p, double detuning,
                              double gamma_e) {
    const auto n = static_cast<Eigen::Index>(geom.size());
    if (n == 0) throw std::invalid_argument("build_kernel: empty geometry");
    CollectiveKernel k;
    k.positions = geom.positions;
    k.detuning = detuning;
    k.gamma_e = gamma_e;
    k.polarization = p;
    k.G = CMat::Zero(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index i = j + 1; i < n; ++i) {
            const Vec3 r = geom.positions[j] - geom.positions[i];
            if (r.norm() < kCoincidenceTolerance) {
                std::ostringstream msg;
                msg << "build_kernel: atoms " << i << " and " << j << " coincide (distance "
                    << r.norm() << ")";
                throw std::invalid_argument(msg.str());
            }
            const cplx g = green_scalar(r, p);
            k.G(i, j) = g;
            k.G(j, i) = g;
        }
    }
    return with_detuning(k, detuning);
}

CollectiveKernel with_detuning(const CollectiveKernel& kernel, double detuning) {
    CollectiveKernel k = kernel;
    k.detuning = detuning;
    k.H_nh = cplx(0.0, -0.5 * k.gamma_e) * k.G;
    k.H_nh.diagonal().array() += cplx(-detuning, -0.5 * k.gamma_e);
    return k;
}

KernelSolver::KernelSolver(const CollectiveKernel& kernel) : H_(kernel.H_nh) {
    if (kernel.H_nh.rows() == 0) throw std::invalid_argument("KernelSolver: empty kernel");
    lu_.compute(kernel.H_nh);
    const double rc = lu_.rcond();
    condition_ = rc > 0.0 ? 1.0 / rc : INFINITY;
    if (!(condition_ <= kMaxCondition))
        throw NumericalFailure("solve_kernel", "H_nh is ill-conditioned (condition estimate " +
                                                   std::to_string(condition_) + ")",
                               condition_);
}

CMat KernelSolver::solve(const CMat& rhs) const {
    if (rhs.rows() != H_.rows()) throw std::invalid_argument("solve_kernel: dimension mismatch");
    CMat x = lu_.solve(rhs);
    for (Eigen::Index c = 0; c < rhs.cols(); ++c) {
        const double bn = rhs.col(c).norm();
        if (bn == 0.0) {
            x.col(c).setZero();
            continue;
        }
        double res = (H_ * x.col(c) - rhs.col(c)).norm();
        if (res > kResidualTolerance * bn) {
            // One step of iterative refinement before giving up.
            x.col(c) += lu_.solve(rhs.col(c) - H_ * x.col(c));
            res = (H_ * x.col(c) - rhs.col(c)).norm();
            if (res > kResidualTolerance * bn)
                throw NumericalFailure("solve_kernel",
                                       "residual " + std::to_string(res / bn) + " exceeds tolerance",
                                       condition_);
        }
    }
    return x;
}

CVec KernelSolver::solve(const CVec& rhs) const {
    return solve(CMat(rhs)).col(0);
}

CVec solve_kernel(const CollectiveKernel& kernel, const CVec& rhs) {
    return KernelSolver(kernel).solve(rhs);
}

}  // namespace qantenna
