#include "doctest.h"

#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>

#include "qantenna/dipole_kernel.hpp"
#include "qantenna/errors.hpp"

using namespace qantenna;

namespace {

// Literal transcription: G = 3 e^{ikr} / (2 i (kr)^3) [((kr)^2 + i kr - 1) I
//                                 + (-(kr)^2 - 3 i kr + 3) r r^T / r^2]
cplx literal_green_scalar(const Vec3& r, const Eigen::Vector3cd& p) {
    const double k = 2.0 * M_PI;
    const double d = std::sqrt(r[0] * r[0] + r[1] * r[1] + r[2] * r[2]);
    const cplx i(0.0, 1.0);
    const double kr = k * d;
    const cplx pre = 3.0 * std::exp(i * kr) / (2.0 * i * kr * kr * kr);
    const cplx c1 = kr * kr + i * kr - 1.0;
    const cplx c2 = -kr * kr - 3.0 * i * kr + 3.0;
    cplx acc = 0.0;
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) {
            const double delta = a == b ? 1.0 : 0.0;
            const cplx gab = pre * (c1 * delta + c2 * r[a] * r[b] / (d * d));
            acc += std::conj(p[a]) * gab * p[b];
        }
    return acc;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = x.size();
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double lx = std::log(x[i]), ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace

TEST_CASE("polarization is normalized") {
    const Polarization p = Polarization::circular();
    CHECK(p.vector().norm() == doctest::Approx(1.0).epsilon(1e-15));
    const Polarization q(Eigen::Vector3cd(cplx(3, 0), cplx(0, 4), 0));
    CHECK(q.vector().norm() == doctest::Approx(1.0).epsilon(1e-15));
    CHECK_THROWS_AS(Polarization(Eigen::Vector3cd::Zero()), std::invalid_argument);
}

TEST_CASE("green_scalar matches a literal evaluation and is even") {
    const Polarization p = Polarization::circular();
    const Vec3 r(1.0, 0.0, 0.0);
    const cplx lit = literal_green_scalar(r, p.vector());
    CHECK(std::abs(green_scalar(r, p) - lit) <= 1e-12 * std::abs(lit));

    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int t = 0; t < 50; ++t) {
        const Vec3 v(u(rng), u(rng), u(rng));
        const cplx a = green_scalar(v, p), b = green_scalar(-v, p);
        CHECK(std::abs(a - b) <= 1e-15 * std::abs(a));
        const cplx l = literal_green_scalar(v, p.vector());
        CHECK(std::abs(a - l) <= 1e-12 * std::abs(l));
    }
    CHECK_THROWS_AS(green_scalar(Vec3::Zero(), p), std::domain_error);
}

TEST_CASE("green_scalar near field and far field scaling") {
    const Polarization p = Polarization::circular();
    const Vec3 u = Vec3(1.0, 0.5, 0.3).normalized();
    std::vector<double> rf, gf, rn, gn;
    for (double r = 100.0; r <= 1000.0; r *= 1.2589) {
        rf.push_back(r);
        gf.push_back(std::abs(green_scalar(r * u, p)));
    }
    CHECK(loglog_slope(rf, gf) == doctest::Approx(-1.0).epsilon(0.01));
    for (double kr = 1e-4; kr <= 1e-2; kr *= 1.5) {
        rn.push_back(kr);
        gn.push_back(std::abs(green_scalar(kr / kWavenumber * u, p)));
    }
    CHECK(loglog_slope(rn, gn) == doctest::Approx(-3.0).epsilon(0.05 / 3.0));
}

TEST_CASE("single and two atom kernels") {
    const Polarization p = Polarization::circular();
    ArrayGeometry one;
    one.positions = {Vec3::Zero()};
    const auto k1 = build_kernel(one, p, 2.5);
    CHECK(k1.H_nh.rows() == 1);
    CHECK(std::abs(k1.H_nh(0, 0) - cplx(-2.5, -0.5)) < 1e-15);

    ArrayGeometry two;
    two.positions = {Vec3::Zero(), Vec3(0.3, 0.2, 0.4)};
    const auto k2 = build_kernel(two, p, 0.0);
    CHECK(k2.G(0, 1) == k2.G(1, 0));
    CHECK(k2.G(0, 1) == green_scalar(two.positions[1] - two.positions[0], p));
    CHECK(k2.G(0, 0) == 0.0);
}

TEST_CASE("coincident atoms are rejected with the offending pair") {
    ArrayGeometry g;
    g.positions = {Vec3::Zero(), Vec3(1, 0, 0), Vec3(1, 0, 1e-8)};
    try {
        build_kernel(g, Polarization::circular(), 1.0);
        FAIL("expected invalid_argument");
    } catch (const std::invalid_argument& e) {
        const std::string msg = e.what();
        CHECK(msg.find("atoms 2 and 1") != std::string::npos);
    }
}

TEST_CASE("kernel invariants on a 4x4x2 array") {
    const auto g = build_regular_array(4, 2, 0.7);
    const auto k = build_kernel(g, Polarization::circular(), 3.0);
    CHECK((k.G - k.G.transpose()).cwiseAbs().maxCoeff() == 0.0);
    CHECK((k.H_nh - k.H_nh.transpose()).cwiseAbs().maxCoeff() == 0.0);
    CHECK(k.G.diagonal().cwiseAbs().maxCoeff() == 0.0);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(k.decay_matrix());
    CHECK(es.eigenvalues().minCoeff() >= -1e-9);
}

TEST_CASE("collective decay rates obey the superradiant bound") {
    for (double d : {0.5, 0.7, 0.9}) {
        const auto g = build_regular_array(4, 2, d);
        const auto k = build_kernel(g, Polarization::circular(), 0.0);
        Eigen::ComplexEigenSolver<CMat> es(k.H_nh);
        const double n = static_cast<double>(g.size());
        for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
            const double rate = -2.0 * es.eigenvalues()[i].imag();
            CHECK(rate >= -1e-9);
            CHECK(rate <= n * (1.0 + 1e-6));
        }
    }
}

TEST_CASE("solve_kernel") {
    ArrayGeometry one;
    one.positions = {Vec3::Zero()};
    const auto k1 = build_kernel(one, Polarization::circular(), 1.7);
    CVec J(1);
    J << cplx(0.3, -0.2);
    const CVec x = solve_kernel(k1, J);
    CHECK(std::abs(x[0] - J[0] / cplx(-1.7, -0.5)) < 1e-15);

    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    ArrayGeometry rnd;
    while (rnd.positions.size() < 50) {
        const Vec3 v(u(rng), u(rng), u(rng));
        bool ok = true;
        for (const auto& r : rnd.positions) ok &= (r - v).norm() > 0.2;
        if (ok) rnd.positions.push_back(v);
    }
    const auto k = build_kernel(rnd, Polarization::circular(), 0.4);
    CVec b(50);
    for (auto& v : b) v = cplx(u(rng), u(rng));
    const CVec y = solve_kernel(k, b);
    CHECK((k.H_nh * y - b).norm() <= 1e-10 * b.norm());
    CHECK(solve_kernel(k, CVec::Zero(50)).norm() == 0.0);
}

TEST_CASE("singular kernel raises a numerical failure with the estimate") {
    ArrayGeometry one;
    one.positions = {Vec3::Zero()};
    const auto k = build_kernel(one, Polarization::circular(), 0.0, 0.0);
    try {
        KernelSolver s(k);
        FAIL("expected NumericalFailure");
    } catch (const NumericalFailure& e) {
        CHECK(e.operation() == "solve_kernel");
        CHECK(e.estimate() > 1e12);
    }
}
