#include "doctest.h"

#include <cmath>

#include "qantenna/errors.hpp"
#include "qantenna/paraxial.hpp"

using namespace qantenna;

namespace {

// Plain 2D Riemann sum over [-a, a]^2 at spacing h.
template <class F>
cplx plane_integral(F f, double a, double h, double cx = 0.0, double cy = 0.0) {
    cplx acc = 0.0;
    const int n = static_cast<int>(std::ceil(a / h));
    for (int i = -n; i <= n; ++i)
        for (int j = -n; j <= n; ++j) acc += f(Eigen::Vector2d(cx + i * h, cy + j * h));
    return acc * h * h;
}

}  // namespace

TEST_CASE("generalized Laguerre polynomials") {
    CHECK(generalized_laguerre(0, 2.0, 1.3) == 1.0);
    CHECK(generalized_laguerre(1, 2.0, 1.3) == doctest::Approx(3.0 - 1.3));
    // L_2^a(x) = (x^2 - 2(a+2)x + (a+1)(a+2)) / 2
    const double a = 1.5, x = 0.7;
    CHECK(generalized_laguerre(2, a, x) ==
          doctest::Approx((x * x - 2 * (a + 2) * x + (a + 1) * (a + 2)) / 2).epsilon(1e-14));
    // L_n^0(0) = 1, L_n^a(0) = binomial(n + a, n)
    CHECK(generalized_laguerre(7, 0.0, 0.0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(generalized_laguerre(4, 3.0, 0.0) == doctest::Approx(35.0).epsilon(1e-14));
}

TEST_CASE("LG mode values and phases") {
    const LGMode m{0, 0, 1.0, 0.0};
    CHECK(std::abs(lg_eval(m, {0, 0}, 0.0)) == doctest::Approx(std::sqrt(2.0 / kPi)).epsilon(1e-14));
    CHECK(std::abs(std::sqrt(2.0 / kPi) - 0.79788) < 1e-5);
    CHECK(m.gouy_phase(m.rayleigh_length()) == doctest::Approx(kPi / 4).epsilon(1e-15));
    CHECK(m.inverse_radius(0.0) == 0.0);
    // mirror about the focus: u_{p,l}(rho, -z) = conj(u_{p,-l}(rho, z))
    const LGMode n{2, -1, 1.3, 0.5};
    const LGMode nm{2, 1, 1.3, 0.5};
    const Eigen::Vector2d rho(0.4, -0.7);
    CHECK(std::abs(lg_eval(n, rho, 0.5 - 2.0) - std::conj(lg_eval(nm, rho, 0.5 + 2.0))) < 1e-14);
}

TEST_CASE("LG_0^0 power normalization away from the focus") {
    const LGMode m{0, 0, 1.0, 0.0};
    const double z = 3.0 * m.rayleigh_length();
    const double w = m.width(z);
    const cplx norm = plane_integral([&](const Eigen::Vector2d& r) { return std::norm(lg_eval(m, r, z)); },
                                     5.0 * w, w / 40.0);
    CHECK(std::abs(norm.real() - 1.0) <= 1e-6);
}

TEST_CASE("LG modes are orthonormal") {
    const double w0 = 1.2, z = 2.1;
    std::vector<LGMode> modes;
    for (int p = 0; p <= 3; ++p)
        for (int l = -3; l <= 3; ++l) modes.push_back(LGMode{p, l, w0, 0.0});
    const LGMode ref{0, 0, w0, 0.0};
    const double w = ref.width(z);
    const double h = w / 24.0;
    const int n = static_cast<int>(std::ceil(6.0 * w / h));
    std::vector<std::vector<cplx>> vals(modes.size());
    for (std::size_t a = 0; a < modes.size(); ++a)
        for (int i = -n; i <= n; ++i)
            for (int j = -n; j <= n; ++j) vals[a].push_back(lg_eval(modes[a], {i * h, j * h}, z));
    double worst = 0.0;
    for (std::size_t a = 0; a < modes.size(); ++a)
        for (std::size_t b = a; b < modes.size(); ++b) {
            cplx s = 0.0;
            for (std::size_t k = 0; k < vals[a].size(); ++k) s += vals[a][k] * std::conj(vals[b][k]);
            s *= h * h;
            worst = std::max(worst, std::abs(s - (a == b ? 1.0 : 0.0)));
        }
    CHECK(worst <= 1e-4);
}

TEST_CASE("LG modes satisfy the paraxial equation") {
    const double h = 1e-3;
    for (const LGMode m : {LGMode{0, 0, 2.0, 0.0}, LGMode{1, 2, 2.5, 0.3}, LGMode{2, -1, 3.0, -1.0}}) {
        for (const Eigen::Vector3d r : {Eigen::Vector3d(0.5, 0.2, 1.0), Eigen::Vector3d(-1.0, 1.5, 4.0)}) {
            auto u = [&](double x, double y, double z) { return lg_eval(m, {x, y}, z); };
            const cplx dz = (u(r.x(), r.y(), r.z() + h) - u(r.x(), r.y(), r.z() - h)) / (2 * h);
            const cplx c = u(r.x(), r.y(), r.z());
            const cplx lap = (u(r.x() + h, r.y(), r.z()) + u(r.x() - h, r.y(), r.z()) +
                              u(r.x(), r.y() + h, r.z()) + u(r.x(), r.y() - h, r.z()) - 4.0 * c) /
                             (h * h);
            const cplx residual = dz - kI * lap / (2.0 * kWavenumber);
            CHECK(std::abs(residual) <= 1e-3 * std::abs(dz));
        }
    }
}

TEST_CASE("beam width from the second moment") {
    const LGMode m{0, 0, 1.1, 0.0};
    for (double z : {0.0, 2.0, 7.5}) {
        const double w = m.width(z);
        const cplx m2 = plane_integral(
            [&](const Eigen::Vector2d& r) { return r.squaredNorm() * std::norm(lg_eval(m, r, z)); },
            5.0 * w, w / 40.0);
        // <rho^2> = w^2 / 2 for LG_0^0
        CHECK(2.0 * m2.real() == doctest::Approx(w * w).epsilon(1e-3));
        const double zr = m.rayleigh_length();
        CHECK(w * w == doctest::Approx(1.21 * (1 + z * z / (zr * zr))).epsilon(1e-14));
    }
}

TEST_CASE("paraxial Green function") {
    const cplx expect = kWavenumber * std::exp(kI * kWavenumber * 10.0) / (20.0 * kI * kPi);
    CHECK(std::abs(paraxial_green({0, 0}, 10.0) - expect) < 1e-15);
    CHECK_THROWS_AS(paraxial_green({0, 0}, 0.0), std::domain_error);
    CHECK_THROWS_AS(paraxial_green({0, 0}, -1.0), std::domain_error);
}

TEST_CASE("paraxial Green function propagates modes back to the source plane") {
    // int u_n^*(rho, z_p) G_par(rho - rho_i, z_p - z_i) = e^{i k0 (z_p - z_i)} u_n^*(rho_i, z_i);
    // the plane-wave factor is part of G_par.
    const double w0 = 2.0, zi = 0.5, zp = 10.0;
    const Eigen::Vector2d ri(0.3, -0.2);
    for (const LGMode m : {LGMode{0, 0, w0, 0.0}, LGMode{1, 2, w0, 0.0}, LGMode{2, -1, w0, 0.0}}) {
        const cplx integral = plane_integral(
            [&](const Eigen::Vector2d& r) {
                return std::conj(lg_eval(m, r, zp)) * paraxial_green(r - ri, zp - zi);
            },
            12.0, 1.0 / 32.0);
        const cplx ref = std::exp(kI * kWavenumber * (zp - zi)) * std::conj(lg_eval(m, ri, zi));
        CHECK(std::abs(integral - ref) <= 1e-3 * std::abs(ref));
    }
}

TEST_CASE("truncated mode sum reproduces the paraxial Green function on smooth sources") {
    // Pointwise the truncated sum does not converge (a point source excites all
    // modes equally); projected on a smooth source it does.
    const double w0 = 2.0, zs = 0.0, zo = 3.0, s = 1.2;
    auto src = [&](const Eigen::Vector2d& r) {
        return std::exp(-((r.x() - 0.4) * (r.x() - 0.4) + r.y() * r.y()) / (s * s));
    };
    for (const Eigen::Vector2d obs : {Eigen::Vector2d(0, 0), Eigen::Vector2d(0.5, 0.3)}) {
        const cplx exact = plane_integral(
            [&](const Eigen::Vector2d& r) { return src(r) * paraxial_green(obs - r, zo - zs); }, 6.0, 0.05);
        cplx sum = 0.0;
        for (int p = 0; p <= 8; ++p)
            for (int l = -8; l <= 8; ++l) {
                const LGMode m{p, l, w0, 0.0};
                const cplx proj = plane_integral(
                    [&](const Eigen::Vector2d& r) { return src(r) * std::conj(lg_eval(m, r, zs)); }, 6.0, 0.05);
                sum += std::exp(kI * kWavenumber * (zo - zs)) * lg_eval(m, obs, zo) * proj;
            }
        CHECK(std::abs(sum - exact) <= 0.05 * std::abs(exact));
    }
}

TEST_CASE("opening angle") {
    CHECK(opening_angle(1.0) == doctest::Approx(std::atan(1.0 / kPi)).epsilon(1e-15));
    CHECK(std::abs(opening_angle(1.0) - 0.30817) < 1e-5);
    CHECK(opening_angle(1.0 / kPi) == doctest::Approx(kPi / 4).epsilon(1e-15));
    double last = opening_angle(0.1);
    for (double w = 0.2; w < 1e4; w *= 2) {
        const double a = opening_angle(w);
        CHECK(a < last);
        last = a;
    }
    CHECK(last < 1e-4);
}

TEST_CASE("basis construction") {
    const auto b = ParaxialBasis::truncated(5, 5, 1.0, 0.0);
    CHECK(b.modes.size() == 66);
    CHECK(b.target().p_index == 0);
    CHECK(b.target().l_index == 0);
    const auto c = ParaxialBasis::truncated(2, 1, 1.0, 0.0, 1, -1);
    CHECK(c.target().p_index == 1);
    CHECK(c.target().l_index == -1);
    ParaxialBasis dup = b;
    dup.modes.push_back(dup.modes.front());
    CHECK_THROWS_AS(dup.validate(), std::invalid_argument);
    CHECK_THROWS_AS(ParaxialBasis::truncated(2, 2, 1.0, 0.0, 3, 0), std::invalid_argument);
}

TEST_CASE("overlap quadrature on exact mode profiles") {
    const Polarization p = Polarization::circular();
    const LGMode m{0, 0, 1.5, 0.0};
    const double zp = 12.0;
    FieldSource field = [&](const Vec3& r) -> Eigen::Vector3cd {
        return p.vector() * lg_eval(m, {r.x(), r.y()}, r.z());
    };
    const auto self = overlap_rate(field, p, m, zp);
    CHECK(self.rate == doctest::Approx(1.0).epsilon(1e-3));
    const auto ortho = overlap_rate(field, p, LGMode{0, 1, 1.5, 0.0}, zp);
    CHECK(ortho.rate <= 1e-4 * self.rate);
}

TEST_CASE("overlap quadrature reports non-convergence") {
    const Polarization p = Polarization::circular();
    const LGMode m{0, 0, 1.0, 0.0};
    // A field oscillating at the coarse grid's sampling frequency aliases to a
    // constant there but not on the refined grid.
    const double kx = 2.0 * kPi / PlaneGrid::for_mode(m, 0.5).spacing;
    FieldSource field = [&](const Vec3& r) -> Eigen::Vector3cd {
        return p.vector() * std::exp(kI * kx * r.x()) * std::exp(-r.squaredNorm() / 2.0);
    };
    CHECK_THROWS_AS(overlap_rate(field, p, m, 0.5), NumericalFailure);
}
