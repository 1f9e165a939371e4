#include "doctest.h"

#include <cmath>
#include <random>

#include "qantenna/emission.hpp"
#include "qantenna/errors.hpp"

using namespace qantenna;

namespace {

ArrayGeometry single_atom() {
    ArrayGeometry g;
    g.positions = {Vec3::Zero()};
    return g;
}

double phase_distance(double a, double b) { return std::abs(std::arg(std::polar(1.0, a - b))); }

}  // namespace

TEST_CASE("prescription couplings") {
    const LGMode target{0, 0, 1.4, 0.0};
    const auto one = prescribe_couplings(single_atom(), target, 0.37);
    CHECK(std::abs(one.J[0] - 0.37) < 1e-15);

    const auto g = build_regular_array(3, 2, 0.7);
    const auto c = prescribe_couplings(g, target, 2.0);
    CHECK(c.jbar() == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(std::abs(c.J.squaredNorm() - 4.0) <= 1e-12 * 4.0);
    for (std::size_t i = 1; i < g.size(); ++i) {
        const Vec3& a = g.positions[0];
        const Vec3& b = g.positions[i];
        const cplx ua = std::exp(kI * kWavenumber * a.z()) * lg_eval(target, {a.x(), a.y()}, a.z());
        const cplx ub = std::exp(kI * kWavenumber * b.z()) * lg_eval(target, {b.x(), b.y()}, b.z());
        CHECK(std::abs(c.J[i] / c.J[0] - ub / ua) < 1e-12);
    }
    // on axis the layers differ by k0 dz minus the Gouy shift
    const auto axis = build_regular_array(1, 2, 0.7);
    const auto ca = prescribe_couplings(axis, target, 1.0);
    const double dz = axis.spacing_longitudinal;
    const double expect = kWavenumber * dz - (target.gouy_phase(dz / 2) - target.gouy_phase(-dz / 2));
    CHECK(phase_distance(std::arg(ca.J[1] / ca.J[0]), expect) < 1e-12);

    CHECK_THROWS_AS(prescribe_couplings(single_atom(), LGMode{0, 1, 1.0, 0.0}, 1.0), std::invalid_argument);
}

TEST_CASE("single atom rate and shift closed forms") {
    for (double delta : {-3.0, 0.0, 0.7, 25.0}) {
        const auto k = build_kernel(single_atom(), Polarization::circular(), delta);
        CouplingProfile c;
        c.J = CVec::Constant(1, cplx(0.12, -0.05));
        const double j2 = std::norm(c.J[0]);
        const auto r = effective_rate(k, c);
        const double den = delta * delta + 0.25;
        CHECK(std::abs(r.gamma_tot - j2 / den) <= 1e-12 * j2 / den);
        CHECK(std::abs(r.epsilon - delta * j2 / den) <= 1e-12 * std::max(1e-3, std::abs(delta * j2 / den)));
    }
}

TEST_CASE("large detuning total rate agrees with the exact inverse") {
    for (auto [n, nz, d] : {std::tuple{3, 2, 0.7}, std::tuple{4, 2, 0.5}, std::tuple{5, 3, 0.8}}) {
        const auto g = build_regular_array(n, nz, d);
        const auto k = build_kernel(g, Polarization::circular(), 100.0);
        const auto c = prescribe_couplings(g, LGMode{0, 0, 1.2, 0.0}, 3.0);
        const double exact = effective_rate(k, c, SolvePath::exact).gamma_tot;
        const double fast = effective_rate(k, c, SolvePath::large_detuning).gamma_tot;
        CHECK(fast == doctest::Approx(exact).epsilon(0.01));
    }
}

TEST_CASE("total rate is positive for random geometries and couplings") {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> u(-1.5, 1.5);
    for (int trial = 0; trial < 50; ++trial) {
        ArrayGeometry g;
        while (g.positions.size() < 12) {
            const Vec3 v(u(rng), u(rng), u(rng));
            bool ok = true;
            for (const auto& r : g.positions) ok &= (r - v).norm() > 0.05;
            if (ok) g.positions.push_back(v);
        }
        const auto k = build_kernel(g, Polarization::circular(), u(rng) * 5.0);
        CouplingProfile c;
        c.J.resize(12);
        for (auto& j : c.J) j = cplx(u(rng), u(rng));
        CHECK(effective_rate(k, c).gamma_tot > 0.0);
    }
}

TEST_CASE("Wigner-Weisskopf dynamics") {
    SUBCASE("no coupling leaves the master atom excited") {
        const auto g = build_regular_array(2, 2, 0.7);
        const auto k = build_kernel(g, Polarization::circular(), 5.0);
        CouplingProfile c;
        c.J = CVec::Zero(8);
        const auto t = wigner_weisskopf(k, c, 1.0, 1e-3);
        for (const auto& s : t.s) CHECK(std::abs(s - 1.0) < 1e-15);
    }
    SUBCASE("perturbative decay follows the effective rate") {
        const auto g = build_regular_array(3, 2, 0.7);
        const double delta = 10.0;
        const auto k = build_kernel(g, Polarization::circular(), delta);
        const auto c = prescribe_couplings(g, LGMode{0, 0, 1.0, 0.0}, 0.05 * delta);
        const double gamma = effective_rate(k, c).gamma_tot;
        const double dt = 0.01 / delta;
        const auto t = wigner_weisskopf(k, c, 3.0 / gamma, dt);
        double worst = 0.0;
        for (std::size_t i = 0; i < t.t.size(); i += 100)
            worst = std::max(worst, std::abs(std::abs(t.s[i]) - std::exp(-0.5 * gamma * t.t[i])));
        CHECK(worst <= 0.01);
        // exponential fit of |s| over the second half
        double sx = 0, sy = 0, sxx = 0, sxy = 0, n = 0;
        for (std::size_t i = t.t.size() / 2; i < t.t.size(); i += 50) {
            const double x = t.t[i], y = std::log(std::abs(t.s[i]));
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
            n += 1;
        }
        const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        CHECK(-2.0 * slope == doctest::Approx(gamma).epsilon(0.01));
        for (std::size_t i = 1; i < t.norm.size(); ++i) CHECK(t.norm[i] <= t.norm[i - 1] + 1e-15);
    }
    SUBCASE("step size precondition and error estimate") {
        const auto k = build_kernel(single_atom(), Polarization::circular(), 2.0);
        CouplingProfile c;
        c.J = CVec::Constant(1, 0.1);
        CHECK_THROWS_AS(wigner_weisskopf(k, c, 1.0, 0.1), std::invalid_argument);
        WWOptions o;
        o.estimate_error = true;
        const auto t = wigner_weisskopf(k, c, 5.0, 5e-3, o);
        CHECK(t.error_estimate < 1e-9);
    }
}

TEST_CASE("closed form target rate for a bilayer") {
    // 3 pi gamma_e jbar^2 N_z / (2 Delta^2 k0^2 delta^2)
    const double delta = 100.0, d = 0.7;
    const auto g = build_regular_array(10, 2, d);
    const auto k = build_kernel(g, Polarization::circular(), delta);
    const LGMode target{0, 0, 1.935, 0.0};
    const auto c = prescribe_couplings(g, target, 0.15 * delta);
    const auto rates = mode_rates(k, c, ParaxialBasis::target_only(target), Direction::forward);
    const double closed = 3.0 * kPi * 0.0225 * 2.0 / (2.0 * kWavenumber * kWavenumber * d * d);
    CHECK(rates[0].gamma == doctest::Approx(1e-2).epsilon(0.2));
    CHECK(rates[0].gamma == doctest::Approx(closed).epsilon(0.1));
    // large-detuning amplitude reproduces the rate to O(1/Delta)
    CHECK(std::norm(rates[0].amplitude) == doctest::Approx(rates[0].gamma).epsilon(0.02));
}

TEST_CASE("target rate matches the far-field overlap quadrature") {
    const double w0 = 2.0;
    const auto k = build_kernel(single_atom(), Polarization::circular(), 3.0);
    const LGMode target{0, 0, w0, 0.0};
    const auto c = prescribe_couplings(single_atom(), target, 1.0);
    const CVec x = antenna_response(k, c.J, SolvePath::exact);
    const double algebraic = mode_rates(k, c, ParaxialBasis::target_only(target), Direction::forward)[0].gamma;
    const auto quad = overlap_rate(field_source(k, x), k.polarization, target, 20.0);
    CHECK(quad.rate == doctest::Approx(algebraic).epsilon(0.02));
}

TEST_CASE("Purcell report bookkeeping") {
    SUBCASE("single atom") {
        const auto k = build_kernel(single_atom(), Polarization::circular(), 50.0);
        const LGMode target{0, 0, 1.0, 0.0};
        const auto c = prescribe_couplings(single_atom(), target, 1.0);
        const auto rep = purcell(k, c, ParaxialBasis::truncated(5, 5, 1.0, 0.0));
        CHECK(rep.beta > 0.0);
        CHECK(rep.beta < 1.0);
        // large detuning: beta = 3 pi / (2 k0^2) |u(0)|^2
        CHECK(rep.beta == doctest::Approx(3.0 * kPi / (2 * kWavenumber * kWavenumber) * 2.0 / kPi).epsilon(0.02));
        CHECK(rep.od_eff == doctest::Approx(4 * rep.beta / (1 - rep.beta)).epsilon(1e-14));
        CHECK(rep.gamma_prime == doctest::Approx(rep.gamma_tot - [&] {
                  double s = 0;
                  for (const auto& m : rep.forward) s += m.gamma;
                  for (const auto& m : rep.backward) s += m.gamma;
                  return s;
              }()).epsilon(1e-12));
    }
    SUBCASE("waist below the paraxial limit raises") {
        const auto k = build_kernel(single_atom(), Polarization::circular(), 50.0);
        const LGMode target{0, 0, 0.2, 0.0};
        const auto c = prescribe_couplings(single_atom(), target, 1.0);
        CHECK_THROWS_AS(purcell(k, c, ParaxialBasis::target_only(target)), NumericalFailure);
    }
    SUBCASE("large antenna: mode sum within the total rate") {
        const auto g = build_regular_array(10, 2, 0.7);
        const auto k = build_kernel(g, Polarization::circular(), 100.0);
        const LGMode target{0, 0, 1.935, 0.0};
        const auto c = prescribe_couplings(g, target, 1.0);
        PurcellOptions o;
        o.check_basis_convergence = true;
        const auto rep = purcell(k, c, ParaxialBasis::truncated(5, 5, target.waist, 0.0), o);
        CHECK_FALSE(rep.paraxial_overcount);
        CHECK(rep.gamma_prime >= -1e-6 * rep.gamma_tot);
        REQUIRE(rep.basis_change.has_value());
        CHECK(*rep.basis_change < 1e-3);
        for (std::size_t i = 0; i < rep.forward.size(); ++i)
            if (i != rep.target_index) CHECK(rep.forward[i].gamma <= 1e-2 * rep.gamma_target);
    }
}

TEST_CASE("beta is invariant under coupling rescaling at large detuning") {
    const auto g = build_regular_array(4, 2, 0.7);
    const auto k = build_kernel(g, Polarization::circular(), 100.0);
    const LGMode target{0, 0, 1.0, 0.0};
    const auto basis = ParaxialBasis::target_only(target);
    PurcellOptions o;
    o.path = SolvePath::large_detuning;
    auto c = prescribe_couplings(g, target, 1.0);
    const double b1 = purcell(k, c, basis, o).beta;
    c.J *= cplx(-3.7, 2.1);
    CHECK(std::abs(purcell(k, c, basis, o).beta - b1) <= 1e-10 * b1);
}

TEST_CASE("prescription is locally optimal for the target rate") {
    const auto g = build_regular_array(4, 2, 0.7);
    const auto k = build_kernel(g, Polarization::circular(), 100.0);
    const LGMode target{0, 0, 1.0, 0.0};
    const auto basis = ParaxialBasis::target_only(target);
    const auto c = prescribe_couplings(g, target, 1.0);
    const double g0 = mode_rates(k, c, basis, Direction::forward, SolvePath::large_detuning)[0].gamma;
    for (Eigen::Index j = 0; j < c.J.size(); ++j)
        for (double dphi : {-0.1, 0.1}) {
            auto p = c;
            p.J[j] *= std::polar(1.0, dphi);
            const double gp = mode_rates(k, p, basis, Direction::forward, SolvePath::large_detuning)[0].gamma;
            CHECK(gp <= g0 * (1.0 + 1e-6));
        }
}

TEST_CASE("field map") {
    SUBCASE("single atom field is azimuthally symmetric") {
        const auto k = build_kernel(single_atom(), Polarization::circular(), 1.0);
        CouplingProfile c;
        c.J = CVec::Constant(1, 0.3);
        std::vector<Vec3> ring;
        for (int a = 0; a < 8; ++a) {
            const double phi = 2 * kPi * a / 8;
            ring.emplace_back(1.7 * std::cos(phi), 1.7 * std::sin(phi), 0.9);
        }
        const auto mag = field_map(k, c, ring).magnitude();
        for (double m : mag) CHECK(std::abs(m - mag[0]) <= 1e-10 * mag[0]);
    }
    SUBCASE("points too close to an atom are rejected") {
        const auto g = build_regular_array(2, 1, 0.7);
        const auto k = build_kernel(g, Polarization::circular(), 1.0);
        const auto c = prescribe_couplings(g, LGMode{0, 0, 1.0, 0.0}, 1.0);
        try {
            field_map(k, c, {Vec3(5, 5, 5), g.positions[1] + Vec3(0.01, 0, 0)});
            FAIL("expected invalid_argument");
        } catch (const std::invalid_argument& e) {
            CHECK(std::string(e.what()).find("#1") != std::string::npos);
        }
    }
    SUBCASE("far-field flux equals the total rate") {
        for (auto [n, nz] : {std::pair{1, 1}, std::pair{3, 2}}) {
            const auto g = build_regular_array(n, nz, 0.7);
            const auto k = build_kernel(g, Polarization::circular(), 2.0);
            const auto c = prescribe_couplings(g, LGMode{0, 0, 1.0, 0.0}, 1.0);
            const CVec x = antenna_response(k, c.J, SolvePath::exact);
            const auto flux = far_field_flux(k, x);
            CHECK(flux.total == doctest::Approx(effective_rate(k, c).gamma_tot).epsilon(0.02));
        }
    }
}

TEST_CASE("lattice optical depth bound") {
    CHECK(lattice_od_bound(std::sqrt(kCrossSection)) == doctest::Approx(40.0).epsilon(1e-14));
    CHECK(lattice_od_bound(1e-6) == doctest::Approx(8.0).epsilon(1e-12));
    CHECK(lattice_od_bound(2000.0) / lattice_od_bound(1000.0) == doctest::Approx(16.0).epsilon(1e-9));
}

TEST_CASE("antenna optimization") {
    OptimizeOptions o;
    o.path = SolvePath::large_detuning;
    const auto a4 = optimize_antenna(4, 2, o);
    const auto a8 = optimize_antenna(8, 2, o);
    CHECK(a8.beta > a4.beta);
    CHECK(a4.report.od_eff == doctest::Approx(4 * a4.beta / (1 - a4.beta)));
    // deterministic
    const auto again = optimize_antenna(4, 2, o);
    CHECK(again.w0 == a4.w0);
    CHECK(again.delta_perp == a4.delta_perp);
    CHECK(again.beta == a4.beta);

    // bilayers beat thicker stacks
    const auto b2 = optimize_antenna(8, 2, o);
    const auto b4 = optimize_antenna(8, 4, o);
    const auto b8 = optimize_antenna(8, 8, o);
    CHECK(b2.beta >= b4.beta);
    CHECK(b4.beta >= b8.beta);

    // optimum pinned to a narrow bound is flagged
    OptimizeOptions narrow = o;
    narrow.delta_min = 0.3;
    narrow.delta_max = 0.4;
    CHECK(optimize_antenna(4, 2, narrow).delta_at_bound);
}

TEST_CASE("disorder averaging") {
    const auto g = build_regular_array(6, 2, 0.7);
    const LGMode target{0, 0, 1.2, 0.0};
    DisorderStudyOptions o;
    o.path = SolvePath::large_detuning;
    DisorderSpec none;
    none.n_samples = 3;
    const auto clean = disorder_average(g, target, none, o);
    CHECK(clean.std_error < 1e-12);
    const auto k = build_kernel(g, Polarization::circular(), 100.0);
    const auto c = prescribe_couplings(g, target, 1.0);
    PurcellOptions po;
    po.path = SolvePath::large_detuning;
    CHECK(clean.mean_beta == doctest::Approx(purcell(k, c, ParaxialBasis::target_only(target), po).beta));

    DisorderSpec hot;
    hot.sigma_th = 0.03;
    hot.n_samples = 20;
    hot.seed = 4;
    const auto a = disorder_average(g, target, hot, o);
    const auto b = disorder_average(g, target, hot, o);
    CHECK(a.samples == b.samples);
    CHECK(a.mean_beta < clean.mean_beta);
    CHECK(a.std_error > 0.0);

    DisorderSpec bad;
    bad.defect_fraction = 2.0;
    CHECK_THROWS_AS(disorder_average(g, target, bad, o), std::invalid_argument);
}

TEST_CASE("random ensemble helpers") {
    const double w = waist_for_optical_depth(4.0, 2.0);
    CHECK(random_box_optical_depth(2.0, w) == doctest::Approx(4.0).epsilon(1e-12));
    EnsembleOptions o;
    o.n_seeds = 4;
    const auto e = random_ensemble_beta(2.0, o);
    CHECK(e.mean_beta > 0.0);
    CHECK(e.mean_beta < 1.0);
    CHECK(e.mean_atoms == doctest::Approx(static_cast<double>(random_box(2.0, e.waist).n_atoms)));
}
