#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "qantenna/geometry.hpp"
#include "qantenna/units.hpp"

using namespace qantenna;

namespace {

bool same_positions(const ArrayGeometry& a, const ArrayGeometry& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a.positions[i] != b.positions[i]) return false;
    return true;
}

}  // namespace

TEST_CASE("regular array sizes and automatic layer spacing") {
    auto g = build_regular_array(2, 2, 0.7);
    CHECK(g.size() == 8);
    CHECK(g.spacing_longitudinal == doctest::Approx(0.75).epsilon(1e-15));

    g = build_regular_array(3, 4, 0.7);
    CHECK(g.size() == 36);
    CHECK(g.spacing_longitudinal == doctest::Approx(0.875).epsilon(1e-15));

    g = build_regular_array(1, 1, 3.0, 2.0);
    REQUIRE(g.size() == 1);
    CHECK(g.positions[0].norm() == 0.0);
}

TEST_CASE("regular array is centred and point symmetric") {
    const auto g = build_regular_array(4, 3, 0.6, 0.8);
    Vec3 c = Vec3::Zero();
    for (const auto& r : g.positions) c += r;
    CHECK((c / g.size()).norm() < 1e-14);
    for (const auto& r : g.positions) {
        const Vec3 m(-r.x(), -r.y(), r.z());
        const bool found = std::any_of(g.positions.begin(), g.positions.end(),
                                       [&](const Vec3& s) { return (s - m).norm() < 1e-14; });
        CHECK(found);
    }
    CHECK(g.transverse_extent() == doctest::Approx(2.4));
}

TEST_CASE("regular array rejects bad dimensions") {
    CHECK_THROWS_AS(build_regular_array(0, 2, 0.7), std::invalid_argument);
    CHECK_THROWS_AS(build_regular_array(2, 0, 0.7), std::invalid_argument);
    CHECK_THROWS_AS(build_regular_array(2, 2, -0.7), std::invalid_argument);
    CHECK_THROWS_AS(build_regular_array(2, 2, 0.7, 0.0), std::invalid_argument);
}

TEST_CASE("defects remove round(f N) atoms deterministically") {
    const auto g = build_regular_array(10, 2, 0.7);
    REQUIRE(g.size() == 200);
    CHECK(same_positions(apply_defects(g, 0.0, 7), g));
    const auto d1 = apply_defects(g, 0.10, 7);
    const auto d2 = apply_defects(g, 0.10, 7);
    CHECK(d1.size() == 180);
    CHECK(same_positions(d1, d2));
    CHECK_FALSE(same_positions(d1, apply_defects(g, 0.10, 8)));
    // ties round half-up: 0.0025 * 200 = 0.5 -> 1
    CHECK(apply_defects(g, 0.0025, 1).size() == 199);
    CHECK(apply_defects(g, 1.0, 1).size() == 0);
    CHECK_THROWS_AS(apply_defects(g, 1.5, 1), std::invalid_argument);

    // survivors are a subset, unmoved, without duplicates
    std::set<std::tuple<double, double, double>> all, kept;
    for (const auto& r : g.positions) all.emplace(r.x(), r.y(), r.z());
    for (const auto& r : d1.positions) kept.emplace(r.x(), r.y(), r.z());
    CHECK(kept.size() == d1.size());
    for (const auto& k : kept) CHECK(all.count(k) == 1);
    CHECK(d1.label.find("seed=7") != std::string::npos);
}

TEST_CASE("thermal disorder statistics") {
    CHECK(same_positions(apply_disorder(build_regular_array(3, 2, 0.7), 0.0, 3),
                         build_regular_array(3, 2, 0.7)));

    ArrayGeometry g;
    g.positions.assign(10000, Vec3::Zero());
    const double sigma = 0.02;
    const auto d = apply_disorder(g, sigma, 11);
    double sum = 0.0, sum2 = 0.0;
    const double n = 3.0 * d.size();
    for (const auto& r : d.positions)
        for (int c = 0; c < 3; ++c) {
            sum += r[c];
            sum2 += r[c] * r[c];
        }
    const double mean = sum / n;
    const double sd = std::sqrt(sum2 / n - mean * mean);
    CHECK(std::abs(mean) <= 3.0 * sigma / std::sqrt(n));
    // standard error of a sample standard deviation: sigma / sqrt(2n)
    CHECK(std::abs(sd - sigma) <= 3.0 * sigma / std::sqrt(2.0 * n));
}

TEST_CASE("disorder commutes with rigid translation") {
    auto g = build_regular_array(4, 2, 0.7);
    const Vec3 shift(1.5, -2.25, 40.0);
    auto a = apply_disorder(g, 0.05, 99);
    a.translate(shift);
    auto t = g;
    t.translate(shift);
    const auto b = apply_disorder(t, 0.05, 99);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK((a.positions[i] - b.positions[i]).norm() < 1e-12);
}

TEST_CASE("random ensemble box and atom count") {
    const double n_a = 2.0, w0 = 1.3;
    const double S = kPi * w0 * w0;
    const auto box = random_box(n_a, w0);
    CHECK(box.n_atoms == static_cast<std::size_t>(std::floor(2.0 * n_a * S * S / kWavelength + 0.5)));
    const auto g = sample_random_ensemble(n_a, w0, 5);
    CHECK(g.size() == box.n_atoms);
    for (const auto& r : g.positions) {
        CHECK(std::abs(r.x()) <= 0.5 * box.transverse_side);
        CHECK(std::abs(r.y()) <= 0.5 * box.transverse_side);
        CHECK(std::abs(r.z()) <= 0.5 * box.length);
    }
    CHECK_THROWS_AS(sample_random_ensemble(1e-6, 0.3, 1), std::invalid_argument);
    CHECK_THROWS_AS(sample_random_ensemble(-1.0, 1.0, 1), std::invalid_argument);
}

TEST_CASE("random ensemble empirical density") {
    // Count atoms in a sub-box over 100 seeds.
    const double n_a = 2.0, w0 = 1.0;
    const auto box = random_box(n_a, w0);
    const double half = 0.25 * box.transverse_side, hz = 0.25 * box.length;
    double count = 0.0;
    for (int s = 0; s < 100; ++s)
        for (const auto& r : sample_random_ensemble(n_a, w0, 1000 + s).positions)
            if (std::abs(r.x()) < half && std::abs(r.y()) < half && std::abs(r.z()) < hz) count += 1.0;
    const double volume = (2 * half) * (2 * half) * (2 * hz);
    CHECK(count / (100.0 * volume) == doctest::Approx(n_a).epsilon(0.05));
}

TEST_CASE("random ensemble with a wider transverse box keeps the density") {
    const auto box = random_box(2.0, 1.0, 4.0);
    CHECK(box.transverse_side == 4.0);
    CHECK(box.n_atoms == static_cast<std::size_t>(std::floor(2.0 * 16.0 * box.length + 0.5)));
}

TEST_CASE("geometry text table round trip") {
    auto g = apply_disorder(build_regular_array(3, 2, 0.7), 0.01, 4);
    std::stringstream ss;
    write_geometry(ss, g);
    const auto r = read_geometry(ss);
    CHECK(r.label == g.label);
    CHECK(r.n_transverse == 3);
    CHECK(r.n_layers == 2);
    CHECK(r.spacing_transverse == g.spacing_transverse);
    CHECK(r.spacing_longitudinal == g.spacing_longitudinal);
    CHECK(same_positions(r, g));
}
