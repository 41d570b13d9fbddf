#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "gravlearn/gravity_field.hpp"
#include "gravlearn/rng.hpp"

using namespace gravlearn;

namespace {

// Central finite difference of the potential, step 1e-6.
Vec3 fd_acceleration(const ZonalGravityField& field, const Vec3& x, double h = 1e-6) {
    Vec3 g;
    for (int k = 0; k < 3; ++k) {
        Vec3 hi = x, lo = x;
        hi[k] += h;
        lo[k] -= h;
        g[k] = (potential(field, hi) - potential(field, lo)) / (2.0 * h);
    }
    return g;
}

// Independent oracle for the zonal potential: explicit Legendre polynomials
// and per-term summation, no shared code with the implementation.
double oracle_potential(const ZonalGravityField& field, const Vec3& x) {
    const double r = x.norm();
    const double s = x.z() / r;
    const auto p = [s](int n) {
        switch (n) {
        case 2: return 0.5 * (3 * s * s - 1);
        case 3: return 0.5 * (5 * s * s * s - 3 * s);
        case 4: return 0.125 * (35 * s * s * s * s - 30 * s * s + 3);
        case 5: return 0.125 * (63 * std::pow(s, 5) - 70 * s * s * s + 15 * s);
        default: throw std::logic_error("oracle limited to n in [2,5]");
        }
    };
    double sum = 1.0;
    for (const auto& [n, jt] : field.normalized_zonals)
        sum -= std::sqrt(2.0 * n + 1.0) * jt * std::pow(field.reference_radius / r, n) * p(n);
    return field.mu / r * sum;
}

Vec3 random_position(Rng& rng, double r_lo, double r_hi, double polar_cone = 0.0) {
    for (;;) {
        const double u = rng.uniform(-1.0, 1.0);
        const double phi = rng.uniform(0.0, 2.0 * M_PI);
        const double r = rng.uniform(r_lo, r_hi);
        const double s = std::sqrt(1.0 - u * u);
        const Vec3 x(r * s * std::cos(phi), r * s * std::sin(phi), r * u);
        if (polar_cone > 0.0 && std::acos(std::abs(u)) < polar_cone) continue;
        return x;
    }
}

} // namespace

TEST_CASE("legendre recurrence values and derivatives") {
    auto [p0, d0] = legendre(0, 0.7);
    CHECK(p0 == 1.0);
    CHECK(d0 == 0.0);

    auto [p1, d1] = legendre(1, -0.3);
    CHECK(p1 == doctest::Approx(-0.3));
    CHECK(d1 == doctest::Approx(1.0));

    auto [p2, d2] = legendre(2, 0.5);
    CHECK(p2 == doctest::Approx(-0.125));
    CHECK(d2 == doctest::Approx(1.5));

    // Spot checks against closed forms up to n = 5.
    Rng rng(7);
    for (int i = 0; i < 50; ++i) {
        const double x = rng.uniform(-1.0, 1.0);
        CHECK(legendre(3, x).value ==
              doctest::Approx(0.5 * (5 * x * x * x - 3 * x)).epsilon(1e-12));
        CHECK(legendre(5, x).derivative ==
              doctest::Approx(0.125 * (315 * std::pow(x, 4) - 210 * x * x + 15))
                  .epsilon(1e-10));
    }

    CHECK(legendre(4, 1.0).value == doctest::Approx(1.0)); // endpoint is fine
    CHECK_THROWS_AS(legendre(2, 1.5), std::invalid_argument);
    CHECK_THROWS_AS(legendre(-1, 0.0), std::invalid_argument);
}

TEST_CASE("field invariants are validated") {
    CHECK_NOTHROW(ZonalGravityField::bennu_normalized().validate());
    ZonalGravityField bad = ZonalGravityField::bennu_normalized();
    bad.mu = 0.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = ZonalGravityField::bennu_normalized();
    bad.normalized_zonals.push_back({2, 1.0});
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = ZonalGravityField::bennu_normalized();
    bad.normalized_zonals.push_back({1, 1.0});
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("potential: point mass, far field, Bennu reference value") {
    const auto pm = ZonalGravityField::point_mass();
    CHECK(potential(pm, {1, 0, 0}) == doctest::Approx(1.0));
    CHECK_THROWS_AS(potential(pm, Vec3::Zero()), std::domain_error);

    const auto bennu = ZonalGravityField::bennu_normalized();
    CHECK(std::abs(potential(bennu, {1e6, 0, 0})) < 2e-6);
    CHECK(std::abs(potential(bennu, {0, 5e5, 8e5})) < 2e-6);

    // Independent term-by-term oracle at (1.5, 0, 0).
    const Vec3 x(1.5, 0, 0);
    const double expected = oracle_potential(bennu, x);
    CHECK(potential(bennu, x) == doctest::Approx(expected).epsilon(1e-13));
    CHECK(expected == doctest::Approx(0.674023).epsilon(1e-5));

    Rng rng(11);
    for (int i = 0; i < 200; ++i) {
        const Vec3 pos = random_position(rng, 1.05, 5.0);
        CHECK(potential(bennu, pos) == doctest::Approx(oracle_potential(bennu, pos)).epsilon(1e-12));
    }
}

TEST_CASE("zonal term potential decomposes the field") {
    const auto bennu = ZonalGravityField::bennu_normalized();

    // P3(0) = 0: the n = 3 term vanishes on the equator.
    CHECK(zonal_term_potential(bennu, 3, {1.7, 0, 0}) == doctest::Approx(0.0));

    // Direct evaluation at (2, 0, 0): u2 = -(1/2) (sqrt5 * 0.0193) (1/4) (-1/2).
    const double u2 = zonal_term_potential(bennu, 2, {2, 0, 0});
    const double u2_oracle = 0.5 * std::sqrt(5.0) * 0.0193 * 0.25 * 0.5;
    CHECK(u2 == doctest::Approx(u2_oracle).epsilon(1e-13));
    CHECK(u2 == doctest::Approx(2.697e-3).epsilon(1e-3));

    CHECK_THROWS_AS(zonal_term_potential(bennu, 6, {2, 0, 0}), std::out_of_range);

    // Decomposition identity: U = mu/r + sum_n u_n, to 1e-12 relative.
    Rng rng(13);
    for (int i = 0; i < 100; ++i) {
        const Vec3 x = random_position(rng, 1.05, 5.0);
        double sum = bennu.mu / x.norm();
        for (const auto& [n, jt] : bennu.normalized_zonals)
            sum += zonal_term_potential(bennu, n, x);
        CHECK(potential(bennu, x) == doctest::Approx(sum).epsilon(1e-12));
    }
}

TEST_CASE("acceleration: point-mass closed form is exact") {
    const auto pm = ZonalGravityField::point_mass();
    const Vec3 a1 = acceleration(pm, {1, 0, 0});
    CHECK(a1.x() == doctest::Approx(-1.0));
    CHECK(a1.y() == 0.0);
    CHECK(a1.z() == 0.0);

    const Vec3 a2 = acceleration(pm, {0, 0, 2});
    CHECK(a2.z() == doctest::Approx(-0.25));

    Rng rng(17);
    for (int i = 0; i < 100; ++i) {
        const Vec3 x = random_position(rng, 0.5, 10.0);
        const Vec3 expected = -pm.mu * x / std::pow(x.norm(), 3);
        const Vec3 got = acceleration(pm, x);
        for (int k = 0; k < 3; ++k)
            CHECK(got[k] == doctest::Approx(expected[k]).epsilon(1e-14));
    }
    CHECK_THROWS_AS(acceleration(pm, Vec3::Zero()), std::domain_error);
}

TEST_CASE("acceleration matches finite differences of the potential") {
    const auto bennu = ZonalGravityField::bennu_normalized();

    // Polar-axis point from the reference examples.
    const Vec3 pole(0, 0, 1.5);
    const Vec3 a_pole = acceleration(bennu, pole);
    const Vec3 fd_pole = fd_acceleration(bennu, pole);
    CHECK((a_pole - fd_pole).norm() <= 1e-5 * a_pole.norm());

    // 100 random positions, r in [1.05, 5], outside a 1e-3 rad polar cone.
    Rng rng(19);
    for (int i = 0; i < 100; ++i) {
        const Vec3 x = random_position(rng, 1.05, 5.0, 1e-3);
        const Vec3 a = acceleration(bennu, x);
        const Vec3 fd = fd_acceleration(bennu, x);
        CHECK((a - fd).norm() <= 1e-6 * a.norm());
    }
}

TEST_CASE("potential and acceleration magnitude are axisymmetric") {
    const auto bennu = ZonalGravityField::bennu_normalized();
    Rng rng(23);
    for (int i = 0; i < 50; ++i) {
        const Vec3 x = random_position(rng, 1.05, 4.0);
        const double angle = rng.uniform(0.0, 2.0 * M_PI);
        const Vec3 xr = Eigen::AngleAxisd(angle, Vec3::UnitZ()) * x;
        CHECK(potential(bennu, xr) == doctest::Approx(potential(bennu, x)).epsilon(1e-12));
        CHECK(acceleration(bennu, xr).norm() ==
              doctest::Approx(acceleration(bennu, x).norm()).epsilon(1e-12));
    }
}

TEST_CASE("influence radius: closed form, Legendre roots, fraction scaling") {
    const auto bennu_m = ZonalGravityField::bennu_physical();

    // n = 2 at the pole, 10% of the Hill-radius potential.
    InfluenceQuery q{2, 0.0, 0.1, 31000.0};
    const auto r = influence_radius(bennu_m, q);
    REQUIRE(r.has_value());
    const double j2 = std::sqrt(5.0) * 0.0193;
    const double oracle = std::cbrt(j2 * 290.0 * 290.0 * 1.0 * 31000.0 / 0.1);
    CHECK(*r == doctest::Approx(oracle).epsilon(1e-12));
    CHECK(*r == doctest::Approx(1.04e3).epsilon(0.01));

    // P3(cos(pi/2)) = 0: no finite solution.
    InfluenceQuery root_query{3, M_PI / 2.0, 0.1, 31000.0};
    CHECK_FALSE(influence_radius(bennu_m, root_query).has_value());

    // Doubling the fraction scales the radius by 2^(-1/(n+1)).
    Rng rng(29);
    for (int i = 0; i < 20; ++i) {
        InfluenceQuery a{2 + static_cast<int>(rng.uniform() * 4), rng.uniform(0.1, 3.0),
                         rng.uniform(0.05, 0.4), 31000.0};
        InfluenceQuery b = a;
        b.fraction = 2.0 * a.fraction;
        const auto ra = influence_radius(bennu_m, a);
        const auto rb = influence_radius(bennu_m, b);
        if (!ra || !rb) continue;
        const double expected = *ra * std::pow(2.0, -1.0 / (a.degree + 1.0));
        CHECK(*rb == doctest::Approx(expected).epsilon(1e-12));
    }

    InfluenceQuery bad = q;
    bad.fraction = 0.0;
    CHECK_THROWS_AS(influence_radius(bennu_m, bad), std::invalid_argument);
    bad = q;
    bad.degree = 7;
    CHECK_THROWS_AS(influence_radius(bennu_m, bad), std::out_of_range);
}
