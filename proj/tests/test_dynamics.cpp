#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "gravlearn/dataset.hpp"
#include "gravlearn/propagation.hpp"
#include "gravlearn/rng.hpp"

using namespace gravlearn;

namespace {

const ZonalGravityField kPointMass = ZonalGravityField::point_mass();
const ZonalGravityField kBennu = ZonalGravityField::bennu_normalized();

CartesianState circular_state() { return {{1, 0, 0}, {0, 1, 0}}; }

double specific_energy(const ZonalGravityField& field, const CartesianState& s) {
    return 0.5 * s.velocity.squaredNorm() - potential(field, s.position);
}

} // namespace

TEST_CASE("keplerian period") {
    CHECK(keplerian_period(1.0, 1.0) == doctest::Approx(2.0 * M_PI));
    CHECK(keplerian_period(1.25, 1.0) == doctest::Approx(2.0 * M_PI * std::pow(1.25, 1.5)));
    // Bennu-scale physical units: a = 580 m, mu = 4.89 m^3/s^2.
    CHECK(keplerian_period(580.0, 4.89) ==
          doctest::Approx(2.0 * M_PI * std::sqrt(580.0 * 580.0 * 580.0 / 4.89)));
    CHECK(keplerian_period(580.0, 4.89) == doctest::Approx(3.97e4).epsilon(0.01));
    CHECK_THROWS_AS(keplerian_period(0.0, 1.0), std::domain_error);
    CHECK_THROWS_AS(keplerian_period(1.0, -1.0), std::domain_error);
}

TEST_CASE("elements_to_state: canonical orbits") {
    KeplerianElements circ{1.0, 0.0, 0.0, 0.0, 0.0, 0.0};
    const CartesianState s = elements_to_state(circ, 1.0);
    CHECK(s.position.isApprox(Vec3(1, 0, 0), 1e-14));
    CHECK(s.velocity.isApprox(Vec3(0, 1, 0), 1e-14));

    KeplerianElements polar = circ;
    polar.inclination = M_PI / 2.0;
    const CartesianState sp = elements_to_state(polar, 1.0);
    CHECK(sp.position.isApprox(Vec3(1, 0, 0), 1e-14));
    CHECK(sp.velocity.isApprox(Vec3(0, 0, 1), 1e-14));

    KeplerianElements hyper = circ;
    hyper.eccentricity = 1.0;
    CHECK_THROWS_AS(elements_to_state(hyper, 1.0), std::invalid_argument);
}

TEST_CASE("state_to_elements: vis-viva and eccentricity vector") {
    const auto el = state_to_elements(circular_state(), 1.0);
    CHECK(el.semi_major == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(el.eccentricity == doctest::Approx(0.0).epsilon(1e-12));

    const auto el2 = state_to_elements({{1, 0, 0}, {0, 1.1, 0}}, 1.0);
    CHECK(el2.semi_major == doctest::Approx(1.0 / (2.0 - 1.21)).epsilon(1e-12));
    CHECK(el2.eccentricity == doctest::Approx(0.21).epsilon(1e-12));

    CHECK_THROWS_AS(state_to_elements({{1, 0, 0}, {0, 2, 0}}, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(state_to_elements({{1, 0, 0}, {-0.5, 0, 0}}, 1.0), std::domain_error);
}

TEST_CASE("element round trip over the sampling ranges") {
    const auto ranges = ElementRanges::table3();
    const auto draws = sample_initial_conditions(ranges, 1000, 99);
    for (const auto& el : draws) {
        if (el.eccentricity < 1e-8 || std::sin(el.inclination) < 1e-8) continue;
        const CartesianState s = elements_to_state(el, 1.0);
        const KeplerianElements back = state_to_elements(s, 1.0);
        CHECK(back.semi_major == doctest::Approx(el.semi_major).epsilon(1e-9));
        CHECK(back.eccentricity == doctest::Approx(el.eccentricity).epsilon(1e-9));
        CHECK(back.inclination == doctest::Approx(el.inclination).epsilon(1e-9));
        CHECK(back.raan == doctest::Approx(el.raan).epsilon(1e-9));
        CHECK(back.arg_perigee == doctest::Approx(el.arg_perigee).epsilon(1e-9));
        CHECK(back.true_anomaly == doctest::Approx(el.true_anomaly).epsilon(1e-9));
    }
}

TEST_CASE("rk4 step: continuity and circular-orbit accuracy") {
    const CartesianState s0 = circular_state();
    const CartesianState tiny = rk4_step(kPointMass, s0, 1e-8);
    CHECK((tiny.position - s0.position).norm() < 2e-8);

    const double tau = 2.0 * M_PI;
    const CartesianState one = rk4_step(kPointMass, s0, tau / 1e4);
    CHECK(std::abs(one.position.norm() - 1.0) < 1e-12);

    CHECK_THROWS_AS(rk4_step(kPointMass, s0, 0.0), std::invalid_argument);
}

TEST_CASE("rk4 order: Richardson halving on the circular orbit") {
    const double tau = 2.0 * M_PI;
    const auto end_error = [&](int steps) {
        CartesianState s = circular_state();
        const double h = tau / steps;
        for (int i = 0; i < steps; ++i) s = rk4_step(kPointMass, s, h);
        return (s.position - Vec3(1, 0, 0)).norm();
    };
    const double e200 = end_error(200);
    const double e400 = end_error(400);
    const double e800 = end_error(800);
    const double r1 = e200 / e400;
    const double r2 = e400 / e800;
    CHECK(r1 >= 14.0);
    CHECK(r1 <= 18.0);
    CHECK(r2 >= 14.0);
    CHECK(r2 <= 18.0);
    CHECK(std::log2(r1) >= 3.8);
    CHECK(std::log2(r1) <= 4.2);
}

TEST_CASE("propagate_and_sample: spacing, counts, circular radii") {
    TrajectorySpec spec{1.0, 25, 1000};
    const auto traj = propagate_and_sample(kPointMass, circular_state(), spec);
    REQUIRE(traj.size() == 25);
    const double dt = traj.base_period / 25.0;
    for (std::size_t i = 0; i + 1 < traj.size(); ++i)
        CHECK(std::abs(traj.times[i + 1] - traj.times[i] - dt) <= 1e-12 * dt);
    for (const auto& s : traj.states) CHECK(std::abs(s.position.norm() - 1.0) < 1e-8);

    // True accelerations come from the field at the sampled positions.
    for (std::size_t i = 0; i < traj.size(); ++i)
        CHECK(traj.true_accelerations[i] ==
              acceleration(kPointMass, traj.states[i].position));

    TrajectorySpec ten{10.0, 25, 1000};
    KeplerianElements el{2.0, 0.3, 0.5, 1.0, 0.5, 0.3};
    const auto long_traj =
        propagate_and_sample(kBennu, elements_to_state(el, kBennu.mu), ten);
    CHECK(long_traj.size() == 250);

    TrajectorySpec bad{0.02, 25, 1000}; // ceil(0.5) = 1 sample
    CHECK_THROWS_AS(propagate_and_sample(kPointMass, circular_state(), bad),
                    std::invalid_argument);
}

TEST_CASE("energy conservation over ten periods") {
    TrajectorySpec spec{10.0, 25, 1000};

    const CartesianState s_pm =
        elements_to_state({1.6, 0.3, 0.6, 0.4, 0.9, 0.2}, kPointMass.mu);
    const auto traj_pm = propagate_and_sample(kPointMass, s_pm, spec);
    const double e0 = specific_energy(kPointMass, traj_pm.states.front());
    for (const auto& s : traj_pm.states)
        CHECK(std::abs(specific_energy(kPointMass, s) - e0) < 1e-7 * std::abs(e0));

    const CartesianState s_zonal = elements_to_state({1.6, 0.3, 0.6, 0.4, 0.9, 0.2}, kBennu.mu);
    const auto traj_z = propagate_and_sample(kBennu, s_zonal, spec);
    const double ez0 = specific_energy(kBennu, traj_z.states.front());
    for (const auto& s : traj_z.states)
        CHECK(std::abs(specific_energy(kBennu, s) - ez0) < 1e-6 * std::abs(ez0));
}

TEST_CASE("collision screening") {
    // Keplerian periapsis 0.3125 dives inside the unit sphere within a period.
    const auto low = elements_to_state({1.25, 0.75, 0.3, 0.1, 0.2, 2.0}, kBennu.mu);
    CHECK(classify_collision(kBennu, low, 50.0, 1.0));

    // Periapsis 2.85 never comes close.
    const auto high = elements_to_state({3.0, 0.05, 0.3, 0.1, 0.2, 2.0}, kBennu.mu);
    CHECK_FALSE(classify_collision(kBennu, high, 50.0, 1.0));

    // Empty sphere never collides.
    CHECK_FALSE(classify_collision(kBennu, low, 50.0, 0.0));

    // Monotonicity in the collision radius.
    Rng rng(5);
    const auto ranges = ElementRanges::table3();
    for (int i = 0; i < 5; ++i) {
        const auto el = draw_elements(rng, ranges);
        const auto s0 = elements_to_state(el, kBennu.mu);
        if (classify_collision(kBennu, s0, 10.0, 0.8, 400))
            CHECK(classify_collision(kBennu, s0, 10.0, 1.1, 400));
    }
}
