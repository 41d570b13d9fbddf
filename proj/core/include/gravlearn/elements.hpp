// Cartesian state / Keplerian element conversions and the instantaneous
// normalized Keplerian period.
#pragma once

#include <Eigen/Dense>

#include "gravlearn/gravity_field.hpp"

namespace gravlearn {

struct CartesianState {
    Vec3 position = Vec3::Zero();
    Vec3 velocity = Vec3::Zero();
};

/// Osculating elements. Angles in radians, stored in [0, 2pi).
struct KeplerianElements {
    double semi_major = 1.0;
    double eccentricity = 0.0;
    double inclination = 0.0;
    double raan = 0.0;
    double arg_perigee = 0.0;
    double true_anomaly = 0.0;
};

/// tau = 2 pi sqrt(a^3 / mu). Throws std::domain_error on nonpositive input.
double keplerian_period(double semi_major, double mu);

/// Perifocal construction rotated by raan, inclination, arg_perigee.
/// Throws std::invalid_argument for e >= 1 (unsupported orbit).
CartesianState elements_to_state(const KeplerianElements& el, double mu);

/// Osculating-element extraction. Degenerate conventions: e < 1e-8 sets
/// arg_perigee = 0 with true anomaly measured from the ascending node;
/// sin(i) < 1e-8 sets raan = 0.
/// Throws std::invalid_argument for unbound states (energy >= 0) and
/// std::domain_error for zero angular momentum.
KeplerianElements state_to_elements(const CartesianState& state, double mu);

/// Osculating semi-major axis from vis-viva. Throws std::invalid_argument for
/// unbound states.
double osculating_semi_major(const CartesianState& state, double mu);

/// Wraps an angle into [0, 2pi).
double wrap_angle(double theta);

} // namespace gravlearn
