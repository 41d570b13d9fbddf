#include "gravlearn/propagation.hpp"

#include <cmath>
#include <stdexcept>

namespace gravlearn {

void TrajectorySpec::validate() const {
    if (!(n_periods > 0.0))
        throw std::invalid_argument("trajectory spec: n_periods must be > 0");
    if (samples_per_period < 1)
        throw std::invalid_argument("trajectory spec: samples_per_period must be >= 1");
    if (steps_per_period < 1)
        throw std::invalid_argument("trajectory spec: steps_per_period must be >= 1");
    if (sample_count() < 2)
        throw std::invalid_argument("trajectory spec: total sample count must be >= 2");
}

int TrajectorySpec::sample_count() const {
    return static_cast<int>(std::ceil(n_periods * samples_per_period));
}

CartesianState rk4_step(const ZonalGravityField& field, const CartesianState& state,
                        double h) {
    if (!(h > 0.0)) throw std::invalid_argument("rk4_step: h must be > 0");

    const Vec3 k1x = state.velocity;
    const Vec3 k1v = acceleration(field, state.position);

    const Vec3 k2x = state.velocity + 0.5 * h * k1v;
    const Vec3 k2v = acceleration(field, state.position + 0.5 * h * k1x);

    const Vec3 k3x = state.velocity + 0.5 * h * k2v;
    const Vec3 k3v = acceleration(field, state.position + 0.5 * h * k2x);

    const Vec3 k4x = state.velocity + h * k3v;
    const Vec3 k4v = acceleration(field, state.position + h * k3x);

    return {state.position + h / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x),
            state.velocity + h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)};
}

SampledTrajectory propagate_and_sample(const ZonalGravityField& field,
                                       const CartesianState& state0,
                                       const TrajectorySpec& spec) {
    spec.validate();
    const double tau = keplerian_period(osculating_semi_major(state0, field.mu), field.mu);
    const double dt = tau / spec.samples_per_period;
    // Substeps per sampling interval, so samples land exactly on step
    // boundaries while the step stays <= tau / steps_per_period.
    const int substeps = (spec.steps_per_period + spec.samples_per_period - 1) /
                         spec.samples_per_period;
    const double h = dt / substeps;
    const int count = spec.sample_count();

    SampledTrajectory traj;
    traj.base_period = tau;
    traj.times.reserve(count);
    traj.states.reserve(count);
    traj.true_accelerations.reserve(count);

    CartesianState s = state0;
    for (int k = 0; k < count; ++k) {
        if (k > 0)
            for (int m = 0; m < substeps; ++m) s = rk4_step(field, s, h);
        traj.times.push_back(k * dt);
        traj.states.push_back(s);
        traj.true_accelerations.push_back(acceleration(field, s.position));
    }
    return traj;
}

bool classify_collision(const ZonalGravityField& field, const CartesianState& state0,
                        double screen_periods, double collision_radius,
                        int steps_per_period) {
    if (collision_radius < 0.0)
        throw std::invalid_argument("classify_collision: collision_radius must be >= 0");
    if (state0.position.norm() < collision_radius) return true;
    if (!(screen_periods > 0.0)) return false;

    const double tau = keplerian_period(osculating_semi_major(state0, field.mu), field.mu);
    const double h = tau / steps_per_period;
    const long steps = static_cast<long>(std::ceil(screen_periods * steps_per_period));

    CartesianState s = state0;
    for (long i = 0; i < steps; ++i) {
        s = rk4_step(field, s, h);
        if (s.position.norm() < collision_radius) return true;
    }
    return false;
}

} // namespace gravlearn
