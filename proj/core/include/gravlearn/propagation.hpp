// Fixed-step RK4 propagation with even-in-time sampling and Brillouin-sphere
// collision screening.
#pragma once

#include <vector>

#include "gravlearn/elements.hpp"
#include "gravlearn/gravity_field.hpp"

namespace gravlearn {

/// Propagation length and sampling cadence, in units of the instantaneous
/// Keplerian period tau of the initial condition.
struct TrajectorySpec {
    double n_periods = 1.0;
    int samples_per_period = 25;
    // Lower bound on internal RK4 steps per period; the actual step divides
    // the sampling interval evenly so samples land exactly on step boundaries.
    int steps_per_period = 1000;

    void validate() const;
    /// ceil(n_periods * samples_per_period); always >= 2 for a valid spec.
    int sample_count() const;
};

struct SampledTrajectory {
    double base_period = 0.0; // tau of the initial condition
    std::vector<double> times;
    std::vector<CartesianState> states;
    std::vector<Vec3> true_accelerations;

    std::size_t size() const { return times.size(); }
};

/// One classical RK4 step of xdot = v, vdot = acceleration(field, x).
CartesianState rk4_step(const ZonalGravityField& field, const CartesianState& state,
                        double h);

/// Integrates n_periods * tau with fixed internal steps and emits samples at
/// even spacing tau / samples_per_period, starting at the initial condition.
/// True accelerations are evaluated analytically at the sampled positions.
SampledTrajectory propagate_and_sample(const ZonalGravityField& field,
                                       const CartesianState& state0,
                                       const TrajectorySpec& spec);

/// True iff any internal integration step over screen_periods * tau enters
/// |position| < collision_radius. Every internal step is checked, not just
/// sample points.
bool classify_collision(const ZonalGravityField& field, const CartesianState& state0,
                        double screen_periods = 50.0, double collision_radius = 1.0,
                        int steps_per_period = 1000);

} // namespace gravlearn
