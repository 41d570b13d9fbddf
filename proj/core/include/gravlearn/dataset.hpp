// Data engine: initial-condition sampling, collision screening, trajectory
// datasets, Gaussian noise injection, and train / interpolation-test /
// extrapolation-test bundles.
#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "gravlearn/elements.hpp"
#include "gravlearn/propagation.hpp"
#include "gravlearn/rng.hpp"

namespace gravlearn {

/// Per-element uniform sampling bounds. Angles in radians.
struct ElementRanges {
    std::pair<double, double> semi_major{1.25, 3.0};
    std::pair<double, double> eccentricity{0.05, 0.75};
    std::pair<double, double> inclination{0.0, M_PI};
    std::pair<double, double> raan{0.0, M_PI};
    std::pair<double, double> arg_perigee{0.0, M_PI};
    std::pair<double, double> true_anomaly{0.0, M_PI};

    static ElementRanges table3() { return {}; }
    void validate() const;
};

/// Zero-mean isotropic Gaussian uncertainty:
///   a_observed(x_true) = scale * a(x_true + N(0, sigma_state^2 I)) + N(0, sigma_accel^2 I)
/// with sigma_accel expressed in scaled acceleration units.
struct NoiseSpec {
    double sigma_state = 0.0;
    double sigma_accel = 0.0;
    // Constant multiplier applied to every acceleration (truth and observed)
    // before learning and noise injection.
    double accel_scale = 1.0;

    void validate() const;
    bool is_identity() const { return sigma_state == 0.0 && sigma_accel == 0.0; }
};

struct DatasetProvenance {
    std::string role; // "full" | "train" | "interp_test" | "extrap_test"
    KeplerianElements initial_condition;
    TrajectorySpec spec;
    NoiseSpec noise;
    std::uint64_t noise_seed = 0;
    std::uint64_t shuffle_seed = 0;
};

/// N (position, acceleration) pairs plus the pre-noise truth copies. Truth
/// values are retained for evaluation only and are never shown to learners.
struct SampledDataset {
    DatasetProvenance provenance;
    std::vector<double> times;
    std::vector<Vec3> inputs;        // observed positions
    std::vector<Vec3> targets;       // observed accelerations (scaled)
    std::vector<Vec3> truth_inputs;  // pre-noise positions
    std::vector<Vec3> truth_targets; // pre-noise accelerations (scaled)
    int dropped_samples = 0;         // perturbed inside the body twice

    std::size_t size() const { return inputs.size(); }
    /// 6N: three position and three acceleration values per sample.
    std::size_t data_volume() const { return 6 * size(); }
};

struct DatasetBundle {
    SampledDataset train;
    SampledDataset interp_test;
    SampledDataset extrap_test;
};

struct BundleSeeds {
    std::uint64_t noise_train = 0;
    std::uint64_t noise_extrap = 0;
    std::uint64_t shuffle = 0;
};

struct ScreenConfig {
    double screen_periods = 50.0;
    double collision_radius = 1.0;
    int steps_per_period = 1000;
};

/// One uniform draw per element from the given stream.
KeplerianElements draw_elements(Rng& rng, const ElementRanges& ranges);

/// count independent uniform draws per element; deterministic given the seed.
std::vector<KeplerianElements> sample_initial_conditions(const ElementRanges& ranges,
                                                         int count,
                                                         std::uint64_t rng_seed);

/// Partition into (collision-free, colliding), order preserved within each.
std::pair<std::vector<KeplerianElements>, std::vector<KeplerianElements>>
filter_collision_free(const ZonalGravityField& field,
                      const std::vector<KeplerianElements>& ics,
                      const ScreenConfig& screen = {});

/// Dataset from a sampled trajectory; observed values equal truth until noise
/// is injected. Accelerations are stored scaled by provenance.noise.accel_scale.
SampledDataset build_dataset(const SampledTrajectory& traj,
                             const DatasetProvenance& provenance);

/// Applies the noise model. State noise corrupts the target through the
/// physics: the field is re-evaluated at the perturbed position. A perturbed
/// position inside the body's reference sphere is resampled once and then the
/// sample is dropped (counted in dropped_samples).
SampledDataset inject_noise(const SampledDataset& ds, const NoiseSpec& noise,
                            const ZonalGravityField& field, std::uint64_t rng_seed);

/// Uniform random permutation; the first round(siphon_fraction * N) samples
/// become the interpolation test set, the rest the training set.
std::pair<SampledDataset, SampledDataset> shuffle_split(const SampledDataset& ds,
                                                        double siphon_fraction,
                                                        std::uint64_t rng_seed);

/// Full bundle: train and interp_test from ic_train; extrap_test from a
/// distinct ic_extrap with an independent noise stream. Both ICs must pass the
/// collision screen; ic_train == ic_extrap is rejected.
DatasetBundle build_bundle(const ZonalGravityField& field,
                           const KeplerianElements& ic_train,
                           const KeplerianElements& ic_extrap,
                           const TrajectorySpec& spec_train,
                           const TrajectorySpec& spec_extrap, const NoiseSpec& noise,
                           const BundleSeeds& seeds, double siphon_fraction = 0.05,
                           const ScreenConfig& screen = {});

/// Scale that puts the median acceleration magnitude over a 10^4-point uniform
/// sample of the initial-condition domain at 1.5. Uses a fixed internal seed so
/// every run of the same (field, ranges) agrees.
double compute_accel_scale(const ZonalGravityField& field, const ElementRanges& ranges);

} // namespace gravlearn
