#include "gravlearn/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace gravlearn {

void ElementRanges::validate() const {
    const auto check = [](const std::pair<double, double>& b, const char* name,
                          bool angle) {
        if (!(b.first <= b.second))
            throw std::invalid_argument(std::string("element ranges: lower > upper for ") + name);
        if (angle && (b.first < 0.0 || b.second > 2.0 * M_PI))
            throw std::invalid_argument(std::string("element ranges: angle bounds outside [0, 360 deg] for ") + name);
    };
    check(semi_major, "semi_major", false);
    check(eccentricity, "eccentricity", false);
    if (semi_major.first <= 0.0)
        throw std::invalid_argument("element ranges: semi_major must be positive");
    if (eccentricity.first < 0.0 || eccentricity.second >= 1.0)
        throw std::invalid_argument("element ranges: eccentricity must stay in [0, 1)");
    check(inclination, "inclination", true);
    check(raan, "raan", true);
    check(arg_perigee, "arg_perigee", true);
    check(true_anomaly, "true_anomaly", true);
}

void NoiseSpec::validate() const {
    if (sigma_state < 0.0 || sigma_accel < 0.0)
        throw std::invalid_argument("noise spec: sigmas must be >= 0");
    if (!(accel_scale > 0.0))
        throw std::invalid_argument("noise spec: accel_scale must be > 0");
}

KeplerianElements draw_elements(Rng& rng, const ElementRanges& ranges) {
    KeplerianElements el;
    el.semi_major = rng.uniform(ranges.semi_major.first, ranges.semi_major.second);
    el.eccentricity = rng.uniform(ranges.eccentricity.first, ranges.eccentricity.second);
    el.inclination = rng.uniform(ranges.inclination.first, ranges.inclination.second);
    el.raan = rng.uniform(ranges.raan.first, ranges.raan.second);
    el.arg_perigee = rng.uniform(ranges.arg_perigee.first, ranges.arg_perigee.second);
    el.true_anomaly = rng.uniform(ranges.true_anomaly.first, ranges.true_anomaly.second);
    return el;
}

std::vector<KeplerianElements> sample_initial_conditions(const ElementRanges& ranges,
                                                         int count,
                                                         std::uint64_t rng_seed) {
    ranges.validate();
    if (count < 0) throw std::invalid_argument("sample_initial_conditions: count must be >= 0");
    Rng rng(rng_seed);
    std::vector<KeplerianElements> out;
    out.reserve(count);
    for (int i = 0; i < count; ++i) out.push_back(draw_elements(rng, ranges));
    return out;
}

std::pair<std::vector<KeplerianElements>, std::vector<KeplerianElements>>
filter_collision_free(const ZonalGravityField& field,
                      const std::vector<KeplerianElements>& ics,
                      const ScreenConfig& screen) {
    std::vector<KeplerianElements> free, colliding;
    for (const auto& ic : ics) {
        const CartesianState s0 = elements_to_state(ic, field.mu);
        if (classify_collision(field, s0, screen.screen_periods, screen.collision_radius,
                               screen.steps_per_period))
            colliding.push_back(ic);
        else
            free.push_back(ic);
    }
    return {std::move(free), std::move(colliding)};
}

SampledDataset build_dataset(const SampledTrajectory& traj,
                             const DatasetProvenance& provenance) {
    provenance.noise.validate();
    const double scale = provenance.noise.accel_scale;
    SampledDataset ds;
    ds.provenance = provenance;
    ds.times = traj.times;
    ds.inputs.reserve(traj.size());
    ds.targets.reserve(traj.size());
    for (std::size_t i = 0; i < traj.size(); ++i) {
        ds.inputs.push_back(traj.states[i].position);
        ds.targets.push_back(scale * traj.true_accelerations[i]);
    }
    ds.truth_inputs = ds.inputs;
    ds.truth_targets = ds.targets;
    return ds;
}

SampledDataset inject_noise(const SampledDataset& ds, const NoiseSpec& noise,
                            const ZonalGravityField& field, std::uint64_t rng_seed) {
    noise.validate();
    Rng rng(rng_seed);
    const double scale = noise.accel_scale;

    SampledDataset out;
    out.provenance = ds.provenance;
    out.provenance.noise = noise;
    out.provenance.noise_seed = rng_seed;
    out.times.reserve(ds.size());
    out.inputs.reserve(ds.size());
    out.targets.reserve(ds.size());
    out.truth_inputs.reserve(ds.size());
    out.truth_targets.reserve(ds.size());
    out.dropped_samples = ds.dropped_samples;

    const auto draw3 = [&rng]() { return Vec3(rng.normal(), rng.normal(), rng.normal()); };

    for (std::size_t i = 0; i < ds.size(); ++i) {
        Vec3 x_obs = ds.truth_inputs[i] + noise.sigma_state * draw3();
        if (x_obs.norm() < field.reference_radius) {
            // Eq-style noise is undefined inside the body: resample once, then
            // drop the sample.
            x_obs = ds.truth_inputs[i] + noise.sigma_state * draw3();
            if (x_obs.norm() < field.reference_radius) {
                ++out.dropped_samples;
                continue;
            }
        }
        const Vec3 a_obs = scale * acceleration(field, x_obs) + noise.sigma_accel * draw3();
        out.times.push_back(ds.times[i]);
        out.inputs.push_back(x_obs);
        out.targets.push_back(a_obs);
        out.truth_inputs.push_back(ds.truth_inputs[i]);
        out.truth_targets.push_back(ds.truth_targets[i]);
    }
    return out;
}

std::pair<SampledDataset, SampledDataset> shuffle_split(const SampledDataset& ds,
                                                        double siphon_fraction,
                                                        std::uint64_t rng_seed) {
    if (!(siphon_fraction > 0.0 && siphon_fraction < 1.0))
        throw std::invalid_argument("shuffle_split: siphon_fraction must be in (0, 1)");
    const std::size_t n = ds.size();
    if (n < 2) throw std::invalid_argument("shuffle_split: need at least 2 samples");

    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    Rng rng(rng_seed);
    for (std::size_t i = n - 1; i > 0; --i) {
        auto j = static_cast<std::size_t>(rng.uniform() * static_cast<double>(i + 1));
        if (j > i) j = i;
        std::swap(perm[i], perm[j]);
    }

    const auto n_test = static_cast<std::size_t>(std::lround(siphon_fraction * static_cast<double>(n)));

    const auto gather = [&](std::size_t begin, std::size_t end, const char* role) {
        SampledDataset part;
        part.provenance = ds.provenance;
        part.provenance.role = role;
        part.provenance.shuffle_seed = rng_seed;
        part.dropped_samples = ds.dropped_samples;
        for (std::size_t k = begin; k < end; ++k) {
            const std::size_t i = perm[k];
            part.times.push_back(ds.times[i]);
            part.inputs.push_back(ds.inputs[i]);
            part.targets.push_back(ds.targets[i]);
            part.truth_inputs.push_back(ds.truth_inputs[i]);
            part.truth_targets.push_back(ds.truth_targets[i]);
        }
        return part;
    };

    SampledDataset interp = gather(0, n_test, "interp_test");
    SampledDataset train = gather(n_test, n, "train");
    return {std::move(train), std::move(interp)};
}

namespace {

bool same_elements(const KeplerianElements& a, const KeplerianElements& b) {
    return a.semi_major == b.semi_major && a.eccentricity == b.eccentricity &&
           a.inclination == b.inclination && a.raan == b.raan &&
           a.arg_perigee == b.arg_perigee && a.true_anomaly == b.true_anomaly;
}

} // namespace

DatasetBundle build_bundle(const ZonalGravityField& field,
                           const KeplerianElements& ic_train,
                           const KeplerianElements& ic_extrap,
                           const TrajectorySpec& spec_train,
                           const TrajectorySpec& spec_extrap, const NoiseSpec& noise,
                           const BundleSeeds& seeds, double siphon_fraction,
                           const ScreenConfig& screen) {
    if (same_elements(ic_train, ic_extrap))
        throw std::invalid_argument("build_bundle: extrapolation IC must differ from training IC");

    const CartesianState s0_train = elements_to_state(ic_train, field.mu);
    const CartesianState s0_extrap = elements_to_state(ic_extrap, field.mu);
    if (classify_collision(field, s0_train, screen.screen_periods, screen.collision_radius,
                           screen.steps_per_period))
        throw std::invalid_argument("build_bundle: training IC fails the collision screen");
    if (classify_collision(field, s0_extrap, screen.screen_periods, screen.collision_radius,
                           screen.steps_per_period))
        throw std::invalid_argument("build_bundle: extrapolation IC fails the collision screen");

    DatasetProvenance prov_train{"full", ic_train, spec_train, noise, 0, 0};
    const SampledTrajectory traj_train = propagate_and_sample(field, s0_train, spec_train);
    SampledDataset full = inject_noise(build_dataset(traj_train, prov_train), noise, field,
                                       seeds.noise_train);

    DatasetBundle bundle;
    auto [train, interp] = shuffle_split(full, siphon_fraction, seeds.shuffle);
    bundle.train = std::move(train);
    bundle.interp_test = std::move(interp);

    DatasetProvenance prov_extrap{"extrap_test", ic_extrap, spec_extrap, noise, 0, 0};
    const SampledTrajectory traj_extrap = propagate_and_sample(field, s0_extrap, spec_extrap);
    bundle.extrap_test = inject_noise(build_dataset(traj_extrap, prov_extrap), noise, field,
                                      seeds.noise_extrap);
    bundle.extrap_test.provenance.role = "extrap_test";
    return bundle;
}

double compute_accel_scale(const ZonalGravityField& field, const ElementRanges& ranges) {
    // Fixed stream: the scale is a property of the (field, ranges) context.
    constexpr std::uint64_t kScaleSeed = 0x5ca1eULL;
    constexpr int kSamples = 10000;
    // Pins the median acceleration magnitude over the IC domain at 1.5, which
    // puts typical along-trajectory magnitudes near unity so sigma values in
    // [0, 1] span the no-noise-to-dominant-noise range for both the state and
    // the acceleration channel.
    constexpr double kMedianTarget = 1.5;
    const auto ics = sample_initial_conditions(ranges, kSamples, kScaleSeed);
    std::vector<double> mags;
    mags.reserve(ics.size());
    for (const auto& ic : ics) {
        const CartesianState s = elements_to_state(ic, field.mu);
        mags.push_back(acceleration(field, s.position).norm());
    }
    std::nth_element(mags.begin(), mags.begin() + mags.size() / 2, mags.end());
    const double median = mags[mags.size() / 2];
    if (!(median > 0.0))
        throw std::runtime_error("compute_accel_scale: degenerate acceleration sample");
    return kMedianTarget / median;
}

} // namespace gravlearn
