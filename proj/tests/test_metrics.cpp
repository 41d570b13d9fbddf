#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "gravlearn/metrics.hpp"

using namespace gravlearn;

namespace {

const ZonalGravityField kBennu = ZonalGravityField::bennu_normalized();

class ZeroRegressor final : public Regressor {
public:
    std::vector<Vec3> predict(const std::vector<Vec3>& xs) const override {
        return std::vector<Vec3>(xs.size(), Vec3::Zero());
    }
    std::string kind() const override { return "zero"; }
};

DatasetBundle small_bundle(double sigma_state = 0.0, double sigma_accel = 0.0,
                           std::uint64_t noise_seed = 1) {
    const KeplerianElements ic_train{2.0, 0.3, 0.7, 0.4, 0.9, 0.2};
    const KeplerianElements ic_extrap{2.5, 0.2, 1.1, 0.8, 0.3, 1.0};
    const NoiseSpec noise{sigma_state, sigma_accel, 2.0};
    return build_bundle(kBennu, ic_train, ic_extrap, {4.0, 25, 1000}, {2.0, 25, 1000},
                        noise, {noise_seed, noise_seed + 1, 77});
}

} // namespace

TEST_CASE("fractional error: reference values and scale invariance") {
    CHECK(fractional_error({1, 0, 0}, {1.01, 0, 0}) == doctest::Approx(0.01));
    CHECK(fractional_error({2, -1, 0.5}, {2, -1, 0.5}) == 0.0);
    CHECK(fractional_error({3, 4, 0}, {0, 0, 0}) == doctest::Approx(1.0));
    CHECK_THROWS_AS(fractional_error(Vec3::Zero(), {1, 0, 0}), std::domain_error);

    // Scaling both vectors by a power of two leaves epsilon bit-identical.
    const Vec3 t(0.3, -1.7, 2.2), p(0.4, -1.5, 2.0);
    CHECK(fractional_error(4.0 * t, 4.0 * p) == fractional_error(t, p));
    CHECK(fractional_error(3.7 * t, 3.7 * p) ==
          doctest::Approx(fractional_error(t, p)).epsilon(1e-14));
}

TEST_CASE("evaluate_set: oracle models and exclusions") {
    const auto bundle = small_bundle();
    const TruthRegressor truth(kBennu, 2.0);
    const auto series = evaluate_set(truth, bundle.train, "train");
    CHECK(series.set_label == "train");
    CHECK(series.epsilon.size() == bundle.train.size());
    for (double e : series.epsilon) CHECK(e == doctest::Approx(0.0).epsilon(1e-12));

    const ZeroRegressor zero;
    const auto zs = evaluate_set(zero, bundle.train, "train");
    for (double e : zs.epsilon) CHECK(e == doctest::Approx(1.0));
    CHECK(zs.epsilon.size() + zs.excluded_count == bundle.train.size());
}

TEST_CASE("summarize: rank interpolation conventions") {
    FractionalErrorSeries s;
    s.epsilon = {1, 2, 3};
    CHECK(summarize(s).median == doctest::Approx(2.0));

    s.epsilon = {1, 1, 1, 1};
    const auto sum = summarize(s);
    CHECK(sum.q1 == 1.0);
    CHECK(sum.median == 1.0);
    CHECK(sum.q3 == 1.0);

    s.epsilon = {0.1, 10.0};
    CHECK(summarize(s).median == doctest::Approx(5.05));

    s.epsilon = {};
    CHECK_THROWS_AS(summarize(s), std::invalid_argument);
}

TEST_CASE("loglog_fit: identity, offsets, exclusions") {
    const std::vector<double> train{1e-4, 1e-3, 1e-2, 1e-1};
    const auto identity = loglog_fit(train, train);
    CHECK(identity.slope == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(identity.intercept == doctest::Approx(0.0).epsilon(1e-10));
    CHECK(identity.r_squared == doctest::Approx(1.0));

    std::vector<double> test;
    for (double v : train) test.push_back(100.0 * v);
    const auto offset = loglog_fit(train, test);
    CHECK(offset.slope == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(offset.intercept == doctest::Approx(2.0).epsilon(1e-10));
    CHECK(offset.r_squared == doctest::Approx(1.0));

    const auto partial = loglog_fit({1e-3, 0.0, 1e-2, 1e-1}, {1e-3, 1e-4, 1e-2, 1e-1});
    CHECK(partial.n_points == 3);
    CHECK(partial.excluded_pairs == 1);

    CHECK_THROWS_AS(loglog_fit({1e-3, 1e-2}, {1e-3, 1e-2}), std::invalid_argument);
}

TEST_CASE("characterize: truth oracle gives zero gaps and matching counts") {
    const auto bundle = small_bundle();
    const TruthRegressor truth(kBennu, 2.0);
    const auto report = characterize(truth, bundle);
    CHECK(report.safety_gap == 0.0);
    CHECK(report.robustness_gap == 0.0);
    CHECK(report.train_summary.count == bundle.train.size());
    CHECK(report.interp_summary.count == bundle.interp_test.size());
    CHECK(report.extrap_summary.count == bundle.extrap_test.size());
    CHECK_FALSE(report.instability_flag);

    // A model with finite error against the truth oracle's zero train median
    // would hit the +inf sentinel; both-zero stays zero by convention.
    const ZeroRegressor zero;
    const auto zr = characterize(zero, bundle);
    CHECK(std::isfinite(zr.safety_gap));
}

TEST_CASE("evaluation uses truth copies only") {
    // Bundles that differ only in their noise seeds share identical truth
    // values, so any model characterizes identically on them.
    const auto b1 = small_bundle(0.1, 0.2, 1000);
    const auto b2 = small_bundle(0.1, 0.2, 2000);
    const TruthRegressor truth(kBennu, 2.0);
    const auto r1 = characterize(truth, b1);
    const auto r2 = characterize(truth, b2);
    CHECK(r1.extrap_summary.median == r2.extrap_summary.median);
    CHECK(r1.extrap_summary.max == r2.extrap_summary.max);

    const ZeroRegressor zero;
    // The shuffle seed is shared, so even train/interp splits line up.
    const auto z1 = characterize(zero, b1);
    const auto z2 = characterize(zero, b2);
    CHECK(z1.train_summary.median == z2.train_summary.median);
    CHECK(z1.interp_summary.median == z2.interp_summary.median);
    CHECK(z1.extrap_summary.median == z2.extrap_summary.median);
}
