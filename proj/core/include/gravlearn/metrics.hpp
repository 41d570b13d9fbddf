// Fractional errors, safety and robustness statistics, and the log-log
// train/test error-correlation fits.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gravlearn/dataset.hpp"
#include "gravlearn/regressor.hpp"

namespace gravlearn {

/// Per-sample fractional errors for one evaluation set, with sample radii for
/// radial error plots. Non-finite epsilons and values beyond 1e15 are excluded
/// and counted.
struct FractionalErrorSeries {
    std::string set_label; // "train" | "interp_test" | "extrap_test"
    std::vector<double> epsilon;
    std::vector<double> radius;
    int excluded_count = 0;
};

struct ErrorSummary {
    double median = 0.0;
    double q1 = 0.0;
    double q3 = 0.0;
    double min = 0.0;
    double max = 0.0;
    std::size_t count = 0;
    int excluded_count = 0;
};

/// Ordinary least squares of log10(test error) on log10(train error).
struct CorrelationFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
    std::size_t n_points = 0;
    int excluded_pairs = 0;
};

struct CharacterizationReport {
    FractionalErrorSeries train, interp, extrap;
    ErrorSummary train_summary, interp_summary, extrap_summary;
    // log10(median interp) - log10(median train); infinity() when only one
    // median is zero (reachable only by the truth-field oracle).
    double safety_gap = 0.0;
    double robustness_gap = 0.0;
    std::string model_kind;
    bool instability_flag = false;
};

/// epsilon = ||a_true - a_pred|| / ||a_true||. Throws std::domain_error for a
/// zero true acceleration (never occurs outside the origin).
double fractional_error(const Vec3& a_true, const Vec3& a_pred);

/// Predictions at the truth inputs compared against the truth targets;
/// evaluation never sees the noisy observations.
FractionalErrorSeries evaluate_set(const Regressor& model, const SampledDataset& ds,
                                   const std::string& label);

/// Order statistics with linear interpolation between ranks. Throws
/// std::invalid_argument on an empty series.
ErrorSummary summarize(const FractionalErrorSeries& series);

/// Same order statistics over a plain list (used for across-run aggregation).
ErrorSummary summarize_values(std::vector<double> values);

/// Fit of log10(test) on log10(train). Requires >= 3 usable pairs; pairs with
/// a nonpositive value are excluded and counted.
CorrelationFit loglog_fit(const std::vector<double>& train_errors,
                          const std::vector<double>& test_errors);

/// Evaluates all three bundle sets and assembles gaps and diagnostics.
CharacterizationReport characterize(const Regressor& model, const DatasetBundle& bundle);

} // namespace gravlearn
