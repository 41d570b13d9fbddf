#include "gravlearn/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace gravlearn {

namespace {

constexpr double kEpsilonCap = 1e15; // beyond this a sample is excluded

double quantile(const std::vector<double>& sorted, double q) {
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(pos);
    if (lo + 1 >= sorted.size()) return sorted.back();
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

// Gap convention: 0 when both medians are zero, +inf when only one is.
double log_gap(double test_median, double train_median) {
    if (test_median == 0.0 && train_median == 0.0) return 0.0;
    if (test_median <= 0.0 || train_median <= 0.0)
        return std::numeric_limits<double>::infinity();
    return std::log10(test_median) - std::log10(train_median);
}

} // namespace

double fractional_error(const Vec3& a_true, const Vec3& a_pred) {
    const double denom = a_true.norm();
    if (denom == 0.0)
        throw std::domain_error("fractional_error: zero true acceleration");
    return (a_true - a_pred).norm() / denom;
}

FractionalErrorSeries evaluate_set(const Regressor& model, const SampledDataset& ds,
                                   const std::string& label) {
    FractionalErrorSeries series;
    series.set_label = label;
    const std::vector<Vec3> predictions = model.predict(ds.truth_inputs);
    series.epsilon.reserve(ds.size());
    series.radius.reserve(ds.size());
    for (std::size_t i = 0; i < ds.size(); ++i) {
        const double denom = ds.truth_targets[i].norm();
        if (denom == 0.0) {
            ++series.excluded_count;
            continue;
        }
        const double eps = (ds.truth_targets[i] - predictions[i]).norm() / denom;
        if (!std::isfinite(eps) || eps > kEpsilonCap) {
            ++series.excluded_count;
            continue;
        }
        series.epsilon.push_back(eps);
        series.radius.push_back(ds.truth_inputs[i].norm());
    }
    return series;
}

ErrorSummary summarize_values(std::vector<double> values) {
    if (values.empty()) throw std::invalid_argument("summarize: empty error series");
    std::sort(values.begin(), values.end());
    ErrorSummary s;
    s.count = values.size();
    s.min = values.front();
    s.max = values.back();
    s.q1 = quantile(values, 0.25);
    s.median = quantile(values, 0.5);
    s.q3 = quantile(values, 0.75);
    return s;
}

ErrorSummary summarize(const FractionalErrorSeries& series) {
    ErrorSummary s = summarize_values(series.epsilon);
    s.excluded_count = series.excluded_count;
    return s;
}

CorrelationFit loglog_fit(const std::vector<double>& train_errors,
                          const std::vector<double>& test_errors) {
    if (train_errors.size() != test_errors.size())
        throw std::invalid_argument("loglog_fit: mismatched list lengths");
    CorrelationFit fit;
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < train_errors.size(); ++i) {
        if (train_errors[i] > 0.0 && test_errors[i] > 0.0 &&
            std::isfinite(train_errors[i]) && std::isfinite(test_errors[i])) {
            xs.push_back(std::log10(train_errors[i]));
            ys.push_back(std::log10(test_errors[i]));
        } else {
            ++fit.excluded_pairs;
        }
    }
    if (xs.size() < 3)
        throw std::invalid_argument("loglog_fit: need at least 3 usable pairs");

    const auto n = static_cast<double>(xs.size());
    double sx = 0.0, sy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sx += xs[i];
        sy += ys[i];
    }
    const double mx = sx / n, my = sy / n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double dx = xs[i] - mx, dy = ys[i] - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if (sxx == 0.0)
        throw std::invalid_argument("loglog_fit: degenerate (constant) train errors");
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    fit.n_points = xs.size();
    if (syy == 0.0) {
        fit.r_squared = 1.0; // perfectly constant response is exactly fit
    } else {
        const double ss_res = syy - fit.slope * sxy;
        fit.r_squared = std::clamp(1.0 - ss_res / syy, 0.0, 1.0);
    }
    return fit;
}

CharacterizationReport characterize(const Regressor& model, const DatasetBundle& bundle) {
    CharacterizationReport report;
    report.model_kind = model.kind();
    report.instability_flag = model.instability_flag();
    report.train = evaluate_set(model, bundle.train, "train");
    report.interp = evaluate_set(model, bundle.interp_test, "interp_test");
    report.extrap = evaluate_set(model, bundle.extrap_test, "extrap_test");
    report.train_summary = summarize(report.train);
    report.interp_summary = summarize(report.interp);
    report.extrap_summary = summarize(report.extrap);
    report.safety_gap = log_gap(report.interp_summary.median, report.train_summary.median);
    report.robustness_gap = log_gap(report.extrap_summary.median, report.train_summary.median);
    return report;
}

} // namespace gravlearn
