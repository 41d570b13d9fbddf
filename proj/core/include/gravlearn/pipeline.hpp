// Orchestration: collision-free IC list generation, the single-run
// characterization pipeline, and multi-parameter sweeps over a shared IC list.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gravlearn/config.hpp"
#include "gravlearn/metrics.hpp"
#include "gravlearn/serialize.hpp"

namespace gravlearn {

struct RunResult {
    int instance_index = 0;
    int ic_index = 0;
    std::string status = "ok"; // "ok" or "failed: <reason>"
    bool instability = false;
    CharacterizationReport report; // valid when ok
    std::string report_json;
    std::string samples_csv;
    std::string model_json;

    bool ok() const { return status == "ok"; }
};

struct InstanceAggregate {
    int instance_index = 0;
    RunConfig run;
    int n_runs = 0;
    int n_failed = 0;
    // Median and quartiles across runs of the per-run median epsilon.
    double train_median = 0.0, train_q1 = 0.0, train_q3 = 0.0;
    double interp_median = 0.0, interp_q1 = 0.0, interp_q3 = 0.0;
    double extrap_median = 0.0, extrap_q1 = 0.0, extrap_q3 = 0.0;
    bool fits_valid = false;
    CorrelationFit interp_fit; // log10 interp median vs log10 train median
    CorrelationFit extrap_fit;
    long excluded_samples = 0;
};

struct SweepResult {
    std::vector<SweepSpec::Instance> instances;
    int ic_count = 0;
    double accel_scale = 0.0;
    std::uint64_t base_seed = 0;
    std::string config_hash;  // hash of the sweep config text
    std::string ic_file_hash; // hash of the frozen IC file bytes
    std::vector<RunResult> runs; // instances x ICs, ordered by (instance, ic)
    std::vector<InstanceAggregate> aggregates;
    bool aborted = false; // failure rate exceeded 50%
};

/// Rejection-samples element draws until `count` collision-free pairs exist.
/// Throws ConfigError when the acceptance rate is below 1% after 1e5 draws.
std::vector<IcPair> generate_ic_list(const ContextConfig& ctx, int count,
                                     std::uint64_t seed);

/// The dataset bundle a given run trains and evaluates on, with seeds derived
/// from (base_seed, instance_index, ic_index).
DatasetBundle build_run_bundle(const RunConfig& run, const ContextConfig& ctx,
                               const IcPair& ics, int instance_index, int ic_index,
                               double accel_scale);

/// Builds the bundle, trains the selected framework, characterizes, and
/// serializes the model and report. Training instabilities are recorded, not
/// fatal. accel_scale must be the resolved context scale.
RunResult run_single(const RunConfig& run, const ContextConfig& ctx, const IcPair& ics,
                     int instance_index, int ic_index, double accel_scale);

/// Cross product of instances and ICs, executed on `workers` threads (0 =
/// hardware concurrency). Per-run seeds depend only on indices, so scheduling
/// cannot change results. Failed runs are recorded and siblings continue; the
/// sweep aborts (with partial results) past a 50% failure rate.
SweepResult run_sweep(const SweepSpec& spec, const ContextConfig& ctx,
                      const std::vector<IcPair>& ics);

/// Writes runs/<instance>/<ic>/report.json (and samples/models when enabled),
/// aggregate.csv and manifest.json. Re-running on the same result is
/// byte-identical.
void emit_outputs(const SweepResult& result, const std::string& out_dir,
                  bool write_samples = false, bool write_models = false);

std::string aggregate_to_csv(const SweepResult& result);
std::string manifest_to_json(const SweepResult& result);

/// Reads a sweep output directory back into aggregate form for `report`.
std::string render_report(const std::string& in_dir, const std::string& format);

} // namespace gravlearn
