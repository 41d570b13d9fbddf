// Plain-text key-value configuration: [gravity], [ranges], [context], [run]
// and [sweep] sections, with every default echoed into the output manifests.
#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "gravlearn/dataset.hpp"

namespace gravlearn {

/// Bad or missing configuration; the CLI maps this to exit code 2.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Filesystem failure; the CLI maps this to exit code 3.
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Sectioned key = value text. Lists use [a, b, c]; zonal coefficients use
/// [(degree, value), ...]. Lines starting with # are comments.
class ConfigFile {
public:
    static ConfigFile parse(const std::string& text);
    static ConfigFile parse_file(const std::string& path);

    bool has(const std::string& section, const std::string& key) const;
    std::string get_string(const std::string& section, const std::string& key,
                           const std::string& fallback) const;
    double get_double(const std::string& section, const std::string& key,
                      double fallback) const;
    int get_int(const std::string& section, const std::string& key, int fallback) const;
    std::uint64_t get_u64(const std::string& section, const std::string& key,
                          std::uint64_t fallback) const;
    std::vector<double> get_double_list(const std::string& section, const std::string& key,
                                        const std::vector<double>& fallback) const;
    std::vector<std::string> get_string_list(const std::string& section,
                                             const std::string& key,
                                             const std::vector<std::string>& fallback) const;
    std::vector<std::pair<int, double>> get_degree_pairs(const std::string& section,
                                                         const std::string& key) const;

private:
    std::map<std::string, std::map<std::string, std::string>> sections_;
};

/// Top-level parameters of one characterization run (Fig. 6 configuration box).
struct RunConfig {
    std::string framework = "gp"; // gp | nn | truth (test hook)
    std::string preset = "moderate";
    double train_periods = 100.0;
    double extrap_periods = 10.0;
    int samples_per_period = 25;
    double siphon_fraction = 0.05;
    int epochs = 0;            // 0 = framework default (gp 500, nn 2000)
    double learning_rate = 0.0;// 0 = framework default (gp 0.01, nn 1e-3)
    int batch_size = 0;        // nn only; 0 = min(64, N)
    double lipschitz_budget = 100.0;
    double jitter_start = 1e-6;
    double jitter_max = 1e-2;
    double sigma_state = 0.0;
    double sigma_accel = 0.0;
    std::uint64_t base_seed = 1;

    int effective_epochs() const;
    double effective_learning_rate() const;
    void validate() const;
};

/// Physical context (Fig. 6 contextual-information box).
struct ContextConfig {
    ZonalGravityField field = ZonalGravityField::bennu_normalized();
    ElementRanges ranges = ElementRanges::table3();
    ScreenConfig screen;
    int steps_per_period = 1000;
    double accel_scale = 0.0; // 0 = derive from (field, ranges)

    double resolve_accel_scale() const;
};

/// Cross product of parameter instances run over one frozen IC list.
struct SweepSpec {
    std::vector<std::string> frameworks{"gp", "nn"};
    std::vector<double> sigma_state{0.0};
    std::vector<double> sigma_accel{0.0};
    RunConfig base;
    int workers = 0; // 0 = hardware concurrency
    // Optional per-framework overrides (0 = keep base/framework default).
    int gp_epochs = 0, nn_epochs = 0;
    double gp_learning_rate = 0.0, nn_learning_rate = 0.0;

    struct Instance {
        int index = 0;
        RunConfig run;
    };
    std::vector<Instance> instances() const;
};

ContextConfig parse_context(const ConfigFile& cfg);
RunConfig parse_run(const ConfigFile& cfg);
SweepSpec parse_sweep(const ConfigFile& cfg);

} // namespace gravlearn
