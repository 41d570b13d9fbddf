// gravlearn command-line interface.
//
// Subcommands:
//   gen-ics --count N --seed S --out FILE [--config FILE]
//   run     --config FILE --ic-index K --out DIR [--ics FILE] [--dump-datasets]
//   sweep   --config FILE --ics FILE --out DIR [--samples] [--models]
//   report  --in DIR --format csv|json
//
// Exit codes: 0 success, 2 configuration error, 3 I/O error. Runs that hit a
// training instability still exit 0; the flag travels in the report.

#include <chrono>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "gravlearn/pipeline.hpp"

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

gravlearn::ContextConfig load_context(const std::string& config_path) {
    if (config_path.empty()) return {};
    return gravlearn::parse_context(gravlearn::ConfigFile::parse_file(config_path));
}

int cmd_gen_ics(const std::string& config_path, int count, std::uint64_t seed,
                const std::string& out_file) {
    const auto ctx = load_context(config_path);
    const auto t0 = Clock::now();
    const auto pairs = gravlearn::generate_ic_list(ctx, count, seed);
    gravlearn::write_text_file(out_file, gravlearn::ic_list_to_csv(pairs, seed));
    std::cerr << "[gravlearn] gen-ics: " << pairs.size() << " collision-free pairs in "
              << seconds_since(t0) << " s -> " << out_file << "\n";
    return 0;
}

int cmd_run(const std::string& config_path, const std::string& ics_path, int ic_index,
            const std::string& out_dir, bool dump_datasets) {
    const auto cfg = gravlearn::ConfigFile::parse_file(config_path);
    const auto ctx = gravlearn::parse_context(cfg);
    const auto run = gravlearn::parse_run(cfg);

    std::string ics_file = ics_path;
    if (ics_file.empty()) ics_file = cfg.get_string("run", "ics", "");
    if (ics_file.empty())
        throw gravlearn::ConfigError("run: provide --ics FILE or [run] ics = FILE");

    const auto pairs = gravlearn::parse_ic_csv(gravlearn::read_text_file(ics_file));
    if (ic_index < 0 || ic_index >= static_cast<int>(pairs.size()))
        throw gravlearn::ConfigError("run: --ic-index out of range (file has " +
                                     std::to_string(pairs.size()) + " pairs)");

    const double accel_scale = ctx.resolve_accel_scale();
    const auto t0 = Clock::now();
    const auto result =
        gravlearn::run_single(run, ctx, pairs[ic_index], 0, ic_index, accel_scale);
    gravlearn::write_text_file(out_dir + "/report.json", result.report_json);
    gravlearn::write_text_file(out_dir + "/model.json", result.model_json);
    gravlearn::write_text_file(out_dir + "/samples.csv", result.samples_csv);
    if (dump_datasets) {
        const auto bundle =
            gravlearn::build_run_bundle(run, ctx, pairs[ic_index], 0, ic_index, accel_scale);
        gravlearn::write_dataset(bundle.train, out_dir + "/dataset_train");
        gravlearn::write_dataset(bundle.interp_test, out_dir + "/dataset_interp_test");
        gravlearn::write_dataset(bundle.extrap_test, out_dir + "/dataset_extrap_test");
    }
    std::cerr << "[gravlearn] run (" << run.framework << ", ic " << ic_index << ") in "
              << seconds_since(t0) << " s; median epsilon train/interp/extrap = "
              << result.report.train_summary.median << " / "
              << result.report.interp_summary.median << " / "
              << result.report.extrap_summary.median
              << (result.instability ? " [instability]" : "") << "\n";
    return 0;
}

int cmd_sweep(const std::string& config_path, const std::string& ics_path,
              const std::string& out_dir, bool samples, bool models) {
    const std::string config_text = gravlearn::read_text_file(config_path);
    const auto cfg = gravlearn::ConfigFile::parse(config_text);
    const auto ctx = gravlearn::parse_context(cfg);
    const auto sweep = gravlearn::parse_sweep(cfg);

    const std::string ic_text = gravlearn::read_text_file(ics_path);
    const auto pairs = gravlearn::parse_ic_csv(ic_text);

    const auto t0 = Clock::now();
    auto result = gravlearn::run_sweep(sweep, ctx, pairs);
    result.config_hash = gravlearn::hash_hex(config_text);
    result.ic_file_hash = gravlearn::hash_hex(ic_text);
    gravlearn::emit_outputs(result, out_dir, samples, models);

    std::size_t failed = 0;
    for (const auto& r : result.runs)
        if (!r.ok()) ++failed;
    std::cerr << "[gravlearn] sweep: " << result.runs.size() << " runs (" << failed
              << " failed) in " << seconds_since(t0) << " s -> " << out_dir << "\n";
    return result.aborted ? 1 : 0;
}

int cmd_report(const std::string& in_dir, const std::string& format) {
    std::cout << gravlearn::render_report(in_dir, format);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Small-body gravity learning and safety/robustness characterization"};
    app.require_subcommand(1);

    std::string config_path, ics_path, out_path, in_dir, format = "csv";
    int count = 100, ic_index = 0;
    std::uint64_t seed = 1;
    bool dump_datasets = false, samples = false, models = false;

    auto* gen = app.add_subcommand("gen-ics", "Generate a frozen collision-free IC list");
    gen->add_option("--count", count, "Number of (train, extrap) pairs")->required();
    gen->add_option("--seed", seed, "Sampling seed")->required();
    gen->add_option("--out", out_path, "Output CSV path")->required();
    gen->add_option("--config", config_path, "Context config (defaults if omitted)");

    auto* run = app.add_subcommand("run", "One characterization run");
    run->add_option("--config", config_path, "Config file")->required();
    run->add_option("--ic-index", ic_index, "Pair index into the IC file")->required();
    run->add_option("--out", out_path, "Output directory")->required();
    run->add_option("--ics", ics_path, "IC file (overrides [run] ics)");
    run->add_flag("--dump-datasets", dump_datasets, "Also write the dataset CSVs");

    auto* sweep = app.add_subcommand("sweep", "Multi-parameter sweep over an IC list");
    sweep->add_option("--config", config_path, "Config file")->required();
    sweep->add_option("--ics", ics_path, "Frozen IC file")->required();
    sweep->add_option("--out", out_path, "Output directory")->required();
    sweep->add_flag("--samples", samples, "Write per-run samples.csv");
    sweep->add_flag("--models", models, "Write per-run model.json");

    auto* report = app.add_subcommand("report", "Re-render sweep aggregates");
    report->add_option("--in", in_dir, "Sweep output directory")->required();
    report->add_option("--format", format, "csv or json");

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) return cmd_gen_ics(config_path, count, seed, out_path);
        if (run->parsed()) return cmd_run(config_path, ics_path, ic_index, out_path, dump_datasets);
        if (sweep->parsed()) return cmd_sweep(config_path, ics_path, out_path, samples, models);
        if (report->parsed()) return cmd_report(in_dir, format);
    } catch (const gravlearn::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const gravlearn::IoError& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
