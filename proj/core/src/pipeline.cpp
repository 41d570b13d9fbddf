#include "gravlearn/pipeline.hpp"

#include <atomic>
#include <filesystem>
#include <memory>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

namespace gravlearn {

using nlohmann::json;

namespace {

struct RunSeeds {
    std::uint64_t noise_train, noise_extrap, shuffle, nn;
};

RunSeeds derive_run_seeds(std::uint64_t base_seed, int instance_index, int ic_index) {
    const auto inst = static_cast<std::uint64_t>(instance_index);
    const auto ic = static_cast<std::uint64_t>(ic_index);
    return {derive_seed(base_seed, inst, ic, "noise_train"),
            derive_seed(base_seed, inst, ic, "noise_extrap"),
            derive_seed(base_seed, inst, ic, "shuffle"),
            derive_seed(base_seed, inst, ic, "nn")};
}

json elements_json(const KeplerianElements& el) {
    return json{{"semi_major", el.semi_major},   {"eccentricity", el.eccentricity},
                {"inclination", el.inclination}, {"raan", el.raan},
                {"arg_perigee", el.arg_perigee}, {"true_anomaly", el.true_anomaly}};
}

json run_config_json(const RunConfig& run) {
    return json{{"framework", run.framework},
                {"preset", run.preset},
                {"train_periods", run.train_periods},
                {"extrap_periods", run.extrap_periods},
                {"samples_per_period", run.samples_per_period},
                {"siphon_fraction", run.siphon_fraction},
                {"epochs", run.effective_epochs()},
                {"learning_rate", run.effective_learning_rate()},
                {"batch_size", run.batch_size},
                {"lipschitz_budget", run.lipschitz_budget},
                {"jitter_start", run.jitter_start},
                {"jitter_max", run.jitter_max},
                {"sigma_state", run.sigma_state},
                {"sigma_accel", run.sigma_accel},
                {"base_seed", run.base_seed}};
}

json context_json(const ContextConfig& ctx, double accel_scale) {
    json zonals = json::array();
    for (const auto& [n, j] : ctx.field.normalized_zonals) zonals.push_back(json::array({n, j}));
    const auto pair_json = [](const std::pair<double, double>& p) {
        return json::array({p.first, p.second});
    };
    return json{{"field",
                 {{"mu", ctx.field.mu},
                  {"reference_radius", ctx.field.reference_radius},
                  {"zonals", zonals}}},
                {"ranges",
                 {{"semi_major", pair_json(ctx.ranges.semi_major)},
                  {"eccentricity", pair_json(ctx.ranges.eccentricity)},
                  {"inclination", pair_json(ctx.ranges.inclination)},
                  {"raan", pair_json(ctx.ranges.raan)},
                  {"arg_perigee", pair_json(ctx.ranges.arg_perigee)},
                  {"true_anomaly", pair_json(ctx.ranges.true_anomaly)}}},
                {"screen",
                 {{"screen_periods", ctx.screen.screen_periods},
                  {"collision_radius", ctx.screen.collision_radius}}},
                {"steps_per_period", ctx.steps_per_period},
                {"accel_scale", accel_scale}};
}

json summary_json(const ErrorSummary& s) {
    return json{{"count", s.count}, {"excluded", s.excluded_count}, {"median", s.median},
                {"q1", s.q1},       {"q3", s.q3},                   {"min", s.min},
                {"max", s.max}};
}

json gap_json(double gap) {
    if (std::isinf(gap)) return json("inf");
    return json(gap);
}

std::string samples_csv(const CharacterizationReport& report, const std::string& label) {
    std::string out = "set,label,radius,epsilon\n";
    const auto emit = [&](const FractionalErrorSeries& series) {
        for (std::size_t i = 0; i < series.epsilon.size(); ++i) {
            out += series.set_label;
            out += ',';
            out += label;
            out += ',';
            out += format_double(series.radius[i]);
            out += ',';
            out += format_double(series.epsilon[i]);
            out += '\n';
        }
    };
    emit(report.train);
    emit(report.interp);
    emit(report.extrap);
    return out;
}

} // namespace

std::vector<IcPair> generate_ic_list(const ContextConfig& ctx, int count,
                                     std::uint64_t seed) {
    if (count < 1) throw ConfigError("gen-ics: count must be >= 1");
    ctx.ranges.validate();

    Rng rng(derive_seed(seed, 0, 0, "ic_list"));
    std::vector<KeplerianElements> accepted;
    const std::size_t needed = 2 * static_cast<std::size_t>(count);
    long draws = 0;
    while (accepted.size() < needed) {
        const KeplerianElements candidate = draw_elements(rng, ctx.ranges);
        ++draws;
        const CartesianState s0 = elements_to_state(candidate, ctx.field.mu);
        if (!classify_collision(ctx.field, s0, ctx.screen.screen_periods,
                                ctx.screen.collision_radius, ctx.screen.steps_per_period))
            accepted.push_back(candidate);
        if (draws >= 100000 &&
            static_cast<double>(accepted.size()) < 0.01 * static_cast<double>(draws))
            throw ConfigError("gen-ics: acceptance rate below 1% after 1e5 draws; "
                              "ranges look infeasible");
    }

    std::vector<IcPair> pairs;
    pairs.reserve(count);
    for (int i = 0; i < count; ++i) pairs.push_back({accepted[2 * i], accepted[2 * i + 1]});
    return pairs;
}

DatasetBundle build_run_bundle(const RunConfig& run, const ContextConfig& ctx,
                               const IcPair& ics, int instance_index, int ic_index,
                               double accel_scale) {
    const RunSeeds seeds = derive_run_seeds(run.base_seed, instance_index, ic_index);
    const NoiseSpec noise{run.sigma_state, run.sigma_accel, accel_scale};
    const TrajectorySpec spec_train{run.train_periods, run.samples_per_period,
                                    ctx.steps_per_period};
    const TrajectorySpec spec_extrap{run.extrap_periods, run.samples_per_period,
                                     ctx.steps_per_period};
    return build_bundle(ctx.field, ics.train, ics.extrap, spec_train, spec_extrap, noise,
                        {seeds.noise_train, seeds.noise_extrap, seeds.shuffle},
                        run.siphon_fraction, ctx.screen);
}

RunResult run_single(const RunConfig& run, const ContextConfig& ctx, const IcPair& ics,
                     int instance_index, int ic_index, double accel_scale) {
    run.validate();
    RunResult result;
    result.instance_index = instance_index;
    result.ic_index = ic_index;

    const RunSeeds seeds = derive_run_seeds(run.base_seed, instance_index, ic_index);
    const DatasetBundle bundle =
        build_run_bundle(run, ctx, ics, instance_index, ic_index, accel_scale);

    std::unique_ptr<Regressor> model;
    json diagnostics;
    if (run.framework == "gp") {
        GpTrainConfig cfg;
        cfg.epochs = run.effective_epochs();
        cfg.learning_rate = run.effective_learning_rate();
        cfg.jitter_start = run.jitter_start;
        cfg.jitter_max = run.jitter_max;
        auto gp = std::make_unique<TrainedGp>(train_gp(bundle.train, cfg));
        diagnostics = {{"final_loss", gp->final_loss()}, {"epochs_run", gp->epochs_run()}};
        // The canonical name the training set materializes under when dataset
        // dumping is enabled; the hash identifies the exact observed pairs.
        result.model_json =
            gp_model_json(*gp, "dataset_train.csv", dataset_content_hash(bundle.train));
        model = std::move(gp);
    } else if (run.framework == "nn") {
        NnTrainConfig cfg;
        cfg.epochs = run.effective_epochs();
        cfg.learning_rate = run.effective_learning_rate();
        cfg.batch_size = run.batch_size;
        cfg.lipschitz_budget = run.lipschitz_budget;
        cfg.seed = seeds.nn;
        auto nn = std::make_unique<MlpNetwork>(train_nn(bundle.train, cfg));
        diagnostics = {{"final_loss", nn->final_loss()},
                       {"epochs_run", nn->epochs_run()},
                       {"optimizer_steps", nn->optimizer_steps()}};
        result.model_json = nn_model_json(*nn);
        model = std::move(nn);
    } else if (run.framework == "truth") {
        model = std::make_unique<TruthRegressor>(ctx.field, accel_scale);
        diagnostics = json::object();
        result.model_json = json{{"kind", "truth"}, {"accel_scale", accel_scale}}.dump(2) + "\n";
    } else {
        throw ConfigError("run_single: unknown framework " + run.framework);
    }

    result.report = characterize(*model, bundle);
    result.instability = result.report.instability_flag;
    diagnostics["instability"] = result.report.instability_flag;
    diagnostics["model_kind"] = result.report.model_kind;
    diagnostics["dropped_samples_train"] = bundle.train.dropped_samples;
    diagnostics["dropped_samples_extrap"] = bundle.extrap_test.dropped_samples;

    const std::string run_label =
        "i" + std::to_string(instance_index) + "_k" + std::to_string(ic_index);
    json report_json{{"config", run_config_json(run)},
                     {"context", context_json(ctx, accel_scale)},
                     {"indices", {{"instance", instance_index}, {"ic", ic_index}}},
                     {"initial_conditions",
                      {{"train", elements_json(ics.train)}, {"extrap", elements_json(ics.extrap)}}},
                     {"seeds",
                      {{"noise_train", seeds.noise_train},
                       {"noise_extrap", seeds.noise_extrap},
                       {"shuffle", seeds.shuffle},
                       {"nn", seeds.nn}}},
                     {"diagnostics", diagnostics},
                     {"sets",
                      {{"train", summary_json(result.report.train_summary)},
                       {"interp_test", summary_json(result.report.interp_summary)},
                       {"extrap_test", summary_json(result.report.extrap_summary)}}},
                     {"safety_gap", gap_json(result.report.safety_gap)},
                     {"robustness_gap", gap_json(result.report.robustness_gap)}};
    result.report_json = report_json.dump(2) + "\n";
    result.samples_csv = samples_csv(result.report, run_label);
    return result;
}

SweepResult run_sweep(const SweepSpec& spec, const ContextConfig& ctx,
                      const std::vector<IcPair>& ics) {
    SweepResult result;
    result.instances = spec.instances();
    result.ic_count = static_cast<int>(ics.size());
    result.base_seed = spec.base.base_seed;
    result.accel_scale = ctx.resolve_accel_scale();
    if (result.instances.empty() || ics.empty())
        throw ConfigError("run_sweep: empty instance list or IC list");

    const std::size_t total = result.instances.size() * ics.size();
    result.runs.resize(total);

    int workers = spec.workers > 0 ? spec.workers
                                   : static_cast<int>(std::thread::hardware_concurrency());
    if (workers < 1) workers = 1;

    // Deterministic wave scheduling: the >50% failure-rate abort is evaluated
    // at wave boundaries so the set of executed runs never depends on timing.
    const std::size_t wave = static_cast<std::size_t>(workers) * 4;
    std::atomic<std::size_t> failed{0};
    std::size_t begin = 0;
    while (begin < total) {
        if (failed.load() * 2 > total) {
            result.aborted = true;
            for (std::size_t i = begin; i < total; ++i) {
                auto& r = result.runs[i];
                r.instance_index = static_cast<int>(i / ics.size());
                r.ic_index = static_cast<int>(i % ics.size());
                r.status = "skipped: sweep aborted (failure rate > 50%)";
            }
            break;
        }
        const std::size_t end = std::min(begin + wave, total);
        std::atomic<std::size_t> cursor{begin};
        const auto worker = [&] {
            for (std::size_t i = cursor.fetch_add(1); i < end; i = cursor.fetch_add(1)) {
                const int instance = static_cast<int>(i / ics.size());
                const int ic = static_cast<int>(i % ics.size());
                try {
                    result.runs[i] = run_single(result.instances[instance].run, ctx,
                                                ics[ic], instance, ic, result.accel_scale);
                } catch (const std::exception& e) {
                    RunResult r;
                    r.instance_index = instance;
                    r.ic_index = ic;
                    r.status = std::string("failed: ") + e.what();
                    result.runs[i] = std::move(r);
                    failed.fetch_add(1);
                }
            }
        };
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
        begin = end;
    }

    // Per-instance aggregates over the per-run median epsilons.
    for (const auto& inst : result.instances) {
        InstanceAggregate agg;
        agg.instance_index = inst.index;
        agg.run = inst.run;
        std::vector<double> train_med, interp_med, extrap_med;
        for (int k = 0; k < result.ic_count; ++k) {
            const auto& r = result.runs[inst.index * result.ic_count + k];
            ++agg.n_runs;
            if (!r.ok()) {
                ++agg.n_failed;
                continue;
            }
            train_med.push_back(r.report.train_summary.median);
            interp_med.push_back(r.report.interp_summary.median);
            extrap_med.push_back(r.report.extrap_summary.median);
            agg.excluded_samples += r.report.train_summary.excluded_count +
                                    r.report.interp_summary.excluded_count +
                                    r.report.extrap_summary.excluded_count;
        }
        if (!train_med.empty()) {
            const ErrorSummary t = summarize_values(train_med);
            const ErrorSummary i = summarize_values(interp_med);
            const ErrorSummary e = summarize_values(extrap_med);
            agg.train_median = t.median;
            agg.train_q1 = t.q1;
            agg.train_q3 = t.q3;
            agg.interp_median = i.median;
            agg.interp_q1 = i.q1;
            agg.interp_q3 = i.q3;
            agg.extrap_median = e.median;
            agg.extrap_q1 = e.q1;
            agg.extrap_q3 = e.q3;
        }
        try {
            agg.interp_fit = loglog_fit(train_med, interp_med);
            agg.extrap_fit = loglog_fit(train_med, extrap_med);
            agg.fits_valid = true;
        } catch (const std::invalid_argument&) {
            agg.fits_valid = false;
        }
        result.aggregates.push_back(std::move(agg));
    }
    return result;
}

std::string aggregate_to_csv(const SweepResult& result) {
    std::string out =
        "instance,framework,sigma_state,sigma_accel,epochs,learning_rate,"
        "train_periods,extrap_periods,samples_per_period,siphon_fraction,base_seed,"
        "n_runs,n_failed,train_median,train_q1,train_q3,interp_median,interp_q1,"
        "interp_q3,extrap_median,extrap_q1,extrap_q3,interp_fit_slope,"
        "interp_fit_intercept,interp_fit_r2,extrap_fit_slope,extrap_fit_intercept,"
        "extrap_fit_r2,excluded_samples\n";
    for (const auto& a : result.aggregates) {
        std::string row = std::to_string(a.instance_index);
        row += ',' + a.run.framework;
        row += ',' + format_double(a.run.sigma_state);
        row += ',' + format_double(a.run.sigma_accel);
        row += ',' + std::to_string(a.run.effective_epochs());
        row += ',' + format_double(a.run.effective_learning_rate());
        row += ',' + format_double(a.run.train_periods);
        row += ',' + format_double(a.run.extrap_periods);
        row += ',' + std::to_string(a.run.samples_per_period);
        row += ',' + format_double(a.run.siphon_fraction);
        row += ',' + std::to_string(a.run.base_seed);
        row += ',' + std::to_string(a.n_runs);
        row += ',' + std::to_string(a.n_failed);
        for (double v : {a.train_median, a.train_q1, a.train_q3, a.interp_median,
                         a.interp_q1, a.interp_q3, a.extrap_median, a.extrap_q1, a.extrap_q3})
            row += ',' + format_double(v);
        if (a.fits_valid) {
            for (double v : {a.interp_fit.slope, a.interp_fit.intercept,
                             a.interp_fit.r_squared, a.extrap_fit.slope,
                             a.extrap_fit.intercept, a.extrap_fit.r_squared})
                row += ',' + format_double(v);
        } else {
            row += ",,,,,,";
        }
        row += ',' + std::to_string(a.excluded_samples);
        row += '\n';
        out += row;
    }
    return out;
}

namespace {

std::string run_dir(int instance, int ic) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "runs/i%03d/k%03d", instance, ic);
    return buf;
}

} // namespace

std::string manifest_to_json(const SweepResult& result) {
    json instances = json::array();
    for (const auto& inst : result.instances)
        instances.push_back(
            json{{"index", inst.index}, {"config", run_config_json(inst.run)}});
    json runs = json::array();
    for (const auto& r : result.runs) {
        runs.push_back(json{{"instance", r.instance_index},
                            {"ic", r.ic_index},
                            {"status", r.status},
                            {"instability", r.instability},
                            {"report", run_dir(r.instance_index, r.ic_index) + "/report.json"}});
    }
    json j{{"base_seed", result.base_seed},
           {"accel_scale", result.accel_scale},
           {"config_hash", result.config_hash},
           {"ic_file_hash", result.ic_file_hash},
           {"ic_count", result.ic_count},
           {"aborted", result.aborted},
           {"instances", instances},
           {"runs", runs}};
    return j.dump(2) + "\n";
}

void emit_outputs(const SweepResult& result, const std::string& out_dir, bool write_samples,
                  bool write_models) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (!fs::is_directory(out_dir))
        throw IoError("emit_outputs: cannot create " + out_dir);

    for (const auto& r : result.runs) {
        if (!r.ok()) continue;
        const std::string dir = out_dir + "/" + run_dir(r.instance_index, r.ic_index);
        write_text_file(dir + "/report.json", r.report_json);
        if (write_samples) write_text_file(dir + "/samples.csv", r.samples_csv);
        if (write_models) write_text_file(dir + "/model.json", r.model_json);
    }
    write_text_file(out_dir + "/aggregate.csv", aggregate_to_csv(result));
    write_text_file(out_dir + "/manifest.json", manifest_to_json(result));
}

std::string render_report(const std::string& in_dir, const std::string& format) {
    if (format != "csv" && format != "json")
        throw ConfigError("report: format must be csv or json");
    const json manifest = json::parse(read_text_file(in_dir + "/manifest.json"));

    if (format == "csv") return read_text_file(in_dir + "/aggregate.csv");

    // JSON: rebuild per-instance aggregates from the individual run reports.
    const int ic_count = manifest.at("ic_count").get<int>();
    json out{{"base_seed", manifest.at("base_seed")},
             {"accel_scale", manifest.at("accel_scale")},
             {"config_hash", manifest.at("config_hash")},
             {"ic_file_hash", manifest.at("ic_file_hash")},
             {"ic_count", ic_count}};
    json aggregates = json::array();
    for (const auto& inst : manifest.at("instances")) {
        const int index = inst.at("index").get<int>();
        std::vector<double> train_med, interp_med, extrap_med;
        int n_failed = 0, n_runs = 0;
        for (const auto& r : manifest.at("runs")) {
            if (r.at("instance").get<int>() != index) continue;
            ++n_runs;
            if (r.at("status").get<std::string>() != "ok") {
                ++n_failed;
                continue;
            }
            const json report =
                json::parse(read_text_file(in_dir + "/" + r.at("report").get<std::string>()));
            train_med.push_back(report.at("sets").at("train").at("median").get<double>());
            interp_med.push_back(report.at("sets").at("interp_test").at("median").get<double>());
            extrap_med.push_back(report.at("sets").at("extrap_test").at("median").get<double>());
        }
        json agg{{"instance", index},
                 {"config", inst.at("config")},
                 {"n_runs", n_runs},
                 {"n_failed", n_failed}};
        if (!train_med.empty()) {
            const auto stats = [](const std::vector<double>& v) {
                const ErrorSummary s = summarize_values(v);
                return json{{"median", s.median}, {"q1", s.q1}, {"q3", s.q3}};
            };
            agg["train"] = stats(train_med);
            agg["interp_test"] = stats(interp_med);
            agg["extrap_test"] = stats(extrap_med);
        }
        try {
            const CorrelationFit fi = loglog_fit(train_med, interp_med);
            const CorrelationFit fe = loglog_fit(train_med, extrap_med);
            agg["interp_fit"] = {{"slope", fi.slope},
                                 {"intercept", fi.intercept},
                                 {"r_squared", fi.r_squared}};
            agg["extrap_fit"] = {{"slope", fe.slope},
                                 {"intercept", fe.intercept},
                                 {"r_squared", fe.r_squared}};
        } catch (const std::invalid_argument&) {
            // fewer than three usable runs; fits omitted
        }
        aggregates.push_back(std::move(agg));
    }
    out["aggregates"] = std::move(aggregates);
    return out.dump(2) + "\n";
}

} // namespace gravlearn
