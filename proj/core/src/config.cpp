#include "gravlearn/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace gravlearn {

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

double parse_double(const std::string& raw, const std::string& where) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(raw, &pos);
        if (pos != raw.size()) throw std::invalid_argument(raw);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config: bad number '" + raw + "' for " + where);
    }
}

std::vector<std::string> split_list(const std::string& raw, const std::string& where) {
    const std::string t = trim(raw);
    if (t.size() < 2 || t.front() != '[' || t.back() != ']')
        throw ConfigError("config: expected [list] for " + where);
    std::vector<std::string> items;
    int depth = 0;
    std::string cur;
    for (std::size_t i = 1; i + 1 < t.size(); ++i) {
        const char c = t[i];
        if (c == '(') ++depth;
        if (c == ')') --depth;
        if (c == ',' && depth == 0) {
            items.push_back(trim(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!trim(cur).empty()) items.push_back(trim(cur));
    return items;
}

} // namespace

ConfigFile ConfigFile::parse(const std::string& text) {
    ConfigFile cfg;
    std::istringstream in(text);
    std::string line, section;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        if (t.front() == '[') {
            if (t.back() != ']')
                throw ConfigError("config: malformed section header at line " +
                                  std::to_string(line_no));
            section = trim(t.substr(1, t.size() - 2));
            cfg.sections_[section];
            continue;
        }
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config: expected key = value at line " + std::to_string(line_no));
        const std::string key = trim(t.substr(0, eq));
        const std::string value = trim(t.substr(eq + 1));
        if (key.empty())
            throw ConfigError("config: empty key at line " + std::to_string(line_no));
        cfg.sections_[section][key] = value;
    }
    return cfg;
}

ConfigFile ConfigFile::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("config: cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
}

bool ConfigFile::has(const std::string& section, const std::string& key) const {
    const auto s = sections_.find(section);
    return s != sections_.end() && s->second.count(key) > 0;
}

std::string ConfigFile::get_string(const std::string& section, const std::string& key,
                                   const std::string& fallback) const {
    const auto s = sections_.find(section);
    if (s == sections_.end()) return fallback;
    const auto k = s->second.find(key);
    return k == s->second.end() ? fallback : k->second;
}

double ConfigFile::get_double(const std::string& section, const std::string& key,
                              double fallback) const {
    if (!has(section, key)) return fallback;
    return parse_double(get_string(section, key, ""), section + "." + key);
}

int ConfigFile::get_int(const std::string& section, const std::string& key,
                        int fallback) const {
    if (!has(section, key)) return fallback;
    const double v = get_double(section, key, 0.0);
    const int i = static_cast<int>(std::llround(v));
    if (static_cast<double>(i) != v)
        throw ConfigError("config: expected integer for " + section + "." + key);
    return i;
}

std::uint64_t ConfigFile::get_u64(const std::string& section, const std::string& key,
                                  std::uint64_t fallback) const {
    if (!has(section, key)) return fallback;
    const std::string raw = get_string(section, key, "");
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(raw.data(), raw.data() + raw.size(), v);
    if (ec != std::errc() || ptr != raw.data() + raw.size())
        throw ConfigError("config: expected unsigned integer for " + section + "." + key);
    return v;
}

std::vector<double> ConfigFile::get_double_list(const std::string& section,
                                                const std::string& key,
                                                const std::vector<double>& fallback) const {
    if (!has(section, key)) return fallback;
    std::vector<double> out;
    for (const auto& item : split_list(get_string(section, key, ""), section + "." + key))
        out.push_back(parse_double(item, section + "." + key));
    return out;
}

std::vector<std::string> ConfigFile::get_string_list(
    const std::string& section, const std::string& key,
    const std::vector<std::string>& fallback) const {
    if (!has(section, key)) return fallback;
    return split_list(get_string(section, key, ""), section + "." + key);
}

std::vector<std::pair<int, double>> ConfigFile::get_degree_pairs(
    const std::string& section, const std::string& key) const {
    std::vector<std::pair<int, double>> out;
    if (!has(section, key)) return out;
    const std::string where = section + "." + key;
    for (const auto& item : split_list(get_string(section, key, ""), where)) {
        if (item.size() < 2 || item.front() != '(' || item.back() != ')')
            throw ConfigError("config: expected (degree, value) tuples for " + where);
        const std::string inner = item.substr(1, item.size() - 2);
        const auto comma = inner.find(',');
        if (comma == std::string::npos)
            throw ConfigError("config: expected (degree, value) tuples for " + where);
        const double deg = parse_double(trim(inner.substr(0, comma)), where);
        const double val = parse_double(trim(inner.substr(comma + 1)), where);
        const int n = static_cast<int>(std::llround(deg));
        if (static_cast<double>(n) != deg)
            throw ConfigError("config: zonal degree must be an integer in " + where);
        out.emplace_back(n, val);
    }
    return out;
}

int RunConfig::effective_epochs() const {
    if (epochs > 0) return epochs;
    return framework == "nn" ? 2000 : 500;
}

double RunConfig::effective_learning_rate() const {
    if (learning_rate > 0.0) return learning_rate;
    return framework == "nn" ? 1e-3 : 1e-2;
}

void RunConfig::validate() const {
    if (framework != "gp" && framework != "nn" && framework != "truth")
        throw ConfigError("run config: framework must be gp, nn or truth");
    if (!(train_periods > 0.0) || !(extrap_periods > 0.0))
        throw ConfigError("run config: periods must be > 0");
    if (samples_per_period < 1)
        throw ConfigError("run config: samples_per_period must be >= 1");
    if (!(siphon_fraction > 0.0 && siphon_fraction < 1.0))
        throw ConfigError("run config: siphon_fraction must be in (0, 1)");
    if (epochs < 0 || learning_rate < 0.0 || batch_size < 0)
        throw ConfigError("run config: negative training parameter");
    if (sigma_state < 0.0 || sigma_accel < 0.0)
        throw ConfigError("run config: sigmas must be >= 0");
    if (!(lipschitz_budget > 0.0))
        throw ConfigError("run config: lipschitz_budget must be > 0");
}

double ContextConfig::resolve_accel_scale() const {
    if (accel_scale > 0.0) return accel_scale;
    return compute_accel_scale(field, ranges);
}

namespace {

void apply_preset(RunConfig& run, const std::string& preset) {
    if (preset == "moderate") {
        run.train_periods = 100.0;
        run.extrap_periods = 10.0;
    } else if (preset == "low") {
        run.train_periods = 10.0;
        run.extrap_periods = 3.0;
    } else if (preset != "explicit") {
        throw ConfigError("run config: preset must be moderate, low or explicit");
    }
    run.preset = preset;
}

std::pair<double, double> range_pair(const ConfigFile& cfg, const std::string& key,
                                     std::pair<double, double> fallback, bool degrees) {
    if (!cfg.has("ranges", key)) return fallback;
    const auto items = cfg.get_double_list("ranges", key, {});
    if (items.size() != 2)
        throw ConfigError("config: ranges." + key + " must be [lower, upper]");
    const double f = degrees ? M_PI / 180.0 : 1.0;
    return {items[0] * f, items[1] * f};
}

} // namespace

ContextConfig parse_context(const ConfigFile& cfg) {
    ContextConfig ctx;
    ctx.field.mu = cfg.get_double("gravity", "mu", ctx.field.mu);
    ctx.field.reference_radius =
        cfg.get_double("gravity", "reference_radius", ctx.field.reference_radius);
    if (cfg.has("gravity", "zonals"))
        ctx.field.normalized_zonals = cfg.get_degree_pairs("gravity", "zonals");
    try {
        ctx.field.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }

    ctx.ranges.semi_major = range_pair(cfg, "semi_major", ctx.ranges.semi_major, false);
    ctx.ranges.eccentricity = range_pair(cfg, "eccentricity", ctx.ranges.eccentricity, false);
    ctx.ranges.inclination = range_pair(cfg, "inclination_deg", ctx.ranges.inclination, true);
    ctx.ranges.raan = range_pair(cfg, "raan_deg", ctx.ranges.raan, true);
    ctx.ranges.arg_perigee = range_pair(cfg, "arg_perigee_deg", ctx.ranges.arg_perigee, true);
    ctx.ranges.true_anomaly =
        range_pair(cfg, "true_anomaly_deg", ctx.ranges.true_anomaly, true);
    try {
        ctx.ranges.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }

    ctx.screen.screen_periods = cfg.get_double("context", "screen_periods", 50.0);
    ctx.screen.collision_radius = cfg.get_double("context", "collision_radius", 1.0);
    ctx.steps_per_period = cfg.get_int("context", "steps_per_period", 1000);
    ctx.screen.steps_per_period = ctx.steps_per_period;
    ctx.accel_scale = cfg.get_double("context", "accel_scale", 0.0);
    if (ctx.screen.screen_periods <= 0.0 || ctx.screen.collision_radius < 0.0 ||
        ctx.steps_per_period < 1)
        throw ConfigError("config: bad [context] screen settings");
    return ctx;
}

RunConfig parse_run(const ConfigFile& cfg) {
    RunConfig run;
    run.framework = cfg.get_string("run", "framework", run.framework);
    apply_preset(run, cfg.get_string("run", "preset", run.preset));
    run.train_periods = cfg.get_double("run", "train_periods", run.train_periods);
    run.extrap_periods = cfg.get_double("run", "extrap_periods", run.extrap_periods);
    run.samples_per_period = cfg.get_int("run", "samples_per_period", run.samples_per_period);
    run.siphon_fraction = cfg.get_double("run", "siphon_fraction", run.siphon_fraction);
    run.epochs = cfg.get_int("run", "epochs", run.epochs);
    run.learning_rate = cfg.get_double("run", "learning_rate", run.learning_rate);
    run.batch_size = cfg.get_int("run", "batch_size", run.batch_size);
    run.lipschitz_budget = cfg.get_double("run", "lipschitz_budget", run.lipschitz_budget);
    run.jitter_start = cfg.get_double("run", "jitter_start", run.jitter_start);
    run.jitter_max = cfg.get_double("run", "jitter_max", run.jitter_max);
    run.sigma_state = cfg.get_double("run", "sigma_state", run.sigma_state);
    run.sigma_accel = cfg.get_double("run", "sigma_accel", run.sigma_accel);
    run.base_seed = cfg.get_u64("run", "base_seed", run.base_seed);
    run.validate();
    return run;
}

SweepSpec parse_sweep(const ConfigFile& cfg) {
    SweepSpec sweep;
    sweep.base = parse_run(cfg);
    sweep.frameworks = cfg.get_string_list("sweep", "frameworks", sweep.frameworks);
    for (const auto& fw : sweep.frameworks)
        if (fw != "gp" && fw != "nn" && fw != "truth")
            throw ConfigError("sweep config: unknown framework " + fw);
    // Default grid: a state-uncertainty sweep from 0 to 1 at no accel noise.
    if (!cfg.has("sweep", "sigma_state") && !cfg.has("sweep", "sigma_accel")) {
        sweep.sigma_state.clear();
        for (int i = 0; i <= 10; ++i) sweep.sigma_state.push_back(0.1 * i);
        sweep.sigma_accel = {0.0};
    } else {
        sweep.sigma_state = cfg.get_double_list("sweep", "sigma_state", {0.0});
        sweep.sigma_accel = cfg.get_double_list("sweep", "sigma_accel", {0.0});
    }
    sweep.workers = cfg.get_int("sweep", "workers", 0);
    sweep.gp_epochs = cfg.get_int("sweep", "gp_epochs", 0);
    sweep.nn_epochs = cfg.get_int("sweep", "nn_epochs", 0);
    sweep.gp_learning_rate = cfg.get_double("sweep", "gp_learning_rate", 0.0);
    sweep.nn_learning_rate = cfg.get_double("sweep", "nn_learning_rate", 0.0);
    if (sweep.workers < 0) throw ConfigError("sweep config: workers must be >= 0");
    return sweep;
}

std::vector<SweepSpec::Instance> SweepSpec::instances() const {
    std::vector<Instance> out;
    int index = 0;
    for (const auto& fw : frameworks)
        for (double ss : sigma_state)
            for (double sa : sigma_accel) {
                Instance inst;
                inst.index = index++;
                inst.run = base;
                inst.run.framework = fw;
                inst.run.sigma_state = ss;
                inst.run.sigma_accel = sa;
                if (fw == "gp" && gp_epochs > 0) inst.run.epochs = gp_epochs;
                if (fw == "nn" && nn_epochs > 0) inst.run.epochs = nn_epochs;
                if (fw == "gp" && gp_learning_rate > 0.0)
                    inst.run.learning_rate = gp_learning_rate;
                if (fw == "nn" && nn_learning_rate > 0.0)
                    inst.run.learning_rate = nn_learning_rate;
                inst.run.validate();
                out.push_back(std::move(inst));
            }
    return out;
}

} // namespace gravlearn
