#include "gravlearn/serialize.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "gravlearn/config.hpp"

namespace gravlearn {

using nlohmann::json;

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const char c : bytes) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hash_hex(std::string_view bytes) {
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(fnv1a64(bytes)));
    return buf;
}

void write_text_file(const std::string& path, const std::string& content) {
    const auto parent = std::filesystem::path(path).parent_path();
    std::error_code ec;
    if (!parent.empty()) std::filesystem::create_directories(parent, ec);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << content;
    if (!out) throw IoError("write failed: " + path);
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

namespace {

json elements_json(const KeplerianElements& el) {
    return json{{"semi_major", el.semi_major},   {"eccentricity", el.eccentricity},
                {"inclination", el.inclination}, {"raan", el.raan},
                {"arg_perigee", el.arg_perigee}, {"true_anomaly", el.true_anomaly}};
}

void append_vec3(std::string& row, const Vec3& v) {
    for (int k = 0; k < 3; ++k) {
        row += ',';
        row += format_double(v[k]);
    }
}

} // namespace

std::string dataset_to_csv(const SampledDataset& ds) {
    std::string out = "t,x1,x2,x3,ax,ay,az,true_x1,true_x2,true_x3,true_ax,true_ay,true_az\n";
    for (std::size_t i = 0; i < ds.size(); ++i) {
        std::string row = format_double(ds.times[i]);
        append_vec3(row, ds.inputs[i]);
        append_vec3(row, ds.targets[i]);
        append_vec3(row, ds.truth_inputs[i]);
        append_vec3(row, ds.truth_targets[i]);
        row += '\n';
        out += row;
    }
    return out;
}

std::string dataset_sidecar_json(const SampledDataset& ds) {
    const auto& p = ds.provenance;
    json j{{"role", p.role},
           {"initial_condition", elements_json(p.initial_condition)},
           {"trajectory_spec",
            {{"n_periods", p.spec.n_periods},
             {"samples_per_period", p.spec.samples_per_period},
             {"steps_per_period", p.spec.steps_per_period}}},
           {"noise",
            {{"sigma_state", p.noise.sigma_state},
             {"sigma_accel", p.noise.sigma_accel},
             {"accel_scale", p.noise.accel_scale}}},
           {"seeds", {{"noise", p.noise_seed}, {"shuffle", p.shuffle_seed}}},
           {"count", ds.size()},
           {"data_volume", ds.data_volume()},
           {"dropped_samples", ds.dropped_samples}};
    return j.dump(2) + "\n";
}

void write_dataset(const SampledDataset& ds, const std::string& path_stem) {
    write_text_file(path_stem + ".csv", dataset_to_csv(ds));
    write_text_file(path_stem + ".meta.json", dataset_sidecar_json(ds));
}

std::string dataset_content_hash(const SampledDataset& ds) {
    std::string blob;
    blob.reserve(ds.size() * 128);
    for (std::size_t i = 0; i < ds.size(); ++i) {
        std::string row;
        append_vec3(row, ds.inputs[i]);
        append_vec3(row, ds.targets[i]);
        blob += row;
        blob += '\n';
    }
    return hash_hex(blob);
}

std::string ic_list_to_csv(const std::vector<IcPair>& pairs, std::uint64_t seed) {
    std::string out;
    out += "# collision-free initial-condition pairs (angles in radians)\n";
    out += "# seed = " + std::to_string(seed) + "\n";
    out += "# count = " + std::to_string(pairs.size()) + "\n";
    out += "index,a_train,e_train,i_train,raan_train,argp_train,nu_train,"
           "a_extrap,e_extrap,i_extrap,raan_extrap,argp_extrap,nu_extrap\n";
    const auto append_elements = [](std::string& row, const KeplerianElements& el) {
        for (double v : {el.semi_major, el.eccentricity, el.inclination, el.raan,
                         el.arg_perigee, el.true_anomaly}) {
            row += ',';
            row += format_double(v);
        }
    };
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        std::string row = std::to_string(i);
        append_elements(row, pairs[i].train);
        append_elements(row, pairs[i].extrap);
        row += '\n';
        out += row;
    }
    return out;
}

std::vector<IcPair> parse_ic_csv(const std::string& text) {
    std::vector<IcPair> pairs;
    std::istringstream in(text);
    std::string line;
    bool header_seen = false;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (!header_seen) { // column header row
            header_seen = true;
            continue;
        }
        std::istringstream row(line);
        std::string cell;
        std::vector<double> values;
        while (std::getline(row, cell, ',')) values.push_back(std::stod(cell));
        if (values.size() != 13)
            throw ConfigError("ic file: expected 13 columns per row");
        const auto read_elements = [&](int offset) {
            KeplerianElements el;
            el.semi_major = values[offset + 0];
            el.eccentricity = values[offset + 1];
            el.inclination = values[offset + 2];
            el.raan = values[offset + 3];
            el.arg_perigee = values[offset + 4];
            el.true_anomaly = values[offset + 5];
            return el;
        };
        pairs.push_back({read_elements(1), read_elements(7)});
    }
    if (pairs.empty()) throw ConfigError("ic file: no rows parsed");
    return pairs;
}

std::string gp_model_json(const TrainedGp& model, const std::string& data_reference,
                          const std::string& data_hash) {
    json hp = json::array();
    for (const auto& h : model.hyperparams()) {
        hp.push_back(json{{"log_lengthscales",
                           {h.log_lengthscales[0], h.log_lengthscales[1], h.log_lengthscales[2]}},
                          {"log_signal_variance", h.log_signal_variance},
                          {"log_noise_variance", h.log_noise_variance},
                          {"constant_mean", h.constant_mean}});
    }
    json j{{"kind", "gp"},
           {"hyperparams", hp},
           {"training_data",
            {{"reference", data_reference},
             {"hash", data_hash},
             {"count", model.training_inputs().size()}}},
           {"diagnostics",
            {{"final_loss", model.final_loss()},
             {"epochs_run", model.epochs_run()},
             {"instability", model.instability_flag()}}}};
    return j.dump(2) + "\n";
}

std::string nn_model_json(const MlpNetwork& model) {
    json layers = json::array();
    for (const auto& layer : model.layers()) {
        json weight = json::array();
        for (Eigen::Index i = 0; i < layer.weight.rows(); ++i)
            for (Eigen::Index jcol = 0; jcol < layer.weight.cols(); ++jcol)
                weight.push_back(layer.weight(i, jcol));
        json bias = json::array();
        for (Eigen::Index i = 0; i < layer.bias.size(); ++i) bias.push_back(layer.bias[i]);
        layers.push_back(json{{"rows", layer.weight.rows()},
                              {"cols", layer.weight.cols()},
                              {"weight", weight},
                              {"bias", bias},
                              {"sigma_estimate", layer.sigma}});
    }
    json j{{"kind", "nn"},
           {"lipschitz_budget", model.lipschitz_budget()},
           {"layers", layers},
           {"diagnostics",
            {{"final_loss", model.final_loss()},
             {"epochs_run", model.epochs_run()},
             {"optimizer_steps", model.optimizer_steps()},
             {"instability", model.instability_flag()}}}};
    return j.dump(2) + "\n";
}

} // namespace gravlearn
