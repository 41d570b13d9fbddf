// Deterministic serialization: CSV with %.17g round-trip formatting and JSON
// with sorted keys, so identical results produce identical bytes.
#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "gravlearn/dataset.hpp"
#include "gravlearn/gp_regressor.hpp"
#include "gravlearn/nn_regressor.hpp"

namespace gravlearn {

std::string format_double(double v);
std::uint64_t fnv1a64(std::string_view bytes);
std::string hash_hex(std::string_view bytes);

/// Throws IoError on failure.
void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

/// Header: t,x1,x2,x3,ax,ay,az,true_x1,...,true_az (observed then truth).
std::string dataset_to_csv(const SampledDataset& ds);
/// Provenance sidecar: IC elements, trajectory spec, noise spec, seeds,
/// accel_scale, drop count.
std::string dataset_sidecar_json(const SampledDataset& ds);
/// Writes <stem>.csv and <stem>.meta.json.
void write_dataset(const SampledDataset& ds, const std::string& path_stem);

/// Hash over the observed inputs and targets, for model provenance.
std::string dataset_content_hash(const SampledDataset& ds);

struct IcPair {
    KeplerianElements train;
    KeplerianElements extrap;
};
std::string ic_list_to_csv(const std::vector<IcPair>& pairs, std::uint64_t seed);
std::vector<IcPair> parse_ic_csv(const std::string& text);

std::string gp_model_json(const TrainedGp& model, const std::string& data_reference,
                          const std::string& data_hash);
std::string nn_model_json(const MlpNetwork& model);

} // namespace gravlearn
