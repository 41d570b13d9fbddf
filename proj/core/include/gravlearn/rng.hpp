// Deterministic random streams. Seeds are derived by hashing a base seed with
// run indices and a stream name, so results are independent of scheduling.
#pragma once

#include <cstdint>
#include <string_view>

namespace gravlearn {

/// Stable 64-bit hash chain (splitmix64 over FNV-1a of the inputs).
std::uint64_t derive_seed(std::uint64_t base_seed, std::uint64_t instance_index,
                          std::uint64_t ic_index, std::string_view stream_name);

/// Counter-based generator (splitmix64) with hand-rolled uniform and normal
/// transforms, so streams are reproducible across standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64();
    /// Uniform on [0, 1).
    double uniform();
    /// Uniform on [lo, hi).
    double uniform(double lo, double hi);
    /// Standard normal via Box-Muller (two uniforms per pair, second cached).
    double normal();

private:
    std::uint64_t state_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

} // namespace gravlearn
