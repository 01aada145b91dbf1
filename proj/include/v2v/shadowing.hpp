#pragma once

#include <cstdint>
#include <random>

namespace v2v {

enum class ShadowMode { AR, BLOCK };

struct ShadowConfig {
    double sigma_db = 1.0;  // > 0
    double dc_m = 1.0;      // decorrelation distance, > 0
    ShadowMode mode = ShadowMode::AR;

    void validate() const;
};

// Spatial autocorrelation exp(-|delta_d|/dc).
double shadow_autocorrelation(double dc_m, double delta_d_m);

// Spatially correlated log-normal shadow fading for one link. Marginals
// are N(0, sigma^2) dB; successive values follow the exponential
// autocorrelation through an AR(1) update on the normalized state, or a
// per-block independent draw in BLOCK mode.
//
// Single-owner mutable state; one process per unordered link pair
// (channel reciprocity), RNG stream derived from (seed, link ids).
class ShadowProcess {
public:
    ShadowProcess(ShadowConfig cfg, std::uint64_t seed, std::uint64_t link_a,
                  std::uint64_t link_b);

    // AR mode: advance by |delta_d| meters of TX-RX separation change and
    // return the new shadow value in dB. delta_d = 0 keeps the value.
    double advance(double delta_d_m);

    // BLOCK mode: value for block floor(position/dc); constant within a
    // block, independent across blocks, order-independent.
    double block_value(double position_m) const;

    double current_db() const { return cfg_.sigma_db * z_; }

    // Switch (sigma, dc) on a link-class change; the normalized state is
    // retained so the only power step is the modeled mean offset.
    void set_config(const ShadowConfig& cfg);

    const ShadowConfig& config() const { return cfg_; }

private:
    ShadowConfig cfg_;
    std::uint64_t block_seed_;
    std::mt19937_64 rng_;
    double z_;  // normalized state, N(0,1) marginally
};

}  // namespace v2v
