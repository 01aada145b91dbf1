#include "v2v/shadowing.hpp"

#include <cmath>
#include <stdexcept>

#include "v2v/common.hpp"

namespace v2v {

void ShadowConfig::validate() const {
    if (sigma_db <= 0.0) throw std::invalid_argument("ShadowConfig: sigma must be > 0");
    if (dc_m <= 0.0) throw std::invalid_argument("ShadowConfig: dc must be > 0");
}

double shadow_autocorrelation(double dc_m, double delta_d_m) {
    if (dc_m <= 0.0) throw std::invalid_argument("shadow_autocorrelation: dc must be > 0");
    return std::exp(-std::abs(delta_d_m) / dc_m);
}

ShadowProcess::ShadowProcess(ShadowConfig cfg, std::uint64_t seed, std::uint64_t link_a,
                             std::uint64_t link_b)
    : cfg_(cfg),
      block_seed_(hash_combine(hash_combine(seed, std::min(link_a, link_b)),
                               std::max(link_a, link_b))),
      rng_(make_engine(seed, std::min(link_a, link_b), std::max(link_a, link_b), 0x5AADULL)) {
    cfg_.validate();
    std::normal_distribution<double> n01(0.0, 1.0);
    z_ = n01(rng_);  // stationary start
}

double ShadowProcess::advance(double delta_d_m) {
    if (delta_d_m < 0.0) throw std::invalid_argument("ShadowProcess::advance: delta_d must be >= 0");
    if (delta_d_m > 0.0) {
        const double rho = shadow_autocorrelation(cfg_.dc_m, delta_d_m);
        std::normal_distribution<double> n01(0.0, 1.0);
        z_ = rho * z_ + std::sqrt(1.0 - rho * rho) * n01(rng_);
    }
    return cfg_.sigma_db * z_;
}

double ShadowProcess::block_value(double position_m) const {
    if (position_m < 0.0) throw std::invalid_argument("ShadowProcess::block_value: position must be >= 0");
    const auto block = static_cast<std::uint64_t>(std::floor(position_m / cfg_.dc_m));
    auto rng = make_engine(block_seed_, block, 0xb10cULL);
    std::normal_distribution<double> n01(0.0, 1.0);
    return cfg_.sigma_db * n01(rng);
}

void ShadowProcess::set_config(const ShadowConfig& cfg) {
    cfg.validate();
    cfg_ = cfg;  // z_ (normalized) carries over
}

}  // namespace v2v
