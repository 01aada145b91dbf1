#include "v2v/nakagami.hpp"

#include <cmath>

#include "v2v/common.hpp"

namespace v2v {

void NakagamiParams::validate() const {
    if (m_table.empty()) throw config_error("NakagamiParams: empty m table");
    double prev = 0.0;
    for (const auto& e : m_table) {
        if (e.m < 0.5) throw config_error("NakagamiParams: m must be >= 0.5");
        if (e.d_upper_m <= prev) throw config_error("NakagamiParams: intervals must be strictly increasing");
        prev = e.d_upper_m;
    }
    mean_gain.validate();
}

double NakagamiParams::m_at(double d_m) const {
    for (const auto& e : m_table)
        if (d_m <= e.d_upper_m) return e.m;
    throw config_error("NakagamiParams: distance " + std::to_string(d_m) +
                       " outside the configured m table");
}

double gamma_power_sample(double m, double mean_w, std::mt19937_64& rng) {
    // Nakagami-m envelope <=> Gamma power with shape m, scale mean/m
    std::gamma_distribution<double> gamma(m, mean_w / m);
    return gamma(rng);
}

double nakagami_sample(const NakagamiParams& p, double d_m, std::mt19937_64& rng) {
    const double m = p.m_at(d_m);
    const double mean = db_to_linear(dual_slope_gain_db(p.mean_gain, d_m));
    return gamma_power_sample(m, mean, rng);
}

NakagamiParams placeholder_nakagami() {
    NakagamiParams p;
    p.m_table = {{1000.0, 1.0}};
    p.mean_gain = params::highway_los();
    return p;
}

}  // namespace v2v
