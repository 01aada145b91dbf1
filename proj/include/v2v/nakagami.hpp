#pragma once

#include <random>
#include <vector>

#include "v2v/pathloss.hpp"

namespace v2v {

// Nakagami-m comparison channel: fading intensity m depends on the TX-RX
// distance through a piecewise table, and the mean power follows its own
// dual-slope model. Shipped defaults are placeholders, not fitted values;
// real parameters come from configuration.
struct NakagamiParams {
    struct Entry {
        double d_upper_m;  // interval upper bound; intervals are contiguous
        double m;          // Nakagami m-parameter, >= 0.5
    };
    std::vector<Entry> m_table;
    PathLossParams mean_gain;  // dual-slope mean channel gain (dB, negative)

    void validate() const;
    double m_at(double d_m) const;  // throws config_error outside the table
};

// Linear channel-gain sample: Gamma(shape m(d), mean = mean gain at d).
// Received power is tx_power_w * sample.
double nakagami_sample(const NakagamiParams& p, double d_m, std::mt19937_64& rng);

// Gamma power sample with explicit shape and mean; the kernel behind
// nakagami_sample.
double gamma_power_sample(double m, double mean_w, std::mt19937_64& rng);

// Placeholder defaults (single m=1 interval to 1 km over the highway LOS
// mean curve); clearly non-normative, for smoke tests only.
NakagamiParams placeholder_nakagami();

}  // namespace v2v
