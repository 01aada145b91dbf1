#pragma once

#include <optional>
#include <string>
#include <vector>

#include "v2v/config.hpp"
#include "v2v/metrics.hpp"

namespace v2v {

struct RunResult {
    std::string dir;
    ChannelModel model;
    double density_veh_per_km = 0.0;
    std::uint64_t seed = 0;
    std::uint64_t records = 0;
    std::uint64_t received = 0;
    std::vector<TrackedPair> tracked;
};

// One simulation run; writes the per-run CSV tree when out_dir is set.
RunResult run_single(const RunConfig& cfg, ChannelModel model, double density,
                     std::uint64_t seed, const std::optional<std::string>& out_dir,
                     MetricsBundle* bundle_out = nullptr);

// The full model x density x seed grid under cfg.out_dir; writes a merged
// summary.json and the echoed configuration.
std::vector<RunResult> run_sweep(const RunConfig& cfg);

}  // namespace v2v
