#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "v2v/estimation.hpp"
#include "v2v/metrics.hpp"
#include "v2v/netsim.hpp"

namespace v2v {

// Full sweep configuration: scenario x radio x channel plus the
// model/density/seed grid. Loaded from JSON; unknown keys are rejected.
struct RunConfig {
    ScenarioConfig scenario;
    RadioConfig radio;
    ChannelParams channel;
    std::vector<ChannelModel> models = {ChannelModel::LOS_OLOS};
    std::vector<double> densities_veh_per_km = {40.0};
    std::vector<std::uint64_t> seeds = {1};
    SimOptions sim;
    double metrics_bin_m = 100.0;
    std::string out_dir = "out";
    bool event_log = false;
    bool nakagami_supplied = false;  // true when the m table came from the user

    void validate() const;
};

RunConfig load_run_config(const std::string& path);
RunConfig parse_run_config(const std::string& json_text);

// Effective configuration echo, emitted next to every run's outputs.
std::string dump_run_config(const RunConfig& cfg);

// CI-scale preset: 2 km road, 100 s simulated time.
void apply_desk_scale(RunConfig& cfg);

// GainSeries CSV: columns distance_m,gain_db,censored
GainSeries read_gain_series_csv(std::istream& is);
void write_gain_series_csv(std::ostream& os, const GainSeries& series);

// CirTrace binary layout: header {uint32 n_time, uint32 n_delay,
// float64 dt_s, float64 dtau_s}, body interleaved re/im float64 pairs in
// row-major (time, delay) order, little-endian throughout.
CirTrace read_cir_trace(std::istream& is);
void write_cir_trace(std::ostream& os, const CirTrace& cir);

// Scene description for the one-shot classify verb.
struct Scene {
    std::vector<Rect> obstacles;
    std::vector<Road> roads;
    Vec2 tx;
    Vec2 rx;
    FresnelOptions fresnel;
};
Scene parse_scene(const std::string& json_text);

}  // namespace v2v
