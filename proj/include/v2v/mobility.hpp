#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "v2v/geometry.hpp"

namespace v2v {

struct VehicleBody {
    std::uint64_t id = 0;
    std::size_t lane = 0;  // index within direction
    int direction = 1;     // +1 travels +x, -1 travels -x
    double position_m = 0.0;
    double speed_mps = 1.0;
    double y_m = 0.0;  // lane center offset
    double spawn_time_s = 0.0;

    Vec2 antenna() const { return {position_m, y_m}; }
    Rect footprint(double length_m, double width_m) const {
        return {{position_m, y_m}, length_m, width_m, 0.0, std::nullopt, RectKind::VEHICLE};
    }
};

struct ScenarioConfig {
    double road_length_m = 10000.0;
    std::size_t lanes_per_direction = 2;
    std::vector<double> lane_speed_means_mps = {23.0, 30.0};  // per lane index
    double speed_stddev_mps = 1.0;
    double density_veh_per_km = 40.0;  // both directions combined
    double sim_duration_s = 100.0;
    double step_s = 0.1;
    double lane_width_m = 3.5;
    double vehicle_length_m = 4.8;
    double vehicle_width_m = 1.8;
    double antenna_height_m = 1.47;
    double spawn_headway_s = 1.2;  // minimum time gap at entry

    void validate() const;
    // Poisson arrival rate per direction so the steady state hits the
    // configured density.
    double arrival_rate_per_direction() const;
    double lane_center_y(std::size_t lane, int direction) const;
};

class Highway {
public:
    Highway(ScenarioConfig cfg, std::uint64_t seed);

    // Fill the road with a steady-state snapshot at t = 0 so density is
    // correct from the start instead of after one traversal time.
    void prepopulate();

    // One simulation step: Poisson arrivals at both entries, constant
    // speed kinematics, exit removal.
    void advance(double dt_s);

    double now() const { return time_s_; }
    const std::vector<VehicleBody>& vehicles() const { return vehicles_; }
    const ScenarioConfig& config() const { return cfg_; }
    std::uint64_t total_spawned() const { return next_id_; }

    std::vector<Rect> footprints_excluding(std::uint64_t a, std::uint64_t b) const;

private:
    void spawn_arrivals(double dt_s);
    bool try_spawn(int direction, std::size_t lane);
    double sample_speed(std::size_t lane, const VehicleBody* leader, double gap_m);

    ScenarioConfig cfg_;
    std::mt19937_64 rng_;
    std::vector<VehicleBody> vehicles_;
    double time_s_ = 0.0;
    std::uint64_t next_id_ = 0;
    std::vector<std::uint32_t> pending_by_lane_[2];  // arrivals held at the entries
};

}  // namespace v2v
