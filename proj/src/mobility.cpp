#include "v2v/mobility.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "v2v/common.hpp"

namespace v2v {

void ScenarioConfig::validate() const {
    if (road_length_m <= 0.0 || sim_duration_s <= 0.0 || step_s <= 0.0 ||
        density_veh_per_km <= 0.0 || lane_width_m <= 0.0 || speed_stddev_mps < 0.0)
        throw config_error("ScenarioConfig: all scalars must be positive");
    if (step_s > 0.1) throw config_error("ScenarioConfig: step size must be <= 100 ms");
    if (lanes_per_direction == 0) throw config_error("ScenarioConfig: need at least one lane");
    if (lane_speed_means_mps.size() != lanes_per_direction)
        throw config_error("ScenarioConfig: one speed mean per lane required");
    for (double v : lane_speed_means_mps)
        if (v <= 0.0) throw config_error("ScenarioConfig: lane speeds must be positive");
}

double ScenarioConfig::arrival_rate_per_direction() const {
    // per-direction density (veh/m) = sum over lanes of (q/n)/v_i
    double inv_sum = 0.0;
    for (double v : lane_speed_means_mps) inv_sum += 1.0 / v;
    const double density_dir = density_veh_per_km / 1000.0 / 2.0;
    return density_dir * static_cast<double>(lanes_per_direction) / inv_sum;
}

double ScenarioConfig::lane_center_y(std::size_t lane, int direction) const {
    const double y = (static_cast<double>(lane) + 0.5) * lane_width_m;
    return direction > 0 ? y : -y;
}

Highway::Highway(ScenarioConfig cfg, std::uint64_t seed)
    : cfg_(std::move(cfg)), rng_(make_engine(seed, 0x0b11ULL)) {
    cfg_.validate();
    pending_by_lane_[0].assign(cfg_.lanes_per_direction, 0);
    pending_by_lane_[1].assign(cfg_.lanes_per_direction, 0);
}

double Highway::sample_speed(std::size_t lane, const VehicleBody* leader, double gap_m) {
    std::normal_distribution<double> dist(cfg_.lane_speed_means_mps[lane], cfg_.speed_stddev_mps);
    double v = 0.0;
    for (int attempt = 0; attempt < 20; ++attempt) {
        v = std::max(dist(rng_), 0.5);
        if (!leader) return v;
        if (v <= leader->speed_mps) return v;
        // would the follower catch the leader before the leader exits?
        const double travelled = leader->direction > 0 ? leader->position_m
                                                       : cfg_.road_length_m - leader->position_m;
        const double leader_exit_s = (cfg_.road_length_m - travelled) / leader->speed_mps;
        const double catch_s = gap_m / (v - leader->speed_mps);
        if (catch_s > leader_exit_s) return v;
    }
    return leader->speed_mps;  // same-lane overtaking is never allowed
}

bool Highway::try_spawn(int direction, std::size_t lane) {
    const double entry = direction > 0 ? 0.0 : cfg_.road_length_m;

    // nearest same-lane vehicle ahead of the entry point
    const VehicleBody* leader = nullptr;
    double gap = cfg_.road_length_m;
    for (const auto& v : vehicles_) {
        if (v.direction != direction || v.lane != lane) continue;
        const double g = direction > 0 ? v.position_m : cfg_.road_length_m - v.position_m;
        if (g < gap) {
            gap = g;
            leader = &v;
        }
    }
    // entry gating: hold the arrival while the time gap to the lane's
    // last vehicle is below the spawn headway
    if (leader && gap < cfg_.spawn_headway_s * leader->speed_mps) return false;

    VehicleBody v;
    v.id = next_id_++;
    v.lane = lane;
    v.direction = direction;
    v.position_m = entry;
    v.speed_mps = sample_speed(lane, leader, gap);
    v.y_m = cfg_.lane_center_y(lane, direction);
    v.spawn_time_s = time_s_;
    vehicles_.push_back(v);
    return true;
}

void Highway::spawn_arrivals(double dt_s) {
    const double rate = cfg_.arrival_rate_per_direction();
    for (int d = 0; d < 2; ++d) {
        const int direction = d == 0 ? +1 : -1;
        std::poisson_distribution<int> pois(rate * dt_s);
        const int n_arrivals = pois(rng_);
        std::uniform_int_distribution<std::size_t> lane_pick(0, cfg_.lanes_per_direction - 1);
        for (int k = 0; k < n_arrivals; ++k) pending_by_lane_[d][lane_pick(rng_)]++;
        for (std::size_t lane = 0; lane < cfg_.lanes_per_direction; ++lane) {
            while (pending_by_lane_[d][lane] > 0 && try_spawn(direction, lane)) pending_by_lane_[d][lane]--;
        }
    }
}

void Highway::prepopulate() {
    const double rate = cfg_.arrival_rate_per_direction();
    const double lane_rate = rate / static_cast<double>(cfg_.lanes_per_direction);
    for (int direction : {+1, -1}) {
        for (std::size_t lane = 0; lane < cfg_.lanes_per_direction; ++lane) {
            const double lin_density = lane_rate / cfg_.lane_speed_means_mps[lane];  // veh/m
            std::exponential_distribution<double> gap_dist(lin_density);
            // walk from the downstream end so each placed vehicle knows its leader
            double progress = cfg_.road_length_m - gap_dist(rng_);
            const VehicleBody* leader = nullptr;
            while (progress > 0.0) {
                VehicleBody v;
                v.id = next_id_++;
                v.lane = lane;
                v.direction = direction;
                v.position_m = direction > 0 ? progress : cfg_.road_length_m - progress;
                v.y_m = cfg_.lane_center_y(lane, direction);
                v.spawn_time_s = 0.0;
                const double gap =
                    leader ? std::abs(leader->position_m - v.position_m) : cfg_.road_length_m;
                v.speed_mps = sample_speed(lane, leader, gap);
                vehicles_.push_back(v);
                leader = &vehicles_.back();
                progress -= std::max(gap_dist(rng_), cfg_.vehicle_length_m + 2.0);
            }
        }
    }
}

void Highway::advance(double dt_s) {
    if (dt_s <= 0.0) throw std::invalid_argument("Highway::advance: dt must be > 0");
    for (auto& v : vehicles_) v.position_m += v.speed_mps * dt_s * v.direction;
    std::erase_if(vehicles_, [this](const VehicleBody& v) {
        return v.position_m < 0.0 || v.position_m > cfg_.road_length_m;
    });
    time_s_ += dt_s;
    spawn_arrivals(dt_s);
}

std::vector<Rect> Highway::footprints_excluding(std::uint64_t a, std::uint64_t b) const {
    std::vector<Rect> rects;
    rects.reserve(vehicles_.size());
    for (const auto& v : vehicles_) {
        if (v.id == a || v.id == b) continue;
        rects.push_back(v.footprint(cfg_.vehicle_length_m, cfg_.vehicle_width_m));
    }
    return rects;
}

}  // namespace v2v
