#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

#include <doctest.h>

#include "v2v/mobility.hpp"

using namespace v2v;

TEST_CASE("arrival rate matches the target density") {
    ScenarioConfig cfg;  // 40 veh/km total, 2 lanes at 23 and 30 m/s
    // density per direction is 0.02 veh/m spread over both lanes; each
    // lane contributes density/lanes, and flow = density * speed
    const double expected =
        (40.0 / 1000.0 / 2.0) * 2.0 / (1.0 / 23.0 + 1.0 / 30.0);
    CHECK(cfg.arrival_rate_per_direction() == doctest::Approx(expected).epsilon(1e-12));
    CHECK(expected == doctest::Approx(0.5209).epsilon(1e-3));
}

TEST_CASE("lane center offsets are mirrored by direction") {
    ScenarioConfig cfg;
    CHECK(cfg.lane_center_y(0, 1) == doctest::Approx(0.5 * 3.5));
    CHECK(cfg.lane_center_y(1, 1) == doctest::Approx(1.5 * 3.5));
    CHECK(cfg.lane_center_y(0, -1) == doctest::Approx(-0.5 * 3.5));
    CHECK(cfg.lane_center_y(1, -1) == doctest::Approx(-1.5 * 3.5));
}

TEST_CASE("configuration validation") {
    ScenarioConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    cfg.density_veh_per_km = 0.0;
    CHECK_THROWS(cfg.validate());
    cfg = ScenarioConfig{};
    cfg.lane_speed_means_mps = {23.0};  // fewer entries than lanes
    CHECK_THROWS(cfg.validate());
    cfg = ScenarioConfig{};
    cfg.step_s = 0.0;
    CHECK_THROWS(cfg.validate());
    cfg = ScenarioConfig{};
    cfg.road_length_m = -1.0;
    CHECK_THROWS(cfg.validate());
}

TEST_CASE("prepopulated highway holds the configured density") {
    ScenarioConfig cfg;
    cfg.road_length_m = 5000.0;
    Highway hw(cfg, 3);
    hw.prepopulate();
    // let the boundary process settle, then time-average the count
    for (int i = 0; i < 300; ++i) hw.advance(cfg.step_s);
    double acc = 0.0;
    const int n = 1200;
    for (int i = 0; i < n; ++i) {
        hw.advance(cfg.step_s);
        acc += static_cast<double>(hw.vehicles().size());
    }
    const double target = cfg.density_veh_per_km * cfg.road_length_m / 1000.0;
    CHECK(acc / n == doctest::Approx(target).epsilon(0.10));
}

TEST_CASE("arrival counts are Poisson-consistent") {
    ScenarioConfig cfg;
    cfg.road_length_m = 2000.0;
    Highway hw(cfg, 11);
    const double horizon = 400.0;
    for (double t = 0.0; t < horizon; t += cfg.step_s) hw.advance(cfg.step_s);
    // both directions spawn at arrival_rate_per_direction
    const double lam = 2.0 * cfg.arrival_rate_per_direction() * horizon;
    const double spawned = static_cast<double>(hw.total_spawned());
    CHECK(std::abs(spawned - lam) < 3.0 * std::sqrt(lam) + 5.0);
}

TEST_CASE("vehicles never swap order within a lane") {
    // speeds are capped at spawn so a follower cannot reach its leader
    // before the leader exits; centers therefore stay strictly ordered
    ScenarioConfig cfg;
    cfg.road_length_m = 3000.0;
    cfg.density_veh_per_km = 60.0;
    Highway hw(cfg, 5);
    hw.prepopulate();
    int violations = 0;
    for (int step = 0; step < 2000; ++step) {
        hw.advance(cfg.step_s);
        std::map<std::pair<int, std::size_t>, std::vector<const VehicleBody*>> lanes;
        for (const auto& v : hw.vehicles()) lanes[{v.direction, v.lane}].push_back(&v);
        for (auto& [key, vs] : lanes) {
            std::sort(vs.begin(), vs.end(), [](const VehicleBody* a, const VehicleBody* b) {
                return a->position_m < b->position_m;
            });
            for (std::size_t i = 1; i < vs.size(); ++i)
                violations += vs[i]->position_m - vs[i - 1]->position_m <= 0.0;
        }
    }
    CHECK(violations == 0);
}

TEST_CASE("kinematics: position advances by speed * dt, exits are removed") {
    ScenarioConfig cfg;
    cfg.road_length_m = 500.0;
    Highway hw(cfg, 9);
    hw.prepopulate();
    REQUIRE(!hw.vehicles().empty());
    std::map<std::uint64_t, std::pair<double, double>> before;  // id -> (pos, speed)
    for (const auto& v : hw.vehicles()) before[v.id] = {v.position_m, v.speed_mps};
    hw.advance(0.1);
    for (const auto& v : hw.vehicles()) {
        auto it = before.find(v.id);
        if (it == before.end()) continue;  // freshly spawned
        CHECK(v.position_m == doctest::Approx(it->second.first +
                                              v.direction * it->second.second * 0.1)
                                  .epsilon(1e-9));
    }
    for (const auto& v : hw.vehicles()) {
        CHECK(v.position_m >= -1e-9);
        CHECK(v.position_m <= cfg.road_length_m + 1e-9);
    }
    // run until every original vehicle has crossed the short road
    for (int i = 0; i < 600; ++i) hw.advance(0.1);
    for (const auto& v : hw.vehicles()) CHECK(before.find(v.id) == before.end());
}

TEST_CASE("same seed reproduces the traffic exactly") {
    ScenarioConfig cfg;
    cfg.road_length_m = 2000.0;
    Highway a(cfg, 21), b(cfg, 21);
    a.prepopulate();
    b.prepopulate();
    for (int i = 0; i < 500; ++i) {
        a.advance(cfg.step_s);
        b.advance(cfg.step_s);
    }
    REQUIRE(a.vehicles().size() == b.vehicles().size());
    for (std::size_t i = 0; i < a.vehicles().size(); ++i) {
        CHECK(a.vehicles()[i].id == b.vehicles()[i].id);
        CHECK(a.vehicles()[i].position_m == doctest::Approx(b.vehicles()[i].position_m));
        CHECK(a.vehicles()[i].speed_mps == doctest::Approx(b.vehicles()[i].speed_mps));
    }
}

TEST_CASE("footprints exclude the endpoints of a link") {
    ScenarioConfig cfg;
    cfg.road_length_m = 1000.0;
    Highway hw(cfg, 2);
    hw.prepopulate();
    REQUIRE(hw.vehicles().size() >= 3);
    const auto a = hw.vehicles()[0].id;
    const auto b = hw.vehicles()[1].id;
    const auto rects = hw.footprints_excluding(a, b);
    CHECK(rects.size() == hw.vehicles().size() - 2);
    for (const auto& r : rects) CHECK(r.kind == RectKind::VEHICLE);
}
