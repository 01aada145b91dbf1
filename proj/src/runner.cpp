#include "v2v/runner.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "v2v/common.hpp"

namespace v2v {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string run_dir_name(ChannelModel model, double density, std::uint64_t seed) {
    std::ostringstream ss;
    ss << to_string(model) << "_d" << static_cast<long long>(density) << "_s" << seed;
    return ss.str();
}

}  // namespace

RunResult run_single(const RunConfig& cfg, ChannelModel model, double density,
                     std::uint64_t seed, const std::optional<std::string>& out_dir,
                     MetricsBundle* bundle_out) {
    ScenarioConfig scenario = cfg.scenario;
    scenario.density_veh_per_km = density;

    NetSim sim(scenario, cfg.radio, cfg.channel, model, seed, cfg.sim);

    MetricsAccumulator acc(cfg.metrics_bin_m, seed);
    RunResult res;
    res.model = model;
    res.density_veh_per_km = density;
    res.seed = seed;

    if (out_dir) fs::create_directories(*out_dir);

    std::ofstream events, class_log;
    if (out_dir && cfg.event_log) {
        events.open(*out_dir + "/events.csv");
        write_record_csv_header(events);
        class_log.open(*out_dir + "/class_log.csv");
        class_log << "distance_m,class\n";
    }

    bool tracked_set = false;
    sim.set_record_sink([&](const PacketRecord& rec) {
        if (!tracked_set && !sim.tracked_pairs().empty()) {
            acc.set_tracked(sim.tracked_pairs());
            tracked_set = true;
        }
        acc.add_record(rec);
        res.records++;
        if (rec.outcome == Outcome::RECEIVED) res.received++;
        if (events.is_open()) write_record_csv_row(events, rec);
    });
    sim.set_class_sink([&](double d, LinkClass cls) {
        acc.add_class_sample(d, cls);
        if (class_log.is_open())
            class_log << std::fixed << std::setprecision(6) << d << ',' << to_string(cls)
                      << '\n';
    });

    sim.run();
    res.tracked = sim.tracked_pairs();

    MetricsBundle bundle = acc.finalize();
    if (bundle_out) *bundle_out = bundle;

    if (out_dir) {
        res.dir = *out_dir;
        {
            std::ofstream f(*out_dir + "/prp.csv");
            write_prp_csv(f, bundle.prp);
        }
        {
            std::ofstream f(*out_dir + "/class_prob.csv");
            write_class_prob_csv(f, bundle.class_prob);
        }
        {
            std::ofstream f(*out_dir + "/power.csv");
            write_power_csv(f, bundle.power);
        }
        {
            std::ofstream f(*out_dir + "/iat_cdf.csv");
            write_iat_csv(f, bundle.iat);
        }
        {
            json tp = json::array();
            for (const auto& p : res.tracked)
                tp.push_back({{"a", p.a}, {"b", p.b}, {"direction", p.direction}});
            std::ofstream f(*out_dir + "/tracked_pairs.json");
            f << tp.dump(2) << "\n";
        }
    }
    return res;
}

std::vector<RunResult> run_sweep(const RunConfig& cfg) {
    cfg.validate();
    fs::create_directories(cfg.out_dir);
    {
        std::ofstream f(cfg.out_dir + "/config.json");
        if (!f) throw config_error("run_sweep: cannot write to " + cfg.out_dir);
        f << dump_run_config(cfg);
    }

    std::vector<RunResult> results;
    for (ChannelModel model : cfg.models) {
        for (double density : cfg.densities_veh_per_km) {
            for (std::uint64_t seed : cfg.seeds) {
                const std::string dir =
                    cfg.out_dir + "/" + run_dir_name(model, density, seed);
                fs::create_directories(dir);
                {
                    RunConfig echo = cfg;
                    echo.scenario.density_veh_per_km = density;
                    echo.models = {model};
                    echo.seeds = {seed};
                    std::ofstream f(dir + "/config.json");
                    f << dump_run_config(echo);
                }
                results.push_back(run_single(cfg, model, density, seed, dir));
            }
        }
    }

    json summary = json::array();
    for (const auto& r : results) {
        summary.push_back({{"dir", r.dir},
                           {"model", to_string(r.model)},
                           {"density_veh_per_km", r.density_veh_per_km},
                           {"seed", r.seed},
                           {"records", r.records},
                           {"received", r.received}});
    }
    std::ofstream f(cfg.out_dir + "/summary.json");
    f << summary.dump(2) << "\n";
    return results;
}

}  // namespace v2v
