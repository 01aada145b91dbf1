#include "v2v/config.hpp"

#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include <json.hpp>

#include "v2v/common.hpp"

namespace v2v {

using nlohmann::json;

namespace {

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& path) {
    if (!j.is_object()) throw config_error("config: expected object at " + path);
    for (const auto& [key, value] : j.items())
        if (!allowed.count(key)) throw config_error("config: unknown key '" + path + key + "'");
}

template <typename T>
void get(const json& j, const char* key, T& target) {
    if (j.contains(key)) target = j.at(key).template get<T>();
}

void parse_pathloss_row(const json& j, const std::string& path, PathLossParams& p) {
    check_keys(j, {"n1", "n2", "pl0_db", "sigma_db", "d0_m", "db_m"}, path);
    if (j.contains("n1")) {
        if (j.at("n1").is_null())
            p.n1.reset();
        else
            p.n1 = j.at("n1").get<double>();
    }
    get(j, "n2", p.n2);
    get(j, "pl0_db", p.pl0_db);
    get(j, "sigma_db", p.sigma_db);
    get(j, "d0_m", p.d0_m);
    get(j, "db_m", p.db_m);
}

json dump_pathloss_row(const PathLossParams& p) {
    json j;
    j["n1"] = p.n1 ? json(*p.n1) : json(nullptr);
    j["n2"] = p.n2;
    j["pl0_db"] = p.pl0_db;
    j["sigma_db"] = p.sigma_db;
    j["d0_m"] = p.d0_m;
    j["db_m"] = p.db_m;
    return j;
}

ChannelModel parse_model(const std::string& s) {
    if (s == "LOS_OLOS") return ChannelModel::LOS_OLOS;
    if (s == "NAKAGAMI") return ChannelModel::NAKAGAMI;
    throw config_error("config: unknown channel model '" + s + "'");
}

RunConfig parse_json(const json& j) {
    RunConfig cfg;
    check_keys(j, {"scenario", "radio", "channel", "run", "metrics"}, "");

    if (j.contains("scenario")) {
        const json& s = j.at("scenario");
        check_keys(s,
                   {"road_length_m", "lanes_per_direction", "lane_speed_means_mps",
                    "speed_stddev_mps", "density_veh_per_km", "sim_duration_s", "step_s",
                    "lane_width_m", "vehicle_length_m", "vehicle_width_m", "antenna_height_m",
                    "spawn_headway_s"},
                   "scenario.");
        auto& c = cfg.scenario;
        get(s, "road_length_m", c.road_length_m);
        get(s, "lanes_per_direction", c.lanes_per_direction);
        get(s, "lane_speed_means_mps", c.lane_speed_means_mps);
        get(s, "speed_stddev_mps", c.speed_stddev_mps);
        get(s, "density_veh_per_km", c.density_veh_per_km);
        get(s, "sim_duration_s", c.sim_duration_s);
        get(s, "step_s", c.step_s);
        get(s, "lane_width_m", c.lane_width_m);
        get(s, "vehicle_length_m", c.vehicle_length_m);
        get(s, "vehicle_width_m", c.vehicle_width_m);
        get(s, "antenna_height_m", c.antenna_height_m);
        get(s, "spawn_headway_s", c.spawn_headway_s);
    }
    if (j.contains("radio")) {
        const json& r = j.at("radio");
        check_keys(r,
                   {"tx_power_dbm", "bitrate_bps", "payload_bytes", "overhead_bytes",
                    "beacon_rate_hz", "carrier_freq_hz", "bandwidth_hz", "noise_figure_db",
                    "cca_threshold_dbm", "sinr_threshold_db", "sensitivity_dbm", "slot_s",
                    "aifs_s", "cw_slots"},
                   "radio.");
        auto& c = cfg.radio;
        get(r, "tx_power_dbm", c.tx_power_dbm);
        get(r, "bitrate_bps", c.bitrate_bps);
        get(r, "payload_bytes", c.payload_bytes);
        get(r, "overhead_bytes", c.overhead_bytes);
        get(r, "beacon_rate_hz", c.beacon_rate_hz);
        get(r, "carrier_freq_hz", c.carrier_freq_hz);
        get(r, "bandwidth_hz", c.bandwidth_hz);
        get(r, "noise_figure_db", c.noise_figure_db);
        get(r, "cca_threshold_dbm", c.cca_threshold_dbm);
        get(r, "sinr_threshold_db", c.sinr_threshold_db);
        get(r, "sensitivity_dbm", c.sensitivity_dbm);
        get(r, "slot_s", c.slot_s);
        get(r, "aifs_s", c.aifs_s);
        get(r, "cw_slots", c.cw_slots);
    }
    if (j.contains("channel")) {
        const json& ch = j.at("channel");
        // olos_single_slope_fallback is a derived annotation written by
        // dump_run_config; accepted and ignored so echoes reload cleanly
        check_keys(ch,
                   {"los", "olos", "nlos", "nakagami", "dc_los_m", "dc_olos_m", "dc_nlos_m",
                    "shadow_mode", "olos_single_slope_fallback"},
                   "channel.");
        auto& c = cfg.channel;
        if (ch.contains("los")) parse_pathloss_row(ch.at("los"), "channel.los.", c.los);
        if (ch.contains("olos")) parse_pathloss_row(ch.at("olos"), "channel.olos.", c.olos);
        if (ch.contains("nlos")) {
            const json& n = ch.at("nlos");
            check_keys(n, {"n_nlos", "sigma_db", "suburban", "db_m", "lambda_m"},
                       "channel.nlos.");
            get(n, "n_nlos", c.nlos.n_nlos);
            get(n, "sigma_db", c.nlos.sigma_db);
            get(n, "suburban", c.nlos.suburban);
            get(n, "db_m", c.nlos.db_m);
            get(n, "lambda_m", c.nlos.lambda_m);
        }
        if (ch.contains("nakagami")) {
            const json& n = ch.at("nakagami");
            check_keys(n, {"m_table", "mean", "non_normative_placeholder"}, "channel.nakagami.");
            if (n.contains("m_table")) {
                c.nakagami.m_table.clear();
                for (const auto& row : n.at("m_table"))
                    c.nakagami.m_table.push_back(
                        {row.at(0).get<double>(), row.at(1).get<double>()});
                cfg.nakagami_supplied = true;
            }
            if (n.contains("mean"))
                parse_pathloss_row(n.at("mean"), "channel.nakagami.mean.", c.nakagami.mean_gain);
            // an echoed config states explicitly whether its m table is
            // the placeholder; trust that over the m_table-presence guess
            if (n.contains("non_normative_placeholder"))
                cfg.nakagami_supplied = !n.at("non_normative_placeholder").get<bool>();
        }
        get(ch, "dc_los_m", c.dc_los_m);
        get(ch, "dc_olos_m", c.dc_olos_m);
        get(ch, "dc_nlos_m", c.dc_nlos_m);
        if (ch.contains("shadow_mode")) {
            const auto s = ch.at("shadow_mode").get<std::string>();
            if (s == "AR")
                c.shadow_mode = ShadowMode::AR;
            else if (s == "BLOCK")
                c.shadow_mode = ShadowMode::BLOCK;
            else
                throw config_error("config: shadow_mode must be AR or BLOCK");
        }
    }
    if (j.contains("run")) {
        const json& r = j.at("run");
        check_keys(r,
                   {"models", "densities_veh_per_km", "seeds", "out_dir", "event_log",
                    "max_link_distance_m", "interference_range_m", "warmup_s", "tracked_pairs",
                    "prepopulate", "tracked_pair_selection"},
                   "run.");
        if (r.contains("models")) {
            cfg.models.clear();
            for (const auto& m : r.at("models")) cfg.models.push_back(parse_model(m));
        }
        get(r, "densities_veh_per_km", cfg.densities_veh_per_km);
        get(r, "seeds", cfg.seeds);
        get(r, "out_dir", cfg.out_dir);
        get(r, "event_log", cfg.event_log);
        get(r, "max_link_distance_m", cfg.sim.max_link_distance_m);
        get(r, "interference_range_m", cfg.sim.interference_range_m);
        get(r, "warmup_s", cfg.sim.warmup_s);
        get(r, "tracked_pairs", cfg.sim.tracked_pairs);
        get(r, "prepopulate", cfg.sim.prepopulate);
    }
    if (j.contains("metrics")) {
        const json& m = j.at("metrics");
        check_keys(m, {"bin_width_m"}, "metrics.");
        get(m, "bin_width_m", cfg.metrics_bin_m);
    }
    cfg.validate();
    return cfg;
}

}  // namespace

void RunConfig::validate() const {
    scenario.validate();
    radio.validate();
    channel.validate();
    if (models.empty()) throw config_error("config: at least one model required");
    if (densities_veh_per_km.empty()) throw config_error("config: at least one density required");
    if (seeds.empty()) throw config_error("config: at least one seed required");
    for (double d : densities_veh_per_km)
        if (d <= 0.0) throw config_error("config: densities must be positive");
    if (metrics_bin_m <= 0.0) throw config_error("config: metrics bin width must be positive");
    if (sim.max_link_distance_m <= 0.0 || sim.interference_range_m <= 0.0 || sim.warmup_s < 0.0)
        throw config_error("config: invalid sim options");
}

RunConfig parse_run_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw config_error(std::string("config: invalid JSON: ") + e.what());
    }
    return parse_json(j);
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw config_error("config: cannot open " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_run_config(ss.str());
}

std::string dump_run_config(const RunConfig& cfg) {
    json j;
    j["scenario"] = {{"road_length_m", cfg.scenario.road_length_m},
                     {"lanes_per_direction", cfg.scenario.lanes_per_direction},
                     {"lane_speed_means_mps", cfg.scenario.lane_speed_means_mps},
                     {"speed_stddev_mps", cfg.scenario.speed_stddev_mps},
                     {"density_veh_per_km", cfg.scenario.density_veh_per_km},
                     {"sim_duration_s", cfg.scenario.sim_duration_s},
                     {"step_s", cfg.scenario.step_s},
                     {"lane_width_m", cfg.scenario.lane_width_m},
                     {"vehicle_length_m", cfg.scenario.vehicle_length_m},
                     {"vehicle_width_m", cfg.scenario.vehicle_width_m},
                     {"antenna_height_m", cfg.scenario.antenna_height_m},
                     {"spawn_headway_s", cfg.scenario.spawn_headway_s}};
    j["radio"] = {{"tx_power_dbm", cfg.radio.tx_power_dbm},
                  {"bitrate_bps", cfg.radio.bitrate_bps},
                  {"payload_bytes", cfg.radio.payload_bytes},
                  {"overhead_bytes", cfg.radio.overhead_bytes},
                  {"beacon_rate_hz", cfg.radio.beacon_rate_hz},
                  {"carrier_freq_hz", cfg.radio.carrier_freq_hz},
                  {"bandwidth_hz", cfg.radio.bandwidth_hz},
                  {"noise_figure_db", cfg.radio.noise_figure_db},
                  {"cca_threshold_dbm", cfg.radio.cca_threshold_dbm},
                  {"sinr_threshold_db", cfg.radio.sinr_threshold_db},
                  {"sensitivity_dbm", cfg.radio.sensitivity_dbm},
                  {"slot_s", cfg.radio.slot_s},
                  {"aifs_s", cfg.radio.aifs_s},
                  {"cw_slots", cfg.radio.cw_slots}};
    json naka;
    naka["mean"] = dump_pathloss_row(cfg.channel.nakagami.mean_gain);
    naka["m_table"] = json::array();
    for (const auto& e : cfg.channel.nakagami.m_table)
        naka["m_table"].push_back({e.d_upper_m, e.m});
    naka["non_normative_placeholder"] = !cfg.nakagami_supplied;
    j["channel"] = {{"los", dump_pathloss_row(cfg.channel.los)},
                    {"olos", dump_pathloss_row(cfg.channel.olos)},
                    {"olos_single_slope_fallback", !cfg.channel.olos.n1.has_value()},
                    {"nlos",
                     {{"n_nlos", cfg.channel.nlos.n_nlos},
                      {"sigma_db", cfg.channel.nlos.sigma_db},
                      {"suburban", cfg.channel.nlos.suburban},
                      {"db_m", cfg.channel.nlos.db_m},
                      {"lambda_m", cfg.channel.nlos.lambda_m}}},
                    {"nakagami", naka},
                    {"dc_los_m", cfg.channel.dc_los_m},
                    {"dc_olos_m", cfg.channel.dc_olos_m},
                    {"dc_nlos_m", cfg.channel.dc_nlos_m},
                    {"shadow_mode", cfg.channel.shadow_mode == ShadowMode::AR ? "AR" : "BLOCK"}};
    json models = json::array();
    for (auto m : cfg.models) models.push_back(to_string(m));
    j["run"] = {{"models", models},
                {"densities_veh_per_km", cfg.densities_veh_per_km},
                {"seeds", cfg.seeds},
                {"out_dir", cfg.out_dir},
                {"event_log", cfg.event_log},
                {"max_link_distance_m", cfg.sim.max_link_distance_m},
                {"interference_range_m", cfg.sim.interference_range_m},
                {"warmup_s", cfg.sim.warmup_s},
                {"tracked_pairs", cfg.sim.tracked_pairs},
                {"prepopulate", cfg.sim.prepopulate},
                {"tracked_pair_selection", "first eligible different-lane pairs after warm-up"}};
    j["metrics"] = {{"bin_width_m", cfg.metrics_bin_m}};
    return j.dump(2) + "\n";
}

void apply_desk_scale(RunConfig& cfg) {
    cfg.scenario.road_length_m = 2000.0;
    cfg.scenario.sim_duration_s = 100.0;
    cfg.sim.warmup_s = 10.0;
}

GainSeries read_gain_series_csv(std::istream& is) {
    GainSeries out;
    std::string line;
    if (!std::getline(is, line)) throw config_error("gain series: empty input");
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string field;
        GainSample s;
        std::getline(ss, field, ',');
        s.distance_m = std::stod(field);
        std::getline(ss, field, ',');
        s.gain_db = std::stod(field);
        std::getline(ss, field, ',');
        s.censored = std::stoi(field) != 0;
        out.samples.push_back(s);
    }
    return out;
}

void write_gain_series_csv(std::ostream& os, const GainSeries& series) {
    os << "distance_m,gain_db,censored\n";
    for (const auto& s : series.samples)
        os << std::fixed << std::setprecision(6) << s.distance_m << ',' << s.gain_db << ','
           << (s.censored ? 1 : 0) << '\n';
}

CirTrace read_cir_trace(std::istream& is) {
    std::uint32_t n_time = 0, n_delay = 0;
    double dt = 0.0, dtau = 0.0;
    is.read(reinterpret_cast<char*>(&n_time), sizeof(n_time));
    is.read(reinterpret_cast<char*>(&n_delay), sizeof(n_delay));
    is.read(reinterpret_cast<char*>(&dt), sizeof(dt));
    is.read(reinterpret_cast<char*>(&dtau), sizeof(dtau));
    if (!is) throw config_error("cir trace: truncated header");
    CirTrace cir;
    cir.dt_s = dt;
    cir.dtau_s = dtau;
    cir.h.assign(n_time, std::vector<std::complex<double>>(n_delay));
    for (auto& row : cir.h)
        for (auto& v : row) {
            double re = 0.0, im = 0.0;
            is.read(reinterpret_cast<char*>(&re), sizeof(re));
            is.read(reinterpret_cast<char*>(&im), sizeof(im));
            if (!is) throw config_error("cir trace: truncated body");
            v = {re, im};
        }
    return cir;
}

void write_cir_trace(std::ostream& os, const CirTrace& cir) {
    const std::uint32_t n_time = static_cast<std::uint32_t>(cir.h.size());
    const std::uint32_t n_delay =
        n_time > 0 ? static_cast<std::uint32_t>(cir.h.front().size()) : 0;
    os.write(reinterpret_cast<const char*>(&n_time), sizeof(n_time));
    os.write(reinterpret_cast<const char*>(&n_delay), sizeof(n_delay));
    os.write(reinterpret_cast<const char*>(&cir.dt_s), sizeof(cir.dt_s));
    os.write(reinterpret_cast<const char*>(&cir.dtau_s), sizeof(cir.dtau_s));
    for (const auto& row : cir.h)
        for (const auto& v : row) {
            const double re = v.real(), im = v.imag();
            os.write(reinterpret_cast<const char*>(&re), sizeof(re));
            os.write(reinterpret_cast<const char*>(&im), sizeof(im));
        }
}

Scene parse_scene(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw config_error(std::string("scene: invalid JSON: ") + e.what());
    }
    check_keys(j, {"tx", "rx", "obstacles", "roads", "fresnel"}, "scene.");
    Scene scene;
    auto parse_vec = [](const json& v) -> Vec2 {
        return {v.at(0).get<double>(), v.at(1).get<double>()};
    };
    scene.tx = parse_vec(j.at("tx"));
    scene.rx = parse_vec(j.at("rx"));
    if (j.contains("obstacles")) {
        for (const auto& o : j.at("obstacles")) {
            check_keys(o, {"center", "length", "width", "heading", "height", "kind"},
                       "scene.obstacles.");
            Rect r;
            r.center = parse_vec(o.at("center"));
            r.length = o.at("length").get<double>();
            r.width = o.at("width").get<double>();
            if (o.contains("heading")) r.heading = o.at("heading").get<double>();
            if (o.contains("height")) r.height = o.at("height").get<double>();
            const auto kind = o.at("kind").get<std::string>();
            if (kind == "VEHICLE")
                r.kind = RectKind::VEHICLE;
            else if (kind == "BUILDING")
                r.kind = RectKind::BUILDING;
            else
                throw config_error("scene: obstacle kind must be VEHICLE or BUILDING");
            scene.obstacles.push_back(r);
        }
    }
    if (j.contains("roads")) {
        for (const auto& o : j.at("roads")) {
            check_keys(o, {"a", "b", "width"}, "scene.roads.");
            scene.roads.push_back({parse_vec(o.at("a")), parse_vec(o.at("b")),
                                   o.at("width").get<double>()});
        }
    }
    if (j.contains("fresnel")) {
        const json& f = j.at("fresnel");
        check_keys(f, {"enabled", "lambda_m", "antenna_height_m"}, "scene.fresnel.");
        get(f, "enabled", scene.fresnel.enabled);
        get(f, "lambda_m", scene.fresnel.lambda_m);
        get(f, "antenna_height_m", scene.fresnel.antenna_height_m);
    }
    return scene;
}

}  // namespace v2v
