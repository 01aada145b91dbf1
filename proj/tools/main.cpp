#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "v2v/common.hpp"
#include "v2v/config.hpp"
#include "v2v/estimation.hpp"
#include "v2v/metrics.hpp"
#include "v2v/runner.hpp"

namespace {

using nlohmann::json;

std::string slurp(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw v2v::config_error("cannot open " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

v2v::ChannelModel model_from_flag(const std::string& s) {
    if (s == "LOS_OLOS") return v2v::ChannelModel::LOS_OLOS;
    if (s == "NAKAGAMI") return v2v::ChannelModel::NAKAGAMI;
    throw v2v::config_error("--model must be LOS_OLOS or NAKAGAMI");
}

int cmd_simulate(const std::string& config_path, const std::string& out,
                 const std::vector<std::uint64_t>& seeds, const std::string& model,
                 const std::vector<double>& densities, bool desk_scale) {
    v2v::RunConfig cfg =
        config_path.empty() ? v2v::RunConfig{} : v2v::load_run_config(config_path);
    if (!out.empty()) cfg.out_dir = out;
    if (!seeds.empty()) cfg.seeds = seeds;
    if (!model.empty()) cfg.models = {model_from_flag(model)};
    if (!densities.empty()) cfg.densities_veh_per_km = densities;
    if (desk_scale) v2v::apply_desk_scale(cfg);
    cfg.validate();

    const auto results = v2v::run_sweep(cfg);
    for (const auto& r : results)
        std::cout << r.dir << ": " << r.received << "/" << r.records
                  << " frames received\n";
    return 0;
}

int cmd_fit(const std::string& input, double d0, double db, std::size_t bins,
            bool decorrelation, const std::string& out) {
    std::ifstream f(input);
    if (!f) throw v2v::config_error("cannot open " + input);
    json report;

    if (decorrelation) {
        const v2v::GainSeries series = v2v::read_gain_series_csv(f);
        std::vector<std::pair<double, double>> pts;
        pts.reserve(series.samples.size());
        for (const auto& s : series.samples) pts.emplace_back(s.distance_m, s.gain_db);
        const auto est = v2v::estimate_decorrelation(pts);
        report["dc_fit_m"] = est.dc_fit_m;
        report["dc_crossing_m"] = est.dc_crossing_m;
        report["uncorrelated"] = est.uncorrelated;
    } else {
        const v2v::GainSeries series = v2v::read_gain_series_csv(f);
        const auto fit = v2v::fit_dual_slope(series, d0, db, bins);
        report["n1"] = fit.params.n1 ? json(*fit.params.n1) : json(nullptr);
        report["n2"] = fit.params.n2;
        report["pl0_db"] = fit.params.pl0_db;
        report["sigma_db"] = fit.params.sigma_db;
        report["d0_m"] = d0;
        report["db_m"] = db;
        report["bins_below"] = fit.bins_used_below;
        report["bins_above"] = fit.bins_used_above;

        std::size_t censored = 0;
        std::vector<double> observed_db;
        for (const auto& s : series.samples) {
            if (s.censored)
                censored++;
            else
                observed_db.push_back(s.gain_db);
        }
        report["samples"] = series.samples.size();
        report["censored"] = censored;
        if (censored > 0) {
            // Censoring-aware sigma about the observed mean level.
            const auto em = v2v::em_censored_lognormal(observed_db, censored,
                                                       series.noise_floor_db);
            report["em"] = {{"mu_db", em.mu_db},
                            {"sigma_db", em.sigma_db},
                            {"iterations", em.iterations},
                            {"loglik", em.loglik.back()}};
        }
    }

    const std::string text = report.dump(2) + "\n";
    if (out.empty()) {
        std::cout << text;
    } else {
        std::ofstream o(out);
        if (!o) throw v2v::config_error("cannot write " + out);
        o << text;
    }
    return 0;
}

int cmd_classify(const std::string& scene_path) {
    const v2v::Scene scene = v2v::parse_scene(slurp(scene_path));
    const auto result =
        v2v::classify_link(scene.tx, scene.rx, scene.obstacles, scene.roads, scene.fresnel);
    json report;
    report["class"] = v2v::to_string(result.link_class);
    report["distance_m"] = v2v::norm(scene.rx - scene.tx);
    if (result.nlos_geometry) {
        report["nlos_geometry"] = {{"dt_m", result.nlos_geometry->dt_m},
                                   {"dr_m", result.nlos_geometry->dr_m},
                                   {"xt_m", result.nlos_geometry->xt_m},
                                   {"wr_m", result.nlos_geometry->wr_m}};
    }
    std::cout << report.dump(2) << "\n";
    return 0;
}

int cmd_metrics(const std::string& events_path, const std::string& class_path,
                const std::string& tracked_path, double bin_m, std::uint64_t seed,
                const std::string& out) {
    std::ifstream ev(events_path);
    if (!ev) throw v2v::config_error("cannot open " + events_path);
    const auto records = v2v::read_record_csv(ev);

    v2v::MetricsAccumulator acc(bin_m, seed);
    if (!tracked_path.empty()) {
        const json tp = json::parse(slurp(tracked_path));
        std::vector<v2v::TrackedPair> pairs;
        for (const auto& p : tp)
            pairs.push_back({p.at("a").get<std::uint64_t>(), p.at("b").get<std::uint64_t>(),
                             p.at("direction").get<int>()});
        acc.set_tracked(pairs);
    }
    for (const auto& r : records) acc.add_record(r);
    if (!class_path.empty()) {
        std::ifstream cf(class_path);
        if (!cf) throw v2v::config_error("cannot open " + class_path);
        std::string line;
        std::getline(cf, line);  // header
        while (std::getline(cf, line)) {
            if (line.empty()) continue;
            const auto comma = line.find(',');
            const double d = std::stod(line.substr(0, comma));
            const std::string cls = line.substr(comma + 1);
            v2v::LinkClass lc = v2v::LinkClass::NLOS;
            if (cls == "LOS")
                lc = v2v::LinkClass::LOS;
            else if (cls == "OLOS")
                lc = v2v::LinkClass::OLOS;
            else if (cls == "NLOS_PARALLEL")
                lc = v2v::LinkClass::NLOS_PARALLEL;
            acc.add_class_sample(d, lc);
        }
    }
    const v2v::MetricsBundle bundle = acc.finalize();

    std::filesystem::create_directories(out);
    {
        std::ofstream o(out + "/prp.csv");
        v2v::write_prp_csv(o, bundle.prp);
    }
    {
        std::ofstream o(out + "/class_prob.csv");
        v2v::write_class_prob_csv(o, bundle.class_prob);
    }
    {
        std::ofstream o(out + "/power.csv");
        v2v::write_power_csv(o, bundle.power);
    }
    {
        std::ofstream o(out + "/iat_cdf.csv");
        v2v::write_iat_csv(o, bundle.iat);
    }
    std::cout << "metrics written to " << out << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"v2vsim: vehicle-to-vehicle channel and broadcast network simulator"};
    app.require_subcommand(1);

    // simulate
    auto* sim = app.add_subcommand("simulate", "run a model x density x seed sweep");
    std::string sim_config, sim_out, sim_model;
    std::vector<std::uint64_t> sim_seeds;
    std::vector<double> sim_densities;
    bool desk_scale = false;
    sim->add_option("--config", sim_config, "JSON configuration file");
    sim->add_option("--out", sim_out, "output directory (overrides config)");
    sim->add_option("--seed", sim_seeds, "seed list (overrides config)");
    sim->add_option("--model", sim_model, "LOS_OLOS or NAKAGAMI (overrides config)");
    sim->add_option("--density", sim_densities, "densities in veh/km (overrides config)");
    sim->add_flag("--desk-scale", desk_scale, "CI preset: 2 km road, 100 s");

    // fit
    auto* fit = app.add_subcommand("fit", "estimation pipeline on a gain-series CSV");
    std::string fit_input, fit_out;
    double fit_d0 = 10.0, fit_db = 104.0;
    std::size_t fit_bins = 25;
    bool fit_decorr = false;
    fit->add_option("--input", fit_input, "CSV: distance_m,gain_db,censored")->required();
    fit->add_option("--d0", fit_d0, "reference distance (m)");
    fit->add_option("--db", fit_db, "breakpoint distance (m)");
    fit->add_option("--bins", fit_bins, "log-spaced distance bins");
    fit->add_flag("--decorrelation", fit_decorr,
                  "treat input as a distance,shadow series and estimate dc");
    fit->add_option("--out", fit_out, "write the JSON report here instead of stdout");

    // classify
    auto* cls = app.add_subcommand("classify", "one-shot scene classification");
    std::string cls_scene;
    cls->add_option("--config", cls_scene, "scene JSON file")->required();

    // metrics
    auto* met = app.add_subcommand("metrics", "recompute metrics from an event log");
    std::string met_events, met_classes, met_tracked, met_out = "metrics_out";
    double met_bin = 100.0;
    std::uint64_t met_seed = 1;
    met->add_option("--config", met_events, "events.csv from a simulate run")->required();
    met->add_option("--classes", met_classes, "class_log.csv from the same run");
    met->add_option("--tracked", met_tracked, "tracked_pairs.json from the same run");
    met->add_option("--bin", met_bin, "distance bin width (m)");
    met->add_option("--seed", met_seed, "bootstrap seed");
    met->add_option("--out", met_out, "output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim->parsed())
            return cmd_simulate(sim_config, sim_out, sim_seeds, sim_model, sim_densities,
                                desk_scale);
        if (fit->parsed()) return cmd_fit(fit_input, fit_d0, fit_db, fit_bins, fit_decorr, fit_out);
        if (cls->parsed()) return cmd_classify(cls_scene);
        if (met->parsed())
            return cmd_metrics(met_events, met_classes, met_tracked, met_bin, met_seed, met_out);
    } catch (const v2v::config_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
