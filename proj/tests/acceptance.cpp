// Acceptance gate: each numbered check prints one PASS/FAIL line; the
// process exits non-zero if any check fails.
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "v2v/common.hpp"
#include "v2v/config.hpp"
#include "v2v/estimation.hpp"
#include "v2v/metrics.hpp"
#include "v2v/pathloss.hpp"
#include "v2v/runner.hpp"
#include "v2v/shadowing.hpp"

using namespace v2v;

namespace {

int g_failures = 0;

void report(int id, bool ok, const std::string& what) {
    std::cout << (ok ? "PASS" : "FAIL") << " [" << id << "] " << what << "\n";
    if (!ok) ++g_failures;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

// ---- 1: breakpoint distance ------------------------------------------------
void check_breakpoint() {
    const double db = flat_earth_breakpoint(1.47, 1.47, 0.0536);
    report(1, std::abs(db - 161.0) <= 1.0,
           "flat-earth breakpoint at 1.47 m antennas is 161 +/- 1 m (got " +
               std::to_string(db) + ")");
}

// ---- 2: parameter-table fidelity -------------------------------------------
void check_table() {
    bool ok = true;
    ok &= dual_slope_gain_db(params::highway_los(), 10.0) == -66.1;
    ok &= dual_slope_gain_db(params::highway_olos(), 10.0) == -76.1;
    ok &= dual_slope_gain_db(params::urban_los(), 10.0) == -63.9;
    ok &= dual_slope_gain_db(params::urban_olos(), 10.0) == -72.3;
    ok &= std::abs((params::highway_los().pl0_db - params::highway_olos().pl0_db) - 10.0) < 1e-12;
    ok &= std::abs((params::urban_los().pl0_db - params::urban_olos().pl0_db) - 8.4) < 1e-12;
    report(2, ok, "reference-distance gains match the fitted table; class offsets 10.0 / 8.4 dB");
}

// ---- 3: intersection-model continuity and suburban offset ------------------
void check_nlos() {
    NlosParams p;
    const double gap = std::abs(nlos_gain_db(p, {p.db_m - 1e-9, 50.0, 15.0, 7.5}) -
                                nlos_gain_db(p, {p.db_m + 1e-9, 50.0, 15.0, 7.5}));
    NlosParams sub = p;
    sub.suburban = 1;
    const double offset =
        nlos_gain_db(sub, {30.0, 50.0, 15.0, 7.5}) - nlos_gain_db(p, {30.0, 50.0, 15.0, 7.5});
    report(3, gap < 1e-9 && std::abs(offset - 2.94) < 1e-12,
           "corner-loss branches meet at the breakpoint; suburban flag adds exactly 2.94 dB");
}

// ---- 4: shadowing round trip ----------------------------------------------
void check_shadow_round_trip() {
    const std::vector<std::pair<double, double>> cases = {
        {23.3, 3.95}, {32.5, 6.12}, {4.25, 4.15}, {4.5, 6.67}};
    bool ok = true;
    std::string detail;
    for (std::size_t k = 0; k < cases.size(); ++k) {
        const auto [dc, sigma] = cases[k];
        ShadowProcess p({sigma, dc, ShadowMode::AR}, 100 + k, 1, 2);
        const double dd = dc / 10.0;
        std::vector<std::pair<double, double>> series;
        series.reserve(100000);
        double acc = 0.0, acc2 = 0.0;
        for (int i = 0; i < 100000; ++i) {
            const double x = p.advance(dd);
            series.emplace_back(i * dd, x);
            acc += x;
            acc2 += x * x;
        }
        const double var = acc2 / 100000 - (acc / 100000) * (acc / 100000);
        const auto est = estimate_decorrelation(series);
        const bool this_ok = std::abs(est.dc_fit_m - dc) <= 0.10 * dc &&
                             std::abs(var - sigma * sigma) <= 0.05 * sigma * sigma;
        if (!this_ok) detail += " dc=" + std::to_string(dc);
        ok &= this_ok;
    }
    report(4, ok, "decorrelation distance and variance recovered from 1e5-step trajectories" +
                      (detail.empty() ? "" : " (failed:" + detail + ")"));
}

// ---- 5: censored EM recovery ----------------------------------------------
void check_em() {
    std::mt19937_64 rng(41);
    std::normal_distribution<double> gauss(-90.0, 6.0);
    std::vector<double> observed;
    std::size_t censored = 0;
    const double thr = -100.0;
    for (int i = 0; i < 10000; ++i) {
        const double x = gauss(rng);
        if (x < thr)
            ++censored;
        else
            observed.push_back(x);
    }
    const auto r = em_censored_lognormal(observed, censored, thr);
    bool monotone = true;
    for (std::size_t i = 1; i < r.loglik.size(); ++i)
        monotone &= r.loglik[i] >= r.loglik[i - 1] - 1e-9;
    report(5,
           std::abs(r.mu_db - -90.0) <= 0.3 && std::abs(r.sigma_db - 6.0) <= 0.3 && monotone,
           "censored-Gaussian EM within 0.3 dB on both moments, likelihood non-decreasing");
}

// ---- 6: dual-slope fit round trip ------------------------------------------
void check_fit_round_trip() {
    const auto truth = params::highway_los();
    bool ok = true;
    std::string detail;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        GainSeries series;
        // independent traversals of the 10..1000 m range, sampled on a
        // log grid, with spatially correlated shadowing along each
        const int n_steps = 500;
        for (std::uint64_t pass = 0; pass < 400; ++pass) {
            ShadowProcess shadow({3.95, 23.3, ShadowMode::AR}, seed, pass, pass + 100000);
            double prev = 10.0;
            for (int i = 0; i <= n_steps; ++i) {
                const double d = 10.0 * std::pow(100.0, static_cast<double>(i) / n_steps);
                series.samples.push_back(
                    {d, dual_slope_gain_db(truth, d) + shadow.advance(d - prev), false});
                prev = d;
            }
        }
        const auto fit = fit_dual_slope(series, 10.0, truth.db_m);
        const bool this_ok = fit.params.n1 && std::abs(*fit.params.n1 - *truth.n1) <= 0.1 &&
                             std::abs(fit.params.n2 - truth.n2) <= 0.1 &&
                             std::abs(fit.params.pl0_db - truth.pl0_db) <= 0.5;
        if (!this_ok) detail += " seed=" + std::to_string(seed);
        ok &= this_ok;
    }
    report(6, ok, "dual-slope fit recovers exponents +/-0.1 and intercept +/-0.5 dB, 10 seeds" +
                      (detail.empty() ? "" : " (failed:" + detail + ")"));
}

// ---- 7 + 8: mixing identity and desk-scale network behavior ----------------
RunConfig desk_config(std::uint64_t seed) {
    RunConfig cfg;
    apply_desk_scale(cfg);
    cfg.scenario.density_veh_per_km = 40.0;
    cfg.seeds = {seed};
    cfg.densities_veh_per_km = {40.0};
    cfg.models = {ChannelModel::LOS_OLOS};
    return cfg;
}

void check_mixing_and_network() {
    // exact identity when the bin is all-LOS
    const bool identity =
        mix_received_power(1.0, 0.0, 3.2e-8, 0.0) == 3.2e-8 &&
        mix_received_power(1.0, 0.0, 1e-12, 5e-7) == 1e-12;

    const RunConfig cfg = desk_config(4);
    MetricsBundle bundle;
    run_single(cfg, ChannelModel::LOS_OLOS, 40.0, 4, std::nullopt, &bundle);

    // 7: mixed curve bounded by the class curves wherever both exist
    bool bounded = true;
    int mixed_bins = 0;
    for (const auto& p : bundle.power) {
        if (p.n_los == 0 || p.n_olos == 0) continue;
        ++mixed_bins;
        const double lo = std::min(p.mean_los_dbm, p.mean_olos_dbm) - 1e-9;
        const double hi = std::max(p.mean_los_dbm, p.mean_olos_dbm) + 1e-9;
        bounded &= p.mixed_dbm >= lo && p.mixed_dbm <= hi;
    }
    report(7, identity && bounded && mixed_bins > 0,
           "probability mixing: exact in pure-class bins, bounded by the class means in " +
               std::to_string(mixed_bins) + " mixed bins");

    // 8a: near-range reception probability
    double prp0 = 0.0;
    bool have_prp0 = false;
    for (const auto& b : bundle.prp)
        if (b.lo_m == 0.0) {
            prp0 = b.prp;
            have_prp0 = true;
        }
    report(8, have_prp0 && prp0 > 0.95,
           "(a) reception probability in 0-100 m is " + std::to_string(prp0) + " > 0.95");

    // 8b: obstruction probability grows with distance
    bool increasing = true;
    double prev = -1.0;
    int used = 0;
    for (const auto& b : bundle.class_prob) {
        if (b.hi_m > 500.0 + 1e-9) break;
        increasing &= b.p_olos > prev;
        prev = b.p_olos;
        ++used;
    }
    report(8, increasing && used >= 5,
           "(b) Prob(OLOS | distance) increases across the " + std::to_string(used) +
               " bins up to 500 m");

    // 8c: beacon inter-arrival mass at the nominal period
    bool have_iat = false;
    double frac = 0.0;
    for (const auto& b : bundle.iat)
        if (b.lo_m == 0.0 && !b.iat_s.empty()) {
            have_iat = true;
            std::size_t n_fast = 0;
            for (double v : b.iat_s) n_fast += v <= 0.110;
            frac = static_cast<double>(n_fast) / static_cast<double>(b.iat_s.size());
        }
    report(8, have_iat && frac >= 0.90,
           "(c) " + std::to_string(100.0 * frac) +
               "% of 0-100 m inter-arrivals are within 110 ms");
}

// ---- 9: optional comparison against externally supplied fading params ------
void check_optional_fading_comparison() {
    // Needs a user-supplied distance-dependent m table for the comparison
    // model; without one the placeholder is not meaningful to grade.
    std::cout << "SKIP [9] far-range reception cross-over check requires user-supplied "
                 "Nakagami m-table parameters\n";
}

// ---- 10: byte-identical reruns ---------------------------------------------
void check_determinism() {
    namespace fs = std::filesystem;
    RunConfig cfg = desk_config(2);
    cfg.scenario.sim_duration_s = 30.0;
    cfg.event_log = true;
    const fs::path base = fs::temp_directory_path() / "v2v_acceptance_det";
    fs::remove_all(base);
    run_single(cfg, ChannelModel::LOS_OLOS, 40.0, 2, (base / "a").string());
    run_single(cfg, ChannelModel::LOS_OLOS, 40.0, 2, (base / "b").string());

    bool ok = true;
    for (const char* name : {"events.csv", "class_log.csv", "prp.csv", "class_prob.csv",
                             "power.csv", "iat_cdf.csv", "tracked_pairs.json"}) {
        const auto a = slurp(base / "a" / name);
        const auto b = slurp(base / "b" / name);
        ok &= !a.empty() && a == b;
    }
    fs::remove_all(base);
    report(10, ok, "repeated run with one seed: event log and every metrics CSV byte-identical");
}

}  // namespace

int main() {
    check_breakpoint();
    check_table();
    check_nlos();
    check_shadow_round_trip();
    check_em();
    check_fit_round_trip();
    check_mixing_and_network();
    check_optional_fading_comparison();
    check_determinism();
    if (g_failures > 0) {
        std::cout << g_failures << " acceptance check(s) failed\n";
        return 1;
    }
    std::cout << "all acceptance checks passed\n";
    return 0;
}
