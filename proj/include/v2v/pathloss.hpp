#pragma once

#include <optional>
#include <stdexcept>

namespace v2v {

// Dual-slope log-distance model for the mean channel gain.
//
// Sign convention: parameters are stored exactly as fitted (negative
// slopes, negative PL0), so the modeled quantity is channel *gain* in dB
// (negative values). Receiver budgets use PRX_dBm = PTX_dBm + gain_dB.
struct PathLossParams {
    std::optional<double> n1;  // slope before the breakpoint; absent -> single slope n2
    double n2 = 0.0;           // slope after the breakpoint
    double pl0_db = 0.0;       // gain at the reference distance d0
    double sigma_db = 1.0;     // shadow fading standard deviation
    double d0_m = 10.0;        // reference distance, also lower validity bound
    double db_m = 104.0;       // breakpoint distance

    void validate() const;
};

// Intersection (building-blocked) path loss parameters. Positive-loss
// convention, unlike PathLossParams.
struct NlosParams {
    double n_nlos = 2.69;
    double sigma_db = 4.1;
    int suburban = 0;          // 1 suburban, 0 urban
    double db_m = 161.0;       // breakpoint; defaults to the flat-earth value
    double lambda_m = 0.0536;  // carrier wavelength

    void validate() const;
};

struct NlosGeometry {
    double dr_m = 0.0;  // RX distance to intersection center
    double dt_m = 0.0;  // TX distance to intersection center
    double wr_m = 0.0;  // RX street width
    double xt_m = 0.0;  // TX distance to its street wall

    void validate() const;
};

// Mean channel gain in dB at distance d (no shadowing). Throws
// std::domain_error for d below the model validity range d0.
double dual_slope_gain_db(const PathLossParams& p, double d_m);

// Distance at which the first Fresnel zone touches the ground:
// (4 h_tx h_rx - lambda^2/4) / lambda.
double flat_earth_breakpoint(double h_tx_m, double h_rx_m, double lambda_m);

// Intersection NLOS path loss in dB (positive loss).
double nlos_gain_db(const NlosParams& p, const NlosGeometry& g);

// Parallel-street links: loss is always above 120 dB, so interference
// from them is ignored. The sentinel is +infinity dB, i.e. zero linear
// received power.
double parallel_street_loss();

// Probability mixing of the per-class mean received powers, in linear
// watts: p_los*prx_los + p_olos*prx_olos.
double mix_received_power(double p_los, double p_olos, double prx_los_w, double prx_olos_w);

// Fitted model parameters, one row per (scenario, link class).
namespace params {
PathLossParams highway_los();
PathLossParams highway_olos();  // no short-range slope; single-slope fallback
PathLossParams urban_los();
PathLossParams urban_olos();
}  // namespace params

}  // namespace v2v
