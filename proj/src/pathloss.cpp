#include "v2v/pathloss.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace v2v {

void PathLossParams::validate() const {
    if (d0_m <= 0.0) throw std::invalid_argument("PathLossParams: d0 must be > 0");
    if (db_m <= d0_m) throw std::invalid_argument("PathLossParams: db must be > d0");
    if (sigma_db <= 0.0) throw std::invalid_argument("PathLossParams: sigma must be > 0");
}

void NlosParams::validate() const {
    if (n_nlos <= 0.0) throw std::invalid_argument("NlosParams: n_nlos must be > 0");
    if (lambda_m <= 0.0) throw std::invalid_argument("NlosParams: lambda must be > 0");
    if (suburban != 0 && suburban != 1) throw std::invalid_argument("NlosParams: suburban flag must be 0 or 1");
}

void NlosGeometry::validate() const {
    if (dr_m <= 0.0 || dt_m <= 0.0 || wr_m <= 0.0 || xt_m <= 0.0)
        throw std::domain_error("NlosGeometry: all fields must be > 0");
}

double dual_slope_gain_db(const PathLossParams& p, double d_m) {
    p.validate();
    if (d_m < p.d0_m)
        throw std::domain_error("dual_slope_gain_db: d=" + std::to_string(d_m) +
                                " below model validity range d0=" + std::to_string(p.d0_m));
    if (!p.n1.has_value()) {
        // single-slope fallback from d0 (highway OLOS has no fitted n1)
        return p.pl0_db + 10.0 * p.n2 * std::log10(d_m / p.d0_m);
    }
    const double n1 = *p.n1;
    if (d_m <= p.db_m) return p.pl0_db + 10.0 * n1 * std::log10(d_m / p.d0_m);
    return p.pl0_db + 10.0 * n1 * std::log10(p.db_m / p.d0_m) +
           10.0 * p.n2 * std::log10(d_m / p.db_m);
}

double flat_earth_breakpoint(double h_tx_m, double h_rx_m, double lambda_m) {
    if (h_tx_m <= 0.0 || h_rx_m <= 0.0 || lambda_m <= 0.0)
        throw std::invalid_argument("flat_earth_breakpoint: arguments must be > 0");
    return (4.0 * h_tx_m * h_rx_m - lambda_m * lambda_m / 4.0) / lambda_m;
}

double nlos_gain_db(const NlosParams& p, const NlosGeometry& g) {
    p.validate();
    g.validate();
    const double base = std::pow(g.dt_m, 0.957) / std::pow(g.xt_m * g.wr_m, 0.81);
    double arg;
    if (g.dr_m <= p.db_m) {
        arg = base * 4.0 * M_PI * g.dr_m / p.lambda_m;
    } else {
        arg = base * 4.0 * M_PI * g.dr_m * g.dr_m / (p.lambda_m * p.db_m);
    }
    return 3.75 + p.suburban * 2.94 + 10.0 * p.n_nlos * std::log10(arg);
}

double parallel_street_loss() { return std::numeric_limits<double>::infinity(); }

double mix_received_power(double p_los, double p_olos, double prx_los_w, double prx_olos_w) {
    const double eps = 1e-9;
    if (p_los < -eps || p_los > 1.0 + eps || p_olos < -eps || p_olos > 1.0 + eps)
        throw std::domain_error("mix_received_power: probabilities must be in [0,1]");
    if (p_los + p_olos > 1.0 + 1e-6)
        throw std::domain_error("mix_received_power: probabilities sum above 1");
    if (prx_los_w < 0.0 || prx_olos_w < 0.0)
        throw std::domain_error("mix_received_power: powers must be non-negative");
    return p_los * prx_los_w + p_olos * prx_olos_w;
}

namespace params {

PathLossParams highway_los() { return {{-1.66}, -2.88, -66.1, 3.95, 10.0, 104.0}; }
PathLossParams highway_olos() { return {std::nullopt, -3.18, -76.1, 6.12, 10.0, 104.0}; }
PathLossParams urban_los() { return {{-1.81}, -2.85, -63.9, 4.15, 10.0, 104.0}; }
PathLossParams urban_olos() { return {{-1.93}, -2.74, -72.3, 6.67, 10.0, 104.0}; }

}  // namespace params

}  // namespace v2v
