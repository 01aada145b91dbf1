#pragma once

#include <complex>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "v2v/pathloss.hpp"

namespace v2v {

struct estimation_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Complex impulse-response samples, time index (rows) x delay index (cols).
struct CirTrace {
    std::vector<std::vector<std::complex<double>>> h;
    double dt_s = 1.0;
    double dtau_s = 1.0;
};

struct GainSample {
    double distance_m = 0.0;
    double gain_db = 0.0;  // threshold value when censored
    bool censored = false;
};

struct GainSeries {
    std::vector<GainSample> samples;
    double noise_floor_db = -120.0;
};

// Power-delay profiles averaged over blocks of n_avg snapshots:
// P(t_k, tau) = mean |h|^2, t_k = 0, n_avg*dt, ...
std::vector<std::vector<double>> compute_apdp(const CirTrace& cir, std::size_t n_avg);

// Delay-sum channel gain of a noise-thresholded PDP (linear taps in,
// dB out). Taps below floor+margin are zeroed; all taps below threshold
// marks the sample censored (nullopt).
std::optional<double> channel_gain(const std::vector<double>& pdp_linear, double noise_floor_db,
                                   double margin_db = 3.0);

// Path loss from channel gain: PL = 2*Ga - P_IL - gain.
double pathloss_from_gain(double gain_db, double ga_dbi = 3.7, double pil_db = 0.0);

struct DualSlopeFit {
    PathLossParams params;
    std::size_t bins_used_below = 0;
    std::size_t bins_used_above = 0;
};

// Continuity-constrained piecewise-linear least squares on log-spaced bin
// medians; sigma is the residual standard deviation of the raw samples
// about the fitted curve. Censored samples are excluded from medians.
DualSlopeFit fit_dual_slope(const GainSeries& series, double d0_m, double db_m,
                            std::size_t n_bins = 25);

struct EmResult {
    double mu_db = 0.0;
    double sigma_db = 0.0;
    std::size_t iterations = 0;
    std::vector<double> loglik;  // observed-data log-likelihood per iteration
};

// MLE of a left-censored Gaussian via expectation maximization. Only the
// count of below-threshold samples is known, not their values.
EmResult em_censored_lognormal(const std::vector<double>& values_db, std::size_t censored_count,
                               double threshold_db, double tol_db = 1e-6,
                               std::size_t max_iter = 500);

struct DecorrelationEstimate {
    double dc_fit_m = 0.0;       // least-squares fit of exp(-dd/dc), primary
    double dc_crossing_m = 0.0;  // 1/e crossing of the empirical curve
    bool uncorrelated = false;   // dc below one grid step
};

// Empirical autocorrelation of a demeaned shadow series sampled on a
// (near) equally spaced distance grid.
DecorrelationEstimate estimate_decorrelation(const std::vector<std::pair<double, double>>& series);

}  // namespace v2v
