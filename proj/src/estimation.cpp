#include "v2v/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "v2v/common.hpp"

namespace v2v {

namespace {

double normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI); }

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double median(std::vector<double> v) {
    const std::size_t n = v.size();
    std::nth_element(v.begin(), v.begin() + n / 2, v.end());
    double hi = v[n / 2];
    if (n % 2 == 1) return hi;
    std::nth_element(v.begin(), v.begin() + n / 2 - 1, v.end());
    return 0.5 * (v[n / 2 - 1] + hi);
}

}  // namespace

std::vector<std::vector<double>> compute_apdp(const CirTrace& cir, std::size_t n_avg) {
    if (cir.h.empty() || cir.h.front().empty())
        throw estimation_error("compute_apdp: empty impulse-response trace");
    if (n_avg < 1 || n_avg > cir.h.size())
        throw estimation_error("compute_apdp: n_avg out of range");
    const std::size_t n_blocks = cir.h.size() / n_avg;
    const std::size_t n_taps = cir.h.front().size();
    std::vector<std::vector<double>> apdp(n_blocks, std::vector<double>(n_taps, 0.0));
    for (std::size_t b = 0; b < n_blocks; ++b) {
        for (std::size_t n = 0; n < n_avg; ++n) {
            const auto& row = cir.h[b * n_avg + n];
            for (std::size_t t = 0; t < n_taps; ++t) apdp[b][t] += std::norm(row[t]);
        }
        for (double& x : apdp[b]) x /= static_cast<double>(n_avg);
    }
    return apdp;
}

std::optional<double> channel_gain(const std::vector<double>& pdp_linear, double noise_floor_db,
                                   double margin_db) {
    const double threshold = db_to_linear(noise_floor_db + margin_db);
    double sum = 0.0;
    for (double tap : pdp_linear)
        if (tap >= threshold) sum += tap;
    if (sum <= 0.0) return std::nullopt;  // censored
    return linear_to_db(sum);
}

double pathloss_from_gain(double gain_db, double ga_dbi, double pil_db) {
    return 2.0 * ga_dbi - pil_db - gain_db;
}

DualSlopeFit fit_dual_slope(const GainSeries& series, double d0_m, double db_m,
                            std::size_t n_bins) {
    if (d0_m <= 0.0 || db_m <= d0_m) throw estimation_error("fit_dual_slope: need db > d0 > 0");
    if (n_bins < 4) throw estimation_error("fit_dual_slope: too few bins");

    double d_max = 0.0;
    for (const auto& s : series.samples)
        if (!s.censored && s.distance_m >= d0_m) d_max = std::max(d_max, s.distance_m);
    if (d_max <= d0_m) throw estimation_error("fit_dual_slope: no usable samples above d0");

    // log-spaced bins d0..d_max, median gain per bin
    const double log_lo = std::log(d0_m), log_hi = std::log(d_max * (1.0 + 1e-12));
    std::vector<std::vector<double>> bins(n_bins);
    for (const auto& s : series.samples) {
        if (s.censored || s.distance_m < d0_m || s.distance_m > d_max) continue;
        auto idx = static_cast<std::size_t>((std::log(s.distance_m) - log_lo) /
                                            (log_hi - log_lo) * n_bins);
        idx = std::min(idx, n_bins - 1);
        bins[idx].push_back(s.gain_db);
    }

    struct BinPoint {
        double d, g;
    };
    std::vector<BinPoint> pts;
    std::size_t below = 0, above = 0;
    for (std::size_t i = 0; i < n_bins; ++i) {
        if (bins[i].empty()) continue;
        const double lo = std::exp(log_lo + (log_hi - log_lo) * i / n_bins);
        const double hi = std::exp(log_lo + (log_hi - log_lo) * (i + 1) / n_bins);
        const double center = std::sqrt(lo * hi);
        pts.push_back({center, median(bins[i])});
        (center <= db_m ? below : above)++;
    }
    if (below < 2) throw estimation_error("fit_dual_slope: fewer than 2 populated bins below the breakpoint");
    if (above < 2) throw estimation_error("fit_dual_slope: fewer than 2 populated bins above the breakpoint");

    // g(d) = pl0 + n1 * x1 + n2 * x2 with
    // x1 = 10 log10(min(d,db)/d0), x2 = 10 log10(max(d/db,1)); continuity
    // at db is built in. Normal equations for the 3 parameters.
    double A[3][3] = {};
    double b[3] = {};
    for (const auto& p : pts) {
        const double x[3] = {1.0, 10.0 * std::log10(std::min(p.d, db_m) / d0_m),
                             p.d > db_m ? 10.0 * std::log10(p.d / db_m) : 0.0};
        for (int i = 0; i < 3; ++i) {
            for (int j = 0; j < 3; ++j) A[i][j] += x[i] * x[j];
            b[i] += x[i] * p.g;
        }
    }
    // Cramer's rule
    auto det3 = [](const double m[3][3]) {
        return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
               m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
               m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    };
    const double det = det3(A);
    if (std::abs(det) < 1e-12) throw estimation_error("fit_dual_slope: singular design matrix");
    double sol[3];
    for (int k = 0; k < 3; ++k) {
        double M[3][3];
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) M[i][j] = (j == k) ? b[i] : A[i][j];
        sol[k] = det3(M) / det;
    }

    DualSlopeFit fit;
    fit.params.pl0_db = sol[0];
    fit.params.n1 = sol[1];
    fit.params.n2 = sol[2];
    fit.params.d0_m = d0_m;
    fit.params.db_m = db_m;
    fit.bins_used_below = below;
    fit.bins_used_above = above;

    // residual spread of the raw samples about the fitted median curve
    double ss = 0.0;
    std::size_t n = 0;
    for (const auto& s : series.samples) {
        if (s.censored || s.distance_m < d0_m || s.distance_m > d_max) continue;
        const double r = s.gain_db - dual_slope_gain_db(fit.params, s.distance_m);
        ss += r * r;
        ++n;
    }
    fit.params.sigma_db = n > 0 ? std::max(std::sqrt(ss / n), 1e-12) : 1e-12;
    return fit;
}

EmResult em_censored_lognormal(const std::vector<double>& values_db, std::size_t censored_count,
                               double threshold_db, double tol_db, std::size_t max_iter) {
    if (values_db.empty() && censored_count > 0)
        throw estimation_error("em_censored_lognormal: all samples censored, not identifiable");
    if (values_db.size() < 2)
        throw estimation_error("em_censored_lognormal: need at least 2 observed values");

    const double n_obs = static_cast<double>(values_db.size());
    const double sum_y = std::accumulate(values_db.begin(), values_db.end(), 0.0);
    double sum_y2 = 0.0;
    for (double y : values_db) sum_y2 += y * y;

    EmResult res;
    res.mu_db = sum_y / n_obs;
    res.sigma_db = std::max(std::sqrt(sum_y2 / n_obs - res.mu_db * res.mu_db), 1e-6);
    if (censored_count == 0) return res;  // EM fixed point = closed-form MLE

    const double c = static_cast<double>(censored_count);
    const double n = n_obs + c;

    auto loglik = [&](double mu, double sigma) {
        double ll = 0.0;
        for (double y : values_db) {
            const double z = (y - mu) / sigma;
            ll += -0.5 * z * z - std::log(sigma) - 0.5 * std::log(2.0 * M_PI);
        }
        const double phi = normal_cdf((threshold_db - mu) / sigma);
        ll += c * std::log(std::max(phi, 1e-300));
        return ll;
    };

    res.loglik.push_back(loglik(res.mu_db, res.sigma_db));
    for (std::size_t it = 0; it < max_iter; ++it) {
        const double alpha = (threshold_db - res.mu_db) / res.sigma_db;
        const double cdf = normal_cdf(alpha);
        // inverse Mills ratio for the lower tail; asymptote -alpha when
        // the tail mass underflows
        const double lam = cdf > 1e-300 ? normal_pdf(alpha) / cdf : -alpha;
        const double e1 = res.mu_db - res.sigma_db * lam;  // E[x | x < T]
        const double var_t = res.sigma_db * res.sigma_db * (1.0 - alpha * lam - lam * lam);
        const double e2 = std::max(var_t, 0.0) + e1 * e1;  // E[x^2 | x < T]

        const double mu_new = (sum_y + c * e1) / n;
        const double var_new = (sum_y2 + c * e2) / n - mu_new * mu_new;
        const double sigma_new = std::max(std::sqrt(std::max(var_new, 0.0)), 1e-6);

        const double delta =
            std::max(std::abs(mu_new - res.mu_db), std::abs(sigma_new - res.sigma_db));
        res.mu_db = mu_new;
        res.sigma_db = sigma_new;
        res.iterations = it + 1;
        res.loglik.push_back(loglik(res.mu_db, res.sigma_db));
        if (delta < tol_db) break;
    }
    return res;
}

DecorrelationEstimate estimate_decorrelation(
    const std::vector<std::pair<double, double>>& series) {
    const std::size_t n = series.size();
    if (n < 11) throw estimation_error("estimate_decorrelation: series too short");

    std::vector<std::pair<double, double>> s = series;
    std::sort(s.begin(), s.end());
    const double step = (s.back().first - s.front().first) / static_cast<double>(n - 1);
    if (step <= 0.0) throw estimation_error("estimate_decorrelation: degenerate distance axis");

    double mean = 0.0;
    for (const auto& p : s) mean += p.second;
    mean /= static_cast<double>(n);

    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = s[i].second - mean;

    double var = 0.0;
    for (double v : x) var += v * v;
    if (var <= 0.0) throw estimation_error("estimate_decorrelation: zero-variance series");

    const std::size_t max_lag = std::min<std::size_t>(n / 2, 400);
    std::vector<double> r;  // r[k-1] = autocorrelation at lag k
    for (std::size_t k = 1; k <= max_lag; ++k) {
        double acc = 0.0;
        for (std::size_t i = 0; i + k < n; ++i) acc += x[i] * x[i + k];
        r.push_back(acc / var);
        if (r.back() < 0.05 && r.size() >= 5) break;
    }

    DecorrelationEstimate est;

    // 1/e crossing with linear interpolation
    const double target = std::exp(-1.0);
    est.dc_crossing_m = step * static_cast<double>(r.size());
    double prev = 1.0;
    for (std::size_t k = 0; k < r.size(); ++k) {
        if (r[k] < target) {
            const double frac = (prev - target) / std::max(prev - r[k], 1e-12);
            est.dc_crossing_m = step * (static_cast<double>(k) + frac);
            break;
        }
        prev = r[k];
    }

    // least-squares fit of exp(-k*step/dc), golden-section search
    auto cost = [&](double dc) {
        double ss = 0.0;
        for (std::size_t k = 0; k < r.size(); ++k) {
            const double d = r[k] - std::exp(-step * static_cast<double>(k + 1) / dc);
            ss += d * d;
        }
        return ss;
    };
    double lo = step / 100.0, hi = step * static_cast<double>(n);
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo, b = hi;
    double c1 = b - gr * (b - a), c2 = a + gr * (b - a);
    for (int i = 0; i < 200; ++i) {
        if (cost(c1) < cost(c2))
            b = c2;
        else
            a = c1;
        c1 = b - gr * (b - a);
        c2 = a + gr * (b - a);
    }
    est.dc_fit_m = 0.5 * (a + b);
    est.uncorrelated = est.dc_fit_m < step;
    return est;
}

}  // namespace v2v
