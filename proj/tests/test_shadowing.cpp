#include <algorithm>
#include <cmath>
#include <vector>

#include <doctest.h>

#include "v2v/shadowing.hpp"

using namespace v2v;

TEST_CASE("exponential autocorrelation") {
    CHECK(shadow_autocorrelation(23.3, 0.0) == doctest::Approx(1.0));
    CHECK(shadow_autocorrelation(23.3, 23.3) == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
    CHECK(shadow_autocorrelation(23.3, 46.6) == doctest::Approx(std::exp(-2.0)).epsilon(1e-12));
    CHECK(shadow_autocorrelation(4.25, 1.0) == doctest::Approx(0.7903).epsilon(1e-4));
    // sign of the lag is irrelevant
    CHECK(shadow_autocorrelation(10.0, -5.0) == doctest::Approx(std::exp(-0.5)).epsilon(1e-12));
    CHECK_THROWS(shadow_autocorrelation(0.0, 1.0));
}

TEST_CASE("zero displacement keeps the shadow value") {
    ShadowProcess p({6.12, 32.5, ShadowMode::AR}, 42, 1, 2);
    const double before = p.advance(3.0);
    CHECK(p.advance(0.0) == doctest::Approx(before).epsilon(1e-15));
    CHECK(p.current_db() == doctest::Approx(before).epsilon(1e-15));
}

TEST_CASE("AR process is stationary with the configured variance") {
    const double sigma = 3.95;
    ShadowProcess p({sigma, 23.3, ShadowMode::AR}, 7, 10, 11);
    const int n = 100000;
    double acc = 0.0, acc2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x = p.advance(2.0);
        acc += x;
        acc2 += x * x;
    }
    const double mean = acc / n;
    const double var = acc2 / n - mean * mean;
    CHECK(std::abs(mean) < 0.1);
    CHECK(var == doctest::Approx(sigma * sigma).epsilon(0.05));
}

TEST_CASE("AR lag autocorrelation follows rho^k") {
    const double dc = 23.3, dd = 5.0;
    ShadowProcess p({3.95, dc, ShadowMode::AR}, 19, 3, 4);
    const int n = 100000;
    std::vector<double> x(n);
    for (int i = 0; i < n; ++i) x[i] = p.advance(dd);
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= n;
    double var = 0.0;
    for (double v : x) var += (v - mean) * (v - mean);
    const double rho = shadow_autocorrelation(dc, dd);
    for (int k = 1; k <= 5; ++k) {
        double acc = 0.0;
        for (int i = 0; i + k < n; ++i) acc += (x[i] - mean) * (x[i + k] - mean);
        CHECK(std::abs(acc / var - std::pow(rho, k)) < 0.02);
    }
}

TEST_CASE("block mode: constant within a block, independent across blocks") {
    ShadowProcess p({6.0, 25.0, ShadowMode::BLOCK}, 5, 8, 9);
    // same block
    CHECK(p.block_value(3.0) == doctest::Approx(p.block_value(24.9)).epsilon(1e-15));
    CHECK(p.block_value(26.0) == doctest::Approx(p.block_value(49.0)).epsilon(1e-15));
    CHECK(p.block_value(3.0) != p.block_value(26.0));
    // order independence
    const double later = p.block_value(510.0);
    const double earlier = p.block_value(30.0);
    CHECK(p.block_value(510.0) == doctest::Approx(later).epsilon(1e-15));
    CHECK(p.block_value(30.0) == doctest::Approx(earlier).epsilon(1e-15));

    // adjacent-block correlation near zero
    const int n = 10000;
    double sxy = 0.0, sx = 0.0, sy = 0.0, sx2 = 0.0, sy2 = 0.0;
    for (int k = 0; k < n; ++k) {
        const double a = p.block_value(25.0 * k + 1.0);
        const double b = p.block_value(25.0 * (k + 1) + 1.0);
        sx += a;
        sy += b;
        sx2 += a * a;
        sy2 += b * b;
        sxy += a * b;
    }
    const double corr = (sxy / n - sx / n * sy / n) /
                        std::sqrt((sx2 / n - sx / n * sx / n) * (sy2 / n - sy / n * sy / n));
    CHECK(std::abs(corr) < 0.03);
}

TEST_CASE("block values are Gaussian (Kolmogorov-Smirnov)") {
    const double sigma = 4.0;
    ShadowProcess p({sigma, 10.0, ShadowMode::BLOCK}, 23, 1, 6);
    const int n = 100000;
    std::vector<double> x(n);
    for (int i = 0; i < n; ++i) x[i] = p.block_value(10.0 * i + 0.5);
    std::sort(x.begin(), x.end());
    double ks = 0.0;
    for (int i = 0; i < n; ++i) {
        const double cdf = 0.5 * std::erfc(-x[i] / (sigma * std::sqrt(2.0)));
        ks = std::max(ks, std::abs(cdf - (i + 1.0) / n));
        ks = std::max(ks, std::abs(cdf - static_cast<double>(i) / n));
    }
    // 1% critical value for the one-sample KS statistic
    CHECK(ks < 1.63 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("determinism: same seed and link ids reproduce the trajectory") {
    ShadowProcess a({6.12, 32.5, ShadowMode::AR}, 99, 4, 7);
    ShadowProcess b({6.12, 32.5, ShadowMode::AR}, 99, 4, 7);
    for (int i = 0; i < 100; ++i)
        CHECK(a.advance(1.5) == doctest::Approx(b.advance(1.5)).epsilon(1e-15));
    // link-pair order does not matter (channel reciprocity)
    ShadowProcess c({6.12, 32.5, ShadowMode::AR}, 99, 7, 4);
    ShadowProcess d({6.12, 32.5, ShadowMode::AR}, 99, 4, 7);
    CHECK(c.advance(2.0) == doctest::Approx(d.advance(2.0)).epsilon(1e-15));
    // different links diverge
    ShadowProcess e({6.12, 32.5, ShadowMode::AR}, 99, 4, 8);
    CHECK(e.advance(2.0) != d.advance(0.0));
}

TEST_CASE("class switch keeps the normalized state") {
    ShadowProcess p({4.0, 23.3, ShadowMode::AR}, 31, 2, 5);
    const double before = p.advance(5.0);
    p.set_config({8.0, 32.5, ShadowMode::AR});
    // the dB value scales by the sigma ratio, no re-draw
    CHECK(p.current_db() == doctest::Approx(before * 2.0).epsilon(1e-12));
}

TEST_CASE("configuration validation") {
    CHECK_THROWS(ShadowProcess({0.0, 10.0, ShadowMode::AR}, 1, 1, 2));
    CHECK_THROWS(ShadowProcess({1.0, -1.0, ShadowMode::AR}, 1, 1, 2));
    ShadowProcess p({1.0, 1.0, ShadowMode::AR}, 1, 1, 2);
    CHECK_THROWS(p.advance(-0.5));
    CHECK_THROWS(p.block_value(-0.5));
}
