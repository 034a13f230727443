#include <doctest.h>

#include <array>
#include <cmath>
#include <random>
#include <stdexcept>

#include "gsdcheck/gsd.hpp"
#include "test_support.hpp"

using namespace gsdcheck;

namespace {

// Independent beta-binomial route through std::lgamma / Beta functions.
Pmf5 beta_binomial_oracle(double psi, double rho) {
    const auto [vmin, vmax] = testing::two_point_variance_extremes(psi);
    const double c = 0.75 * vmax / (vmax - vmin);
    const double s = rho / (c - rho);
    const double a = s * (psi - 1.0) / 4.0;
    const double b = s * (5.0 - psi) / 4.0;
    auto lbeta = [](double x, double y) { return std::lgamma(x) + std::lgamma(y) - std::lgamma(x + y); };
    Pmf5 p{};
    for (int k = 0; k < 5; ++k) {
        const double lchoose = std::lgamma(5.0) - std::lgamma(k + 1.0) - std::lgamma(5.0 - k);
        p[k] = std::exp(lchoose + lbeta(k + a, 4 - k + b) - lbeta(a, b));
    }
    return p;
}

}  // namespace

TEST_CASE("gsd_pmf reproduces the reference rows at psi = 2.1") {
    const std::array<std::pair<double, Pmf5>, 6> rows = {{
        {0.95, {0.061, 0.795, 0.130, 0.013, 0.001}},
        {0.88, {0.145, 0.647, 0.173, 0.032, 0.003}},
        {0.81, {0.230, 0.500, 0.215, 0.050, 0.005}},
        {0.72, {0.317, 0.370, 0.222, 0.078, 0.013}},
        {0.61, {0.394, 0.285, 0.184, 0.100, 0.037}},
        {0.38, {0.532, 0.153, 0.108, 0.096, 0.111}},
    }};
    for (const auto& [rho, expected] : rows) {
        const Pmf5 p = gsd_pmf({2.1, rho});
        for (int j = 0; j < 5; ++j) {
            CAPTURE(rho);
            CAPTURE(j);
            CHECK(std::abs(p[j] - expected[j]) <= 0.0005 + 1e-12);
        }
    }
}

TEST_CASE("gsd_pmf point masses") {
    CHECK(gsd_pmf({3.0, 1.0}) == Pmf5{0, 0, 1, 0, 0});
    CHECK(gsd_pmf({1.0, 0.3}) == Pmf5{1, 0, 0, 0, 0});
    CHECK(gsd_pmf({5.0, 0.7}) == Pmf5{0, 0, 0, 0, 1});
    const Moments m = gsd_moments({3.0, 1.0});
    CHECK(m.mean == 3.0);
    CHECK(m.variance == 0.0);
}

TEST_CASE("gsd_pmf rejects parameters outside the domain") {
    CHECK_THROWS_AS(gsd_pmf({0.99, 0.5}), std::domain_error);
    CHECK_THROWS_AS(gsd_pmf({5.01, 0.5}), std::domain_error);
    CHECK_THROWS_AS(gsd_pmf({3.0, 0.0}), std::domain_error);
    CHECK_THROWS_AS(gsd_pmf({3.0, 1.0001}), std::domain_error);
    CHECK_THROWS_AS(gsd_pmf({std::nan(""), 0.5}), std::domain_error);
}

TEST_CASE("beta-binomial branch matches an lgamma oracle") {
    std::mt19937_64 gen(7);
    std::uniform_real_distribution<double> upsi(1.05, 4.95);
    for (int t = 0; t < 200; ++t) {
        const double psi = upsi(gen);
        const auto [vmin, vmax] = testing::two_point_variance_extremes(psi);
        const double c = 0.75 * vmax / (vmax - vmin);
        const double rho = std::uniform_real_distribution<double>(0.001, c * 0.999)(gen);
        const Pmf5 p = gsd_pmf({psi, rho});
        const Pmf5 q = beta_binomial_oracle(psi, rho);
        for (int j = 0; j < 5; ++j) CHECK(p[j] == doctest::Approx(q[j]).epsilon(1e-9));
    }
}

TEST_CASE("variance_bounds") {
    SUBCASE("stated values") {
        const auto b15 = variance_bounds(1.5);
        CHECK(b15.v_min == 0.25);
        CHECK(b15.v_max == 1.75);
        const auto b3 = variance_bounds(3.0);
        CHECK(b3.v_min == 0.0);
        CHECK(b3.v_max == 4.0);
    }
    SUBCASE("psi = 2.1 against the two-point oracle") {
        const auto b = variance_bounds(2.1);
        CHECK(b.v_min == doctest::Approx(0.09).epsilon(1e-12));
        CHECK(b.v_max == doctest::Approx(3.19).epsilon(1e-12));
    }
    SUBCASE("random psi against the two-point oracle and random PMFs") {
        std::mt19937_64 gen(11);
        std::uniform_real_distribution<double> upsi(1.0, 5.0);
        for (int t = 0; t < 100; ++t) {
            const double psi = upsi(gen);
            const auto [lo, hi] = testing::two_point_variance_extremes(psi);
            const auto b = variance_bounds(psi);
            CHECK(std::abs(b.v_min - lo) <= 1e-9);
            CHECK(std::abs(b.v_max - hi) <= 1e-9);
            CHECK(b.v_min <= b.v_max);
            const auto mirrored = variance_bounds(6.0 - psi);
            CHECK(mirrored.v_min == doctest::Approx(b.v_min).epsilon(1e-12));
            CHECK(mirrored.v_max == doctest::Approx(b.v_max).epsilon(1e-12));
        }
    }
    CHECK_THROWS_AS(variance_bounds(0.5), std::domain_error);
    CHECK_THROWS_AS(variance_bounds(5.5), std::domain_error);
}

TEST_CASE("moments: mean identity and variance interpolation at sampled parameters") {
    const Moments m = gsd_moments({2.1, 0.95});
    CHECK(std::abs(m.variance - (0.95 * 0.09 + 0.05 * 3.19)) <= 1e-9);
    CHECK(std::abs(m.variance - 0.245) <= 0.005);

    const Moments floor = gsd_moments({1.5, 0.0025});
    CHECK(std::abs(floor.variance - 1.75) <= 0.01);

    std::mt19937_64 gen(3);
    std::uniform_real_distribution<double> upsi(1.0, 5.0), urho(1e-4, 1.0);
    for (int t = 0; t < 2000; ++t) {
        const double psi = upsi(gen), rho = urho(gen);
        const Pmf5 p = gsd_pmf({psi, rho});
        double total = 0.0;
        for (double v : p) {
            CHECK(v >= 0.0);
            total += v;
        }
        CHECK(std::abs(total - 1.0) <= 1e-12);
        const Moments mo = pmf_moments(p);
        const auto b = variance_bounds(psi);
        CHECK(std::abs(mo.mean - psi) <= 1e-9);
        CHECK(std::abs(mo.variance - (rho * b.v_min + (1 - rho) * b.v_max)) <= 1e-6);
    }
}

TEST_CASE("variance strictly decreases in rho") {
    for (double psi : {1.01, 1.5, 2.1, 3.0, 3.77, 4.99}) {
        double previous = INFINITY;
        for (int j = 1; j <= 400; ++j) {
            const double v = gsd_moments({psi, j / 400.0}).variance;
            CHECK(v < previous);
            previous = v;
        }
    }
}

TEST_CASE("gsd_log_pmf agrees with log of gsd_pmf") {
    for (double psi : {1.3, 2.1, 3.0, 4.6}) {
        for (double rho : {0.01, 0.38, 0.77, 0.95, 1.0}) {
            const Pmf5 p = gsd_pmf({psi, rho});
            const Pmf5 lp = gsd_log_pmf({psi, rho});
            for (int j = 0; j < 5; ++j) {
                if (p[j] == 0.0) {
                    CHECK(std::isinf(lp[j]));
                    CHECK(lp[j] < 0);
                } else {
                    CHECK(lp[j] == doctest::Approx(std::log(p[j])).epsilon(1e-12));
                }
            }
        }
    }
}

TEST_CASE("sample") {
    SUBCASE("point mass") { CHECK(sample({3.0, 1.0}, 24, 99).k == std::array<int, 5>{0, 0, 24, 0, 0}); }
    SUBCASE("deterministic per seed") {
        CHECK(sample({2.5, 0.6}, 50, 42) == sample({2.5, 0.6}, 50, 42));
        CHECK(sample({2.5, 0.6}, 500, 42) != sample({2.5, 0.6}, 500, 43));
    }
    SUBCASE("law of large numbers") {
        const ScoreCounts c = sample({2.5, 0.8}, 100000, 5);
        CHECK(c.n() == 100000);
        CHECK(std::abs(mos(c) - 2.5) <= 0.02);
    }
    SUBCASE("empirical frequencies of 1e6 draws") {
        const GsdParams params{3.4, 0.55};
        const Pmf5 p = gsd_pmf(params);
        const ScoreCounts c = sample(params, 1000000, 2024);
        for (int j = 0; j < 5; ++j) CHECK(std::abs(c.k[j] / 1e6 - p[j]) <= 0.003);
    }
    CHECK_THROWS_AS(sample({3.0, 0.5}, 0, 1), std::domain_error);
}

TEST_CASE("mos") {
    CHECK(mos({{0, 12, 12, 0, 0}}) == 2.5);
    CHECK(mos({{2, 11, 9, 2, 0}}) == doctest::Approx(59.0 / 24.0));
    CHECK(mos({{24, 0, 0, 0, 0}}) == 1.0);
    CHECK_THROWS_AS(mos({{0, 0, 0, 0, 0}}), std::domain_error);
}
