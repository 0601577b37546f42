#include <doctest.h>

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "optpred/pricing.hpp"
#include "optpred/rng.hpp"
#include "oracles.hpp"

using namespace optpred;

TEST_SUITE("pricing") {

TEST_CASE("bsm zero-vol limit is discounted intrinsic") {
    const double c = bsm_call(100.0, 90.0, 0.05, 0.0, 0.2);
    CHECK(c == doctest::Approx(100.0 - 90.0 * std::exp(-0.01)).epsilon(1e-14));
    CHECK(bsm_call(80.0, 90.0, 0.05, 0.0, 0.2) == 0.0);
}

TEST_CASE("bsm worthless strike") {
    CHECK(bsm_call(100.0, 0.0, 0.05, 0.3, 1.0) == 100.0);
}

TEST_CASE("bsm rejects bad inputs") {
    CHECK_THROWS_AS(bsm_call(0.0, 90.0, 0.0, 0.2, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(bsm_call(100.0, -1.0, 0.0, 0.2, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(bsm_call(100.0, 90.0, 0.0, -0.2, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(bsm_call(100.0, 90.0, 0.0, 0.2, -1.0), std::invalid_argument);
}

TEST_CASE("bsm matches risk-neutral quadrature at the pinned point") {
    const double quad = oracles::quad_bsm_call(100.0, 100.0, 0.05, 0.2, 0.2);
    CHECK(std::abs(bsm_call(100.0, 100.0, 0.05, 0.2, 0.2) - quad) < 1e-8);
}

TEST_CASE("bsm respects no-arbitrage bounds and monotonicity") {
    Rng rng(42);
    for (int i = 0; i < 500; ++i) {
        const double s = rng.uniform(10.0, 500.0);
        const double k = s * rng.uniform(0.4, 2.5);
        const double r = rng.uniform(0.0, 0.10);
        const double sigma = rng.uniform(0.0, 1.0);
        const double t = rng.uniform(0.0, 2.0);
        const double c = bsm_call(s, k, r, sigma, t);
        CHECK(c >= std::max(s - k * std::exp(-r * t), 0.0) - 1e-12 * s);
        CHECK(c <= s + 1e-12 * s);
        CHECK(bsm_call(s, k, r, sigma + 0.05, t + 0.01) >= c - 1e-12 * s);
        CHECK(bsm_call(s * 1.02, k, r, sigma, t) >= c - 1e-12 * s);
    }
}

TEST_CASE("bsm is homogeneous of order one in (spot, strike)") {
    Rng rng(7);
    for (int i = 0; i < 300; ++i) {
        const double s = rng.uniform(10.0, 300.0);
        const double k = s * rng.uniform(0.5, 2.0);
        const double r = rng.uniform(0.0, 0.08);
        const double sigma = rng.uniform(0.01, 0.9);
        const double t = rng.uniform(0.01, 1.5);
        const double c = rng.uniform(0.1, 50.0);
        const double lhs = bsm_call(c * s, c * k, r, sigma, t);
        const double rhs = c * bsm_call(s, k, r, sigma, t);
        CHECK(std::abs(lhs - rhs) <= 1e-12 * std::max(1.0, rhs));
    }
}

TEST_CASE("bharadia is exact at p* = 1") {
    // C/s = sigma sqrt(T / 2 pi) inverts exactly at ATM with r = 0
    const double sigma = 0.27;
    const double t = 0.3;
    const double c = 100.0 * sigma * std::sqrt(t / (2.0 * std::numbers::pi));
    CHECK(bharadia_iv(c, 100.0, 1.0, t, 0.0) == doctest::Approx(sigma).epsilon(1e-14));
}

TEST_CASE("bharadia affine floor gives zero") {
    const double p_star = 1.02 * std::exp(-0.05 * 0.2);
    const double c = 100.0 * (1.0 - p_star) / 2.0;
    CHECK(std::abs(bharadia_iv(c, 100.0, 1.02, 0.2, 0.05)) < 1e-14);
}

TEST_CASE("bharadia rejects T = 0") {
    CHECK_THROWS_AS(bharadia_iv(5.0, 100.0, 1.0, 0.0, 0.02), std::domain_error);
}

TEST_CASE("bharadia recovers the BSM vol near ATM") {
    // derived example: sigma 20%, r 5%, T 0.2; value pinned after an oracle
    // sweep of the forward map (relative error ~0.6% at this point)
    const double c = bsm_call(100.0, 100.0, 0.05, 0.2, 0.2);
    const double iv = bharadia_iv(c, 100.0, 1.0, 0.2, 0.05);
    CHECK(iv == doctest::Approx(0.2).epsilon(0.011));
    CHECK(iv > 0.2);  // the approximation overstates vol for p* < 1
}

TEST_CASE("bharadia-of-bsm relative error <= 1% for sigma sqrt(T) <= 0.3 at p* = 1") {
    for (double vs = 0.02; vs <= 0.30001; vs += 0.01) {
        for (const double t : {0.05, 0.2, 0.5, 1.0}) {
            const double sigma = vs / std::sqrt(t);
            const double c = bsm_call(50.0, 50.0, 0.0, sigma, t);
            const double iv = bharadia_iv(c, 50.0, 1.0, t, 0.0);
            CHECK(std::abs(iv - sigma) / sigma <= 0.01);
        }
    }
}

TEST_CASE("heston_rho stationary start") {
    CHECK(heston_rho({2.0, 0.04, 0.04, 0.3, 0.5}) == doctest::Approx(0.2).epsilon(1e-15));
}

TEST_CASE("heston_rho small kappa*tau limit is current vol") {
    const double rho = heston_rho({1e-12, 0.09, 0.04, 0.3, 1.0});
    CHECK(rho == doctest::Approx(0.2).epsilon(1e-9));
}

TEST_CASE("heston_rho matches the RK4 oracle") {
    struct Case {
        double kappa, theta, v0, tau;
    };
    for (const auto& c : {Case{2.0, 0.09, 0.04, 0.5}, Case{0.5, 0.02, 0.06, 1.5},
                          Case{6.0, 0.05, 0.3, 0.08}}) {
        const double oracle = oracles::cir_mean_vol_rk4(c.kappa, c.theta, c.v0, c.tau, 100'000);
        CHECK(std::abs(heston_rho({c.kappa, c.theta, c.v0, 0.4, c.tau}) - oracle) < 1e-8);
    }
}

TEST_CASE("heston_rho lies strictly between sqrt(theta) and current vol") {
    Rng rng(11);
    for (int i = 0; i < 200; ++i) {
        const double kappa = rng.uniform(0.01, 8.0);
        const double theta = rng.uniform(0.005, 0.3);
        double v0 = rng.uniform(0.005, 0.3);
        if (v0 == theta) v0 += 0.001;
        const double tau = rng.uniform(0.01, 3.0);
        const double rho = heston_rho({kappa, theta, v0, 0.4, tau});
        const double lo = std::min(std::sqrt(theta), std::sqrt(v0));
        const double hi = std::max(std::sqrt(theta), std::sqrt(v0));
        CHECK(rho > lo);
        CHECK(rho < hi);
    }
}

TEST_CASE("heston_rho is monotone in kappa toward sqrt(theta)") {
    double prev = heston_rho({0.1, 0.09, 0.04, 0.4, 0.5});
    for (double kappa = 0.6; kappa < 10.0; kappa += 0.5) {
        const double rho = heston_rho({kappa, 0.09, 0.04, 0.4, 0.5});
        CHECK(rho > prev);  // v0 < theta: increasing kappa pulls rho up toward sqrt(theta)
        prev = rho;
    }
}

TEST_CASE("error study: diagonal zero, symmetric, no invalid cells") {
    const auto axis = make_sigma_axis(0.05, 1.0, 0.05);
    const auto grid = approx_error_study(axis, 0.2, 1.0);
    CHECK_FALSE(grid.has_invalid_cells);
    for (std::size_t i = 0; i < axis.size(); ++i) {
        CHECK(grid.relative_error[i][i] == 0.0);
        for (std::size_t j = 0; j < axis.size(); ++j)
            CHECK(grid.relative_error[i][j] == grid.relative_error[j][i]);
    }
}

TEST_CASE("error study stays under the documented ceilings (coarse grid)") {
    const auto axis = make_sigma_axis(0.05, 1.0, 0.01);
    const auto grid = approx_error_study(axis, 0.2, 1.0);
    CHECK(grid.max_error() < 0.045);
    CHECK(grid.max_error_with_floor(0.09) < 0.02);
    CHECK(grid.max_error_with_ratio(2.0) < 0.015);
    CHECK(grid.max_error_with_ratio(9.0) < 0.03);
}

TEST_CASE("U is spot-independent under constant-vol BSM") {
    // the grid study evaluates at s = 1; check the reduction directly
    for (const double sigma : {0.07, 0.2, 0.6}) {
        const double u1 = bharadia_iv(bsm_call(1.0, 1.0, 0.0, sigma, 0.2), 1.0, 1.0, 0.2, 0.0);
        const double u2 =
            bharadia_iv(bsm_call(1e4, 1e4, 0.0, sigma, 0.2), 1e4, 1.0, 0.2, 0.0);
        CHECK(std::abs(u1 - u2) < 1e-10);
    }
}

TEST_CASE("norm_cdf sanity") {
    CHECK(norm_cdf(0.0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(norm_cdf(1.0) == doctest::Approx(0.8413447460685429).epsilon(1e-13));
    CHECK(norm_cdf(-1.0) == doctest::Approx(0.15865525393145705).epsilon(1e-13));
    CHECK(norm_cdf(40.0) == 1.0);
}

}  // TEST_SUITE
