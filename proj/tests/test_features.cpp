#include <doctest.h>

#include <cmath>
#include <numeric>

#include "optpred/features.hpp"
#include "optpred/rng.hpp"
#include "oracles.hpp"

using namespace optpred;

namespace {

ReturnWindow window_of(std::vector<double> prices) {
    ReturnWindow w;
    w.prices = std::move(prices);
    return w;
}

std::vector<double> random_path(Rng& rng, std::size_t len, double start = 100.0) {
    std::vector<double> p(len);
    p[0] = start;
    for (std::size_t i = 1; i < len; ++i) p[i] = p[i - 1] * std::exp(0.015 * rng.normal());
    return p;
}

CleanOptionQuote sample_quote() {
    CleanOptionQuote q;
    q.symbol = "X";
    q.date = Date{std::chrono::year{2019}, std::chrono::month{3}, std::chrono::day{14}};
    q.expiry = add_days(q.date, 20);
    q.strike = 102.0;
    q.spot = 100.0;
    q.option_close = 1.8;
    q.prev_option_close = 50.0;
    q.prev_spot = 10000.0;
    q.ttm_days = 20;
    q.moneyness = 1.02;
    return q;
}

}  // namespace

TEST_SUITE("features") {

TEST_CASE("constant prices give all-zero centered returns") {
    const auto r = centered_log_returns(window_of(std::vector<double>(20, 100.0)));
    REQUIRE(r.size() == 19);
    for (double v : r) CHECK(v == 0.0);
}

TEST_CASE("geometric growth gives all-zero centered returns") {
    std::vector<double> prices(20);
    for (std::size_t k = 0; k < prices.size(); ++k)
        prices[k] = 100.0 * std::pow(1.01, static_cast<double>(k));
    for (double v : centered_log_returns(window_of(prices))) CHECK(std::abs(v) < 1e-14);
}

TEST_CASE("centered returns match direct mean subtraction") {
    Rng rng(3);
    const auto prices = random_path(rng, 20);
    const auto got = centered_log_returns(window_of(prices));

    // hand route: raw log returns minus their arithmetic mean
    std::vector<double> raw(19);
    for (std::size_t i = 0; i < raw.size(); ++i) raw[i] = std::log(prices[i + 1] / prices[i]);
    const double mean = std::accumulate(raw.begin(), raw.end(), 0.0) / 19.0;
    for (std::size_t i = 0; i < raw.size(); ++i)
        CHECK(got[i] == doctest::Approx(raw[i] - mean).epsilon(1e-12));

    CHECK(std::abs(std::accumulate(got.begin(), got.end(), 0.0)) < 1e-12);
}

TEST_CASE("centered returns reject nonpositive prices") {
    CHECK_THROWS_AS(centered_log_returns(window_of({100.0, -1.0, 100.0})), std::domain_error);
    CHECK_THROWS_AS(centered_log_returns(window_of({100.0})), std::domain_error);
}

TEST_CASE("telescoping sum is zero for random positive paths") {
    Rng rng(17);
    for (int trial = 0; trial < 1000; ++trial) {
        const auto prices = random_path(rng, 20, rng.uniform(0.5, 5e4));
        const auto r = centered_log_returns(window_of(prices));
        CHECK(std::abs(std::accumulate(r.begin(), r.end(), 0.0)) < 1e-12);
    }
}

TEST_CASE("order statistics") {
    CHECK(order_statistics({3.0, 1.0, 2.0}) == std::vector<double>{1.0, 2.0, 3.0});
    const std::vector<double> sorted{-1.0, 0.0, 2.5};
    CHECK(order_statistics(sorted) == sorted);

    Rng rng(5);
    std::vector<double> sample(19);
    for (auto& v : sample) v = rng.uniform(-1.0, 1.0);
    CHECK(order_statistics(sample) == oracles::insertion_sort(sample));
}

TEST_CASE("historical vol closed form for alternating returns") {
    const std::size_t n = 20;
    const double c = 0.013;
    std::vector<double> returns(n);
    for (std::size_t i = 0; i < n; ++i) returns[i] = (i % 2 == 0) ? c : -c;
    const auto est = historical_vol(returns);
    const double expected = c * std::sqrt(static_cast<double>(n) / (n - 1.0)) * std::sqrt(255.0);
    CHECK(est.hist_vol == doctest::Approx(expected).epsilon(1e-13));
    CHECK(est.rho == est.hist_vol);
    CHECK_FALSE(est.degenerate);
}

TEST_CASE("historical vol of zero returns is degenerate") {
    const auto est = historical_vol(std::vector<double>(19, 0.0));
    CHECK(est.hist_vol == 0.0);
    CHECK(est.degenerate);
}

TEST_CASE("historical vol is exactly permutation invariant") {
    Rng rng(23);
    std::vector<double> sample(19);
    for (auto& v : sample) v = rng.uniform(-0.05, 0.05);

    const auto base = historical_vol(sample);
    const auto sorted = historical_vol(order_statistics(sample));
    std::vector<double> reversed(sample.rbegin(), sample.rend());
    const auto rev = historical_vol(reversed);
    CHECK(base.hist_vol == sorted.hist_vol);  // bitwise
    CHECK(base.hist_vol == rev.hist_vol);
}

TEST_CASE("feature vector assembles the documented 23 columns") {
    Rng rng(31);
    const auto prices = random_path(rng, 20);
    const auto q = sample_quote();
    const auto f = build_feature_vector(q, window_of(prices), 0.067);

    CHECK(f.prev_norm_price == doctest::Approx(0.5).epsilon(1e-15));  // 100*50/10000
    CHECK(f.inv_moneyness == doctest::Approx(100.0 / 102.0).epsilon(1e-15));
    CHECK(f.ttm_days == 20.0);
    CHECK(f.rate == 0.067);

    // spreadsheet route for the return block
    const auto expected = order_statistics(centered_log_returns(window_of(prices)));
    const auto flat = f.flatten();
    for (std::size_t i = 0; i < 19; ++i) CHECK(flat[i] == expected[i]);
    CHECK(flat[19] == 20.0);
    CHECK(flat[20] == f.inv_moneyness);
    CHECK(flat[21] == 0.5);
    CHECK(flat[22] == 0.067);

    for (std::size_t i = 1; i < 19; ++i) CHECK(f.return_stats[i - 1] <= f.return_stats[i]);
}

TEST_CASE("feature vector requires a 19-return window") {
    CHECK_THROWS_AS(build_feature_vector(sample_quote(), window_of({100.0, 101.0}), 0.05),
                    FeatureError);
}

TEST_CASE("features are invariant under uniform path scaling") {
    Rng rng(37);
    for (const double c : {1e-3, 7.3, 12345.6789}) {
        const auto prices = random_path(rng, 20);
        std::vector<double> scaled(prices);
        for (auto& p : scaled) p *= c;

        const auto q = sample_quote();
        const auto f1 = build_feature_vector(q, window_of(prices), 0.05).flatten();
        const auto f2 = build_feature_vector(q, window_of(scaled), 0.05).flatten();
        for (std::size_t i = 0; i < f1.size(); ++i) CHECK(std::abs(f1[i] - f2[i]) <= 1e-12);

        const auto v1 = historical_vol(centered_log_returns(window_of(prices)));
        const auto v2 = historical_vol(centered_log_returns(window_of(scaled)));
        CHECK(v1.hist_vol == doctest::Approx(v2.hist_vol).epsilon(1e-12));
    }
}

TEST_CASE("underlying series window lookups") {
    UnderlyingSeries series;
    const Date start{std::chrono::year{2019}, std::chrono::month{1}, std::chrono::day{1}};
    for (int i = 0; i < 30; ++i) series.add(add_days(start, i * 2), 100.0 + i);  // alternate days

    const Date asof = add_days(start, 40);  // 21st point
    const auto w = series.window_ending_at(asof, 19);
    REQUIRE(w.n() == 19);
    CHECK(w.prices.front() == 101.0);
    CHECK(w.prices.back() == 120.0);

    const auto before = series.window_ending_before(asof, 19);
    REQUIRE(before.n() == 19);
    CHECK(before.prices.back() == 119.0);

    CHECK(series.window_ending_at(add_days(start, 1), 19).n() == 0);   // date absent
    CHECK(series.window_ending_at(add_days(start, 20), 19).n() == 0);  // not enough history
}

}  // TEST_SUITE
