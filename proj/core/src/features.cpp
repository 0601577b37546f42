#include "optpred/features.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace optpred {

std::vector<double> centered_log_returns(const ReturnWindow& window) {
    const std::size_t n = window.n();
    if (n < 1) throw std::domain_error("return window needs at least two prices");
    for (double p : window.prices)
        if (!(p > 0.0)) throw std::domain_error("return window prices must be positive");

    const double mean = std::log(window.prices.back() / window.prices.front()) /
                        static_cast<double>(n);
    std::vector<double> returns(n);
    for (std::size_t i = 0; i < n; ++i)
        returns[i] = std::log(window.prices[i + 1] / window.prices[i]) - mean;
    return returns;
}

std::vector<double> order_statistics(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    return values;
}

VolEstimate historical_vol(std::span<const double> returns, double periods_per_year) {
    if (returns.size() < 2) throw std::domain_error("historical_vol needs n >= 2");

    // Canonical ordering makes the estimate bit-identical for any permutation
    // of the same sample, including its order statistics.
    std::vector<double> sorted(returns.begin(), returns.end());
    std::sort(sorted.begin(), sorted.end());

    const auto n = static_cast<double>(sorted.size());
    double sum = 0.0;
    for (double r : sorted) sum += r;
    const double mean = sum / n;
    double ss = 0.0;
    for (double r : sorted) ss += (r - mean) * (r - mean);
    const double sample_var = ss / (n - 1.0);

    VolEstimate est;
    est.hist_vol = std::sqrt(sample_var) * std::sqrt(periods_per_year);
    est.rho = est.hist_vol;
    est.degenerate = !(est.hist_vol > 0.0);
    return est;
}

std::array<double, FeatureVector::kCount> FeatureVector::flatten() const {
    std::array<double, kCount> out{};
    for (std::size_t i = 0; i < kReturnCount; ++i) out[i] = return_stats[i];
    out[kReturnCount + 0] = ttm_days;
    out[kReturnCount + 1] = inv_moneyness;
    out[kReturnCount + 2] = prev_norm_price;
    out[kReturnCount + 3] = rate;
    return out;
}

const std::array<std::string, FeatureVector::kCount>& FeatureVector::names() {
    static const auto names = [] {
        std::array<std::string, kCount> n;
        for (std::size_t i = 0; i < kReturnCount; ++i) {
            char buf[16];
            std::snprintf(buf, sizeof buf, "ret_os_%02zu", i + 1);
            n[i] = buf;
        }
        n[kReturnCount + 0] = "ttm_days";
        n[kReturnCount + 1] = "inv_moneyness";
        n[kReturnCount + 2] = "prev_norm_price";
        n[kReturnCount + 3] = "rate";
        return n;
    }();
    return names;
}

FeatureVector build_feature_vector(const CleanOptionQuote& quote, const ReturnWindow& window,
                                   double rate) {
    if (window.n() != FeatureVector::kReturnCount)
        throw FeatureError("feature window for " + quote.symbol + " " + format_iso(quote.date) +
                           " has " + std::to_string(window.n()) + " returns, need " +
                           std::to_string(FeatureVector::kReturnCount));
    if (!(quote.prev_spot > 0.0) || !(quote.strike > 0.0))
        throw FeatureError("quote has nonpositive prev_spot or strike");

    const auto sorted = order_statistics(centered_log_returns(window));
    FeatureVector f;
    std::copy(sorted.begin(), sorted.end(), f.return_stats.begin());
    f.ttm_days = static_cast<double>(quote.ttm_days);
    f.inv_moneyness = quote.spot / quote.strike;
    f.prev_norm_price = 100.0 * quote.prev_option_close / quote.prev_spot;
    f.rate = rate;
    return f;
}

void UnderlyingSeries::add(Date date, double close) {
    closes_[to_days(date).time_since_epoch().count()] = close;
}

std::map<std::string, UnderlyingSeries> UnderlyingSeries::from_rows(
    std::span<const RawOptionRow> rows) {
    std::map<std::string, UnderlyingSeries> series;
    for (const auto& r : rows)
        if (r.underlying && *r.underlying > 0.0) series[r.symbol].add(r.date, *r.underlying);
    return series;
}

namespace {

ReturnWindow window_from(const std::map<long, double>& closes,
                         std::map<long, double>::const_iterator last, std::size_t n_returns) {
    // need n_returns entries before `last`
    auto first = last;
    for (std::size_t i = 0; i < n_returns; ++i) {
        if (first == closes.begin()) return {};
        --first;
    }
    ReturnWindow w;
    w.prices.reserve(n_returns + 1);
    for (auto it = first;; ++it) {
        w.prices.push_back(it->second);
        if (it == last) break;
    }
    return w;
}

}  // namespace

ReturnWindow UnderlyingSeries::window_ending_at(Date asof, std::size_t n_returns) const {
    const long day = to_days(asof).time_since_epoch().count();
    const auto it = closes_.find(day);
    if (it == closes_.end()) return {};
    return window_from(closes_, it, n_returns);
}

ReturnWindow UnderlyingSeries::window_ending_before(Date asof, std::size_t n_returns) const {
    const long day = to_days(asof).time_since_epoch().count();
    auto it = closes_.lower_bound(day);
    if (it == closes_.begin()) return {};
    --it;
    return window_from(closes_, it, n_returns);
}

}  // namespace optpred
