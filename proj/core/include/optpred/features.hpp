#pragma once

#include <array>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "optpred/ingest.hpp"

namespace optpred {

/// A window of n+1 consecutive daily closes, oldest first, yielding n log
/// returns. The pipeline uses n = 19 (20 closes, roughly one trading month).
struct ReturnWindow {
    std::vector<double> prices;
    double delta = 1.0 / 255.0;  // year fraction per step

    std::size_t n() const { return prices.empty() ? 0 : prices.size() - 1; }
};

/// Centered daily log returns:
///   R_i = ln(S(t-n+i)/S(t-n-1+i)) - (1/n) ln(S(t)/S(t-n)).
/// The subtracted term telescopes to the mean return, so sum(R) == 0 up to
/// rounding. Throws std::domain_error on nonpositive prices.
std::vector<double> centered_log_returns(const ReturnWindow& window);

/// Ascending sort (the order statistics of the sample).
std::vector<double> order_statistics(std::vector<double> values);

struct VolEstimate {
    double hist_vol = 0.0;  // annualized sigma-hat
    double rho = 0.0;       // volatility scalar; equals hist_vol under constant vol
    bool degenerate = false;  // zero variance: rho unusable as a divisor
};

/// Annualized sample standard deviation (n-1 divisor) of the given returns.
/// The input is sorted internally so the estimate is exactly invariant under
/// permutation, which the order-statistics identity requires.
VolEstimate historical_vol(std::span<const double> returns, double periods_per_year = 255.0);

/// The 23 model inputs of one contract-day, in frozen column order:
/// 19 return order statistics, TTM in days, S/K, 100*C_prev/S_prev, rate.
struct FeatureVector {
    static constexpr std::size_t kReturnCount = 19;
    static constexpr std::size_t kCount = kReturnCount + 4;

    std::array<double, kReturnCount> return_stats{};
    double ttm_days = 0.0;
    double inv_moneyness = 0.0;
    double prev_norm_price = 0.0;
    double rate = 0.0;

    std::array<double, kCount> flatten() const;
    static const std::array<std::string, kCount>& names();
};

struct FeatureError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Assembles the feature vector for one quote from a 20-close window ending
/// on (or before, per config) the quote date. Throws FeatureError when the
/// window does not have exactly 19 returns.
FeatureVector build_feature_vector(const CleanOptionQuote& quote, const ReturnWindow& window,
                                   double rate);

/// Daily closes of one underlying, indexed by date; answers window queries.
class UnderlyingSeries {
public:
    void add(Date date, double close);
    /// Last-wins ingestion from raw archive rows (any moneyness, one value
    /// per symbol/date), so windows can reach back before the first clean quote.
    static std::map<std::string, UnderlyingSeries> from_rows(std::span<const RawOptionRow> rows);

    /// Closes for the n_returns+1 days up to and including `asof` (which must
    /// be present). Returns an empty window when coverage is insufficient.
    ReturnWindow window_ending_at(Date asof, std::size_t n_returns) const;
    /// Same, ending on the trading day strictly before `asof`.
    ReturnWindow window_ending_before(Date asof, std::size_t n_returns) const;

    std::size_t size() const { return closes_.size(); }
    const std::map<long, double>& data() const { return closes_; }

private:
    std::map<long, double> closes_;  // sys_days count -> close
};

}  // namespace optpred
