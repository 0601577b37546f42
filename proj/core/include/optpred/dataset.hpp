#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "optpred/features.hpp"
#include "optpred/gbt.hpp"
#include "optpred/ingest.hpp"

namespace optpred {

/// One featurized contract-day: identifiers, the 23 model inputs, the
/// volatility estimates, and both regression targets.
struct FeatureRow {
    CleanOptionQuote quote;
    FeatureVector features;
    double ttm_years = 0.0;
    double hist_vol = 0.0;
    double rho = 0.0;
    double hh = 0.0;  // 100 * C / S
    double ds = 0.0;  // NaN when rho is degenerate
    bool ds_valid = false;
};

struct FeaturizedDataset {
    std::vector<FeatureRow> rows;

    Matrix feature_matrix() const;
    std::vector<double> hh_targets() const;
    /// DS-valid rows only; indices maps each returned target back into rows.
    std::vector<double> ds_targets(std::vector<std::size_t>* indices = nullptr) const;

    FeaturizedDataset filter_symbols(std::span<const std::string> symbols) const;
};

/// Per-date interest rates with a constant fallback; values are decimals
/// per annum (Yield03 / 100 in the source data).
struct RateProvider {
    double constant_rate = 0.05;
    std::map<long, double> by_date;  // sys_days count -> rate

    double rate_on(Date d) const;
    static RateProvider from_csv(const std::filesystem::path& path, double fallback);
};

struct FeaturizeConfig {
    bool window_ends_on_quote_date = true;  // false: window ends the prior trading day
    double year_days = 365.0;               // calendar-day TTM to year fraction
    double periods_per_year = 255.0;        // annualization of daily vol
};

struct FeaturizeStats {
    std::size_t input_quotes = 0;
    std::size_t missing_window = 0;
    std::size_t degenerate_vol = 0;  // rows kept, DS target unavailable
    std::size_t kept = 0;
};

/// Runs Steps 2-3 over clean quotes: window lookup, feature assembly,
/// historical vol, both targets. Quotes without window coverage are skipped
/// and counted.
FeaturizedDataset featurize(std::span<const CleanOptionQuote> quotes,
                            const std::map<std::string, UnderlyingSeries>& underlying,
                            const RateProvider& rates, const FeaturizeConfig& cfg = {},
                            FeaturizeStats* stats = nullptr);

/// Featurized CSV: a version line, then a header naming identifiers, all 23
/// features, vol estimates and targets.
void write_featurized_csv(const std::filesystem::path& path, const FeaturizedDataset& data);
FeaturizedDataset read_featurized_csv(const std::filesystem::path& path);

/// Underlying close series CSV (symbol, date, close).
void write_underlying_csv(const std::filesystem::path& path,
                          const std::map<std::string, UnderlyingSeries>& series);
std::map<std::string, UnderlyingSeries> read_underlying_csv(const std::filesystem::path& path);

}  // namespace optpred
