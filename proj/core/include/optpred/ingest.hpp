#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "optpred/dates.hpp"

namespace optpred {

/// One raw row of an option-chain archive file. Numeric cells that were
/// blank ("-") or malformed are carried as nullopt so the cleaner can count
/// them per reason instead of the parser guessing.
struct RawOptionRow {
    std::string symbol;
    Date date{};
    Date expiry{};
    std::string option_type;  // "CE" expected; anything else is dropped later
    std::optional<double> strike;
    std::optional<double> open;
    std::optional<double> close;
    std::optional<double> underlying;
    std::size_t line_no = 0;
};

/// Maps logical column names to the header names of a particular archive
/// vintage. Header matching is case-insensitive and whitespace-trimmed.
struct ChainSchema {
    std::string symbol = "Symbol";
    std::string date = "Date";
    std::string expiry = "Expiry";
    std::string option_type = "Option Type";
    std::string strike = "Strike Price";
    std::string open = "Open";
    std::string close = "Close";
    std::string underlying = "Underlying Value";
    DateFormat date_format = DateFormat::DayMonYear;
};

struct ParseStats {
    std::size_t data_rows = 0;
    std::size_t bad_date_rows = 0;  // rows skipped because a date failed to parse
};

/// Parses an option-chain CSV. Throws std::runtime_error for I/O problems
/// and SchemaError when a required column is missing from the header.
std::vector<RawOptionRow> parse_chain_csv(const std::filesystem::path& path,
                                          const ChainSchema& schema,
                                          ParseStats* stats = nullptr);

struct SchemaError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A contract-day that survived cleaning, with the previous trading day's
/// option close joined in.
struct CleanOptionQuote {
    std::string symbol;
    Date date{};
    Date expiry{};
    double strike = 0.0;
    double spot = 0.0;
    double option_close = 0.0;
    double prev_option_close = 0.0;
    double prev_spot = 0.0;
    int ttm_days = 0;
    double moneyness = 0.0;  // K / S
};

enum class MoneynessRatio {
    StrikeOverSpot,  // K/S in [1-band, 1+band]
    SpotOverStrike,  // S/K in [1-band, 1+band]
};

struct FilterConfig {
    double moneyness_band = 0.04;
    MoneynessRatio ratio = MoneynessRatio::StrikeOverSpot;
    int ttm_min_days = 3;
    int ttm_max_days = 45;
};

/// Per-reason drop counts from clean_and_filter.
struct DropReport {
    std::size_t input_rows = 0;
    std::size_t duplicates = 0;
    std::size_t not_call = 0;
    std::size_t missing_strike = 0;
    std::size_t missing_underlying = 0;
    std::size_t zero_open_or_close = 0;
    std::size_t ttm_out_of_range = 0;
    std::size_t moneyness_out_of_band = 0;
    std::size_t no_previous_close = 0;
    std::size_t kept = 0;

    std::string to_string() const;
};

struct CleanResult {
    std::vector<CleanOptionQuote> quotes;  // sorted by (symbol, date, expiry, strike)
    DropReport report;
};

/// Applies the Step-1 filters and joins the previous trading-day close for
/// the same contract (symbol, expiry, strike). Total: never throws on data.
CleanResult clean_and_filter(std::span<const RawOptionRow> rows, const FilterConfig& cfg = {});

/// Filter predicates alone (no join); clean_and_filter output is a fixed
/// point of this, which is what the idempotence property tests.
std::vector<CleanOptionQuote> filter_quotes(std::span<const CleanOptionQuote> quotes,
                                            const FilterConfig& cfg = {});

struct SplitBoundaries {
    Date train_end{std::chrono::year{2019}, std::chrono::month{8}, std::chrono::day{31}};
    Date typical_end{std::chrono::year{2019}, std::chrono::month{12}, std::chrono::day{31}};
    Date atypical_end{std::chrono::year{2020}, std::chrono::month{4}, std::chrono::day{30}};
};

struct DatasetSplit {
    std::vector<CleanOptionQuote> train;
    std::vector<CleanOptionQuote> typical_test;
    std::vector<CleanOptionQuote> atypical_test;
    SplitBoundaries boundaries;
    std::size_t beyond_end = 0;  // quotes dated after atypical_end
};

/// Partitions quotes by date: (-inf, train_end] / (train_end, typical_end]
/// / (typical_end, atypical_end]. Later dates are counted, not kept.
DatasetSplit split_by_date(std::span<const CleanOptionQuote> quotes,
                           const SplitBoundaries& boundaries = {});

/// Canonical clean-quote CSV (fixed column order, ISO dates).
void write_quotes_csv(const std::filesystem::path& path,
                      std::span<const CleanOptionQuote> quotes);
std::vector<CleanOptionQuote> read_quotes_csv(const std::filesystem::path& path);

}  // namespace optpred
