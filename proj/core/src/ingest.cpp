#include "optpred/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include "optpred/csv.hpp"

namespace optpred {
namespace {

std::string lower(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    return out;
}

std::size_t find_column(const CsvRecord& header, const std::string& name,
                        const std::filesystem::path& path) {
    const std::string want = lower(trim(name));
    for (std::size_t i = 0; i < header.size(); ++i)
        if (lower(trim(header[i])) == want) return i;
    throw SchemaError("column '" + name + "' not found in " + path.string());
}

std::string cell(const CsvRecord& rec, std::size_t idx) {
    return idx < rec.size() ? rec[idx] : std::string{};
}

auto quote_order_key(const CleanOptionQuote& q) {
    return std::tuple(q.symbol, to_days(q.date).time_since_epoch().count(),
                      to_days(q.expiry).time_since_epoch().count(), q.strike);
}

bool in_band(double ratio, double band) {
    return ratio >= 1.0 - band && ratio <= 1.0 + band;
}

bool passes_filters(const CleanOptionQuote& q, const FilterConfig& cfg, DropReport* report) {
    if (!(q.option_close > 0.0) || !(q.spot > 0.0)) {
        if (report) ++report->zero_open_or_close;
        return false;
    }
    if (q.ttm_days < cfg.ttm_min_days || q.ttm_days > cfg.ttm_max_days) {
        if (report) ++report->ttm_out_of_range;
        return false;
    }
    // the stored moneyness is canonical (recomputing K/S can move a quote
    // sitting exactly on the band edge by one ulp)
    const double ratio = cfg.ratio == MoneynessRatio::StrikeOverSpot ? q.moneyness
                                                                     : q.spot / q.strike;
    if (!in_band(ratio, cfg.moneyness_band)) {
        if (report) ++report->moneyness_out_of_band;
        return false;
    }
    return true;
}

}  // namespace

std::vector<RawOptionRow> parse_chain_csv(const std::filesystem::path& path,
                                          const ChainSchema& schema, ParseStats* stats) {
    const auto records = read_csv(path);
    if (records.empty()) throw std::runtime_error("empty file: " + path.string());

    const CsvRecord& header = records.front();
    const std::size_t c_symbol = find_column(header, schema.symbol, path);
    const std::size_t c_date = find_column(header, schema.date, path);
    const std::size_t c_expiry = find_column(header, schema.expiry, path);
    const std::size_t c_type = find_column(header, schema.option_type, path);
    const std::size_t c_strike = find_column(header, schema.strike, path);
    const std::size_t c_open = find_column(header, schema.open, path);
    const std::size_t c_close = find_column(header, schema.close, path);
    const std::size_t c_underlying = find_column(header, schema.underlying, path);

    std::vector<RawOptionRow> rows;
    rows.reserve(records.size() - 1);
    ParseStats local;
    for (std::size_t i = 1; i < records.size(); ++i) {
        const CsvRecord& rec = records[i];
        ++local.data_rows;
        RawOptionRow row;
        row.line_no = i + 1;
        row.symbol = std::string(trim(cell(rec, c_symbol)));
        row.option_type = std::string(trim(cell(rec, c_type)));
        try {
            row.date = parse_date(trim(cell(rec, c_date)), schema.date_format);
            row.expiry = parse_date(trim(cell(rec, c_expiry)), schema.date_format);
        } catch (const std::invalid_argument&) {
            ++local.bad_date_rows;
            continue;
        }
        row.strike = parse_numeric_cell(cell(rec, c_strike));
        row.open = parse_numeric_cell(cell(rec, c_open));
        row.close = parse_numeric_cell(cell(rec, c_close));
        row.underlying = parse_numeric_cell(cell(rec, c_underlying));
        rows.push_back(std::move(row));
    }
    if (stats) *stats = local;
    return rows;
}

CleanResult clean_and_filter(std::span<const RawOptionRow> rows, const FilterConfig& cfg) {
    CleanResult result;
    DropReport& report = result.report;
    report.input_rows = rows.size();

    // Archives occasionally republish corrected rows; keep the last
    // occurrence of each (symbol, date, expiry, strike). Calls and puts share
    // contract parameters, so the option type is part of the key.
    std::map<std::tuple<std::string, std::string, long, long, double>, std::size_t> latest;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows[i];
        const auto key = std::tuple(r.symbol, r.option_type,
                                    to_days(r.date).time_since_epoch().count(),
                                    to_days(r.expiry).time_since_epoch().count(),
                                    r.strike.value_or(-1.0));
        auto [it, inserted] = latest.try_emplace(key, i);
        if (!inserted) {
            it->second = i;
            ++report.duplicates;
        }
    }

    // Previous-day join data: per contract, the dates with usable close and
    // underlying values, built from deduplicated rows before the moneyness
    // and TTM filters (the prior day's close is real market data even when
    // that day itself falls outside the band).
    std::map<std::tuple<std::string, long, double>, std::map<long, std::pair<double, double>>>
        by_contract;
    for (const auto& [key, idx] : latest) {
        const auto& r = rows[idx];
        if (r.option_type != "CE") continue;
        if (!r.strike || !r.close || !r.underlying) continue;
        if (!(*r.close > 0.0) || !(*r.underlying > 0.0)) continue;
        const auto ckey = std::tuple(r.symbol, to_days(r.expiry).time_since_epoch().count(),
                                     *r.strike);
        by_contract[ckey][to_days(r.date).time_since_epoch().count()] = {*r.close, *r.underlying};
    }

    for (const auto& [key, idx] : latest) {
        const auto& r = rows[idx];
        if (r.option_type != "CE") {
            ++report.not_call;
            continue;
        }
        if (!r.strike) {
            ++report.missing_strike;
            continue;
        }
        if (!r.underlying || !(*r.underlying > 0.0)) {
            ++report.missing_underlying;
            continue;
        }
        if (!r.open || !r.close || !(*r.open > 0.0) || !(*r.close > 0.0)) {
            ++report.zero_open_or_close;
            continue;
        }

        CleanOptionQuote q;
        q.symbol = r.symbol;
        q.date = r.date;
        q.expiry = r.expiry;
        q.strike = *r.strike;
        q.spot = *r.underlying;
        q.option_close = *r.close;
        q.ttm_days = days_between(r.date, r.expiry);
        q.moneyness = q.strike / q.spot;

        DropReport probe;
        if (!passes_filters(q, cfg, &probe)) {
            report.ttm_out_of_range += probe.ttm_out_of_range;
            report.moneyness_out_of_band += probe.moneyness_out_of_band;
            report.zero_open_or_close += probe.zero_open_or_close;
            continue;
        }

        // previous trading day present in the file for this exact contract
        const auto ckey = std::tuple(r.symbol, to_days(r.expiry).time_since_epoch().count(),
                                     q.strike);
        const auto& dates = by_contract[ckey];
        const long day = to_days(r.date).time_since_epoch().count();
        auto it = dates.lower_bound(day);
        if (it == dates.begin()) {
            ++report.no_previous_close;
            continue;
        }
        --it;
        q.prev_option_close = it->second.first;
        q.prev_spot = it->second.second;
        result.quotes.push_back(std::move(q));
    }

    std::sort(result.quotes.begin(), result.quotes.end(),
              [](const CleanOptionQuote& a, const CleanOptionQuote& b) {
                  return quote_order_key(a) < quote_order_key(b);
              });
    report.kept = result.quotes.size();
    return result;
}

std::vector<CleanOptionQuote> filter_quotes(std::span<const CleanOptionQuote> quotes,
                                            const FilterConfig& cfg) {
    std::vector<CleanOptionQuote> kept;
    kept.reserve(quotes.size());
    for (const auto& q : quotes)
        if (passes_filters(q, cfg, nullptr) && q.prev_option_close > 0.0 && q.prev_spot > 0.0)
            kept.push_back(q);
    return kept;
}

DatasetSplit split_by_date(std::span<const CleanOptionQuote> quotes,
                           const SplitBoundaries& boundaries) {
    if (!(boundaries.train_end < boundaries.typical_end &&
          boundaries.typical_end < boundaries.atypical_end))
        throw std::invalid_argument("split boundaries must be strictly increasing");

    DatasetSplit split;
    split.boundaries = boundaries;
    for (const auto& q : quotes) {
        if (q.date <= boundaries.train_end)
            split.train.push_back(q);
        else if (q.date <= boundaries.typical_end)
            split.typical_test.push_back(q);
        else if (q.date <= boundaries.atypical_end)
            split.atypical_test.push_back(q);
        else
            ++split.beyond_end;
    }
    return split;
}

std::string DropReport::to_string() const {
    std::ostringstream out;
    out << "rows in:                " << input_rows << '\n'
        << "duplicates collapsed:   " << duplicates << '\n'
        << "non-call rows:          " << not_call << '\n'
        << "blank/bad strike:       " << missing_strike << '\n'
        << "blank/bad underlying:   " << missing_underlying << '\n'
        << "zero open or close:     " << zero_open_or_close << '\n'
        << "ttm out of range:       " << ttm_out_of_range << '\n'
        << "moneyness out of band:  " << moneyness_out_of_band << '\n'
        << "no previous-day close:  " << no_previous_close << '\n'
        << "quotes kept:            " << kept << '\n';
    return out.str();
}

namespace {
constexpr const char* kQuoteHeader =
    "symbol,date,expiry,strike,spot,option_close,prev_option_close,prev_spot,ttm_days,moneyness";
}

void write_quotes_csv(const std::filesystem::path& path,
                      std::span<const CleanOptionQuote> quotes) {
    CsvWriter out(path);
    out.raw_line(kQuoteHeader);
    for (const auto& q : quotes) {
        out.row({q.symbol, format_iso(q.date), format_iso(q.expiry), fmt_double(q.strike),
                 fmt_double(q.spot), fmt_double(q.option_close), fmt_double(q.prev_option_close),
                 fmt_double(q.prev_spot), std::to_string(q.ttm_days), fmt_double(q.moneyness)});
    }
}

std::vector<CleanOptionQuote> read_quotes_csv(const std::filesystem::path& path) {
    const auto records = read_csv(path);
    if (records.empty() || records.front() != parse_csv_text(kQuoteHeader).front())
        throw std::runtime_error("unexpected quote CSV header in " + path.string());
    std::vector<CleanOptionQuote> quotes;
    quotes.reserve(records.size() - 1);
    for (std::size_t i = 1; i < records.size(); ++i) {
        const auto& r = records[i];
        if (r.size() != 10) throw std::runtime_error("bad quote row in " + path.string());
        CleanOptionQuote q;
        q.symbol = r[0];
        q.date = parse_date(r[1], DateFormat::Iso);
        q.expiry = parse_date(r[2], DateFormat::Iso);
        q.strike = std::stod(r[3]);
        q.spot = std::stod(r[4]);
        q.option_close = std::stod(r[5]);
        q.prev_option_close = std::stod(r[6]);
        q.prev_spot = std::stod(r[7]);
        q.ttm_days = std::stoi(r[8]);
        q.moneyness = std::stod(r[9]);
        quotes.push_back(std::move(q));
    }
    return quotes;
}

}  // namespace optpred
