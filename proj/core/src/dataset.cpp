#include "optpred/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "optpred/csv.hpp"
#include "optpred/targets.hpp"

namespace optpred {

Matrix FeaturizedDataset::feature_matrix() const {
    Matrix m(rows.size(), FeatureVector::kCount);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto flat = rows[i].features.flatten();
        std::copy(flat.begin(), flat.end(), m.data.begin() + static_cast<long>(i * m.cols));
    }
    return m;
}

std::vector<double> FeaturizedDataset::hh_targets() const {
    std::vector<double> t;
    t.reserve(rows.size());
    for (const auto& r : rows) t.push_back(r.hh);
    return t;
}

std::vector<double> FeaturizedDataset::ds_targets(std::vector<std::size_t>* indices) const {
    std::vector<double> t;
    if (indices) indices->clear();
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (!rows[i].ds_valid) continue;
        t.push_back(rows[i].ds);
        if (indices) indices->push_back(i);
    }
    return t;
}

FeaturizedDataset FeaturizedDataset::filter_symbols(std::span<const std::string> symbols) const {
    if (symbols.empty()) return *this;
    FeaturizedDataset out;
    for (const auto& r : rows)
        if (std::find(symbols.begin(), symbols.end(), r.quote.symbol) != symbols.end())
            out.rows.push_back(r);
    return out;
}

double RateProvider::rate_on(Date d) const {
    if (by_date.empty()) return constant_rate;
    const long day = to_days(d).time_since_epoch().count();
    auto it = by_date.upper_bound(day);
    if (it == by_date.begin()) return constant_rate;
    --it;
    return it->second;
}

RateProvider RateProvider::from_csv(const std::filesystem::path& path, double fallback) {
    RateProvider p;
    p.constant_rate = fallback;
    const auto records = read_csv(path);
    for (std::size_t i = 1; i < records.size(); ++i) {
        const auto& r = records[i];
        if (r.size() < 2) throw std::runtime_error("bad rate row in " + path.string());
        const Date d = parse_date_any(trim(r[0]));
        const auto value = parse_numeric_cell(r[1]);
        if (!value) throw std::runtime_error("bad rate value in " + path.string());
        p.by_date[to_days(d).time_since_epoch().count()] = *value;
    }
    return p;
}

FeaturizedDataset featurize(std::span<const CleanOptionQuote> quotes,
                            const std::map<std::string, UnderlyingSeries>& underlying,
                            const RateProvider& rates, const FeaturizeConfig& cfg,
                            FeaturizeStats* stats) {
    FeaturizedDataset data;
    data.rows.reserve(quotes.size());
    FeaturizeStats local;
    local.input_quotes = quotes.size();

    for (const auto& q : quotes) {
        const auto series_it = underlying.find(q.symbol);
        if (series_it == underlying.end()) {
            ++local.missing_window;
            continue;
        }
        const ReturnWindow window =
            cfg.window_ends_on_quote_date
                ? series_it->second.window_ending_at(q.date, FeatureVector::kReturnCount)
                : series_it->second.window_ending_before(q.date, FeatureVector::kReturnCount);
        if (window.n() != FeatureVector::kReturnCount) {
            ++local.missing_window;
            continue;
        }

        FeatureRow row;
        row.quote = q;
        const double rate = rates.rate_on(q.date);
        row.features = build_feature_vector(q, window, rate);
        row.ttm_years = static_cast<double>(q.ttm_days) / cfg.year_days;

        const auto centered = centered_log_returns(window);
        const VolEstimate vol = historical_vol(centered, cfg.periods_per_year);
        row.hist_vol = vol.hist_vol;
        row.rho = vol.rho;
        row.hh = hh_target(q.option_close, q.spot);
        if (vol.degenerate) {
            row.ds = std::numeric_limits<double>::quiet_NaN();
            row.ds_valid = false;
            ++local.degenerate_vol;
        } else {
            row.ds = ds_target(q.option_close, q.spot, q.moneyness, row.ttm_years, rate, vol.rho);
            row.ds_valid = true;
        }
        data.rows.push_back(std::move(row));
    }
    local.kept = data.rows.size();
    if (stats) *stats = local;
    return data;
}

namespace {

constexpr const char* kFeatureSetVersion = "# optpred featureset v1";

std::vector<std::string> featurized_header() {
    std::vector<std::string> h = {"symbol",     "date",       "expiry",
                                  "strike",     "spot",       "option_close",
                                  "prev_option_close", "prev_spot", "moneyness"};
    for (const auto& name : FeatureVector::names()) h.push_back(name);
    h.insert(h.end(), {"ttm_years", "hist_vol", "rho", "hh_target", "ds_target"});
    return h;
}

}  // namespace

void write_featurized_csv(const std::filesystem::path& path, const FeaturizedDataset& data) {
    CsvWriter out(path);
    out.raw_line(kFeatureSetVersion);
    out.row(featurized_header());
    for (const auto& r : data.rows) {
        std::vector<std::string> fields = {
            r.quote.symbol,
            format_iso(r.quote.date),
            format_iso(r.quote.expiry),
            fmt_double(r.quote.strike),
            fmt_double(r.quote.spot),
            fmt_double(r.quote.option_close),
            fmt_double(r.quote.prev_option_close),
            fmt_double(r.quote.prev_spot),
            fmt_double(r.quote.moneyness),
        };
        for (const double v : r.features.flatten()) fields.push_back(fmt_double(v));
        fields.push_back(fmt_double(r.ttm_years));
        fields.push_back(fmt_double(r.hist_vol));
        fields.push_back(fmt_double(r.rho));
        fields.push_back(fmt_double(r.hh));
        fields.push_back(r.ds_valid ? fmt_double(r.ds) : "nan");
        out.row(fields);
    }
}

FeaturizedDataset read_featurized_csv(const std::filesystem::path& path) {
    const auto records = read_csv(path);
    if (records.size() < 2 || records[0].size() != 1 || records[0][0] != kFeatureSetVersion)
        throw std::runtime_error("missing featureset version line in " + path.string());
    const auto header = featurized_header();
    if (records[1] != header)
        throw std::runtime_error("unexpected featurized header in " + path.string());

    FeaturizedDataset data;
    data.rows.reserve(records.size() - 2);
    for (std::size_t i = 2; i < records.size(); ++i) {
        const auto& rec = records[i];
        if (rec.size() != header.size())
            throw std::runtime_error("bad featurized row in " + path.string());
        FeatureRow row;
        std::size_t c = 0;
        row.quote.symbol = rec[c++];
        row.quote.date = parse_date(rec[c++], DateFormat::Iso);
        row.quote.expiry = parse_date(rec[c++], DateFormat::Iso);
        row.quote.strike = std::stod(rec[c++]);
        row.quote.spot = std::stod(rec[c++]);
        row.quote.option_close = std::stod(rec[c++]);
        row.quote.prev_option_close = std::stod(rec[c++]);
        row.quote.prev_spot = std::stod(rec[c++]);
        row.quote.moneyness = std::stod(rec[c++]);
        std::array<double, FeatureVector::kCount> flat{};
        for (auto& v : flat) v = std::stod(rec[c++]);
        std::copy_n(flat.begin(), FeatureVector::kReturnCount, row.features.return_stats.begin());
        row.features.ttm_days = flat[FeatureVector::kReturnCount + 0];
        row.features.inv_moneyness = flat[FeatureVector::kReturnCount + 1];
        row.features.prev_norm_price = flat[FeatureVector::kReturnCount + 2];
        row.features.rate = flat[FeatureVector::kReturnCount + 3];
        row.quote.ttm_days = static_cast<int>(std::llround(row.features.ttm_days));
        row.ttm_years = std::stod(rec[c++]);
        row.hist_vol = std::stod(rec[c++]);
        row.rho = std::stod(rec[c++]);
        row.hh = std::stod(rec[c++]);
        row.ds = std::stod(rec[c++]);
        row.ds_valid = !std::isnan(row.ds);
        data.rows.push_back(std::move(row));
    }
    return data;
}

void write_underlying_csv(const std::filesystem::path& path,
                          const std::map<std::string, UnderlyingSeries>& series) {
    CsvWriter out(path);
    out.raw_line("symbol,date,close");
    for (const auto& [symbol, s] : series) {
        for (const auto& [day, close] : s.data()) {
            const Date d{std::chrono::sys_days{std::chrono::days{day}}};
            out.row({symbol, format_iso(d), fmt_double(close)});
        }
    }
}

std::map<std::string, UnderlyingSeries> read_underlying_csv(const std::filesystem::path& path) {
    const auto records = read_csv(path);
    if (records.empty() || records[0] != CsvRecord{"symbol", "date", "close"})
        throw std::runtime_error("unexpected underlying CSV header in " + path.string());
    std::map<std::string, UnderlyingSeries> series;
    for (std::size_t i = 1; i < records.size(); ++i) {
        const auto& r = records[i];
        if (r.size() != 3) throw std::runtime_error("bad underlying row in " + path.string());
        series[r[0]].add(parse_date(r[1], DateFormat::Iso), std::stod(r[2]));
    }
    return series;
}

}  // namespace optpred
