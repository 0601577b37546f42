#include "optpred/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "optpred/csv.hpp"
#include "optpred/ensemble.hpp"
#include "optpred/pricing.hpp"
#include "optpred/targets.hpp"

namespace optpred {

double rmse(std::span<const double> errors) {
    if (errors.empty()) throw std::invalid_argument("rmse: empty error vector");
    double ss = 0.0;
    for (double e : errors) ss += e * e;
    return std::sqrt(ss / static_cast<double>(errors.size()));
}

std::string to_string(ModelKind kind) {
    switch (kind) {
        case ModelKind::Hh: return "hh";
        case ModelKind::Ds: return "ds";
        case ModelKind::Ensemble: return "ensemble";
        case ModelKind::BsmBenchmark: return "bsm";
    }
    return "unknown";
}

EvalReport build_report(std::string model_id, std::string split_tag,
                        std::span<const double> actual, std::span<const double> predicted,
                        std::optional<std::pair<double, double>> hist_range) {
    if (actual.size() != predicted.size())
        throw std::invalid_argument("build_report: length mismatch");

    EvalReport report;
    report.model_id = std::move(model_id);
    report.split_tag = std::move(split_tag);
    report.residuals.reserve(actual.size());
    for (std::size_t i = 0; i < actual.size(); ++i) {
        if (std::isnan(predicted[i])) continue;  // rows the model cannot price
        report.residuals.push_back(actual[i] - predicted[i]);
    }
    if (report.residuals.empty()) throw std::invalid_argument("build_report: no usable rows");
    report.n = report.residuals.size();
    report.rmse_value = rmse(report.residuals);

    auto [lo_it, hi_it] = std::minmax_element(report.residuals.begin(), report.residuals.end());
    double lo = hist_range ? hist_range->first : *lo_it;
    double hi = hist_range ? hist_range->second : *hi_it;
    if (!(hi > lo)) hi = lo + 1.0;  // all residuals identical: one wide bin
    report.hist_lo = lo;
    report.hist_hi = hi;
    report.histogram.assign(kHistogramBins, 0);
    const double width = (hi - lo) / kHistogramBins;
    for (double r : report.residuals) {
        auto bin = static_cast<long>(std::floor((r - lo) / width));
        bin = std::clamp<long>(bin, 0, kHistogramBins - 1);
        ++report.histogram[static_cast<std::size_t>(bin)];
    }
    return report;
}

std::vector<double> bsm_benchmark_predict(const FeaturizedDataset& data) {
    std::vector<double> preds;
    preds.reserve(data.rows.size());
    for (const auto& r : data.rows) {
        const double price = bsm_call(r.quote.spot, r.quote.strike, r.features.rate, r.hist_vol,
                                      r.ttm_years);
        preds.push_back(100.0 * price / r.quote.spot);
    }
    return preds;
}

std::vector<double> predict_normalized(ModelKind kind, const FeaturizedDataset& data,
                                       const ModelSet& models, const EvalConfig& cfg) {
    const std::size_t n = data.rows.size();
    std::vector<double> out(n, std::numeric_limits<double>::quiet_NaN());
    if (n == 0) return out;

    if (kind == ModelKind::BsmBenchmark) return bsm_benchmark_predict(data);

    const Matrix x = data.feature_matrix();
    std::vector<double> hh_pred;
    std::vector<double> ds_u;
    if (kind == ModelKind::Hh || kind == ModelKind::Ensemble) {
        if (!models.hh) throw std::invalid_argument("predict: HH model required");
        hh_pred = predict(*models.hh, x);
    }
    if (kind == ModelKind::Ds || kind == ModelKind::Ensemble) {
        if (!models.ds) throw std::invalid_argument("predict: DS model required");
        ds_u = predict(*models.ds, x);
    }

    auto ds_normalized = [&](std::size_t i) {
        const FeatureRow& r = data.rows[i];
        double price = price_from_ds_target(ds_u[i], r.quote.spot, r.quote.moneyness,
                                            r.ttm_years, r.features.rate, r.rho);
        if (cfg.floor_prices_at_zero) price = std::max(price, 0.0);
        return 100.0 * price / r.quote.spot;
    };

    switch (kind) {
        case ModelKind::Hh:
            for (std::size_t i = 0; i < n; ++i) out[i] = hh_pred[i];
            break;
        case ModelKind::Ds:
            for (std::size_t i = 0; i < n; ++i)
                if (data.rows[i].ds_valid) out[i] = ds_normalized(i);
            break;
        case ModelKind::Ensemble: {
            if (!models.ensemble) throw std::invalid_argument("predict: ensemble params required");
            const EnsembleParams& p = *models.ensemble;
            for (std::size_t i = 0; i < n; ++i) {
                if (!data.rows[i].ds_valid) {
                    out[i] = hh_pred[i];
                    continue;
                }
                const double q = dsq(data.rows[i].hist_vol, p.sigma0);
                out[i] = blend(hh_pred[i], ds_normalized(i), q, p);
            }
            break;
        }
        case ModelKind::BsmBenchmark:
            break;  // handled above
    }
    return out;
}

EvalReport evaluate_model(ModelKind kind, const FeaturizedDataset& data, const ModelSet& models,
                          std::string split_tag, const EvalConfig& cfg,
                          std::optional<std::pair<double, double>> hist_range) {
    const auto predicted = predict_normalized(kind, data, models, cfg);
    const auto actual = data.hh_targets();
    return build_report(to_string(kind), std::move(split_tag), actual, predicted, hist_range);
}

namespace {

/// Linear-interpolation empirical quantile (type 7) of a sorted sample.
double quantile_sorted(std::span<const double> sorted, double p) {
    const double pos = p * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

}  // namespace

QqTable qq_export(std::span<const double> sample_a, std::span<const double> sample_b) {
    if (sample_a.empty() || sample_b.empty())
        throw std::invalid_argument("qq_export: samples must be nonempty");
    std::vector<double> a(sample_a.begin(), sample_a.end());
    std::vector<double> b(sample_b.begin(), sample_b.end());
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());

    QqTable table;
    for (int pct = 1; pct <= 99; ++pct) {
        table.percentiles.push_back(pct);
        table.quantiles_a.push_back(quantile_sorted(a, pct / 100.0));
        table.quantiles_b.push_back(quantile_sorted(b, pct / 100.0));
    }
    return table;
}

void write_report_csv(const std::filesystem::path& path, const EvalReport& report) {
    CsvWriter out(path);
    out.raw_line("# optpred eval report");
    out.row({"model", report.model_id});
    out.row({"split", report.split_tag});
    out.row({"rmse", fmt_double(report.rmse_value)});
    out.row({"n", std::to_string(report.n)});
    out.row({"hist_lo", fmt_double(report.hist_lo)});
    out.row({"hist_hi", fmt_double(report.hist_hi)});
    out.raw_line("bin,count");
    for (std::size_t i = 0; i < report.histogram.size(); ++i)
        out.row({std::to_string(i), std::to_string(report.histogram[i])});
}

void write_qq_csv(const std::filesystem::path& path, const QqTable& table) {
    CsvWriter out(path);
    out.raw_line("percentile,quantile_a,quantile_b");
    for (std::size_t i = 0; i < table.percentiles.size(); ++i)
        out.row({std::to_string(table.percentiles[i]), fmt_double(table.quantiles_a[i]),
                 fmt_double(table.quantiles_b[i])});
}

}  // namespace optpred
