#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "optpred/dataset.hpp"
#include "optpred/ensemble.hpp"
#include "optpred/gbt.hpp"

namespace optpred {

/// Root mean square error, sqrt(sum e_i^2 / N). Throws on empty input.
double rmse(std::span<const double> errors);

struct EvalReport {
    std::string model_id;
    std::string split_tag;
    double rmse_value = 0.0;
    std::size_t n = 0;
    std::vector<double> residuals;     // actual - predicted, normalized-price scale
    std::vector<std::size_t> histogram;  // 100 equal-width bins over [hist_lo, hist_hi]
    double hist_lo = 0.0;
    double hist_hi = 0.0;
};

inline constexpr int kHistogramBins = 100;

/// Builds a report from matched actual/predicted vectors. The histogram
/// range defaults to the residual range; pass a pooled range when several
/// reports must share comparable bins.
EvalReport build_report(std::string model_id, std::string split_tag,
                        std::span<const double> actual, std::span<const double> predicted,
                        std::optional<std::pair<double, double>> hist_range = std::nullopt);

enum class ModelKind { Hh, Ds, Ensemble, BsmBenchmark };

std::string to_string(ModelKind kind);

struct ModelSet {
    const TrainedModel* hh = nullptr;
    const TrainedModel* ds = nullptr;
    std::optional<EnsembleParams> ensemble;
};

struct EvalConfig {
    bool floor_prices_at_zero = true;  // applied to reconstructed DS prices
};

/// Normalized-price predictions (100 * C_pred / S) for one model kind.
/// DS predictions go through the price reconstruction; rows with degenerate
/// vol get the HH prediction inside the ensemble and are skipped for DS.
/// Returns predictions aligned with data.rows; entries for skipped rows are NaN.
std::vector<double> predict_normalized(ModelKind kind, const FeaturizedDataset& data,
                                       const ModelSet& models, const EvalConfig& cfg = {});

/// Benchmark: BSM price at the row's own historical vol, normalized.
std::vector<double> bsm_benchmark_predict(const FeaturizedDataset& data);

/// Full evaluation: predictions, residuals (actual - predicted), RMSE, histogram.
EvalReport evaluate_model(ModelKind kind, const FeaturizedDataset& data, const ModelSet& models,
                          std::string split_tag, const EvalConfig& cfg = {},
                          std::optional<std::pair<double, double>> hist_range = std::nullopt);

/// Matched empirical quantiles (percentiles 1..99, linear interpolation).
struct QqTable {
    std::vector<int> percentiles;
    std::vector<double> quantiles_a;
    std::vector<double> quantiles_b;
};

QqTable qq_export(std::span<const double> sample_a, std::span<const double> sample_b);

void write_report_csv(const std::filesystem::path& path, const EvalReport& report);
void write_qq_csv(const std::filesystem::path& path, const QqTable& table);

}  // namespace optpred
