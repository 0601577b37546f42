#include "optpred/ensemble.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace optpred {

double dsq(double sigma_i, double sigma0) {
    if (!(sigma0 > 0.0)) throw std::domain_error("dsq: sigma0 must be positive");
    if (sigma_i < 0.0) throw std::domain_error("dsq: sigma_i must be nonnegative");
    return std::abs(sigma_i - sigma0) / sigma0;
}

double blend_weight(double dsq_value, double lambda1, double lambda2) {
    if (dsq_value < 0.0) throw std::domain_error("blend_weight: dsq must be nonnegative");
    if (lambda2 == 0.0) return lambda1;  // dsq^0 == 1, including dsq == 0
    return lambda1 * std::pow(dsq_value, lambda2);
}

double blend(double p_hh, double p_ds, double dsq_value, const EnsembleParams& params) {
    const double w = blend_weight(dsq_value, params.lambda1, params.lambda2);
    if (w == 0.0) return p_hh;
    if (std::isinf(w)) return p_ds;
    const double alpha = w / (1.0 + w);
    return p_hh + alpha * (p_ds - p_hh);
}

std::vector<double> GridSpec::axis() const {
    if (!(step > 0.0) || !(hi >= lo)) throw std::invalid_argument("bad lambda grid spec");
    const auto count = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
    std::vector<double> values;
    values.reserve(count);
    for (std::size_t k = 0; k < count; ++k) values.push_back(lo + static_cast<double>(k) * step);
    return values;
}

GridResult calibrate(const GridSpec& spec, std::span<const double> hh_preds,
                     std::span<const double> ds_preds, std::span<const double> dsq_values,
                     std::span<const double> true_targets) {
    const std::size_t n = true_targets.size();
    if (n == 0) throw std::invalid_argument("calibrate: empty sample");
    if (hh_preds.size() != n || ds_preds.size() != n || dsq_values.size() != n)
        throw std::invalid_argument("calibrate: input length mismatch");

    GridResult result;
    result.lambda1_axis = spec.axis();
    result.lambda2_axis = spec.axis();
    result.rmse_surface.assign(result.lambda1_axis.size(),
                               std::vector<double>(result.lambda2_axis.size(), 0.0));

    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < result.lambda1_axis.size(); ++i) {
        for (std::size_t j = 0; j < result.lambda2_axis.size(); ++j) {
            const EnsembleParams p{result.lambda1_axis[i], result.lambda2_axis[j], 1.0};
            double ss = 0.0;
            for (std::size_t k = 0; k < n; ++k) {
                const double e = true_targets[k] - blend(hh_preds[k], ds_preds[k], dsq_values[k], p);
                ss += e * e;
            }
            const double value = std::sqrt(ss / static_cast<double>(n));
            result.rmse_surface[i][j] = value;
            if (value < best) {
                best = value;
                result.lambda1 = result.lambda1_axis[i];
                result.lambda2 = result.lambda2_axis[j];
            }
        }
    }
    result.rmse_min = best;
    return result;
}

double sigma0_of_training_set(std::span<const double> hist_vols) {
    if (hist_vols.empty()) throw std::invalid_argument("sigma0: empty training set");
    double sum = 0.0;
    for (double v : hist_vols) sum += v;
    return sum / static_cast<double>(hist_vols.size());
}

}  // namespace optpred
