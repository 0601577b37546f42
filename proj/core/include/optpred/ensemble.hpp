#pragma once

#include <span>
#include <vector>

namespace optpred {

/// Domain shift quotient |sigma_i - sigma0| / sigma0.
double dsq(double sigma_i, double sigma0);

struct EnsembleParams {
    double lambda1 = 0.0;
    double lambda2 = 0.0;
    double sigma0 = 0.0;  // training-set average historical vol
};

/// Weight ratio w = lambda1 * dsq^lambda2 given to the DS prediction,
/// with 0^0 defined as 1 so lambda2 = 0 yields a constant-weight blend.
double blend_weight(double dsq_value, double lambda1, double lambda2);

/// Convex combination (P_HH + w P_DS) / (1 + w); exactly P_HH when w == 0.
double blend(double p_hh, double p_ds, double dsq_value, const EnsembleParams& params);

struct GridSpec {
    double lo = 0.0;
    double hi = 5.0;
    double step = 0.1;

    std::vector<double> axis() const;
};

struct GridResult {
    std::vector<double> lambda1_axis;
    std::vector<double> lambda2_axis;
    std::vector<std::vector<double>> rmse_surface;  // [i_lambda1][j_lambda2]
    double lambda1 = 0.0;
    double lambda2 = 0.0;
    double rmse_min = 0.0;
};

/// Least-squares grid calibration of (lambda1, lambda2): RMSE of the blended
/// predictions against true targets at every grid point, all on the
/// normalized-price scale. Ties break to the lowest lambda1, then lambda2.
GridResult calibrate(const GridSpec& spec, std::span<const double> hh_preds,
                     std::span<const double> ds_preds, std::span<const double> dsq_values,
                     std::span<const double> true_targets);

/// Arithmetic mean of the per-row historical vols of the training set.
double sigma0_of_training_set(std::span<const double> hist_vols);

}  // namespace optpred
