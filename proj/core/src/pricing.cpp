#include "optpred/pricing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace optpred {

double norm_cdf(double x) {
    return 0.5 * std::erfc(-x * std::numbers::sqrt2_v<double> / 2.0);
}

double bsm_call(const BsmInputs& in) {
    const auto [s, k, r, sigma, t] = in;
    if (!(s > 0.0)) throw std::invalid_argument("bsm_call: spot must be positive");
    if (k < 0.0) throw std::invalid_argument("bsm_call: strike must be nonnegative");
    if (t < 0.0) throw std::invalid_argument("bsm_call: ttm must be nonnegative");
    if (sigma < 0.0) throw std::invalid_argument("bsm_call: vol must be nonnegative");

    const double df = std::exp(-r * t);
    if (k == 0.0) return s;
    const double vol_sqrt_t = sigma * std::sqrt(t);
    if (vol_sqrt_t == 0.0) return std::max(s - k * df, 0.0);

    const double d1 = (std::log(s / k) + (r + 0.5 * sigma * sigma) * t) / vol_sqrt_t;
    const double d2 = d1 - vol_sqrt_t;
    return s * norm_cdf(d1) - k * df * norm_cdf(d2);
}

double bharadia_iv(double call_price, double spot, double moneyness, double ttm_years,
                   double rate) {
    if (!(spot > 0.0)) throw std::domain_error("bharadia_iv: spot must be positive");
    if (!(ttm_years > 0.0)) throw std::domain_error("bharadia_iv: ttm must be positive");
    const double p_star = moneyness * std::exp(-rate * ttm_years);
    const double half_sum = 0.5 * (1.0 + p_star);
    return std::sqrt(2.0 * std::numbers::pi_v<double> / ttm_years) *
           (call_price / (spot * half_sum) - (1.0 - p_star) / (1.0 + p_star));
}

double heston_rho(const HestonVolParams& p) {
    if (!(p.kappa > 0.0)) throw std::invalid_argument("heston_rho: kappa must be positive");
    if (!(p.theta > 0.0)) throw std::invalid_argument("heston_rho: theta must be positive");
    if (!(p.current_var > 0.0))
        throw std::invalid_argument("heston_rho: current variance must be positive");
    if (!(p.horizon > 0.0)) throw std::invalid_argument("heston_rho: horizon must be positive");

    const double x = p.kappa * p.horizon;
    // (1 - e^{-x})/x; expm1 keeps the small-x limit exact to machine precision
    const double decay = x == 0.0 ? 1.0 : -std::expm1(-x) / x;
    const double mean_var = p.theta - (p.theta - p.current_var) * decay;
    return std::sqrt(mean_var);
}

namespace {

double approx_u(double sigma, double ttm_years, double moneyness) {
    const double price = bsm_call(1.0, moneyness, 0.0, sigma, ttm_years);
    return bharadia_iv(price, 1.0, moneyness, ttm_years, 0.0) / sigma;
}

}  // namespace

ErrorStudyGrid approx_error_study(std::span<const double> sigma_axis, double ttm_years,
                                  double moneyness) {
    if (sigma_axis.empty()) throw std::invalid_argument("approx_error_study: empty axis");
    for (double s : sigma_axis)
        if (!(s > 0.0)) throw std::invalid_argument("approx_error_study: sigma must be positive");

    ErrorStudyGrid grid;
    grid.sigma_axis.assign(sigma_axis.begin(), sigma_axis.end());
    grid.ttm_years = ttm_years;
    grid.moneyness = moneyness;

    const std::size_t n = sigma_axis.size();
    grid.u_values.resize(n);
    for (std::size_t i = 0; i < n; ++i)
        grid.u_values[i] = approx_u(sigma_axis[i], ttm_years, moneyness);

    grid.relative_error.assign(n, std::vector<double>(n, 0.0));
    grid.scatter.reserve(n * (n + 1) / 2);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const double u1 = grid.u_values[i];
            const double u2 = grid.u_values[j];
            const double denom = std::max(u1, u2);
            double err;
            if (denom <= 0.0) {
                err = std::numeric_limits<double>::quiet_NaN();
                grid.has_invalid_cells = true;
            } else {
                err = std::abs(u1 - u2) / denom;
            }
            grid.relative_error[i][j] = err;
            if (j >= i) {
                const double lo = std::min(sigma_axis[i], sigma_axis[j]);
                const double hi = std::max(sigma_axis[i], sigma_axis[j]);
                grid.scatter.push_back({hi / lo, err});
            }
        }
    }
    return grid;
}

double ErrorStudyGrid::max_error() const {
    double m = 0.0;
    for (const auto& row : relative_error)
        for (double e : row)
            if (e > m) m = e;
    return m;
}

double ErrorStudyGrid::max_error_with_floor(double vol_floor) const {
    double m = 0.0;
    for (std::size_t i = 0; i < sigma_axis.size(); ++i) {
        if (sigma_axis[i] < vol_floor) continue;
        for (std::size_t j = 0; j < sigma_axis.size(); ++j) {
            if (sigma_axis[j] < vol_floor) continue;
            if (relative_error[i][j] > m) m = relative_error[i][j];
        }
    }
    return m;
}

double ErrorStudyGrid::max_error_with_ratio(double max_ratio) const {
    double m = 0.0;
    for (const auto& pt : scatter)
        if (pt.ratio <= max_ratio && pt.error > m) m = pt.error;
    return m;
}

std::vector<double> make_sigma_axis(double lo, double hi, double step) {
    if (!(step > 0.0) || !(hi >= lo)) throw std::invalid_argument("bad sigma axis spec");
    std::vector<double> axis;
    const auto count = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
    axis.reserve(count);
    for (std::size_t k = 0; k < count; ++k) axis.push_back(lo + static_cast<double>(k) * step);
    return axis;
}

}  // namespace optpred
