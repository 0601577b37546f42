#include "optpred/targets.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "optpred/pricing.hpp"

namespace optpred {

double hh_target(double option_close, double spot) {
    if (!(spot > 0.0)) throw std::domain_error("hh_target: spot must be positive");
    if (option_close < 0.0) throw std::domain_error("hh_target: option price must be >= 0");
    return 100.0 * option_close / spot;
}

double price_from_hh_target(double target_pct, double spot) {
    if (!(spot > 0.0)) throw std::domain_error("price_from_hh_target: spot must be positive");
    return spot * target_pct / 100.0;
}

double ds_target(double option_close, double spot, double moneyness, double ttm_years,
                 double rate, double rho) {
    if (!(rho > 0.0)) throw std::domain_error("ds_target: rho must be positive");
    if (!(ttm_years > 0.0)) throw std::domain_error("ds_target: ttm must be positive");
    if (!(spot > 0.0)) throw std::domain_error("ds_target: spot must be positive");
    return bharadia_iv(option_close, spot, moneyness, ttm_years, rate) / rho;
}

double price_from_ds_target(double u, double spot, double moneyness, double ttm_years,
                            double rate, double rho) {
    if (!(rho > 0.0)) throw std::domain_error("price_from_ds_target: rho must be positive");
    if (!(ttm_years > 0.0)) throw std::domain_error("price_from_ds_target: ttm must be positive");
    if (!(spot > 0.0)) throw std::domain_error("price_from_ds_target: spot must be positive");
    const double p_star = moneyness * std::exp(-rate * ttm_years);
    return spot * (rho * 0.5 * (1.0 + p_star) *
                       std::sqrt(ttm_years / (2.0 * std::numbers::pi_v<double>)) * u +
                   0.5 * (1.0 - p_star));
}

}  // namespace optpred
