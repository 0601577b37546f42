#pragma once

#include <span>
#include <utility>
#include <vector>

namespace optpred {

/// Standard normal CDF, erfc-based; absolute error well below 1e-12.
double norm_cdf(double x);

struct BsmInputs {
    double spot = 0.0;       // s > 0
    double strike = 0.0;     // K >= 0
    double rate = 0.0;       // continuously compounded, per annum
    double vol = 0.0;        // sigma >= 0, per annum
    double ttm_years = 0.0;  // T >= 0
};

/// European call value under Black-Scholes-Merton.
/// sigma*sqrt(T) == 0 degenerates to the discounted intrinsic value.
double bsm_call(const BsmInputs& in);

inline double bsm_call(double spot, double strike, double rate, double vol, double ttm_years) {
    return bsm_call(BsmInputs{spot, strike, rate, vol, ttm_years});
}

/// Closed-form near-ATM implied-volatility approximation:
///   IV ~ sqrt(2*pi/T) * ( C / (s*(1+p*)/2) - (1-p*)/(1+p*) ),  p* = p*exp(-r*T).
/// May return a negative value for prices below the formula's affine floor;
/// callers decide how to treat that.
double bharadia_iv(double call_price, double spot, double moneyness, double ttm_years,
                   double rate);

struct HestonVolParams {
    double kappa = 0.0;        // mean-reversion speed, > 0
    double theta = 0.0;        // long-run variance, > 0
    double current_var = 0.0;  // sigma^2(t), > 0
    double xi = 0.0;           // vol-of-vol (does not enter the mean)
    double horizon = 0.0;      // T - t in years, > 0
};

/// Volatility scalar under CIR variance dynamics:
///   rho = sqrt( theta - (theta - sigma^2(t)) * (1 - exp(-kappa*tau)) / (kappa*tau) ).
/// Lies between sqrt(theta) and the current volatility.
double heston_rho(const HestonVolParams& p);

/// Relative-error study of the IV approximation across volatility pairs.
/// U(sigma) is the approximation applied to the BSM price with rho = sigma;
/// under constant-vol BSM it is spot-independent, so the study runs at s = 1
/// and undiscounted moneyness (p* = p).
struct ErrorStudyGrid {
    std::vector<double> sigma_axis;
    double ttm_years = 0.0;
    double moneyness = 0.0;
    std::vector<double> u_values;               // U per sigma
    std::vector<std::vector<double>> relative_error;  // [i][j], symmetric
    struct ScatterPoint {
        double ratio;  // max(sigma_i, sigma_j) / min(...)
        double error;
    };
    std::vector<ScatterPoint> scatter;  // i <= j pairs
    bool has_invalid_cells = false;     // both U <= 0 somewhere

    double max_error() const;
    /// Max error over cells with both sigmas >= vol_floor.
    double max_error_with_floor(double vol_floor) const;
    /// Max error over scatter points with ratio <= max_ratio.
    double max_error_with_ratio(double max_ratio) const;
};

ErrorStudyGrid approx_error_study(std::span<const double> sigma_axis, double ttm_years,
                                  double moneyness);

/// Inclusive axis lo, lo+step, ..., hi.
std::vector<double> make_sigma_axis(double lo, double hi, double step);

}  // namespace optpred
