#pragma once

namespace optpred {

/// Normalized price, 100 * C / S. Scale-free in (C, S).
double hh_target(double option_close, double spot);

/// Inverse of hh_target: S * target / 100.
double price_from_hh_target(double target_pct, double spot);

/// The common-representation target
///   U = (1/rho) sqrt(2 pi / T) ( C / (S (1+p*)/2) - (1-p*)/(1+p*) ),
/// computed as the implied-vol approximation divided by rho so the two agree
/// to the last bit. Throws std::domain_error for rho <= 0 or T <= 0.
double ds_target(double option_close, double spot, double moneyness, double ttm_years,
                 double rate, double rho);

/// Algebraic inverse of ds_target:
///   C = S ( rho (1+p*)/2 sqrt(T / 2 pi) U + (1-p*)/2 ).
double price_from_ds_target(double u, double spot, double moneyness, double ttm_years,
                            double rate, double rho);

}  // namespace optpred
