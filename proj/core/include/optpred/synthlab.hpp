#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "optpred/dataset.hpp"
#include "optpred/ensemble.hpp"
#include "optpred/gbt.hpp"
#include "optpred/ingest.hpp"

namespace optpred {

/// One synthetic market: a GBM path plus BSM-labeled near-ATM call quotes.
/// The synthetic calendar has one quote per path step, so TTM year fractions
/// use the same 255-day clock as the returns.
struct SynthScenario {
    double mu = 0.1;
    double sigma = 0.2;
    int path_days = 520;
    double rate = 0.05;
    std::vector<int> ttm_days = {10, 25, 40};
    std::vector<double> strike_moneyness = {0.96, 0.98, 1.00, 1.02, 1.04};
    std::uint64_t seed = 0;
    double spot0 = 100.0;
    std::string symbol = "SYN";
    Date base_date{std::chrono::year{2021}, std::chrono::month{1}, std::chrono::day{1}};
    int day_stride = 1;  // label every k-th quote day

    double delta() const { return 1.0 / 255.0; }
};

/// Exact-discretization GBM path of path_days daily closes:
///   S(k+1) = S(k) exp((mu - sigma^2/2) delta + sigma sqrt(delta) Z_k).
std::vector<double> simulate_gbm(const SynthScenario& scn);

/// BSM-labeled quotes for every labelable day (>= 21st), maturity and strike
/// on the grid. The previous-day close is the BSM price at the prior spot
/// with one more day to maturity (same expiry date, same strike).
std::vector<CleanOptionQuote> label_options(std::span<const double> path,
                                            const SynthScenario& scn);

/// Featurize config matching the synthetic calendar (255-day year).
FeaturizeConfig synth_featurize_config();

/// simulate + label + featurize in one step.
FeaturizedDataset make_synth_dataset(const SynthScenario& scn);

/// A trained pair of models (plus optional ensemble params) with a label,
/// e.g. one per synthetic training pool.
struct SynthModelBundle {
    std::string name;
    TrainedModel hh;
    TrainedModel ds;
    std::vector<std::size_t> ds_row_indices;  // rows used for DS training
    EnsembleParams ensemble;
    bool has_ensemble = false;
};

/// Trains HH and DS boosters on a pool of scenarios with sigma in
/// [sigma_lo, sigma_hi] (inclusive, 1% steps).
SynthModelBundle train_synth_bundle(const std::string& name, double sigma_lo, double sigma_hi,
                                    std::uint64_t master_seed, const GbtConfig& gbt_cfg,
                                    const SynthScenario& proto = {});

/// Calibrates (lambda1, lambda2) for a bundle on a calibration pool of
/// scenarios spanning calib_sigmas, with RNG streams disjoint from both
/// training and evaluation.
GridResult calibrate_synth_bundle(SynthModelBundle& bundle, std::span<const double> calib_sigmas,
                                  std::uint64_t master_seed, const SynthScenario& proto = {});

struct CurvePoint {
    std::string approach;      // hh / ds / ensemble
    std::string training_set;  // bundle name
    double sigma = 0.0;
    double rmse = 0.0;
};

/// Experiment 1: HH and DS RMSE curves over the sigma grid for every bundle.
std::vector<CurvePoint> run_experiment_1(std::span<const SynthModelBundle> bundles,
                                         std::span<const double> sigma_grid,
                                         std::uint64_t master_seed,
                                         const SynthScenario& proto = {});

/// Experiment 2: HH, DS and ensemble curves (bundles need calibrated params).
std::vector<CurvePoint> run_experiment_2(std::span<const SynthModelBundle> bundles,
                                         std::span<const double> sigma_grid,
                                         std::uint64_t master_seed,
                                         const SynthScenario& proto = {});

void write_curves_csv(const std::filesystem::path& path, std::span<const CurvePoint> curves);

}  // namespace optpred
