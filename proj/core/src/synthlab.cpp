#include "optpred/synthlab.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "optpred/csv.hpp"
#include "optpred/evaluation.hpp"
#include "optpred/pricing.hpp"
#include "optpred/rng.hpp"

namespace optpred {

std::vector<double> simulate_gbm(const SynthScenario& scn) {
    if (scn.path_days < 2) throw std::invalid_argument("simulate_gbm: path too short");
    if (scn.sigma < 0.0) throw std::invalid_argument("simulate_gbm: sigma must be >= 0");

    Rng rng(scn.seed);
    const double dt = scn.delta();
    const double drift = (scn.mu - 0.5 * scn.sigma * scn.sigma) * dt;
    const double diffusion = scn.sigma * std::sqrt(dt);

    std::vector<double> path(static_cast<std::size_t>(scn.path_days));
    path[0] = scn.spot0;
    for (std::size_t k = 1; k < path.size(); ++k)
        path[k] = path[k - 1] * std::exp(drift + diffusion * rng.normal());
    return path;
}

std::vector<CleanOptionQuote> label_options(std::span<const double> path,
                                            const SynthScenario& scn) {
    constexpr std::size_t kFirstDay = 20;  // needs a 20-close window and a prior day
    if (path.size() < kFirstDay + 1)
        throw std::invalid_argument("label_options: path needs at least 21 days");

    std::vector<CleanOptionQuote> quotes;
    const int stride = std::max(1, scn.day_stride);
    for (std::size_t day = kFirstDay; day < path.size();
         day += static_cast<std::size_t>(stride)) {
        const double spot = path[day];
        const double prev_spot = path[day - 1];
        const Date date = add_days(scn.base_date, static_cast<int>(day));
        for (const int ttm : scn.ttm_days) {
            // divide rather than multiply by delta: matches the featurizer's
            // ttm_days / year_days convention bit for bit
            const double t_years = static_cast<double>(ttm) / 255.0;
            const double t_prev_years = static_cast<double>(ttm + 1) / 255.0;
            for (const double m : scn.strike_moneyness) {
                const double strike = m * spot;
                CleanOptionQuote q;
                q.symbol = scn.symbol;
                q.date = date;
                q.expiry = add_days(date, ttm);
                q.strike = strike;
                q.spot = spot;
                q.option_close = bsm_call(spot, strike, scn.rate, scn.sigma, t_years);
                q.prev_option_close =
                    bsm_call(prev_spot, strike, scn.rate, scn.sigma, t_prev_years);
                q.prev_spot = prev_spot;
                q.ttm_days = ttm;
                q.moneyness = m;
                quotes.push_back(std::move(q));
            }
        }
    }
    return quotes;
}

FeaturizeConfig synth_featurize_config() {
    FeaturizeConfig cfg;
    cfg.year_days = 255.0;  // synthetic calendar: every step is a trading day
    cfg.periods_per_year = 255.0;
    return cfg;
}

FeaturizedDataset make_synth_dataset(const SynthScenario& scn) {
    const auto path = simulate_gbm(scn);
    const auto quotes = label_options(path, scn);

    std::map<std::string, UnderlyingSeries> underlying;
    auto& series = underlying[scn.symbol];
    for (std::size_t day = 0; day < path.size(); ++day)
        series.add(add_days(scn.base_date, static_cast<int>(day)), path[day]);

    RateProvider rates;
    rates.constant_rate = scn.rate;
    return featurize(quotes, underlying, rates, synth_featurize_config());
}

namespace {

std::vector<double> sigma_range(double lo, double hi) {
    std::vector<double> sigmas;
    for (double s = lo; s <= hi + 1e-9; s += 0.01) sigmas.push_back(s);
    return sigmas;
}

// stream ids keep training / calibration / evaluation paths decorrelated
constexpr std::uint64_t kTrainStream = 1000;
constexpr std::uint64_t kCalibStream = 2000;
constexpr std::uint64_t kEvalStream = 3000;

FeaturizedDataset pooled_dataset(std::span<const double> sigmas, std::uint64_t master_seed,
                                 std::uint64_t stream_base, const SynthScenario& proto) {
    FeaturizedDataset pool;
    for (std::size_t i = 0; i < sigmas.size(); ++i) {
        SynthScenario scn = proto;
        scn.sigma = sigmas[i];
        scn.seed = derive_seed(master_seed, stream_base + i);
        char buf[32];
        std::snprintf(buf, sizeof buf, "%s%04.1f", proto.symbol.c_str(), sigmas[i] * 100.0);
        scn.symbol = buf;
        auto data = make_synth_dataset(scn);
        pool.rows.insert(pool.rows.end(), data.rows.begin(), data.rows.end());
    }
    return pool;
}

}  // namespace

SynthModelBundle train_synth_bundle(const std::string& name, double sigma_lo, double sigma_hi,
                                    std::uint64_t master_seed, const GbtConfig& gbt_cfg,
                                    const SynthScenario& proto) {
    const auto sigmas = sigma_range(sigma_lo, sigma_hi);
    const FeaturizedDataset pool = pooled_dataset(sigmas, master_seed, kTrainStream, proto);
    if (pool.rows.empty()) throw std::runtime_error("train_synth_bundle: empty training pool");

    SynthModelBundle bundle;
    bundle.name = name;

    const Matrix x = pool.feature_matrix();
    bundle.hh = fit(x, pool.hh_targets(), gbt_cfg);

    std::vector<std::size_t> ds_rows;
    const auto ds_y = pool.ds_targets(&ds_rows);
    Matrix ds_x(ds_rows.size(), FeatureVector::kCount);
    for (std::size_t i = 0; i < ds_rows.size(); ++i) {
        const auto flat = pool.rows[ds_rows[i]].features.flatten();
        std::copy(flat.begin(), flat.end(), ds_x.data.begin() + static_cast<long>(i * ds_x.cols));
    }
    bundle.ds = fit(ds_x, ds_y, gbt_cfg);
    bundle.ds_row_indices = std::move(ds_rows);

    std::vector<double> vols;
    vols.reserve(pool.rows.size());
    for (const auto& r : pool.rows) vols.push_back(r.hist_vol);
    bundle.ensemble.sigma0 = sigma0_of_training_set(vols);
    return bundle;
}

GridResult calibrate_synth_bundle(SynthModelBundle& bundle, std::span<const double> calib_sigmas,
                                  std::uint64_t master_seed, const SynthScenario& proto) {
    std::vector<double> sigmas(calib_sigmas.begin(), calib_sigmas.end());
    const FeaturizedDataset pool = pooled_dataset(sigmas, master_seed, kCalibStream, proto);

    ModelSet models;
    models.hh = &bundle.hh;
    models.ds = &bundle.ds;
    const auto hh_pred = predict_normalized(ModelKind::Hh, pool, models);
    const auto ds_pred = predict_normalized(ModelKind::Ds, pool, models);
    const auto actual = pool.hh_targets();

    std::vector<double> hh_v, ds_v, dsq_v, act_v;
    for (std::size_t i = 0; i < pool.rows.size(); ++i) {
        if (!pool.rows[i].ds_valid) continue;
        hh_v.push_back(hh_pred[i]);
        ds_v.push_back(ds_pred[i]);
        dsq_v.push_back(dsq(pool.rows[i].hist_vol, bundle.ensemble.sigma0));
        act_v.push_back(actual[i]);
    }

    GridResult grid = calibrate(GridSpec{}, hh_v, ds_v, dsq_v, act_v);
    bundle.ensemble.lambda1 = grid.lambda1;
    bundle.ensemble.lambda2 = grid.lambda2;
    bundle.has_ensemble = true;
    return grid;
}

namespace {

std::vector<CurvePoint> run_curves(std::span<const SynthModelBundle> bundles,
                                   std::span<const double> sigma_grid, std::uint64_t master_seed,
                                   const SynthScenario& proto, bool with_ensemble) {
    std::vector<CurvePoint> curves;
    for (std::size_t si = 0; si < sigma_grid.size(); ++si) {
        SynthScenario scn = proto;
        scn.sigma = sigma_grid[si];
        scn.seed = derive_seed(master_seed, kEvalStream + si);
        const FeaturizedDataset data = make_synth_dataset(scn);

        for (const auto& bundle : bundles) {
            ModelSet models;
            models.hh = &bundle.hh;
            models.ds = &bundle.ds;
            if (with_ensemble) {
                if (!bundle.has_ensemble)
                    throw std::invalid_argument("experiment 2 needs calibrated ensembles");
                models.ensemble = bundle.ensemble;
            }

            const auto hh_report = evaluate_model(ModelKind::Hh, data, models, "synth");
            const auto ds_report = evaluate_model(ModelKind::Ds, data, models, "synth");
            curves.push_back({"hh", bundle.name, scn.sigma, hh_report.rmse_value});
            curves.push_back({"ds", bundle.name, scn.sigma, ds_report.rmse_value});
            if (with_ensemble) {
                const auto e_report = evaluate_model(ModelKind::Ensemble, data, models, "synth");
                curves.push_back({"ensemble", bundle.name, scn.sigma, e_report.rmse_value});
            }
        }
    }
    return curves;
}

}  // namespace

std::vector<CurvePoint> run_experiment_1(std::span<const SynthModelBundle> bundles,
                                         std::span<const double> sigma_grid,
                                         std::uint64_t master_seed, const SynthScenario& proto) {
    return run_curves(bundles, sigma_grid, master_seed, proto, false);
}

std::vector<CurvePoint> run_experiment_2(std::span<const SynthModelBundle> bundles,
                                         std::span<const double> sigma_grid,
                                         std::uint64_t master_seed, const SynthScenario& proto) {
    return run_curves(bundles, sigma_grid, master_seed, proto, true);
}

void write_curves_csv(const std::filesystem::path& path, std::span<const CurvePoint> curves) {
    CsvWriter out(path);
    out.raw_line("approach,training_set,sigma,rmse");
    for (const auto& c : curves)
        out.row({c.approach, c.training_set, fmt_double(c.sigma), fmt_double(c.rmse)});
}

}  // namespace optpred
