// optpred command-line tool: ingest -> featurize -> train -> calibrate ->
// evaluate -> report, plus the synthetic stress lab and the implied-vol
// approximation error study. Every subcommand writes into a run directory
// with a manifest (config echo, seeds, file hashes); outputs of a failed run
// are removed. Reruns with identical inputs and seeds are byte-identical.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "optpred/csv.hpp"
#include "optpred/dataset.hpp"
#include "optpred/ensemble.hpp"
#include "optpred/evaluation.hpp"
#include "optpred/features.hpp"
#include "optpred/gbt.hpp"
#include "optpred/ingest.hpp"
#include "optpred/manifest.hpp"
#include "optpred/pricing.hpp"
#include "optpred/rng.hpp"
#include "optpred/synthlab.hpp"
#include "optpred/targets.hpp"

namespace fs = std::filesystem;
using namespace optpred;

namespace {

Date parse_cli_date(const std::string& text) { return parse_date(text, DateFormat::Iso); }

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> items;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ','))
        if (auto t = trim(item); !t.empty()) items.emplace_back(t);
    return items;
}

std::vector<double> split_doubles(const std::string& text) {
    std::vector<double> values;
    for (const auto& item : split_list(text)) values.push_back(std::stod(item));
    return values;
}

struct IngestArgs {
    std::vector<std::string> inputs;
    std::string out_dir;
    std::string schema_file;
    std::string date_format = "dd-mon-yyyy";
    double band = 0.04;
    std::string ratio = "strike-over-spot";
    int ttm_min = 3;
    int ttm_max = 45;
};

ChainSchema load_schema(const IngestArgs& args) {
    ChainSchema schema;
    if (!args.schema_file.empty()) {
        std::ifstream in(args.schema_file);
        if (!in) throw std::runtime_error("cannot open schema file: " + args.schema_file);
        nlohmann::json j;
        in >> j;
        if (j.contains("symbol")) schema.symbol = j["symbol"];
        if (j.contains("date")) schema.date = j["date"];
        if (j.contains("expiry")) schema.expiry = j["expiry"];
        if (j.contains("option_type")) schema.option_type = j["option_type"];
        if (j.contains("strike")) schema.strike = j["strike"];
        if (j.contains("open")) schema.open = j["open"];
        if (j.contains("close")) schema.close = j["close"];
        if (j.contains("underlying")) schema.underlying = j["underlying"];
    }
    if (args.date_format == "iso")
        schema.date_format = DateFormat::Iso;
    else if (args.date_format == "dd-mon-yyyy")
        schema.date_format = DateFormat::DayMonYear;
    else
        throw std::runtime_error("unknown date format: " + args.date_format);
    return schema;
}

int run_ingest(const IngestArgs& args) {
    RunWriter run(args.out_dir);
    run.set_config("command", std::string("ingest"));
    run.set_config("moneyness_band", args.band);
    run.set_config("ratio", args.ratio);
    run.set_config("ttm_min", static_cast<std::int64_t>(args.ttm_min));
    run.set_config("ttm_max", static_cast<std::int64_t>(args.ttm_max));

    const ChainSchema schema = load_schema(args);
    FilterConfig cfg;
    cfg.moneyness_band = args.band;
    cfg.ttm_min_days = args.ttm_min;
    cfg.ttm_max_days = args.ttm_max;
    if (args.ratio == "spot-over-strike")
        cfg.ratio = MoneynessRatio::SpotOverStrike;
    else if (args.ratio != "strike-over-spot")
        throw std::runtime_error("unknown moneyness ratio: " + args.ratio);

    std::vector<RawOptionRow> rows;
    std::size_t bad_dates = 0;
    for (const auto& input : args.inputs) {
        run.add_input(input);
        ParseStats stats;
        auto file_rows = parse_chain_csv(input, schema, &stats);
        bad_dates += stats.bad_date_rows;
        rows.insert(rows.end(), std::make_move_iterator(file_rows.begin()),
                    std::make_move_iterator(file_rows.end()));
    }
    run.set_config("rows_parsed", static_cast<std::int64_t>(rows.size()));
    run.set_config("rows_bad_date", static_cast<std::int64_t>(bad_dates));

    const CleanResult result = clean_and_filter(rows, cfg);
    const auto underlying = UnderlyingSeries::from_rows(rows);

    const auto quotes_path = run.path("quotes.csv");
    write_quotes_csv(quotes_path, result.quotes);
    run.add_output(quotes_path);

    const auto underlying_path = run.path("underlying.csv");
    write_underlying_csv(underlying_path, underlying);
    run.add_output(underlying_path);

    const auto report_path = run.path("drop_report.txt");
    {
        std::ofstream out(report_path, std::ios::binary);
        out << result.report.to_string();
    }
    run.add_output(report_path);

    run.finalize();
    std::cout << result.report.to_string();
    std::cout << "wrote " << quotes_path.string() << "\n";
    return 0;
}

struct FeaturizeArgs {
    std::string quotes;
    std::string underlying;
    std::string extra_underlying;
    std::string out_dir;
    double rate = 0.05;
    std::string rates_csv;
    std::string train_end = "2019-08-31";
    std::string typical_end = "2019-12-31";
    std::string atypical_end = "2020-04-30";
    std::string window_end = "quote-date";
    double year_days = 365.0;
};

int run_featurize(const FeaturizeArgs& args) {
    RunWriter run(args.out_dir);
    run.set_config("command", std::string("featurize"));
    run.set_config("rate", args.rate);
    run.set_config("train_end", args.train_end);
    run.set_config("typical_end", args.typical_end);
    run.set_config("atypical_end", args.atypical_end);
    run.set_config("window_end", args.window_end);
    run.set_config("year_days", args.year_days);

    run.add_input(args.quotes);
    run.add_input(args.underlying);
    const auto quotes = read_quotes_csv(args.quotes);
    auto underlying = read_underlying_csv(args.underlying);
    if (!args.extra_underlying.empty()) {
        run.add_input(args.extra_underlying);
        for (auto& [symbol, series] : read_underlying_csv(args.extra_underlying))
            for (const auto& [day, close] : series.data())
                underlying[symbol].add(Date{std::chrono::sys_days{std::chrono::days{day}}},
                                       close);
    }

    RateProvider rates;
    rates.constant_rate = args.rate;
    if (!args.rates_csv.empty()) {
        run.add_input(args.rates_csv);
        rates = RateProvider::from_csv(args.rates_csv, args.rate);
    }

    FeaturizeConfig cfg;
    cfg.year_days = args.year_days;
    if (args.window_end == "prev-day")
        cfg.window_ends_on_quote_date = false;
    else if (args.window_end != "quote-date")
        throw std::runtime_error("unknown window end: " + args.window_end);

    SplitBoundaries bounds;
    bounds.train_end = parse_cli_date(args.train_end);
    bounds.typical_end = parse_cli_date(args.typical_end);
    bounds.atypical_end = parse_cli_date(args.atypical_end);
    const auto split = split_by_date(quotes, bounds);
    if (split.train.empty()) std::cerr << "warning: empty training partition\n";
    if (split.typical_test.empty()) std::cerr << "warning: empty typical partition\n";
    if (split.atypical_test.empty()) std::cerr << "warning: empty atypical partition\n";

    const struct {
        const char* name;
        const std::vector<CleanOptionQuote>* quotes;
    } parts[] = {{"features_train.csv", &split.train},
                 {"features_typical.csv", &split.typical_test},
                 {"features_atypical.csv", &split.atypical_test}};

    std::size_t skipped = 0;
    std::size_t kept = 0;
    for (const auto& part : parts) {
        FeaturizeStats stats;
        const auto data = featurize(*part.quotes, underlying, rates, cfg, &stats);
        skipped += stats.missing_window;
        kept += stats.kept;
        const auto path = run.path(part.name);
        write_featurized_csv(path, data);
        run.add_output(path);
    }
    run.set_config("quotes_missing_window", static_cast<std::int64_t>(skipped));
    run.finalize();
    std::cout << "featurized " << kept << " quotes (" << skipped
              << " without window coverage)\n";
    return 0;
}

struct TrainArgs {
    std::string features;
    std::string approach = "hh";
    std::string symbols;
    std::string out_dir;
    std::string model_name;
    GbtConfig gbt;
};

int run_train(const TrainArgs& args) {
    RunWriter run(args.out_dir);
    run.set_config("command", std::string("train"));
    run.set_config("approach", args.approach);
    run.set_config("symbols", args.symbols.empty() ? std::string("all") : args.symbols);
    run.set_config("n_estimators", static_cast<std::int64_t>(args.gbt.n_estimators));
    run.set_config("max_depth", static_cast<std::int64_t>(args.gbt.max_depth));
    run.set_config("learning_rate", args.gbt.learning_rate);
    run.set_config("min_child_weight", args.gbt.min_child_weight);
    run.set_config("colsample_bytree", args.gbt.colsample_bytree);
    run.set_config("subsample", args.gbt.subsample);
    run.set_config("seed", static_cast<std::int64_t>(args.gbt.seed));

    run.add_input(args.features);
    auto data = read_featurized_csv(args.features);
    const auto symbols = split_list(args.symbols);
    data = data.filter_symbols(symbols);
    if (data.rows.empty()) throw std::runtime_error("no training rows after symbol filter");

    TrainedModel model;
    if (args.approach == "hh") {
        model = fit(data.feature_matrix(), data.hh_targets(), args.gbt);
    } else if (args.approach == "ds") {
        std::vector<std::size_t> rows;
        const auto y = data.ds_targets(&rows);
        if (y.empty()) throw std::runtime_error("no DS-valid training rows");
        Matrix x(rows.size(), FeatureVector::kCount);
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const auto flat = data.rows[rows[i]].features.flatten();
            std::copy(flat.begin(), flat.end(), x.data.begin() + static_cast<long>(i * x.cols));
        }
        model = fit(x, y, args.gbt);
    } else {
        throw std::runtime_error("unknown approach: " + args.approach);
    }

    const std::string name =
        args.model_name.empty() ? "model_" + args.approach + ".json" : args.model_name;
    const auto path = run.path(name);
    save_model(model, path);
    run.add_output(path);
    run.finalize();
    std::cout << "trained " << args.approach << " model on " << data.rows.size() << " rows -> "
              << path.string() << "\n";
    return 0;
}

struct CalibrateArgs {
    std::string hh_model;
    std::string ds_model;
    std::string train_features;
    std::string sample_features;
    std::string mode = "train-tail";
    double tail_fraction = 0.2;
    std::string out_dir;
    double grid_max = 5.0;
    double grid_step = 0.1;
    bool no_floor = false;
};

int run_calibrate(const CalibrateArgs& args) {
    RunWriter run(args.out_dir);
    run.set_config("command", std::string("calibrate-ensemble"));
    run.set_config("mode", args.mode);
    run.set_config("tail_fraction", args.tail_fraction);
    run.set_config("grid_max", args.grid_max);
    run.set_config("grid_step", args.grid_step);

    run.add_input(args.hh_model);
    run.add_input(args.ds_model);
    run.add_input(args.train_features);
    const auto hh_model = load_model(args.hh_model);
    const auto ds_model = load_model(args.ds_model);
    const auto train = read_featurized_csv(args.train_features);
    if (train.rows.empty()) throw std::runtime_error("empty training features");

    std::vector<double> vols;
    vols.reserve(train.rows.size());
    for (const auto& r : train.rows) vols.push_back(r.hist_vol);
    const double sigma0 = sigma0_of_training_set(vols);

    FeaturizedDataset sample;
    if (args.mode == "train-tail") {
        // held-out tail of the (date-sorted) training set avoids test leakage
        auto rows = train.rows;
        std::stable_sort(rows.begin(), rows.end(), [](const FeatureRow& a, const FeatureRow& b) {
            return to_days(a.quote.date) < to_days(b.quote.date);
        });
        const auto keep = static_cast<std::size_t>(
            std::llround(args.tail_fraction * static_cast<double>(rows.size())));
        const std::size_t start = rows.size() - std::max<std::size_t>(1, keep);
        sample.rows.assign(rows.begin() + static_cast<long>(start), rows.end());
    } else if (args.mode == "sample-file") {
        // paper-faithful: calibrate on an explicit sample (e.g. test data)
        if (args.sample_features.empty())
            throw std::runtime_error("mode sample-file needs --sample-features");
        run.add_input(args.sample_features);
        sample = read_featurized_csv(args.sample_features);
    } else {
        throw std::runtime_error("unknown calibration mode: " + args.mode);
    }
    if (sample.rows.empty()) throw std::runtime_error("empty calibration sample");

    ModelSet models;
    models.hh = &hh_model;
    models.ds = &ds_model;
    EvalConfig eval_cfg;
    eval_cfg.floor_prices_at_zero = !args.no_floor;
    const auto hh_pred = predict_normalized(ModelKind::Hh, sample, models, eval_cfg);
    const auto ds_pred = predict_normalized(ModelKind::Ds, sample, models, eval_cfg);

    std::vector<double> hh_v, ds_v, dsq_v, truth;
    for (std::size_t i = 0; i < sample.rows.size(); ++i) {
        if (!sample.rows[i].ds_valid) continue;
        hh_v.push_back(hh_pred[i]);
        ds_v.push_back(ds_pred[i]);
        dsq_v.push_back(dsq(sample.rows[i].hist_vol, sigma0));
        truth.push_back(sample.rows[i].hh);
    }

    GridSpec spec;
    spec.hi = args.grid_max;
    spec.step = args.grid_step;
    const GridResult grid = calibrate(spec, hh_v, ds_v, dsq_v, truth);

    nlohmann::json j;
    j["format"] = "optpred-ensemble";
    j["version"] = 1;
    j["lambda1"] = grid.lambda1;
    j["lambda2"] = grid.lambda2;
    j["sigma0"] = sigma0;
    j["rmse_min"] = grid.rmse_min;
    j["calibration_rows"] = truth.size();
    const auto params_path = run.path("ensemble.json");
    {
        std::ofstream out(params_path, std::ios::binary);
        out << j.dump(2) << '\n';
    }
    run.add_output(params_path);

    const auto surface_path = run.path("grid_surface.csv");
    {
        CsvWriter out(surface_path);
        out.raw_line("lambda1,lambda2,rmse");
        for (std::size_t i = 0; i < grid.lambda1_axis.size(); ++i)
            for (std::size_t k = 0; k < grid.lambda2_axis.size(); ++k)
                out.row({fmt_double(grid.lambda1_axis[i]), fmt_double(grid.lambda2_axis[k]),
                         fmt_double(grid.rmse_surface[i][k])});
    }
    run.add_output(surface_path);

    run.finalize();
    std::cout << "calibrated lambda = (" << grid.lambda1 << ", " << grid.lambda2
              << "), sigma0 = " << sigma0 << ", rmse = " << grid.rmse_min << "\n";
    return 0;
}

EnsembleParams load_ensemble_params(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open ensemble params: " + path);
    nlohmann::json j;
    in >> j;
    if (!j.contains("format") || j["format"] != "optpred-ensemble")
        throw std::runtime_error("not an ensemble params file: " + path);
    EnsembleParams p;
    p.lambda1 = j.at("lambda1").get<double>();
    p.lambda2 = j.at("lambda2").get<double>();
    p.sigma0 = j.at("sigma0").get<double>();
    return p;
}

struct EvaluateArgs {
    std::string features;
    std::string split = "typical";
    std::string model = "hh";
    std::string model_id;  // defaults to the model kind
    std::string symbols;
    std::string hh_model;
    std::string ds_model;
    std::string ensemble_params;
    std::string out_dir;
    bool no_floor = false;
};

int run_evaluate(const EvaluateArgs& args) {
    RunWriter run(args.out_dir);
    run.set_config("command", std::string("evaluate"));
    run.set_config("model", args.model);
    run.set_config("split", args.split);

    run.add_input(args.features);
    auto data = read_featurized_csv(args.features);
    data = data.filter_symbols(split_list(args.symbols));
    if (data.rows.empty()) throw std::runtime_error("empty evaluation features");

    ModelKind kind;
    if (args.model == "hh")
        kind = ModelKind::Hh;
    else if (args.model == "ds")
        kind = ModelKind::Ds;
    else if (args.model == "ensemble")
        kind = ModelKind::Ensemble;
    else if (args.model == "bsm")
        kind = ModelKind::BsmBenchmark;
    else
        throw std::runtime_error("unknown model kind: " + args.model);

    TrainedModel hh_model, ds_model;
    ModelSet models;
    if (kind == ModelKind::Hh || kind == ModelKind::Ensemble) {
        if (args.hh_model.empty()) throw std::runtime_error("--hh-model required");
        run.add_input(args.hh_model);
        hh_model = load_model(args.hh_model);
        models.hh = &hh_model;
    }
    if (kind == ModelKind::Ds || kind == ModelKind::Ensemble) {
        if (args.ds_model.empty()) throw std::runtime_error("--ds-model required");
        run.add_input(args.ds_model);
        ds_model = load_model(args.ds_model);
        models.ds = &ds_model;
    }
    if (kind == ModelKind::Ensemble) {
        if (args.ensemble_params.empty()) throw std::runtime_error("--ensemble-params required");
        run.add_input(args.ensemble_params);
        models.ensemble = load_ensemble_params(args.ensemble_params);
    }

    EvalConfig cfg;
    cfg.floor_prices_at_zero = !args.no_floor;
    auto report = evaluate_model(kind, data, models, args.split, cfg);
    const std::string model_id = args.model_id.empty() ? args.model : args.model_id;
    report.model_id = model_id;

    const std::string stem = "eval_" + model_id + "_" + args.split;
    const auto report_path = run.path(stem + ".csv");
    write_report_csv(report_path, report);
    run.add_output(report_path);

    nlohmann::json j;
    j["model"] = model_id;
    j["kind"] = args.model;
    j["split"] = args.split;
    j["rmse"] = report.rmse_value;
    j["n"] = report.n;
    const auto summary_path = run.path(stem + ".summary.json");
    {
        std::ofstream out(summary_path, std::ios::binary);
        out << j.dump(2) << '\n';
    }
    run.add_output(summary_path);

    run.finalize();
    std::cout << args.model << " on " << args.split << ": rmse = " << report.rmse_value
              << " over " << report.n << " rows\n";
    return 0;
}

struct ReportArgs {
    std::string run_dir;
    std::string underlying;
    std::string train_end = "2019-08-31";
    std::string typical_end = "2019-12-31";
    std::string atypical_end = "2020-04-30";
    bool force_qq = false;
};

int run_report(const ReportArgs& args) {
    // collect evaluation summaries scattered in the run directory
    struct Summary {
        std::string model, split;
        double rmse;
        std::size_t n;
    };
    std::vector<Summary> summaries;
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(args.run_dir)) {
        const auto name = entry.path().filename().string();
        if (name.size() > 13 && name.substr(name.size() - 13) == ".summary.json")
            files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& file : files) {
        std::ifstream in(file);
        nlohmann::json j;
        in >> j;
        summaries.push_back({j.at("model").get<std::string>(),
                             j.at("split").get<std::string>(), j.at("rmse").get<double>(),
                             j.at("n").get<std::size_t>()});
    }
    if (summaries.empty())
        throw std::runtime_error("no evaluation summaries in " + args.run_dir);

    const fs::path report_path = fs::path(args.run_dir) / "report.csv";
    {
        CsvWriter out(report_path);
        out.raw_line("model,split,rmse,n");
        for (const auto& s : summaries)
            out.row({s.model, s.split, fmt_double(s.rmse), std::to_string(s.n)});
    }

    // process guarantee: every learned model should beat the benchmark on at
    // least one split; otherwise emit the distribution diagnostic
    std::map<std::string, double> benchmark;  // split -> rmse
    for (const auto& s : summaries)
        if (s.model == "bsm") benchmark[s.split] = s.rmse;

    bool all_beat = true;
    std::set<std::string> learned;
    for (const auto& s : summaries)
        if (s.model != "bsm") learned.insert(s.model);
    for (const auto& model : learned) {
        bool beats = false;
        for (const auto& s : summaries) {
            if (s.model != model) continue;
            const auto it = benchmark.find(s.split);
            if (it != benchmark.end() && s.rmse < it->second) beats = true;
        }
        if (!beats) all_beat = false;
    }

    if ((!all_beat || args.force_qq) && !args.underlying.empty()) {
        const auto underlying = read_underlying_csv(args.underlying);
        SplitBoundaries bounds;
        bounds.train_end = parse_cli_date(args.train_end);
        bounds.typical_end = parse_cli_date(args.typical_end);
        bounds.atypical_end = parse_cli_date(args.atypical_end);

        for (const auto& [symbol, series] : underlying) {
            std::vector<double> train_returns, typical_returns, atypical_returns;
            double prev = 0.0;
            bool have_prev = false;
            for (const auto& [day, close] : series.data()) {
                if (have_prev) {
                    const double ret = std::log(close / prev);
                    const Date d{std::chrono::sys_days{std::chrono::days{day}}};
                    if (d <= bounds.train_end)
                        train_returns.push_back(ret);
                    else if (d <= bounds.typical_end)
                        typical_returns.push_back(ret);
                    else if (d <= bounds.atypical_end)
                        atypical_returns.push_back(ret);
                }
                prev = close;
                have_prev = true;
            }
            if (!train_returns.empty() && !typical_returns.empty())
                write_qq_csv(
                    fs::path(args.run_dir) / ("qq_" + symbol + "_train_vs_typical.csv"),
                    qq_export(train_returns, typical_returns));
            if (!train_returns.empty() && !atypical_returns.empty())
                write_qq_csv(
                    fs::path(args.run_dir) / ("qq_" + symbol + "_train_vs_atypical.csv"),
                    qq_export(train_returns, atypical_returns));
        }
        if (!all_beat)
            std::cout << "benchmark not beaten by every model; Q-Q diagnostics written\n";
    }

    std::cout << "report: " << report_path.string() << " (" << summaries.size()
              << " evaluations)\n";
    return 0;
}

struct SynthArgs {
    int experiment = 1;
    std::string out_dir;
    std::string bundles = "all";  // lowvol | highvol | pooled | all
    double sigma_min = 0.01;
    double sigma_max = 0.30;
    double sigma_step = 0.01;
    std::string calib_sigmas = "0.05,0.10,0.15,0.20,0.25";
    std::uint64_t seed = 20240901;
    int path_days = 520;
    int day_stride = 1;
    GbtConfig gbt;
};

int run_synth(const SynthArgs& args) {
    RunWriter run(args.out_dir);
    run.set_config("command", std::string("synth"));
    run.set_config("experiment", static_cast<std::int64_t>(args.experiment));
    run.set_config("bundles", args.bundles);
    run.set_config("seed", static_cast<std::int64_t>(args.seed));
    run.set_config("path_days", static_cast<std::int64_t>(args.path_days));
    run.set_config("day_stride", static_cast<std::int64_t>(args.day_stride));
    run.set_config("n_estimators", static_cast<std::int64_t>(args.gbt.n_estimators));
    run.set_config("sigma_min", args.sigma_min);
    run.set_config("sigma_max", args.sigma_max);
    run.set_config("sigma_step", args.sigma_step);

    SynthScenario proto;
    proto.path_days = args.path_days;
    proto.day_stride = args.day_stride;

    SynthArgs effective = args;
    effective.gbt.seed = derive_seed(args.seed, 1);  // booster stream off the master seed

    struct BundleSpec {
        const char* name;
        double lo, hi;
    };
    const std::vector<BundleSpec> all_specs = {
        {"lowvol", 0.08, 0.12}, {"highvol", 0.12, 0.16}, {"pooled", 0.08, 0.16}};
    std::vector<BundleSpec> specs;
    for (const auto& s : all_specs)
        if (args.bundles == "all" || args.bundles == s.name) specs.push_back(s);
    if (specs.empty()) throw std::runtime_error("unknown bundle selection: " + args.bundles);

    std::vector<SynthModelBundle> bundles;
    for (std::size_t i = 0; i < specs.size(); ++i) {
        auto bundle = train_synth_bundle(specs[i].name, specs[i].lo, specs[i].hi,
                                         derive_seed(args.seed, 10 + i), effective.gbt, proto);
        if (args.experiment == 2) {
            const auto calib = split_doubles(args.calib_sigmas);
            calibrate_synth_bundle(bundle, calib, derive_seed(args.seed, 20 + i), proto);
            run.set_config("lambda1_" + bundle.name, bundle.ensemble.lambda1);
            run.set_config("lambda2_" + bundle.name, bundle.ensemble.lambda2);
            run.set_config("sigma0_" + bundle.name, bundle.ensemble.sigma0);
        }
        bundles.push_back(std::move(bundle));
    }

    const auto grid = make_sigma_axis(args.sigma_min, args.sigma_max, args.sigma_step);
    const auto curves = args.experiment == 2
                            ? run_experiment_2(bundles, grid, derive_seed(args.seed, 30), proto)
                            : run_experiment_1(bundles, grid, derive_seed(args.seed, 30), proto);

    const auto curve_path =
        run.path("experiment" + std::to_string(args.experiment) + "_curves.csv");
    write_curves_csv(curve_path, curves);
    run.add_output(curve_path);
    run.finalize();
    std::cout << "wrote " << curve_path.string() << " (" << curves.size() << " points)\n";
    return 0;
}

struct ApproxErrorArgs {
    double t = 0.2;
    double p = 1.0;
    double sigma_min = 0.05;
    double sigma_max = 1.0;
    double step = 0.01;
    std::string out_dir;
};

int run_approx_error(const ApproxErrorArgs& args) {
    RunWriter run(args.out_dir);
    run.set_config("command", std::string("approx-error"));
    run.set_config("t", args.t);
    run.set_config("p", args.p);
    run.set_config("sigma_min", args.sigma_min);
    run.set_config("sigma_max", args.sigma_max);
    run.set_config("step", args.step);

    const auto axis = make_sigma_axis(args.sigma_min, args.sigma_max, args.step);
    const auto grid = approx_error_study(axis, args.t, args.p);

    const auto matrix_path = run.path("approx_error_matrix.csv");
    {
        CsvWriter out(matrix_path);
        out.raw_line("sigma1,sigma2,relative_error");
        for (std::size_t i = 0; i < axis.size(); ++i)
            for (std::size_t j = 0; j < axis.size(); ++j)
                out.row({fmt_double(axis[i]), fmt_double(axis[j]),
                         fmt_double(grid.relative_error[i][j])});
    }
    run.add_output(matrix_path);

    const auto scatter_path = run.path("approx_error_scatter.csv");
    {
        CsvWriter out(scatter_path);
        out.raw_line("ratio,relative_error");
        for (const auto& pt : grid.scatter)
            out.row({fmt_double(pt.ratio), fmt_double(pt.error)});
    }
    run.add_output(scatter_path);

    run.finalize();
    std::cout << "max error " << grid.max_error() << " over " << axis.size() << "x"
              << axis.size() << " grid\n";
    return 0;
}

void add_gbt_options(CLI::App* cmd, GbtConfig& cfg, bool with_seed = true) {
    cmd->add_option("--trees", cfg.n_estimators, "Boosting rounds");
    cmd->add_option("--depth", cfg.max_depth, "Maximum tree depth");
    cmd->add_option("--learning-rate", cfg.learning_rate, "Shrinkage");
    cmd->add_option("--min-child-weight", cfg.min_child_weight, "Minimum samples per child");
    cmd->add_option("--colsample", cfg.colsample_bytree, "Feature fraction per tree");
    cmd->add_option("--subsample", cfg.subsample, "Row fraction per tree");
    if (with_seed) cmd->add_option("--seed", cfg.seed, "RNG seed");
    cmd->add_option("--threads", cfg.n_threads, "Worker threads (results identical)");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"scale-free option price prediction pipeline"};
    app.require_subcommand(1);
    app.set_config("--config", "", "Config file (INI/TOML: [subcommand] key=value)");

    IngestArgs ingest_args;
    auto* ingest_cmd = app.add_subcommand("ingest", "Parse, clean and filter option-chain CSVs");
    ingest_cmd->add_option("--input", ingest_args.inputs, "Raw option-chain CSV(s)")
        ->required()
        ->check(CLI::ExistingFile);
    ingest_cmd->add_option("--out-dir", ingest_args.out_dir, "Run directory")->required();
    ingest_cmd->add_option("--schema", ingest_args.schema_file,
                           "JSON column-name map for the archive vintage");
    ingest_cmd->add_option("--date-format", ingest_args.date_format,
                           "dd-mon-yyyy (default) or iso");
    ingest_cmd->add_option("--band", ingest_args.band, "Moneyness band half-width");
    ingest_cmd->add_option("--ratio", ingest_args.ratio,
                           "strike-over-spot (default) or spot-over-strike");
    ingest_cmd->add_option("--ttm-min", ingest_args.ttm_min, "Minimum days to maturity");
    ingest_cmd->add_option("--ttm-max", ingest_args.ttm_max, "Maximum days to maturity");

    FeaturizeArgs feat_args;
    auto* feat_cmd = app.add_subcommand("featurize", "Build features and targets per split");
    feat_cmd->add_option("--quotes", feat_args.quotes, "Canonical quotes CSV")
        ->required()
        ->check(CLI::ExistingFile);
    feat_cmd->add_option("--underlying", feat_args.underlying, "Underlying close series CSV")
        ->required()
        ->check(CLI::ExistingFile);
    feat_cmd->add_option("--extra-underlying", feat_args.extra_underlying,
                         "Additional close history (pre-sample window coverage)");
    feat_cmd->add_option("--out-dir", feat_args.out_dir, "Run directory")->required();
    feat_cmd->add_option("--rate", feat_args.rate, "Constant risk-free rate");
    feat_cmd->add_option("--rates-csv", feat_args.rates_csv, "Dated rates CSV (date,rate)");
    feat_cmd->add_option("--train-end", feat_args.train_end, "Last training date (ISO)");
    feat_cmd->add_option("--typical-end", feat_args.typical_end, "Last typical-test date");
    feat_cmd->add_option("--atypical-end", feat_args.atypical_end, "Last atypical-test date");
    feat_cmd->add_option("--window-end", feat_args.window_end, "quote-date or prev-day");
    feat_cmd->add_option("--year-days", feat_args.year_days, "Days per year for TTM");

    TrainArgs train_args;
    auto* train_cmd = app.add_subcommand("train", "Fit a boosted-tree model");
    train_cmd->add_option("--features", train_args.features, "Featurized training CSV")
        ->required()
        ->check(CLI::ExistingFile);
    train_cmd->add_option("--approach", train_args.approach, "hh or ds")->required();
    train_cmd->add_option("--symbols", train_args.symbols,
                          "Comma-separated symbol filter (default: all)");
    train_cmd->add_option("--out-dir", train_args.out_dir, "Run directory")->required();
    train_cmd->add_option("--model-name", train_args.model_name, "Output model file name");
    add_gbt_options(train_cmd, train_args.gbt);

    CalibrateArgs calib_args;
    auto* calib_cmd =
        app.add_subcommand("calibrate-ensemble", "Grid-search the ensemble weights");
    calib_cmd->add_option("--hh-model", calib_args.hh_model, "HH model file")
        ->required()
        ->check(CLI::ExistingFile);
    calib_cmd->add_option("--ds-model", calib_args.ds_model, "DS model file")
        ->required()
        ->check(CLI::ExistingFile);
    calib_cmd->add_option("--train-features", calib_args.train_features,
                          "Training features (defines sigma0 and the default sample)")
        ->required()
        ->check(CLI::ExistingFile);
    calib_cmd->add_option("--sample-features", calib_args.sample_features,
                          "Calibration sample for mode sample-file");
    calib_cmd->add_option("--mode", calib_args.mode, "train-tail (default) or sample-file");
    calib_cmd->add_option("--tail-fraction", calib_args.tail_fraction,
                          "Training tail used in train-tail mode");
    calib_cmd->add_option("--out-dir", calib_args.out_dir, "Run directory")->required();
    calib_cmd->add_option("--grid-max", calib_args.grid_max, "Lambda grid upper bound");
    calib_cmd->add_option("--grid-step", calib_args.grid_step, "Lambda grid step");
    calib_cmd->add_flag("--no-floor", calib_args.no_floor, "Keep negative reconstructed prices");

    EvaluateArgs eval_args;
    auto* eval_cmd = app.add_subcommand("evaluate", "Evaluate a model on a featurized split");
    eval_cmd->add_option("--features", eval_args.features, "Featurized CSV")
        ->required()
        ->check(CLI::ExistingFile);
    eval_cmd->add_option("--split", eval_args.split, "Split tag for the report");
    eval_cmd->add_option("--model", eval_args.model, "hh, ds, ensemble, or bsm")->required();
    eval_cmd->add_option("--model-id", eval_args.model_id,
                         "Report label (default: the model kind)");
    eval_cmd->add_option("--symbols", eval_args.symbols,
                         "Comma-separated symbol filter for the evaluation rows");
    eval_cmd->add_option("--hh-model", eval_args.hh_model, "HH model file");
    eval_cmd->add_option("--ds-model", eval_args.ds_model, "DS model file");
    eval_cmd->add_option("--ensemble-params", eval_args.ensemble_params, "ensemble.json");
    eval_cmd->add_option("--out-dir", eval_args.out_dir, "Run directory")->required();
    eval_cmd->add_flag("--no-floor", eval_args.no_floor, "Keep negative reconstructed prices");

    ReportArgs report_args;
    auto* report_cmd = app.add_subcommand("report", "Combine evaluation summaries");
    report_cmd->add_option("--run-dir", report_args.run_dir, "Directory with eval summaries")
        ->required()
        ->check(CLI::ExistingDirectory);
    report_cmd->add_option("--underlying", report_args.underlying,
                           "Underlying CSV for Q-Q diagnostics");
    report_cmd->add_option("--train-end", report_args.train_end, "Last training date");
    report_cmd->add_option("--typical-end", report_args.typical_end, "Last typical date");
    report_cmd->add_option("--atypical-end", report_args.atypical_end, "Last atypical date");
    report_cmd->add_flag("--qq", report_args.force_qq, "Always write Q-Q exports");

    SynthArgs synth_args;
    auto* synth_cmd = app.add_subcommand("synth", "Synthetic domain-shift experiments");
    synth_cmd->add_option("--experiment", synth_args.experiment, "1 or 2")->required();
    synth_cmd->add_option("--out-dir", synth_args.out_dir, "Run directory")->required();
    synth_cmd->add_option("--bundle", synth_args.bundles, "lowvol, highvol, pooled, or all");
    synth_cmd->add_option("--sigma-min", synth_args.sigma_min, "Evaluation grid start");
    synth_cmd->add_option("--sigma-max", synth_args.sigma_max, "Evaluation grid end");
    synth_cmd->add_option("--sigma-step", synth_args.sigma_step, "Evaluation grid step");
    synth_cmd->add_option("--calib-sigmas", synth_args.calib_sigmas,
                          "Calibration sigmas for experiment 2");
    synth_cmd->add_option("--seed", synth_args.seed, "Master seed");
    synth_cmd->add_option("--path-days", synth_args.path_days, "Days per simulated path");
    synth_cmd->add_option("--day-stride", synth_args.day_stride, "Label every k-th day");
    add_gbt_options(synth_cmd, synth_args.gbt, /*with_seed=*/false);

    ApproxErrorArgs approx_args;
    auto* approx_cmd =
        app.add_subcommand("approx-error", "Implied-vol approximation error study");
    approx_cmd->add_option("--t", approx_args.t, "Time to maturity in years");
    approx_cmd->add_option("--p", approx_args.p, "Moneyness");
    approx_cmd->add_option("--sigma-min", approx_args.sigma_min, "Axis start");
    approx_cmd->add_option("--sigma-max", approx_args.sigma_max, "Axis end");
    approx_cmd->add_option("--step", approx_args.step, "Axis step");
    approx_cmd->add_option("--out-dir", approx_args.out_dir, "Run directory")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (ingest_cmd->parsed()) return run_ingest(ingest_args);
        if (feat_cmd->parsed()) return run_featurize(feat_args);
        if (train_cmd->parsed()) return run_train(train_args);
        if (calib_cmd->parsed()) return run_calibrate(calib_args);
        if (eval_cmd->parsed()) return run_evaluate(eval_args);
        if (report_cmd->parsed()) return run_report(report_args);
        if (synth_cmd->parsed()) return run_synth(synth_args);
        if (approx_cmd->parsed()) return run_approx_error(approx_args);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
