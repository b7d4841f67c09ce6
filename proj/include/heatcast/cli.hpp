#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "heatcast/analysis.hpp"
#include "heatcast/arima.hpp"
#include "heatcast/csv.hpp"
#include "heatcast/datagen.hpp"
#include "heatcast/parallel.hpp"
#include "heatcast/pipeline.hpp"
#include "heatcast/series.hpp"
#include "heatcast/svr.hpp"

namespace heatcast::cli {

namespace fs = std::filesystem;
using nlohmann::json;

// Exit codes: 0 all outputs written, 2 bad arguments or malformed inputs
// detected up front, 1 everything else.
inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

/// One JSON object per line on stdout; machine-readable progress mirror.
inline void emit(const json& event) { std::cout << event.dump() << "\n"; }

/**
 * Output-directory handle. Creates the directory, refuses to overwrite
 * existing files unless force is set, writes atomically, records every
 * artifact, and on failure leaves a manifest naming what was completed
 * before the error.
 */
class Outputs {
public:
    Outputs(fs::path dir, bool force) : dir_(std::move(dir)), force_(force) {
        std::error_code ec;
        fs::create_directories(dir_, ec);
        if (ec) {
            throw std::runtime_error("cannot create output directory '" + dir_.string() +
                                     "': " + ec.message());
        }
    }

    void write(const std::string& relpath, std::string_view content) {
        const fs::path target = dir_ / relpath;
        if (!force_ && fs::exists(target)) {
            throw std::runtime_error("refusing to overwrite '" + target.string() +
                                     "' (pass --force to allow)");
        }
        write_text_file(target, content);
        written_.push_back(relpath);
        emit({{"event", "artifact"}, {"path", relpath}});
    }

    void write_json(const std::string& relpath, const json& j) {
        write(relpath, j.dump(2) + "\n");
    }

    /// Best-effort failure record; never throws.
    void fail_manifest(const std::string& error) noexcept {
        try {
            const json j{{"status", "failed"},
                         {"error", error},
                         {"completed", written_}};
            write_text_file(dir_ / "manifest.json", j.dump(2) + "\n");
        } catch (...) {
        }
    }

    [[nodiscard]] const fs::path& dir() const { return dir_; }
    [[nodiscard]] const std::vector<std::string>& written() const { return written_; }

private:
    fs::path dir_;
    bool force_;
    std::vector<std::string> written_;
};

/// Shared command plumbing: run the body, and on failure report to stderr
/// and leave the failure manifest behind.
template <typename Body>
int guarded(Outputs& out, Body&& body) {
    try {
        body();
        return kExitOk;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        out.fail_manifest(e.what());
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        out.fail_manifest(e.what());
        return kExitRuntime;
    }
}

// ---------------------------------------------------------------------------
// Series loading helpers.
// ---------------------------------------------------------------------------

namespace detail {

inline std::int64_t ceil_to_hour(std::int64_t t) {
    const std::int64_t r = t % 3600;
    if (r == 0) return t;
    return r > 0 ? t + (3600 - r) : t - r;
}

inline std::int64_t floor_to_hour(std::int64_t t) {
    const std::int64_t r = t % 3600;
    if (r == 0) return t;
    return r > 0 ? t - r : t - r - 3600;
}

inline double sample_stddev(const std::vector<double>& xs, double mean) {
    if (xs.size() < 2) return 0.0;
    double s = 0.0;
    for (double x : xs) s += (x - mean) * (x - mean);
    return std::sqrt(s / static_cast<double>(xs.size() - 1));
}

inline double mean_of(const std::vector<double>& xs) {
    double s = 0.0;
    for (double x : xs) s += x;
    return s / static_cast<double>(xs.size());
}

inline std::string indexed_name(const char* prefix, std::size_t index,
                                const char* suffix) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%s%03zu%s", prefix, index, suffix);
    return buf;
}

inline std::string fixed(double v, int digits = 3) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
    return buf;
}

}  // namespace detail

/// Largest hourly grid covered by both raw series (no extrapolation).
inline std::pair<RegularSeries, RegularSeries> to_common_hourly_grid(
    const RawSeries& consumption, const RawSeries& temperature) {
    if (consumption.empty() || temperature.empty()) {
        throw std::invalid_argument("input series are empty");
    }
    const std::int64_t start =
        std::max(detail::ceil_to_hour(consumption.points().front().timestamp),
                 detail::ceil_to_hour(temperature.points().front().timestamp));
    const std::int64_t end =
        std::min(detail::floor_to_hour(consumption.points().back().timestamp),
                 detail::floor_to_hour(temperature.points().back().timestamp));
    if (end < start) {
        throw std::invalid_argument("consumption and temperature series do not overlap");
    }
    const auto n = static_cast<std::size_t>((end - start) / 3600 + 1);
    return {resample(consumption, start, 3600, n), resample(temperature, start, 3600, n)};
}

// ---------------------------------------------------------------------------
// generate
// ---------------------------------------------------------------------------

struct GenerateOptions {
    fs::path out;
    bool force = false;
    std::string preset = "year";
    std::uint64_t seed = 1;
    // Negative means "keep the preset's value".
    double noise_stddev = -1.0;
    double jitter_stddev = -1.0;
    double dropout_prob = -1.0;
    long long days = -1;
};

inline int run_generate(const GenerateOptions& opt) {
    Outputs out(opt.out, opt.force);
    return guarded(out, [&]() {
        datagen::GenConfig cfg = datagen::preset(opt.preset, opt.seed);
        if (opt.days >= 0) cfg.days = static_cast<std::size_t>(opt.days);
        if (opt.noise_stddev >= 0.0) cfg.noise_stddev = opt.noise_stddev;
        if (opt.jitter_stddev >= 0.0) cfg.jitter_stddev = opt.jitter_stddev;
        if (opt.dropout_prob >= 0.0) cfg.dropout_prob = opt.dropout_prob;

        const datagen::GenOutput data = datagen::generate(cfg);
        out.write("consumption.csv", to_csv(data.raw_consumption));
        out.write("temperature.csv", to_csv(data.raw_temperature));
        out.write("true_load.csv", to_csv(data.true_load));
        // config.json doubles as the effective-configuration echo.
        json cfg_json = datagen::to_json(cfg);
        cfg_json["preset"] = opt.preset;
        out.write_json("config.json", cfg_json);
        emit({{"event", "generated"},
              {"days", cfg.days},
              {"consumption_points", data.raw_consumption.size()},
              {"temperature_points", data.raw_temperature.size()}});
    });
}

// ---------------------------------------------------------------------------
// analyze
// ---------------------------------------------------------------------------

struct AnalyzeOptions {
    fs::path out;
    bool force = false;
    fs::path consumption;
    fs::path temperature;  // optional; empty disables cross-correlation
    std::size_t max_lag = 48;
    std::size_t period = 24;
    std::size_t rolling_window = 24;
    std::size_t window_index = 0;
    std::size_t window_days = 16;
};

inline json correlogram_json(const analysis::Correlogram& c) {
    return {{"lags", c.lags},
            {"coefficients", c.coefficients},
            {"confidence_band", c.confidence_band}};
}

inline std::string correlogram_txt(const analysis::Correlogram& c) {
    std::string s = "# lag coefficient (white-noise band +/- " +
                    format_double(c.confidence_band) + ")\n";
    for (std::size_t i = 0; i < c.lags.size(); ++i) {
        s += std::to_string(c.lags[i]) + " " + format_double(c.coefficients[i]) + "\n";
    }
    return s;
}

inline int run_analyze(const AnalyzeOptions& opt) {
    Outputs out(opt.out, opt.force);
    return guarded(out, [&]() {
        if (opt.max_lag == 0) {
            throw std::invalid_argument("analyze: --max-lag must be at least 1");
        }
        if (opt.window_days == 0) {
            throw std::invalid_argument("analyze: --window-days must be at least 1");
        }
        const RawSeries raw_h = read_series_csv(opt.consumption, Unit::kwh_accumulated);

        std::optional<RegularSeries> hourly_h;
        std::optional<RegularSeries> hourly_t;
        if (!opt.temperature.empty()) {
            const RawSeries raw_t = read_series_csv(opt.temperature, Unit::deg_c);
            auto grids = to_common_hourly_grid(raw_h, raw_t);
            hourly_h.emplace(std::move(grids.first));
            hourly_t.emplace(std::move(grids.second));
        } else {
            const std::int64_t start =
                detail::ceil_to_hour(raw_h.points().front().timestamp);
            const std::int64_t end =
                detail::floor_to_hour(raw_h.points().back().timestamp);
            if (end < start) {
                throw std::invalid_argument("analyze: input spans less than one hour");
            }
            const auto n = static_cast<std::size_t>((end - start) / 3600 + 1);
            hourly_h.emplace(resample(raw_h, start, 3600, n));
        }

        const std::size_t w_len = opt.window_days * 24;
        const std::size_t first = opt.window_index * w_len;
        if (first + w_len > hourly_h->size()) {
            throw std::invalid_argument(
                "analyze: window " + std::to_string(opt.window_index) +
                " out of range (data holds " +
                std::to_string(hourly_h->size() / w_len) + " complete windows)");
        }
        const RegularSeries window = slice(*hourly_h, first, w_len);

        const analysis::Correlogram acf_r = analysis::acf(window, opt.max_lag);
        const analysis::Correlogram parcor_r = analysis::parcor(window, opt.max_lag);
        const analysis::Decomposition dec = analysis::decompose(window, opt.period);
        const analysis::RollingStats roll = analysis::rolling_stats(window, opt.rolling_window);

        std::optional<analysis::Correlogram> cross;
        if (hourly_t.has_value()) {
            const RegularSeries temp_window = slice(*hourly_t, first, w_len);
            cross = analysis::cross_correlation(window, temp_window, opt.max_lag);
        }

        json summary{
            {"window_index", opt.window_index},
            {"window_days", opt.window_days},
            {"window_start", window.start()},
            {"step", window.step()},
            {"samples", window.size()},
            {"max_lag", opt.max_lag},
            {"period", opt.period},
            {"rolling_window", opt.rolling_window},
            {"acf", correlogram_json(acf_r)},
            {"parcor", correlogram_json(parcor_r)},
        };
        if (cross.has_value()) summary["cross_correlation"] = correlogram_json(*cross);

        out.write_json("analysis.json", summary);
        out.write("acf.txt", correlogram_txt(acf_r));
        out.write("parcor.txt", correlogram_txt(parcor_r));
        if (cross.has_value()) out.write("crosscorr.txt", correlogram_txt(*cross));

        std::string dec_txt = "# timestamp trend seasonal residual\n";
        for (std::size_t i = 0; i < window.size(); ++i) {
            dec_txt += std::to_string(window.time_at(i)) + " " +
                       format_double(dec.trend[i]) + " " +
                       format_double(dec.seasonal[i]) + " " +
                       format_double(dec.residual[i]) + "\n";
        }
        out.write("decomposition.txt", dec_txt);

        std::string roll_txt = "# window_end_timestamp mean variance\n";
        for (std::size_t i = 0; i < roll.mean.size(); ++i) {
            roll_txt += std::to_string(window.time_at(i + roll.window - 1)) + " " +
                        format_double(roll.mean[i]) + " " +
                        format_double(roll.variance[i]) + "\n";
        }
        out.write("rolling.txt", roll_txt);

        out.write_json("run_config.json",
                       json{{"command", "analyze"},
                            {"consumption", opt.consumption.string()},
                            {"temperature", opt.temperature.string()},
                            {"max_lag", opt.max_lag},
                            {"period", opt.period},
                            {"rolling_window", opt.rolling_window},
                            {"window_index", opt.window_index},
                            {"window_days", opt.window_days}});
        emit({{"event", "analyzed"},
              {"window_index", opt.window_index},
              {"acf_lag1", acf_r.coefficients[1]},
              {"parcor_lag1", parcor_r.coefficients[1]}});
    });
}

// ---------------------------------------------------------------------------
// train
// ---------------------------------------------------------------------------

struct TrainOptions {
    fs::path out;
    bool force = false;
    fs::path consumption;
    fs::path temperature;
    std::uint64_t seed = 1;
    unsigned workers = 1;
    std::size_t particles = 20;
    std::size_t iterations = 50;
    double svr_tol = 1e-3;
    bool trace = false;
    pipeline::WindowSpec window;
};

inline json window_spec_to_json(const pipeline::WindowSpec& w) {
    return {{"window_days", w.window_days},
            {"train_days", w.train_days},
            {"val_days", w.val_days},
            {"test_days", w.test_days},
            {"horizon", w.horizon}};
}

inline pipeline::WindowSpec window_spec_from_json(const json& j) {
    pipeline::WindowSpec w;
    w.window_days = j.at("window_days").get<std::size_t>();
    w.train_days = j.at("train_days").get<std::size_t>();
    w.val_days = j.at("val_days").get<std::size_t>();
    w.test_days = j.at("test_days").get<std::size_t>();
    w.horizon = j.at("horizon").get<std::size_t>();
    return w;
}

inline pipeline::TuneOptions make_tune_options(std::size_t particles,
                                               std::size_t iterations, double svr_tol,
                                               std::uint64_t seed) {
    pipeline::TuneOptions t;
    t.pso.n_particles = particles;
    t.pso.n_iterations = iterations;
    t.pso.rng_seed = seed;
    t.svr_tol = svr_tol;
    return t;
}

inline int run_train(const TrainOptions& opt) {
    Outputs out(opt.out, opt.force);
    return guarded(out, [&]() {
        const RawSeries raw_h = read_series_csv(opt.consumption, Unit::kwh_accumulated);
        const RawSeries raw_t = read_series_csv(opt.temperature, Unit::deg_c);
        const auto grids = to_common_hourly_grid(raw_h, raw_t);
        const RegularSeries& hourly_h = grids.first;
        const RegularSeries& hourly_t = grids.second;

        const auto windows = pipeline::make_windows(hourly_h, hourly_t, opt.window);
        if (windows.empty()) {
            throw std::invalid_argument(
                "train: input too short for a single window (" +
                std::to_string(opt.window.window_days) + " days + 1 sample needed)");
        }

        // Per-window searches are independent: seed = base seed + index, and
        // results land in index-addressed slots, so worker count cannot
        // change any output.
        std::vector<pipeline::TuneResult> results(windows.size());
        heatcast::parallel_for(windows.size(), opt.workers, [&](std::size_t i) {
            const auto tune = make_tune_options(opt.particles, opt.iterations,
                                                opt.svr_tol, opt.seed + windows[i].index);
            results[i] = pipeline::tune_and_train(windows[i].train_rows,
                                                  windows[i].val_rows, tune);
        });

        json index_windows = json::array();
        for (std::size_t i = 0; i < windows.size(); ++i) {
            const std::string model_name = detail::indexed_name("model_w", i, ".json");
            out.write(model_name, svr::to_json(results[i].model).dump(2) + "\n");
            if (opt.trace) {
                json trace = json::array();
                for (std::size_t k = 0; k < results[i].trace.size(); ++k) {
                    const auto& t = results[i].trace[k];
                    trace.push_back({{"iteration", k},
                                     {"c", t.position[0]},
                                     {"epsilon", t.position[1]},
                                     {"gamma", t.position[2]},
                                     {"fitness", t.fitness}});
                }
                out.write_json(detail::indexed_name("trace_w", i, ".json"), trace);
            }
            index_windows.push_back(
                {{"index", windows[i].index},
                 {"file", model_name},
                 {"val_mse", results[i].best_fitness},
                 {"hyperparams",
                  {{"c", results[i].best.c},
                   {"gamma", results[i].best.gamma},
                   {"epsilon", results[i].best.epsilon}}},
                 {"converged", results[i].model.converged}});
            emit({{"event", "tuned"},
                  {"window", windows[i].index},
                  {"val_mse", results[i].best_fitness},
                  {"c", results[i].best.c},
                  {"epsilon", results[i].best.epsilon},
                  {"gamma", results[i].best.gamma}});
        }

        out.write_json("index.json",
                       json{{"format", "heatcast-models"},
                            {"version", 1},
                            {"grid",
                             {{"start", hourly_h.start()},
                              {"step", hourly_h.step()},
                              {"n", hourly_h.size()}}},
                            {"window_spec", window_spec_to_json(opt.window)},
                            {"windows", index_windows}});
        out.write_json("run_config.json",
                       json{{"command", "train"},
                            {"consumption", opt.consumption.string()},
                            {"temperature", opt.temperature.string()},
                            {"seed", opt.seed},
                            {"particles", opt.particles},
                            {"iterations", opt.iterations},
                            {"svr_tol", opt.svr_tol},
                            {"trace", opt.trace},
                            {"window_spec", window_spec_to_json(opt.window)}});
        emit({{"event", "trained"}, {"windows", windows.size()}});
    });
}

// ---------------------------------------------------------------------------
// forecast
// ---------------------------------------------------------------------------

struct ForecastOptions {
    fs::path out;
    bool force = false;
    fs::path consumption;
    fs::path temperature;
    fs::path models;  // directory produced by train
    std::string mode = "recursive";
    long long tau = -1;  // -1: pick the mode's default
    unsigned workers = 1;
};

inline pipeline::ForecastMode parse_mode(const std::string& mode) {
    if (mode == "recursive") return pipeline::ForecastMode::recursive;
    if (mode == "open_loop") return pipeline::ForecastMode::open_loop;
    throw std::invalid_argument("unknown mode '" + mode +
                                "' (expected 'recursive' or 'open_loop')");
}

inline std::string plot_txt(const pipeline::ForecastReport& rep) {
    std::string s = "# timestamp actual_kwh predicted_kwh\n";
    for (std::size_t i = 0; i < rep.predicted_load.size(); ++i) {
        s += std::to_string(rep.predicted_load.time_at(i)) + " " +
             format_double(rep.actual_load[i]) + " " +
             format_double(rep.predicted_load[i]) + "\n";
    }
    return s;
}

inline int run_forecast(const ForecastOptions& opt) {
    Outputs out(opt.out, opt.force);
    return guarded(out, [&]() {
        const pipeline::ForecastMode mode = parse_mode(opt.mode);

        std::ifstream index_in(opt.models / "index.json");
        if (!index_in) {
            throw std::runtime_error("cannot open model index '" +
                                     (opt.models / "index.json").string() + "'");
        }
        json index;
        index_in >> index;
        if (index.value("format", "") != "heatcast-models") {
            throw std::runtime_error("not a model directory: " + opt.models.string());
        }
        const pipeline::WindowSpec spec = window_spec_from_json(index.at("window_spec"));

        const RawSeries raw_h = read_series_csv(opt.consumption, Unit::kwh_accumulated);
        const RawSeries raw_t = read_series_csv(opt.temperature, Unit::deg_c);
        const auto grids = to_common_hourly_grid(raw_h, raw_t);
        if (grids.first.start() != index.at("grid").at("start").get<std::int64_t>() ||
            grids.first.size() != index.at("grid").at("n").get<std::size_t>()) {
            throw std::runtime_error(
                "forecast: input grid differs from the one the models were trained on");
        }
        const auto windows = pipeline::make_windows(grids.first, grids.second, spec);

        const std::size_t tau = opt.tau >= 0 ? static_cast<std::size_t>(opt.tau)
                                             : pipeline::default_tau(mode);

        struct Entry {
            std::size_t index;
            fs::path file;
        };
        std::vector<Entry> entries;
        for (const auto& w : index.at("windows")) {
            const std::size_t widx = w.at("index").get<std::size_t>();
            if (widx >= windows.size()) {
                throw std::runtime_error("forecast: model window " + std::to_string(widx) +
                                         " has no matching data window");
            }
            entries.push_back({widx, opt.models / w.at("file").get<std::string>()});
        }

        std::vector<pipeline::ForecastReport> reports(entries.size());
        heatcast::parallel_for(entries.size(), opt.workers, [&](std::size_t i) {
            const svr::SvrModel model = svr::load_model(entries[i].file);
            reports[i] = pipeline::run_window(windows[entries[i].index], model, mode, tau);
        });

        for (std::size_t i = 0; i < reports.size(); ++i) {
            out.write_json(detail::indexed_name("report_w", reports[i].window_index, ".json"),
                           pipeline::to_json(reports[i]));
            out.write(detail::indexed_name("plot_w", reports[i].window_index, ".txt"),
                      plot_txt(reports[i]));
            emit({{"event", "forecast"},
                  {"window", reports[i].window_index},
                  {"rmse_kwh", reports[i].rmse_kwh},
                  {"mape_percent", reports[i].mape_percent}});
        }

        out.write_json("run_config.json",
                       json{{"command", "forecast"},
                            {"consumption", opt.consumption.string()},
                            {"temperature", opt.temperature.string()},
                            {"models", opt.models.string()},
                            {"mode", opt.mode},
                            {"tau", tau}});
        emit({{"event", "forecasted"}, {"windows", reports.size()}});
    });
}

// ---------------------------------------------------------------------------
// evaluate
// ---------------------------------------------------------------------------

struct EvaluateOptions {
    fs::path out;
    bool force = false;
    fs::path reports;  // directory produced by forecast
};

inline int run_evaluate(const EvaluateOptions& opt) {
    Outputs out(opt.out, opt.force);
    return guarded(out, [&]() {
        std::vector<fs::path> files;
        if (!fs::is_directory(opt.reports)) {
            throw std::invalid_argument("evaluate: '" + opt.reports.string() +
                                        "' is not a directory");
        }
        for (const auto& entry : fs::directory_iterator(opt.reports)) {
            const std::string name = entry.path().filename().string();
            if (name.rfind("report_w", 0) == 0 && name.size() > 5 &&
                name.substr(name.size() - 5) == ".json") {
                files.push_back(entry.path());
            }
        }
        if (files.empty()) {
            throw std::invalid_argument("evaluate: no report_w*.json files in '" +
                                        opt.reports.string() + "'");
        }
        std::sort(files.begin(), files.end());

        std::vector<double> rmses, mapes;
        json per_window = json::array();
        for (const auto& f : files) {
            std::ifstream in(f);
            json rep;
            in >> rep;
            rmses.push_back(rep.at("rmse_kwh").get<double>());
            mapes.push_back(rep.at("mape_percent").get<double>());
            per_window.push_back({{"window_index", rep.at("window_index")},
                                  {"rmse_kwh", rep.at("rmse_kwh")},
                                  {"mape_percent", rep.at("mape_percent")},
                                  {"mape_offset", rep.at("mape_offset")},
                                  {"method", rep.at("method")}});
        }
        const double rmse_mean = detail::mean_of(rmses);
        const double mape_mean = detail::mean_of(mapes);
        const json evaluation{
            {"windows", files.size()},
            {"rmse_kwh", {{"mean", rmse_mean},
                          {"stddev", detail::sample_stddev(rmses, rmse_mean)}}},
            {"mape_percent", {{"mean", mape_mean},
                              {"stddev", detail::sample_stddev(mapes, mape_mean)}}},
            {"per_window", per_window}};
        out.write_json("evaluation.json", evaluation);
        out.write_json("run_config.json",
                       json{{"command", "evaluate"}, {"reports", opt.reports.string()}});
        emit({{"event", "evaluation"},
              {"windows", files.size()},
              {"rmse_mean", rmse_mean},
              {"mape_mean", mape_mean}});
    });
}

// ---------------------------------------------------------------------------
// compare
// ---------------------------------------------------------------------------

struct CompareOptions {
    fs::path out;
    bool force = false;
    // Either a preset + seed, or two CSV paths.
    std::string preset;
    std::uint64_t seed = 1;
    fs::path consumption;
    fs::path temperature;
    unsigned workers = 1;
    std::size_t particles = 20;
    std::size_t iterations = 50;
    double svr_tol = 1e-3;
    std::string mode = "recursive";
    long long tau = -1;
    std::size_t arima_max_p = 5;
    std::size_t arima_max_q = 2;
    pipeline::WindowSpec window;
};

namespace detail {

struct WindowComparison {
    std::size_t window_index = 0;
    unsigned month = 0;
    pipeline::ForecastReport ksvr;
    pipeline::ForecastReport arima_rep;
    pipeline::ForecastReport naive;
    arima::ArimaOrder order;
};

/// Shapes a baseline's direct load forecast into the shared report layout.
inline pipeline::ForecastReport baseline_report(const pipeline::WindowData& wd,
                                                const RegularSeries& predicted,
                                                const std::string& method) {
    pipeline::ForecastReport rep;
    rep.window_index = wd.index;
    rep.method = method;
    rep.predicted_load = predicted;
    rep.actual_load = wd.test_load;
    std::vector<double> acc;
    acc.reserve(predicted.size());
    double level = wd.last_known_accumulated;
    for (double v : predicted.values()) {
        level += v;
        acc.push_back(level);
    }
    rep.predicted_accumulated =
        RegularSeries(wd.test_start, wd.step, std::move(acc), Unit::generic);
    rep.rmse_kwh = pipeline::rmse(predicted, wd.test_load);
    const pipeline::MapeResult mp = pipeline::mape(predicted, wd.test_load);
    rep.mape_percent = mp.percent;
    rep.mape_offset = mp.offset;
    rep.tau = 0;
    rep.mode = "direct";
    return rep;
}

}  // namespace detail

inline int run_compare(const CompareOptions& opt) {
    Outputs out(opt.out, opt.force);
    return guarded(out, [&]() {
        const pipeline::ForecastMode mode = parse_mode(opt.mode);
        const bool from_preset = !opt.preset.empty();
        if (!from_preset && (opt.consumption.empty() || opt.temperature.empty())) {
            throw std::invalid_argument(
                "compare: pass either --preset or both --consumption and --temperature");
        }

        std::optional<RegularSeries> hourly_h, hourly_t;
        if (from_preset) {
            const datagen::GenOutput data =
                datagen::generate(datagen::preset(opt.preset, opt.seed));
            auto grids = to_common_hourly_grid(data.raw_consumption, data.raw_temperature);
            hourly_h.emplace(std::move(grids.first));
            hourly_t.emplace(std::move(grids.second));
        } else {
            const RawSeries raw_h = read_series_csv(opt.consumption, Unit::kwh_accumulated);
            const RawSeries raw_t = read_series_csv(opt.temperature, Unit::deg_c);
            auto grids = to_common_hourly_grid(raw_h, raw_t);
            hourly_h.emplace(std::move(grids.first));
            hourly_t.emplace(std::move(grids.second));
        }

        const auto windows = pipeline::make_windows(*hourly_h, *hourly_t, opt.window);
        if (windows.empty()) {
            throw std::invalid_argument("compare: input too short for a single window");
        }
        const std::size_t tau = opt.tau >= 0 ? static_cast<std::size_t>(opt.tau)
                                             : pipeline::default_tau(mode);

        std::vector<detail::WindowComparison> rows(windows.size());
        heatcast::parallel_for(windows.size(), opt.workers, [&](std::size_t i) {
            const pipeline::WindowData& wd = windows[i];
            detail::WindowComparison row;
            row.window_index = wd.index;
            row.month = datagen::month_of(wd.test_start);

            const auto tune = make_tune_options(opt.particles, opt.iterations,
                                                opt.svr_tol, opt.seed + wd.index);
            const pipeline::TuneResult tuned =
                pipeline::tune_and_train(wd.train_rows, wd.val_rows, tune);
            row.ksvr = pipeline::run_window(wd, tuned.model, mode, tau);

            // Baselines see the same information: the train + validation
            // span of the load series.
            std::vector<double> hist_vals;
            hist_vals.reserve(wd.train_rows.size() + wd.val_rows.size());
            for (const auto& r : wd.train_rows) hist_vals.push_back(r.target - r.h_lag1);
            for (const auto& r : wd.val_rows) hist_vals.push_back(r.target - r.h_lag1);
            const auto hist_len = static_cast<std::int64_t>(hist_vals.size());
            const RegularSeries history(wd.test_start - hist_len * wd.step, wd.step,
                                        std::move(hist_vals), Unit::kwh_per_step);

            row.order = arima::select_order(history, opt.arima_max_p, opt.arima_max_q);
            const arima::ArimaModel am = arima::fit_arima(history, row.order);
            const RegularSeries arima_pred =
                arima::forecast_arima(am, history, wd.test_load.size());
            row.arima_rep = detail::baseline_report(wd, arima_pred, "arima");

            const RegularSeries naive_pred =
                arima::seasonal_naive(history, wd.test_load.size(), 24);
            row.naive = detail::baseline_report(wd, naive_pred, "seasonal_naive");
            rows[i] = std::move(row);
        });

        // Monthly aggregation, months in calendar order.
        struct Agg {
            std::vector<double> ksvr_mape, arima_mape, naive_mape;
            std::vector<double> ksvr_rmse, arima_rmse, naive_rmse;
        };
        std::map<unsigned, Agg> by_month;
        for (const auto& row : rows) {
            Agg& a = by_month[row.month];
            a.ksvr_mape.push_back(row.ksvr.mape_percent);
            a.arima_mape.push_back(row.arima_rep.mape_percent);
            a.naive_mape.push_back(row.naive.mape_percent);
            a.ksvr_rmse.push_back(row.ksvr.rmse_kwh);
            a.arima_rmse.push_back(row.arima_rep.rmse_kwh);
            a.naive_rmse.push_back(row.naive.rmse_kwh);
        }

        json months = json::array();
        std::size_t ksvr_beats_arima = 0;
        for (const auto& [month, agg] : by_month) {
            const double km = detail::mean_of(agg.ksvr_mape);
            const double am = detail::mean_of(agg.arima_mape);
            const double nm = detail::mean_of(agg.naive_mape);
            std::string winner = "pso_ksvr";
            double best = km;
            if (am < best) {
                winner = "arima";
                best = am;
            }
            if (nm < best) winner = "seasonal_naive";
            if (km < am) ++ksvr_beats_arima;
            months.push_back(
                {{"month", month},
                 {"name", datagen::month_name(month)},
                 {"windows", agg.ksvr_mape.size()},
                 {"pso_ksvr",
                  {{"mape_mean", km},
                   {"mape_stddev", detail::sample_stddev(agg.ksvr_mape, km)},
                   {"rmse_mean", detail::mean_of(agg.ksvr_rmse)}}},
                 {"arima",
                  {{"mape_mean", am},
                   {"mape_stddev", detail::sample_stddev(agg.arima_mape, am)},
                   {"rmse_mean", detail::mean_of(agg.arima_rmse)}}},
                 {"seasonal_naive",
                  {{"mape_mean", nm},
                   {"mape_stddev", detail::sample_stddev(agg.naive_mape, nm)},
                   {"rmse_mean", detail::mean_of(agg.naive_rmse)}}},
                 {"winner", winner}});
            emit({{"event", "month"},
                  {"month", month},
                  {"pso_ksvr_mape", km},
                  {"arima_mape", am},
                  {"seasonal_naive_mape", nm},
                  {"winner", winner}});
        }

        std::vector<double> all_k, all_a, all_n;
        for (const auto& row : rows) {
            all_k.push_back(row.ksvr.mape_percent);
            all_a.push_back(row.arima_rep.mape_percent);
            all_n.push_back(row.naive.mape_percent);
        }
        const json overall{
            {"windows", rows.size()},
            {"months", by_month.size()},
            {"pso_ksvr_mape_mean", detail::mean_of(all_k)},
            {"arima_mape_mean", detail::mean_of(all_a)},
            {"seasonal_naive_mape_mean", detail::mean_of(all_n)},
            {"ksvr_months_beating_arima", ksvr_beats_arima}};

        out.write_json("comparison.json", json{{"months", months}, {"overall", overall}});

        json details = json::array();
        for (const auto& row : rows) {
            details.push_back({{"window_index", row.window_index},
                               {"month", row.month},
                               {"pso_ksvr", pipeline::to_json(row.ksvr)},
                               {"arima", pipeline::to_json(row.arima_rep)},
                               {"seasonal_naive", pipeline::to_json(row.naive)},
                               {"arima_order",
                                {{"p", row.order.p}, {"d", row.order.d}, {"q", row.order.q}}}});
        }
        out.write_json("comparison_details.json", details);

        // Human-readable summary table.
        std::string md = "# 24-hour load forecast: method comparison\n\n";
        md += "MAPE is mean +/- sample stddev over the month's windows; the winner\n";
        md += "has the lowest mean MAPE.\n\n";
        md += "| Month | Windows | PSO-kSVR MAPE % | ARIMA MAPE % | Seasonal-naive MAPE % | Winner |\n";
        md += "|---|---|---|---|---|---|\n";
        for (const auto& m : months) {
            const auto cell = [&](const char* key) {
                return detail::fixed(m.at(key).at("mape_mean").get<double>()) + " +/- " +
                       detail::fixed(m.at(key).at("mape_stddev").get<double>());
            };
            md += "| " + m.at("name").get<std::string>() + " | " +
                  std::to_string(m.at("windows").get<std::size_t>()) + " | " +
                  cell("pso_ksvr") + " | " + cell("arima") + " | " +
                  cell("seasonal_naive") + " | **" +
                  m.at("winner").get<std::string>() + "** |\n";
        }
        md += "\nPSO-kSVR beats ARIMA on mean MAPE in " +
              std::to_string(ksvr_beats_arima) + " of " +
              std::to_string(by_month.size()) + " months.\n";
        out.write("comparison.md", md);

        json run_cfg{{"command", "compare"},
                     {"mode", opt.mode},
                     {"tau", tau},
                     {"seed", opt.seed},
                     {"particles", opt.particles},
                     {"iterations", opt.iterations},
                     {"svr_tol", opt.svr_tol},
                     {"arima_max_p", opt.arima_max_p},
                     {"arima_max_q", opt.arima_max_q},
                     {"window_spec", window_spec_to_json(opt.window)}};
        if (from_preset) {
            run_cfg["preset"] = opt.preset;
        } else {
            run_cfg["consumption"] = opt.consumption.string();
            run_cfg["temperature"] = opt.temperature.string();
        }
        out.write_json("run_config.json", run_cfg);
        emit({{"event", "comparison"}, {"overall", overall}});
    });
}

}  // namespace heatcast::cli
