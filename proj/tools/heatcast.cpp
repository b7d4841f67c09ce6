// heatcast: synthesize, analyze and forecast district-heating load series.

#include <cstdint>
#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "heatcast/cli.hpp"

namespace hc = heatcast::cli;

int main(int argc, char** argv) {
    CLI::App app{
        "Heat-load forecasting toolkit: synthetic data, series diagnostics,\n"
        "PSO-tuned kernel SVR forecasts and ARIMA/seasonal-naive baselines."};
    app.require_subcommand(1);
    app.set_config("--config", "", "Key-value file with long option names as keys");
    app.fallthrough();

    // generate ---------------------------------------------------------------
    hc::GenerateOptions gen;
    CLI::App* c_gen = app.add_subcommand("generate", "Synthesize a metering scenario");
    c_gen->add_option("-o,--out", gen.out, "Output directory")->required();
    c_gen->add_flag("--force", gen.force, "Overwrite existing outputs");
    c_gen->add_option("--preset", gen.preset, "Scenario preset: year or noiseless")
        ->default_val("year");
    c_gen->add_option("--seed", gen.seed, "RNG seed")->default_val(1);
    c_gen->add_option("--days", gen.days, "Override scenario length in days")
        ->check(CLI::PositiveNumber);
    c_gen->add_option("--noise-stddev", gen.noise_stddev,
                      "Override load noise stddev (kWh/h)");
    c_gen->add_option("--jitter-stddev", gen.jitter_stddev,
                      "Override timestamp jitter stddev (s)");
    c_gen->add_option("--dropout-prob", gen.dropout_prob,
                      "Override interior point dropout probability");

    // analyze ----------------------------------------------------------------
    hc::AnalyzeOptions ana;
    CLI::App* c_ana = app.add_subcommand("analyze", "Correlation and seasonality diagnostics");
    c_ana->add_option("-o,--out", ana.out, "Output directory")->required();
    c_ana->add_flag("--force", ana.force, "Overwrite existing outputs");
    c_ana->add_option("--consumption", ana.consumption,
                      "Accumulated-consumption CSV (timestamp,value)")
        ->required();
    c_ana->add_option("--temperature", ana.temperature,
                      "Temperature CSV; enables cross-correlation");
    c_ana->add_option("--max-lag", ana.max_lag, "Largest lag, in steps")
        ->default_val(48)
        ->check(CLI::PositiveNumber);
    c_ana->add_option("--period", ana.period, "Seasonal period for decomposition")
        ->default_val(24)
        ->check(CLI::PositiveNumber);
    c_ana->add_option("--rolling-window", ana.rolling_window,
                      "Window length for rolling mean/variance")
        ->default_val(24)
        ->check(CLI::PositiveNumber);
    c_ana->add_option("--window-index", ana.window_index, "Which window to analyze")
        ->default_val(0);
    c_ana->add_option("--window-days", ana.window_days, "Window length in days")
        ->default_val(16)
        ->check(CLI::PositiveNumber);

    // train ------------------------------------------------------------------
    hc::TrainOptions tr;
    CLI::App* c_tr = app.add_subcommand("train", "Tune and fit one model per window");
    c_tr->add_option("-o,--out", tr.out, "Output directory")->required();
    c_tr->add_flag("--force", tr.force, "Overwrite existing outputs");
    c_tr->add_option("--consumption", tr.consumption, "Accumulated-consumption CSV")
        ->required();
    c_tr->add_option("--temperature", tr.temperature, "Temperature CSV")->required();
    c_tr->add_option("--seed", tr.seed, "Base RNG seed (window w uses seed + w)")
        ->default_val(1);
    c_tr->add_option("-j,--workers", tr.workers, "Worker threads across windows")
        ->default_val(1)
        ->check(CLI::PositiveNumber);
    c_tr->add_option("--particles", tr.particles, "Swarm size")->default_val(20);
    c_tr->add_option("--iterations", tr.iterations, "Swarm iterations")->default_val(50);
    c_tr->add_option("--svr-tol", tr.svr_tol, "SMO convergence tolerance")
        ->default_val(1e-3);
    c_tr->add_flag("--trace", tr.trace, "Write per-iteration search traces");

    // forecast ---------------------------------------------------------------
    hc::ForecastOptions fc;
    CLI::App* c_fc = app.add_subcommand("forecast", "24-hour forecasts from trained models");
    c_fc->add_option("-o,--out", fc.out, "Output directory")->required();
    c_fc->add_flag("--force", fc.force, "Overwrite existing outputs");
    c_fc->add_option("--consumption", fc.consumption, "Accumulated-consumption CSV")
        ->required();
    c_fc->add_option("--temperature", fc.temperature, "Temperature CSV")->required();
    c_fc->add_option("--models", fc.models, "Directory produced by train")->required();
    c_fc->add_option("--mode", fc.mode, "Feedback mode: recursive or open_loop")
        ->default_val("recursive");
    c_fc->add_option("--tau", fc.tau,
                     "Lag correction in steps; -1 picks the mode's default")
        ->default_val(-1);
    c_fc->add_option("-j,--workers", fc.workers, "Worker threads across windows")
        ->default_val(1)
        ->check(CLI::PositiveNumber);

    // evaluate ---------------------------------------------------------------
    hc::EvaluateOptions ev;
    CLI::App* c_ev = app.add_subcommand("evaluate", "Aggregate forecast reports");
    c_ev->add_option("-o,--out", ev.out, "Output directory")->required();
    c_ev->add_flag("--force", ev.force, "Overwrite existing outputs");
    c_ev->add_option("--reports", ev.reports, "Directory produced by forecast")
        ->required();

    // compare ----------------------------------------------------------------
    hc::CompareOptions cmp;
    CLI::App* c_cmp = app.add_subcommand(
        "compare", "PSO-kSVR vs ARIMA vs seasonal-naive, month by month");
    c_cmp->add_option("-o,--out", cmp.out, "Output directory")->required();
    c_cmp->add_flag("--force", cmp.force, "Overwrite existing outputs");
    c_cmp->add_option("--preset", cmp.preset, "Generate this preset in memory");
    c_cmp->add_option("--seed", cmp.seed, "RNG seed (data + searches)")->default_val(1);
    c_cmp->add_option("--consumption", cmp.consumption, "Accumulated-consumption CSV");
    c_cmp->add_option("--temperature", cmp.temperature, "Temperature CSV");
    c_cmp->add_option("-j,--workers", cmp.workers, "Worker threads across windows")
        ->default_val(1)
        ->check(CLI::PositiveNumber);
    c_cmp->add_option("--particles", cmp.particles, "Swarm size")->default_val(20);
    c_cmp->add_option("--iterations", cmp.iterations, "Swarm iterations")->default_val(50);
    c_cmp->add_option("--svr-tol", cmp.svr_tol, "SMO convergence tolerance")
        ->default_val(1e-3);
    c_cmp->add_option("--mode", cmp.mode, "Feedback mode: recursive or open_loop")
        ->default_val("recursive");
    c_cmp->add_option("--tau", cmp.tau,
                      "Lag correction in steps; -1 picks the mode's default")
        ->default_val(-1);
    c_cmp->add_option("--arima-max-p", cmp.arima_max_p, "AR order cap")->default_val(5);
    c_cmp->add_option("--arima-max-q", cmp.arima_max_q, "MA order cap")->default_val(2);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (c_gen->parsed()) return hc::run_generate(gen);
        if (c_ana->parsed()) return hc::run_analyze(ana);
        if (c_tr->parsed()) return hc::run_train(tr);
        if (c_fc->parsed()) return hc::run_forecast(fc);
        if (c_ev->parsed()) return hc::run_evaluate(ev);
        if (c_cmp->parsed()) return hc::run_compare(cmp);
    } catch (const std::exception& e) {
        // Commands normally map their own errors to exit codes; this catches
        // failures before an output directory exists.
        std::cerr << "error: " << e.what() << "\n";
        return hc::kExitRuntime;
    }
    return hc::kExitUsage;
}
