#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "heatcast/csv.hpp"
#include "heatcast/rng.hpp"
#include "heatcast/series.hpp"

namespace heatcast::datagen {

/// 2021-01-01T00:00:00Z. A non-leap year keeps day-of-year -> month mapping
/// trivial for the year-long preset.
inline constexpr std::int64_t kDefaultStart = 1609459200;
inline constexpr std::int64_t kHour = 3600;

/**
 * Scenario parameters for the synthetic district-heating site.
 *
 * Temperature is an annual sinusoid plus a daily sinusoid plus AR(1) noise.
 * Load is a base level, a zero-mean daily profile, heating demand coupled to
 * how far the (lagged) temperature sits below a reference, and Gaussian
 * noise, clamped at zero. The meter integrates load into an accumulated
 * register; raw series are produced by jittering interior timestamps and
 * dropping interior points.
 */
struct GenConfig {
    std::size_t days = 16;
    std::int64_t start = kDefaultStart;

    double base_load = 10.0;             // kWh per hour
    double seasonal_amplitude = 1.5;     // scales daily_profile, kWh per hour
    std::array<double, 24> daily_profile{};  // zero-sum shape, see default_daily_profile()
    double temp_coupling = 0.6;          // kWh per hour per degC below reference
    double temp_reference = 17.0;        // degC at which heating demand vanishes
    std::size_t coupling_lag = 1;        // hours the building lags the weather

    double annual_temp_mean = 8.0;       // degC
    double annual_temp_amplitude = 8.0;  // degC, winter-to-mean swing
    double daily_temp_amplitude = 3.0;   // degC
    double temp_ar = 0.8;                // AR(1) pole of the weather noise
    double temp_noise_stddev = 0.5;      // degC, AR(1) innovation

    double noise_stddev = 0.5;           // kWh per hour, load measurement noise
    double jitter_stddev = 0.0;          // seconds, interior timestamp jitter
    double dropout_prob = 0.0;           // interior point drop probability

    std::uint64_t rng_seed = 1;
};

/// Residential-style double hump: morning and evening peaks, night trough.
/// Mean-removed so the entries sum to zero (up to rounding).
inline std::array<double, 24> default_daily_profile() {
    std::array<double, 24> p{};
    constexpr double two_pi = 6.283185307179586476925286766559;
    for (std::size_t h = 0; h < 24; ++h) {
        const double x = static_cast<double>(h);
        p[h] = -std::cos(two_pi * (x - 2.0) / 24.0) +
               0.45 * std::cos(2.0 * two_pi * (x - 1.5) / 24.0);
    }
    double mean = 0.0;
    for (double v : p) mean += v;
    mean /= 24.0;
    for (double& v : p) v -= mean;
    return p;
}

struct GenOutput {
    RawSeries raw_consumption;       // accumulated kWh, jittered + dropped
    RawSeries raw_temperature;       // degC, jittered + dropped
    RegularSeries true_load;         // kWh per hour on the clean grid
    RegularSeries true_temperature;  // degC on the clean grid
};

namespace detail {

inline void validate(const GenConfig& cfg) {
    if (cfg.days == 0) throw std::invalid_argument("datagen: days must be at least 1");
    if (!(cfg.base_load >= 0.0)) {
        throw std::invalid_argument("datagen: base_load must be >= 0");
    }
    double profile_sum = 0.0;
    for (double v : cfg.daily_profile) {
        if (!std::isfinite(v)) throw std::invalid_argument("datagen: non-finite profile");
        profile_sum += v;
    }
    if (std::abs(profile_sum) > 1e-6) {
        throw std::invalid_argument("datagen: daily_profile must sum to zero, sums to " +
                                    std::to_string(profile_sum));
    }
    if (!(cfg.noise_stddev >= 0.0) || !(cfg.jitter_stddev >= 0.0) ||
        !(cfg.temp_noise_stddev >= 0.0)) {
        throw std::invalid_argument("datagen: noise magnitudes must be >= 0");
    }
    if (!(cfg.dropout_prob >= 0.0) || !(cfg.dropout_prob < 1.0)) {
        throw std::invalid_argument("datagen: dropout_prob must lie in [0, 1)");
    }
    if (!(std::abs(cfg.temp_ar) < 1.0)) {
        throw std::invalid_argument("datagen: temp_ar must lie in (-1, 1)");
    }
}

/// Jitter interior timestamps, keeping each within its own half-step so the
/// result stays strictly ordered without fix-ups; then drop interior points.
/// First and last points are never moved or dropped: they anchor the span.
inline RawSeries to_raw(const RegularSeries& clean, double jitter_stddev,
                        double dropout_prob, Rng& rng, Unit unit) {
    const std::size_t n = clean.size();
    const std::int64_t step = clean.step();
    std::vector<RawPoint> pts;
    pts.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::int64_t t = clean.time_at(i);
        if (i > 0 && i + 1 < n && jitter_stddev > 0.0) {
            const auto d = static_cast<std::int64_t>(
                std::llround(rng.normal(0.0, jitter_stddev)));
            const std::int64_t lim = step / 2 - 1;
            t += std::clamp(d, -lim, lim);
        }
        pts.push_back({t, clean[i]});
    }
    if (dropout_prob > 0.0) {
        std::vector<RawPoint> kept;
        kept.reserve(pts.size());
        for (std::size_t i = 0; i < pts.size(); ++i) {
            const bool interior = i > 0 && i + 1 < pts.size();
            if (interior && rng.uniform01() < dropout_prob) continue;
            kept.push_back(pts[i]);
        }
        pts = std::move(kept);
    }
    return RawSeries(std::move(pts), unit);
}

}  // namespace detail

/**
 * Deterministic scenario synthesis: one RNG stream, consumed in a fixed
 * order (temperature noise, then load noise, then consumption jitter and
 * dropout, then temperature jitter and dropout), so a seed fully determines
 * every output.
 */
inline GenOutput generate(const GenConfig& cfg) {
    detail::validate(cfg);
    const std::size_t n = cfg.days * 24;
    constexpr double two_pi = 6.283185307179586476925286766559;
    Rng rng(cfg.rng_seed);

    std::vector<double> temperature(n);
    {
        double ar = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double day = static_cast<double>(i) / 24.0;
            const double annual = -std::cos(two_pi * day / 365.0) * cfg.annual_temp_amplitude;
            const double daily =
                -std::cos(two_pi * (static_cast<double>(i % 24) - 4.0) / 24.0) *
                cfg.daily_temp_amplitude;
            ar = cfg.temp_ar * ar + rng.normal(0.0, cfg.temp_noise_stddev);
            temperature[i] = cfg.annual_temp_mean + annual + daily + ar;
        }
    }

    std::vector<double> load(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t lagged = i >= cfg.coupling_lag ? i - cfg.coupling_lag : 0;
        const double heating =
            cfg.temp_coupling * std::max(0.0, cfg.temp_reference - temperature[lagged]);
        const double value = cfg.base_load +
                             cfg.seasonal_amplitude * cfg.daily_profile[i % 24] +
                             heating + rng.normal(0.0, cfg.noise_stddev);
        load[i] = std::max(0.0, value);
    }

    RegularSeries true_load(cfg.start, kHour, load, Unit::kwh_per_step);
    RegularSeries true_temperature(cfg.start, kHour, temperature, Unit::deg_c);
    RegularSeries accumulated = accumulate(true_load);

    RawSeries raw_consumption = detail::to_raw(accumulated, cfg.jitter_stddev,
                                               cfg.dropout_prob, rng,
                                               Unit::kwh_accumulated);
    RawSeries raw_temperature = detail::to_raw(true_temperature, cfg.jitter_stddev,
                                               cfg.dropout_prob, rng, Unit::deg_c);
    return GenOutput{std::move(raw_consumption), std::move(raw_temperature),
                     std::move(true_load), std::move(true_temperature)};
}

/// Full-year scenario: pronounced annual swing, daily profile, 5% load
/// noise, mild meter irregularity. Months differ strongly in heating demand.
inline GenConfig preset_year(std::uint64_t seed) {
    GenConfig cfg;
    cfg.days = 365;
    cfg.daily_profile = default_daily_profile();
    cfg.noise_stddev = 0.5;
    cfg.jitter_stddev = 90.0;
    cfg.dropout_prob = 0.01;
    cfg.rng_seed = seed;
    return cfg;
}

/// Noise-free scenario: load is an exact function of hour and lagged
/// temperature, timestamps stay on the grid, nothing is dropped. 17 days
/// gives one 16-day window plus the sample the feature lag consumes.
inline GenConfig preset_noiseless(std::uint64_t seed) {
    GenConfig cfg;
    cfg.days = 17;
    cfg.daily_profile.fill(0.0);
    cfg.seasonal_amplitude = 0.0;
    cfg.noise_stddev = 0.0;
    cfg.temp_noise_stddev = 0.0;
    cfg.jitter_stddev = 0.0;
    cfg.dropout_prob = 0.0;
    cfg.rng_seed = seed;
    return cfg;
}

inline GenConfig preset(const std::string& name, std::uint64_t seed) {
    if (name == "year") return preset_year(seed);
    if (name == "noiseless") return preset_noiseless(seed);
    throw std::invalid_argument("datagen: unknown preset '" + name +
                                "' (expected 'year' or 'noiseless')");
}

inline nlohmann::json to_json(const GenConfig& cfg) {
    return {
        {"days", cfg.days},
        {"start", cfg.start},
        {"base_load", cfg.base_load},
        {"seasonal_amplitude", cfg.seasonal_amplitude},
        {"daily_profile", cfg.daily_profile},
        {"temp_coupling", cfg.temp_coupling},
        {"temp_reference", cfg.temp_reference},
        {"coupling_lag", cfg.coupling_lag},
        {"annual_temp_mean", cfg.annual_temp_mean},
        {"annual_temp_amplitude", cfg.annual_temp_amplitude},
        {"daily_temp_amplitude", cfg.daily_temp_amplitude},
        {"temp_ar", cfg.temp_ar},
        {"temp_noise_stddev", cfg.temp_noise_stddev},
        {"noise_stddev", cfg.noise_stddev},
        {"jitter_stddev", cfg.jitter_stddev},
        {"dropout_prob", cfg.dropout_prob},
        {"rng_seed", cfg.rng_seed},
    };
}

/// Month (1..12) containing the given epoch timestamp, UTC civil calendar.
inline unsigned month_of(std::int64_t epoch) {
    std::int64_t days = epoch / 86400;
    if (epoch % 86400 < 0) days -= 1;
    return civil_from_days(days).month;
}

inline const char* month_name(unsigned m) {
    static constexpr const char* names[12] = {"January", "February", "March",
                                              "April",   "May",      "June",
                                              "July",    "August",   "September",
                                              "October", "November", "December"};
    if (m < 1 || m > 12) throw std::invalid_argument("month_name: month out of range");
    return names[m - 1];
}

}  // namespace heatcast::datagen
