#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstddef>
#include <cstdlib>
#include <vector>

#include "heatcast/analysis.hpp"
#include "heatcast/datagen.hpp"
#include "heatcast/series.hpp"

namespace datagen = heatcast::datagen;
using datagen::GenConfig;
using heatcast::Unit;

TEST_CASE("generation is a pure function of its configuration", "[datagen]") {
    GenConfig cfg = datagen::preset_year(7);
    cfg.days = 20;
    const auto a = datagen::generate(cfg);
    const auto b = datagen::generate(cfg);
    REQUIRE(a.raw_consumption == b.raw_consumption);
    REQUIRE(a.raw_temperature == b.raw_temperature);
    REQUIRE(a.true_load == b.true_load);
    REQUIRE(a.true_temperature == b.true_temperature);

    cfg.rng_seed = 8;
    const auto c = datagen::generate(cfg);
    REQUIRE_FALSE(a.raw_consumption == c.raw_consumption);
    REQUIRE_FALSE(a.true_load == c.true_load);
}

TEST_CASE("clean series live on an hourly grid of the requested span", "[datagen]") {
    GenConfig cfg;
    cfg.days = 5;
    const auto out = datagen::generate(cfg);
    REQUIRE(out.true_load.size() == 5 * 24);
    REQUIRE(out.true_temperature.size() == 5 * 24);
    REQUIRE(out.true_load.start() == cfg.start);
    REQUIRE(out.true_load.step() == 3600);
    REQUIRE(out.true_load.unit() == Unit::kwh_per_step);
    REQUIRE(out.true_temperature.unit() == Unit::deg_c);
    for (const double v : out.true_load.values()) REQUIRE(v >= 0.0);
}

TEST_CASE("the meter register is the running sum of the true load", "[datagen]") {
    GenConfig cfg = datagen::preset_noiseless(3);
    const auto out = datagen::generate(cfg);
    REQUIRE(out.raw_consumption.unit() == Unit::kwh_accumulated);
    REQUIRE(out.raw_consumption.size() == out.true_load.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < out.true_load.size(); ++i) {
        acc += out.true_load[i];
        REQUIRE(out.raw_consumption[i].timestamp == out.true_load.time_at(i));
        REQUIRE(out.raw_consumption[i].value == Catch::Approx(acc).margin(1e-9));
    }
}

TEST_CASE("without noise the load follows its formula exactly", "[datagen]") {
    GenConfig cfg = datagen::preset_noiseless(5);
    const auto out = datagen::generate(cfg);
    // Flat profile, zero noise: load_i = base + coupling * max(0, ref - T_{i-lag}).
    for (std::size_t i = 1; i < out.true_load.size(); ++i) {
        const double heating =
            cfg.temp_coupling *
            std::max(0.0, cfg.temp_reference - out.true_temperature[i - 1]);
        REQUIRE(out.true_load[i] ==
                Catch::Approx(cfg.base_load + heating).margin(1e-12));
    }
}

TEST_CASE("load responds to temperature after the configured lag", "[datagen]") {
    GenConfig cfg = datagen::preset_noiseless(11);
    cfg.days = 40;
    cfg.temp_noise_stddev = 0.6;  // aperiodic weather so lags are distinguishable
    const auto out = datagen::generate(cfg);

    const auto cg = heatcast::analysis::cross_correlation(
        out.true_load, out.true_temperature, 6);
    // Heating demand falls as it gets warmer: strong negative correlation,
    // strongest at exactly the coupling lag.
    std::size_t best = 0;
    for (std::size_t k = 1; k <= 6; ++k) {
        if (cg.coefficients[k] < cg.coefficients[best]) best = k;
    }
    REQUIRE(best == cfg.coupling_lag);
    REQUIRE(cg.coefficients[best] < -0.8);
}

TEST_CASE("jitter moves interior timestamps but keeps them ordered", "[datagen]") {
    GenConfig cfg;
    cfg.days = 10;
    cfg.jitter_stddev = 400.0;
    cfg.dropout_prob = 0.0;
    const auto out = datagen::generate(cfg);
    const auto& pts = out.raw_consumption.points();
    REQUIRE(pts.size() == 240);
    REQUIRE(pts.front().timestamp == cfg.start);
    REQUIRE(pts.back().timestamp == cfg.start + 239 * 3600);

    std::size_t moved = 0;
    for (std::size_t i = 1; i + 1 < pts.size(); ++i) {
        const std::int64_t grid = cfg.start + static_cast<std::int64_t>(i) * 3600;
        const std::int64_t off = pts[i].timestamp - grid;
        REQUIRE(std::llabs(off) <= 1799);  // stays within its own half-slot
        if (off != 0) ++moved;
    }
    REQUIRE(moved > 200);  // with sigma 400s nearly every point moves
}

TEST_CASE("dropout removes interior points only", "[datagen]") {
    GenConfig cfg;
    cfg.days = 20;
    cfg.dropout_prob = 0.3;
    const auto out = datagen::generate(cfg);
    const std::size_t full = 20 * 24;
    REQUIRE(out.raw_consumption.size() < full);
    REQUIRE(out.raw_consumption.size() > full / 2);
    REQUIRE(out.raw_consumption.points().front().timestamp == cfg.start);
    REQUIRE(out.raw_consumption.points().back().timestamp ==
            cfg.start + static_cast<std::int64_t>(full - 1) * 3600);
    // The clean series are unaffected by meter artifacts.
    REQUIRE(out.true_load.size() == full);
}

TEST_CASE("presets describe the advertised scenarios", "[datagen]") {
    const GenConfig year = datagen::preset("year", 42);
    REQUIRE(year.days == 365);
    REQUIRE(year.rng_seed == 42);
    REQUIRE(year.dropout_prob > 0.0);
    REQUIRE(year.jitter_stddev > 0.0);

    const GenConfig quiet = datagen::preset("noiseless", 1);
    REQUIRE(quiet.days == 17);
    REQUIRE(quiet.noise_stddev == 0.0);
    REQUIRE(quiet.temp_noise_stddev == 0.0);
    REQUIRE(quiet.jitter_stddev == 0.0);
    REQUIRE(quiet.dropout_prob == 0.0);

    REQUIRE_THROWS_AS(datagen::preset("weekly", 1), std::invalid_argument);
}

TEST_CASE("the default daily profile sums to zero", "[datagen]") {
    const auto p = datagen::default_daily_profile();
    double sum = 0.0;
    for (const double v : p) sum += v;
    REQUIRE(sum == Catch::Approx(0.0).margin(1e-9));
    // Double-humped: the profile is not constant and has meaningful swing.
    double lo = p[0], hi = p[0];
    for (const double v : p) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    REQUIRE(hi - lo > 1.0);
}

TEST_CASE("configuration validation", "[datagen]") {
    GenConfig cfg;
    cfg.days = 0;
    REQUIRE_THROWS_AS(datagen::generate(cfg), std::invalid_argument);

    cfg = GenConfig{};
    cfg.daily_profile[3] = 1.0;  // no longer sums to zero
    REQUIRE_THROWS_AS(datagen::generate(cfg), std::invalid_argument);

    cfg = GenConfig{};
    cfg.dropout_prob = 1.0;
    REQUIRE_THROWS_AS(datagen::generate(cfg), std::invalid_argument);

    cfg = GenConfig{};
    cfg.temp_ar = 1.0;
    REQUIRE_THROWS_AS(datagen::generate(cfg), std::invalid_argument);

    cfg = GenConfig{};
    cfg.noise_stddev = -0.5;
    REQUIRE_THROWS_AS(datagen::generate(cfg), std::invalid_argument);
}

TEST_CASE("month lookup respects civil-calendar boundaries", "[datagen]") {
    using datagen::month_of;
    REQUIRE(month_of(1609459200) == 1);                       // 2021-01-01T00:00:00Z
    REQUIRE(month_of(1609459200 + 30 * 86400 + 86399) == 1);  // 2021-01-31T23:59:59Z
    REQUIRE(month_of(1609459200 + 31 * 86400) == 2);          // 2021-02-01T00:00:00Z
    REQUIRE(month_of(1609459200 + 364 * 86400) == 12);        // 2021-12-31
    REQUIRE(datagen::month_name(1) == std::string("January"));
    REQUIRE(datagen::month_name(12) == std::string("December"));
    REQUIRE_THROWS_AS(datagen::month_name(0), std::invalid_argument);
    REQUIRE_THROWS_AS(datagen::month_name(13), std::invalid_argument);
}

TEST_CASE("a year of data spans every month with winter-heavy load", "[datagen]") {
    const auto out = datagen::generate(datagen::preset_year(1));
    REQUIRE(out.true_load.size() == 365 * 24);
    // January demands more heat than July.
    double jan = 0.0, jul = 0.0;
    for (std::size_t i = 0; i < out.true_load.size(); ++i) {
        const unsigned m = datagen::month_of(out.true_load.time_at(i));
        if (m == 1) jan += out.true_load[i];
        if (m == 7) jul += out.true_load[i];
    }
    REQUIRE(jan > 1.5 * jul);
}
