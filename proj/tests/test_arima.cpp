#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <vector>

#include "heatcast/arima.hpp"
#include "heatcast/nelder_mead.hpp"
#include "heatcast/rng.hpp"
#include "heatcast/series.hpp"

namespace arima = heatcast::arima;
using heatcast::RegularSeries;
using heatcast::Unit;

namespace {

RegularSeries make_series(std::vector<double> v, Unit unit = Unit::generic) {
    return RegularSeries(0, 3600, std::move(v), unit);
}

std::vector<double> simulate_arma(double phi, double theta, std::size_t n,
                                  std::uint64_t seed, double intercept = 0.0) {
    heatcast::Rng rng(seed);
    std::vector<double> x(n + 300, 0.0);
    double prev_e = 0.0;
    for (std::size_t t = 1; t < x.size(); ++t) {
        const double e = rng.normal(0.0, 1.0);
        x[t] = intercept + phi * x[t - 1] + e + theta * prev_e;
        prev_e = e;
    }
    return std::vector<double>(x.end() - static_cast<std::ptrdiff_t>(n), x.end());
}

}  // namespace

// --- simplex minimizer ------------------------------------------------------

TEST_CASE("simplex minimizer solves a separable quadratic", "[nelder-mead]") {
    const auto f = [](const std::vector<double>& x) {
        return (x[0] - 3.0) * (x[0] - 3.0) + (x[1] + 1.0) * (x[1] + 1.0);
    };
    const auto r = heatcast::nelder_mead(f, {0.0, 0.0});
    REQUIRE(r.converged);
    REQUIRE(r.x[0] == Catch::Approx(3.0).margin(1e-6));
    REQUIRE(r.x[1] == Catch::Approx(-1.0).margin(1e-6));
    REQUIRE(r.f == Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("simplex minimizer handles a curved valley", "[nelder-mead]") {
    const auto rosenbrock = [](const std::vector<double>& x) {
        const double a = 1.0 - x[0];
        const double b = x[1] - x[0] * x[0];
        return a * a + 100.0 * b * b;
    };
    heatcast::NelderMeadOptions opts;
    opts.max_iterations = 5000;
    const auto r = heatcast::nelder_mead(rosenbrock, {-1.2, 1.0}, 0.1, opts);
    REQUIRE(r.converged);
    REQUIRE(r.x[0] == Catch::Approx(1.0).margin(1e-3));
    REQUIRE(r.x[1] == Catch::Approx(1.0).margin(1e-3));
}

TEST_CASE("simplex minimizer treats infinity as out-of-domain", "[nelder-mead]") {
    const auto f = [](const std::vector<double>& x) {
        if (x[0] < 0.0) return std::numeric_limits<double>::infinity();
        return (x[0] - 2.0) * (x[0] - 2.0);
    };
    const auto r = heatcast::nelder_mead(f, {5.0});
    REQUIRE(r.x[0] == Catch::Approx(2.0).margin(1e-6));
}

TEST_CASE("simplex minimizer is deterministic", "[nelder-mead]") {
    const auto f = [](const std::vector<double>& x) {
        return std::sin(x[0]) + x[0] * x[0] * 0.1 + std::cos(x[1]) * 0.5;
    };
    const auto a = heatcast::nelder_mead(f, {1.0, 2.0});
    const auto b = heatcast::nelder_mead(f, {1.0, 2.0});
    REQUIRE(a.x == b.x);
    REQUIRE(a.f == b.f);
    REQUIRE(a.iterations == b.iterations);
}

// --- model internals ---------------------------------------------------------

TEST_CASE("polynomial roots for a factored quadratic", "[arima]") {
    // x^2 - 3x + 2 = (x - 1)(x - 2): coefficients low-to-high, monic implied.
    auto roots = arima::detail::monic_roots({2.0, -3.0});
    std::sort(roots.begin(), roots.end(),
              [](const auto& a, const auto& b) { return a.real() < b.real(); });
    REQUIRE(roots[0].real() == Catch::Approx(1.0).margin(1e-9));
    REQUIRE(roots[0].imag() == Catch::Approx(0.0).margin(1e-9));
    REQUIRE(roots[1].real() == Catch::Approx(2.0).margin(1e-9));
}

TEST_CASE("stationarity checks on the AR companion roots", "[arima]") {
    REQUIRE(arima::detail::ar_stationary({0.5}));
    REQUIRE(arima::detail::ar_stationary({}));
    REQUIRE_FALSE(arima::detail::ar_stationary({1.01}));
    REQUIRE_FALSE(arima::detail::ar_stationary({1.0}));
    // phi = (0.5, 0.5) puts a companion root exactly at 1.
    REQUIRE_FALSE(arima::detail::ar_stationary({0.5, 0.5}));
    // Complex pair with modulus ~0.707.
    REQUIRE(arima::detail::ar_stationary({1.2, -0.5}));
}

TEST_CASE("conditional sum of squares is exact on noiseless data", "[arima]") {
    // x_t = 0.3 + 0.5 x_{t-1} exactly, so the generating parameters give
    // zero residuals (after the ramp-in, which CSS fixes at zero).
    std::vector<double> w{1.0};
    for (int t = 1; t < 60; ++t) w.push_back(0.3 + 0.5 * w.back());
    std::vector<double> resid;
    const double sse = arima::detail::css(w, 1, 0, {0.3, 0.5}, &resid);
    REQUIRE(sse == Catch::Approx(0.0).margin(1e-18));
    REQUIRE(resid.size() == w.size());
    for (const double e : resid) REQUIRE(e == Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("differencing removes polynomial trends", "[arima]") {
    REQUIRE(arima::detail::difference({1.0, 4.0, 9.0, 16.0}, 1) ==
            std::vector<double>{3.0, 5.0, 7.0});
    REQUIRE(arima::detail::difference({1.0, 4.0, 9.0, 16.0}, 0) ==
            std::vector<double>{1.0, 4.0, 9.0, 16.0});
}

// --- fitting ------------------------------------------------------------------

TEST_CASE("autoregressive coefficients are recovered from simulation", "[arima]") {
    const auto x = simulate_arma(0.6, 0.0, 2500, 41);
    const auto model = arima::fit_arima(make_series(x), {1, 0, 0});
    REQUIRE(model.ar_coefs.size() == 1);
    REQUIRE(model.ar_coefs[0] == Catch::Approx(0.6).margin(0.05));
    REQUIRE(model.intercept == Catch::Approx(0.0).margin(0.1));
    REQUIRE(model.sigma2 == Catch::Approx(1.0).margin(0.15));
}

TEST_CASE("moving-average coefficients are recovered from simulation", "[arima]") {
    const auto x = simulate_arma(0.0, 0.5, 3000, 43);
    const auto model = arima::fit_arima(make_series(x), {0, 0, 1});
    REQUIRE(model.ma_coefs.size() == 1);
    REQUIRE(model.ma_coefs[0] == Catch::Approx(0.5).margin(0.07));
}

TEST_CASE("mixed models are recovered from simulation", "[arima]") {
    const auto x = simulate_arma(0.6, 0.5, 4000, 47);
    const auto model = arima::fit_arima(make_series(x), {1, 0, 1});
    REQUIRE(model.ar_coefs[0] == Catch::Approx(0.6).margin(0.05));
    REQUIRE(model.ma_coefs[0] == Catch::Approx(0.5).margin(0.07));
}

TEST_CASE("information criterion follows its definition", "[arima]") {
    const auto x = simulate_arma(0.4, 0.0, 500, 51);
    const auto model = arima::fit_arima(make_series(x), {1, 0, 1});
    const double n_eff = 500.0 - 1.0;
    const double expected = n_eff * std::log(model.sigma2) + 2.0 * 3.0;
    REQUIRE(model.aic == Catch::Approx(expected).margin(1e-9));
}

TEST_CASE("a constant series fits an intercept-only model", "[arima]") {
    const auto model = arima::fit_arima(make_series(std::vector<double>(50, 7.5)),
                                        {0, 0, 0});
    REQUIRE(model.intercept == Catch::Approx(7.5).margin(1e-6));
    REQUIRE(model.sigma2 == Catch::Approx(0.0).margin(1e-10));
}

TEST_CASE("fitting validates order and length", "[arima]") {
    const auto x = simulate_arma(0.4, 0.0, 100, 3);
    REQUIRE_THROWS_AS(arima::fit_arima(make_series(x), {6, 0, 0}),
                      std::invalid_argument);
    REQUIRE_THROWS_AS(arima::fit_arima(make_series(x), {0, 2, 0}),
                      std::invalid_argument);
    REQUIRE_THROWS_AS(arima::fit_arima(make_series({1.0, 2.0, 3.0, 4.0, 5.0}), {2, 0, 0}),
                      std::invalid_argument);
}

TEST_CASE("order selection finds a pure autoregression", "[arima]") {
    // AIC retains a fixed ~16% chance of decorating the true model with a
    // spurious extra term no matter how long the series is, so the property
    // to test is the majority outcome over independent realizations, not a
    // single lucky draw. Every realization is stationary, so d must always
    // come out 0.
    std::size_t exact = 0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        heatcast::Rng rng(seed);
        std::vector<double> x(1500 + 300, 0.0);
        for (std::size_t t = 2; t < x.size(); ++t) {
            x[t] = 0.5 * x[t - 1] + 0.3 * x[t - 2] + rng.normal(0.0, 1.0);
        }
        x.erase(x.begin(), x.begin() + 300);
        const auto order = arima::select_order(make_series(x), 3, 2);
        REQUIRE(order.d == 0);
        if (order.p == 2 && order.q == 0) ++exact;
    }
    REQUIRE(exact >= 7);
}

TEST_CASE("order selection differences near-integrated series once", "[arima]") {
    heatcast::Rng rng(67);
    std::vector<double> walk(800);
    double level = 0.0;
    for (double& v : walk) {
        level += rng.normal(0.1, 1.0);
        v = level;
    }
    REQUIRE(arima::select_order(make_series(walk), 2, 1).d == 1);

    const auto stat = simulate_arma(0.6, 0.0, 800, 69);
    REQUIRE(arima::select_order(make_series(stat), 2, 1).d == 0);

    // Constant input: no defined autocorrelation, stays at d = 0.
    REQUIRE(arima::select_order(make_series(std::vector<double>(100, 3.0)), 1, 1).d == 0);
}

// --- forecasting ---------------------------------------------------------------

TEST_CASE("autoregressive forecasts decay geometrically", "[arima]") {
    arima::ArimaModel model;
    model.order = {1, 0, 0};
    model.ar_coefs = {0.5};
    model.intercept = 0.0;
    const auto hist = make_series({0.0, 0.0, 0.0, 8.0});
    const auto fc = arima::forecast_arima(model, hist, 3);
    REQUIRE(fc.size() == 3);
    REQUIRE(fc.values()[0] == Catch::Approx(4.0).margin(1e-12));
    REQUIRE(fc.values()[1] == Catch::Approx(2.0).margin(1e-12));
    REQUIRE(fc.values()[2] == Catch::Approx(1.0).margin(1e-12));
    REQUIRE(fc.start() == hist.start() + 4 * 3600);
    REQUIRE(fc.step() == 3600);
}

TEST_CASE("differenced forecasts integrate back from the last level", "[arima]") {
    arima::ArimaModel model;
    model.order = {0, 1, 0};
    model.intercept = 2.0;
    const auto hist = make_series({0.0, 2.0, 4.0, 6.0});
    const auto fc = arima::forecast_arima(model, hist, 3);
    REQUIRE(fc.values() == std::vector<double>{8.0, 10.0, 12.0});
}

TEST_CASE("forecasting an accumulated history drops the monotone claim", "[arima]") {
    arima::ArimaModel model;
    model.order = {1, 0, 0};
    model.ar_coefs = {0.9};
    const auto hist = make_series({1.0, 2.0, 3.0, 4.0}, Unit::kwh_accumulated);
    const auto fc = arima::forecast_arima(model, hist, 2);
    REQUIRE(fc.unit() == Unit::generic);

    const auto temp_hist = make_series({1.0, 2.0, 3.0, 4.0}, Unit::deg_c);
    REQUIRE(arima::forecast_arima(model, temp_hist, 2).unit() == Unit::deg_c);
}

TEST_CASE("forecast validates inputs", "[arima]") {
    arima::ArimaModel model;
    model.order = {2, 0, 0};
    model.ar_coefs = {0.3, 0.2};
    REQUIRE_THROWS_AS(arima::forecast_arima(model, make_series({1.0, 2.0}), 0),
                      std::invalid_argument);
    REQUIRE_THROWS_AS(arima::forecast_arima(model, make_series({1.0, 2.0}), 3),
                      std::invalid_argument);
}

TEST_CASE("seasonal repetition of the last cycle", "[arima]") {
    const auto hist = make_series({1.0, 2.0, 3.0, 7.0, 8.0, 9.0});
    const auto fc = arima::seasonal_naive(hist, 7, 3);
    REQUIRE(fc.values() == std::vector<double>{7.0, 8.0, 9.0, 7.0, 8.0, 9.0, 7.0});
    REQUIRE(fc.start() == hist.start() + 6 * 3600);

    REQUIRE_THROWS_AS(arima::seasonal_naive(hist, 0, 3), std::invalid_argument);
    REQUIRE_THROWS_AS(arima::seasonal_naive(hist, 3, 0), std::invalid_argument);
    REQUIRE_THROWS_AS(arima::seasonal_naive(hist, 3, 24), std::invalid_argument);
}
