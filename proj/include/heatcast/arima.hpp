#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "heatcast/nelder_mead.hpp"
#include "heatcast/series.hpp"

namespace heatcast::arima {

struct ArimaOrder {
    std::size_t p = 0;  // autoregressive terms
    std::size_t d = 0;  // differencing passes
    std::size_t q = 0;  // moving-average terms

    bool operator==(const ArimaOrder&) const = default;
};

// The order-selection grid is capped here; larger models on a 15-day window
// overfit long before they help, and the caps bound compare runtimes.
inline constexpr std::size_t kMaxP = 5;
inline constexpr std::size_t kMaxQ = 5;
inline constexpr std::size_t kMaxD = 1;

struct ArimaModel {
    ArimaOrder order;
    std::vector<double> ar_coefs;  // phi_1..phi_p
    std::vector<double> ma_coefs;  // theta_1..theta_q
    double intercept = 0.0;
    double sigma2 = 0.0;  // SSE / n_eff
    double aic = 0.0;     // n_eff * ln(SSE/n_eff) + 2 * (p + q + 1)
};

namespace detail {

/// Roots of the monic polynomial x^n + a[n-1] x^(n-1) + ... + a[0] by
/// Durand-Kerner iteration. a is low-to-high order, leading 1 implied.
inline std::vector<std::complex<double>> monic_roots(const std::vector<double>& a) {
    const std::size_t n = a.size();
    std::vector<std::complex<double>> w(n);
    const std::complex<double> seed(0.4, 0.9);  // not a root of unity
    std::complex<double> acc(1.0, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
        acc *= seed;
        w[k] = acc;
    }
    const auto eval = [&](std::complex<double> x) {
        std::complex<double> v(1.0, 0.0);
        for (std::size_t i = n; i-- > 0;) v = v * x + a[i];
        return v;
    };
    for (int iter = 0; iter < 200; ++iter) {
        double max_change = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            std::complex<double> denom(1.0, 0.0);
            for (std::size_t j = 0; j < n; ++j) {
                if (j != k) denom *= (w[k] - w[j]);
            }
            const std::complex<double> delta = eval(w[k]) / denom;
            w[k] -= delta;
            max_change = std::max(max_change, std::abs(delta));
        }
        if (max_change < 1e-13) break;
    }
    return w;
}

/// Stationarity of the AR recursion x_t = phi_1 x_{t-1} + ...: the companion
/// roots (lambda^p - phi_1 lambda^(p-1) - ... - phi_p = 0) must all lie
/// strictly inside the unit circle, with `margin` to spare.
inline bool ar_stationary(const std::vector<double>& phi, double margin = 1e-6) {
    const std::size_t p = phi.size();
    if (p == 0) return true;
    std::vector<double> a(p);
    for (std::size_t j = 0; j < p; ++j) a[j] = -phi[p - 1 - j];
    for (const auto& root : monic_roots(a)) {
        if (std::abs(root) >= 1.0 - margin) return false;
    }
    return true;
}

/// Conditional sum of squares: residuals before index p are fixed at zero,
/// so no likelihood for the ramp-in and no state-space machinery.
/// Returns +inf when the recursion diverges.
inline double css(const std::vector<double>& w, std::size_t p, std::size_t q,
                  const std::vector<double>& params, std::vector<double>* resid_out) {
    const std::size_t nw = w.size();
    const double c = params[0];
    std::vector<double> e(nw, 0.0);
    double sse = 0.0;
    for (std::size_t t = p; t < nw; ++t) {
        double pred = c;
        for (std::size_t i = 1; i <= p; ++i) pred += params[i] * w[t - i];
        for (std::size_t j = 1; j <= q; ++j) {
            if (t >= p + j) pred += params[p + j] * e[t - j];
        }
        e[t] = w[t] - pred;
        sse += e[t] * e[t];
    }
    if (!std::isfinite(sse)) return std::numeric_limits<double>::infinity();
    if (resid_out != nullptr) *resid_out = std::move(e);
    return sse;
}

inline std::vector<double> difference(const std::vector<double>& x, std::size_t d) {
    std::vector<double> w = x;
    for (std::size_t pass = 0; pass < d; ++pass) {
        for (std::size_t t = 0; t + 1 < w.size(); ++t) w[t] = w[t + 1] - w[t];
        w.pop_back();
    }
    return w;
}

/// Dense Gaussian elimination with partial pivoting; A is n x n row-major.
/// Returns false when the system is numerically singular.
inline bool solve_linear(std::vector<double> A, std::vector<double> b,
                         std::vector<double>& x) {
    const std::size_t n = b.size();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < n; ++r) {
            if (std::abs(A[r * n + col]) > std::abs(A[pivot * n + col])) pivot = r;
        }
        if (std::abs(A[pivot * n + col]) < 1e-12) return false;
        if (pivot != col) {
            for (std::size_t c = 0; c < n; ++c) std::swap(A[col * n + c], A[pivot * n + c]);
            std::swap(b[col], b[pivot]);
        }
        for (std::size_t r = col + 1; r < n; ++r) {
            const double factor = A[r * n + col] / A[col * n + col];
            for (std::size_t c = col; c < n; ++c) A[r * n + c] -= factor * A[col * n + c];
            b[r] -= factor * b[col];
        }
    }
    x.assign(n, 0.0);
    for (std::size_t r = n; r-- > 0;) {
        double v = b[r];
        for (std::size_t c = r + 1; c < n; ++c) v -= A[r * n + c] * x[c];
        x[r] = v / A[r * n + r];
    }
    return true;
}

/// OLS estimate of an AR(p)-with-intercept start point. Falls back to
/// (mean, zeros) when the normal equations are singular, and damps the
/// coefficients towards zero until the start point is stationary.
inline std::vector<double> ols_start(const std::vector<double>& w, std::size_t p,
                                     std::size_t q) {
    const std::size_t nw = w.size();
    std::vector<double> params(1 + p + q, 0.0);
    double mean = 0.0;
    for (double v : w) mean += v;
    mean /= static_cast<double>(nw);
    params[0] = mean;
    if (p == 0) return params;

    const std::size_t dim = p + 1;
    std::vector<double> XtX(dim * dim, 0.0), Xty(dim, 0.0);
    for (std::size_t t = p; t < nw; ++t) {
        std::vector<double> row(dim, 1.0);
        for (std::size_t i = 1; i <= p; ++i) row[i] = w[t - i];
        for (std::size_t r = 0; r < dim; ++r) {
            for (std::size_t c = 0; c < dim; ++c) XtX[r * dim + c] += row[r] * row[c];
            Xty[r] += row[r] * w[t];
        }
    }
    std::vector<double> beta;
    if (solve_linear(XtX, Xty, beta)) {
        for (std::size_t i = 0; i < dim; ++i) params[i] = beta[i];
    }
    std::vector<double> phi(params.begin() + 1, params.begin() + 1 + p);
    for (int tries = 0; tries < 60 && !ar_stationary(phi); ++tries) {
        for (double& v : phi) v *= 0.9;
    }
    std::copy(phi.begin(), phi.end(), params.begin() + 1);
    return params;
}

}  // namespace detail

/**
 * Fits an ARIMA(p, d, q) by minimizing the conditional sum of squares with
 * Nelder-Mead, started from the OLS AR estimate. The objective returns +inf
 * whenever the AR polynomial's companion roots come within 1e-6 of the unit
 * circle, which keeps the search inside the stationary region.
 */
inline ArimaModel fit_arima(const RegularSeries& series, const ArimaOrder& order) {
    if (order.p > kMaxP || order.q > kMaxQ || order.d > kMaxD) {
        throw std::invalid_argument("fit_arima: order outside supported grid (p<=" +
                                    std::to_string(kMaxP) + ", d<=" + std::to_string(kMaxD) +
                                    ", q<=" + std::to_string(kMaxQ) + ")");
    }
    const auto w = detail::difference(series.values(), order.d);
    const std::size_t nw = w.size();
    if (nw < order.p + order.q + 2 || nw < 8) {
        throw std::invalid_argument("fit_arima: series too short for requested order");
    }

    const std::size_t p = order.p, q = order.q;
    const auto objective = [&](const std::vector<double>& params) {
        if (p > 0) {
            std::vector<double> phi(params.begin() + 1, params.begin() + 1 + p);
            if (!detail::ar_stationary(phi)) {
                return std::numeric_limits<double>::infinity();
            }
        }
        return detail::css(w, p, q, params, nullptr);
    };

    const auto start = detail::ols_start(w, p, q);
    const auto nm = nelder_mead(objective, start, 0.1);

    ArimaModel model;
    model.order = order;
    model.intercept = nm.x[0];
    model.ar_coefs.assign(nm.x.begin() + 1, nm.x.begin() + 1 + p);
    model.ma_coefs.assign(nm.x.begin() + 1 + p, nm.x.end());
    if (!detail::ar_stationary(model.ar_coefs)) {
        throw std::runtime_error("fit_arima: optimizer returned a non-stationary model");
    }

    const double sse = detail::css(w, p, q, nm.x, nullptr);
    const auto n_eff = static_cast<double>(nw - p);
    model.sigma2 = sse / n_eff;
    model.aic = n_eff * std::log(std::max(sse, 1e-300) / n_eff) +
                2.0 * static_cast<double>(p + q + 1);
    return model;
}

/**
 * Grid search over (p, q) with d chosen first: one differencing pass iff the
 * lag-1 autocorrelation exceeds 0.95 (near-integrated series). Candidates
 * are ranked by AIC; exact ties prefer fewer parameters, then smaller p.
 * Candidates whose fit fails are skipped; if every candidate fails, the
 * error of the first failure is propagated.
 */
inline ArimaOrder select_order(const RegularSeries& series, std::size_t max_p,
                               std::size_t max_q) {
    if (max_p > kMaxP || max_q > kMaxQ) {
        throw std::invalid_argument("select_order: grid exceeds supported caps");
    }

    std::size_t d = 0;
    {
        // Constant series have no defined autocorrelation; they are already
        // as stationary as data gets, so keep d = 0.
        const auto& v = series.values();
        double mean = 0.0;
        for (double x : v) mean += x;
        mean /= static_cast<double>(v.size());
        double c0 = 0.0, c1 = 0.0;
        for (std::size_t t = 0; t < v.size(); ++t) {
            c0 += (v[t] - mean) * (v[t] - mean);
            if (t > 0) c1 += (v[t] - mean) * (v[t - 1] - mean);
        }
        if (c0 > 0.0 && c1 / c0 > 0.95) d = 1;
    }

    bool have_best = false;
    ArimaOrder best;
    double best_aic = 0.0;
    std::string first_failure;
    for (std::size_t p = 0; p <= max_p; ++p) {
        for (std::size_t q = 0; q <= max_q; ++q) {
            const ArimaOrder order{p, d, q};
            double aic = 0.0;
            try {
                aic = fit_arima(series, order).aic;
            } catch (const std::exception& e) {
                if (first_failure.empty()) first_failure = e.what();
                continue;
            }
            const bool better =
                !have_best || aic < best_aic ||
                (aic == best_aic &&
                 (p + q < best.p + best.q || (p + q == best.p + best.q && p < best.p)));
            if (better) {
                have_best = true;
                best = order;
                best_aic = aic;
            }
        }
    }
    if (!have_best) {
        throw std::runtime_error("select_order: every candidate order failed to fit (" +
                                 first_failure + ")");
    }
    return best;
}

/**
 * Mean forecast `horizon` steps past the end of `history`. Residuals are
 * reconstructed by running the CSS recursion over the history; future shocks
 * are their mean, zero. With d = 1 the forecast integrates back from the
 * last observed level.
 */
inline RegularSeries forecast_arima(const ArimaModel& model, const RegularSeries& history,
                                    std::size_t horizon) {
    if (horizon == 0) {
        throw std::invalid_argument("forecast_arima: horizon must be at least 1");
    }
    const std::size_t p = model.order.p, q = model.order.q, d = model.order.d;
    auto w = detail::difference(history.values(), d);
    if (w.size() < std::max(p, q) + 1) {
        throw std::invalid_argument("forecast_arima: history too short for model order");
    }

    std::vector<double> params;
    params.push_back(model.intercept);
    params.insert(params.end(), model.ar_coefs.begin(), model.ar_coefs.end());
    params.insert(params.end(), model.ma_coefs.begin(), model.ma_coefs.end());
    std::vector<double> e;
    detail::css(w, p, q, params, &e);

    std::vector<double> out;
    out.reserve(horizon);
    for (std::size_t h = 0; h < horizon; ++h) {
        double pred = model.intercept;
        for (std::size_t i = 1; i <= p; ++i) {
            const std::size_t idx = w.size() - i;
            pred += model.ar_coefs[i - 1] * w[idx];
        }
        for (std::size_t j = 1; j <= q; ++j) {
            if (e.size() >= j) pred += model.ma_coefs[j - 1] * e[e.size() - j];
        }
        w.push_back(pred);
        e.push_back(0.0);  // future shocks at their mean
        out.push_back(pred);
    }
    if (d == 1) {
        // Integrate the predicted increments back from the last observed level.
        double level = history.values().back();
        for (double& v : out) {
            level += v;
            v = level;
        }
    }

    const std::int64_t start =
        history.start() + static_cast<std::int64_t>(history.size()) * history.step();
    // A levels forecast of an accumulated series need not be monotone, so it
    // cannot honestly claim the accumulated unit.
    const Unit unit =
        history.unit() == Unit::kwh_accumulated ? Unit::generic : history.unit();
    return RegularSeries(start, history.step(), std::move(out), unit);
}

/// Repeats the last full seasonal cycle of the history.
inline RegularSeries seasonal_naive(const RegularSeries& history, std::size_t horizon,
                                    std::size_t period = 24) {
    if (period == 0) throw std::invalid_argument("seasonal_naive: period must be positive");
    if (history.size() < period) {
        throw std::invalid_argument("seasonal_naive: history shorter than one period");
    }
    if (horizon == 0) {
        throw std::invalid_argument("seasonal_naive: horizon must be at least 1");
    }
    const std::size_t n = history.size();
    std::vector<double> out;
    out.reserve(horizon);
    for (std::size_t h = 0; h < horizon; ++h) {
        out.push_back(history[n - period + (h % period)]);
    }
    const std::int64_t start =
        history.start() + static_cast<std::int64_t>(n) * history.step();
    return RegularSeries(start, history.step(), std::move(out), history.unit());
}

}  // namespace heatcast::arima
