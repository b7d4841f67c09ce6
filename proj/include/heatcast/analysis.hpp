#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "heatcast/series.hpp"

namespace heatcast::analysis {

/// Correlation-vs-lag result shared by acf, parcor and cross_correlation.
/// confidence_band is the +/- 2/sqrt(N) white-noise band used when plotting.
struct Correlogram {
    std::vector<std::size_t> lags;         // 0..max_lag
    std::vector<double> coefficients;      // same length as lags
    double confidence_band = 0.0;
};

namespace detail {

inline double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

/// Biased sample autocovariances c[0..max_lag] (divide by N, not N-k):
/// the biased form keeps the Toeplitz matrix positive semi-definite, which
/// Levinson-Durbin relies on.
inline std::vector<double> autocovariances(const std::vector<double>& v,
                                           std::size_t max_lag) {
    const std::size_t n = v.size();
    const double mu = mean_of(v);
    std::vector<double> c(max_lag + 1, 0.0);
    for (std::size_t k = 0; k <= max_lag; ++k) {
        double s = 0.0;
        for (std::size_t t = k; t < n; ++t) {
            s += (v[t] - mu) * (v[t - k] - mu);
        }
        c[k] = s / static_cast<double>(n);
    }
    return c;
}

inline void check_series(const RegularSeries& s, std::size_t max_lag, const char* who) {
    if (max_lag == 0) {
        throw std::invalid_argument(std::string(who) + ": max_lag must be at least 1");
    }
    if (s.size() < max_lag + 2) {
        throw std::invalid_argument(std::string(who) + ": series too short (" +
                                    std::to_string(s.size()) + " samples) for max_lag " +
                                    std::to_string(max_lag));
    }
}

}  // namespace detail

/// Sample autocorrelation function at lags 0..max_lag.
inline Correlogram acf(const RegularSeries& series, std::size_t max_lag) {
    detail::check_series(series, max_lag, "acf");
    const auto c = detail::autocovariances(series.values(), max_lag);
    if (c[0] <= 0.0) {
        throw std::invalid_argument("acf: series is constant (zero variance)");
    }
    Correlogram out;
    out.confidence_band = 2.0 / std::sqrt(static_cast<double>(series.size()));
    for (std::size_t k = 0; k <= max_lag; ++k) {
        out.lags.push_back(k);
        out.coefficients.push_back(c[k] / c[0]);
    }
    return out;
}

/**
 * Levinson-Durbin recursion on an autocovariance sequence c[0..K]. Returns
 * the reflection (partial autocorrelation) coefficients kappa[0..K], with
 * kappa[0] = 1 by convention.
 *
 * The recursion divides by the running prediction-error variance; if that
 * collapses (process exactly predictable from fewer lags, e.g. a flat
 * autocovariance) the Toeplitz system is singular and we stop with a
 * std::runtime_error rather than emit noise.
 */
inline std::vector<double> levinson(std::span<const double> autocov) {
    if (autocov.empty()) {
        throw std::invalid_argument("levinson: empty autocovariance sequence");
    }
    if (autocov[0] <= 0.0) {
        throw std::invalid_argument("levinson: variance must be positive");
    }
    const std::size_t max_lag = autocov.size() - 1;
    std::vector<double> kappas;
    kappas.reserve(max_lag + 1);
    kappas.push_back(1.0);

    std::vector<double> phi(max_lag + 1, 0.0);   // phi[j], j = 1..k, current order
    std::vector<double> prev(max_lag + 1, 0.0);
    double err = autocov[0];
    for (std::size_t k = 1; k <= max_lag; ++k) {
        if (!(err > 1e-12 * autocov[0])) {
            throw std::runtime_error(
                "levinson: prediction-error variance collapsed at lag " +
                std::to_string(k) + " (singular Toeplitz system)");
        }
        double num = autocov[k];
        for (std::size_t j = 1; j < k; ++j) num -= prev[j] * autocov[k - j];
        const double kappa = num / err;
        phi = prev;
        phi[k] = kappa;
        for (std::size_t j = 1; j < k; ++j) phi[j] = prev[j] - kappa * prev[k - j];
        err *= (1.0 - kappa * kappa);
        prev = phi;
        kappas.push_back(kappa);
    }
    return kappas;
}

/**
 * Partial autocorrelation via the Levinson-Durbin recursion on the sample
 * autocovariances. coefficient[k] is the lag-k reflection coefficient, the
 * correlation between x_t and x_{t-k} after removing the influence of the
 * intermediate lags. coefficient[0] is 1 by convention. Propagates the
 * levinson() singularity error for degenerate input.
 */
inline Correlogram parcor(const RegularSeries& series, std::size_t max_lag) {
    detail::check_series(series, max_lag, "parcor");
    const auto c = detail::autocovariances(series.values(), max_lag);
    if (c[0] <= 0.0) {
        throw std::invalid_argument("parcor: series is constant (zero variance)");
    }
    const auto kappas = levinson(c);

    Correlogram out;
    out.confidence_band = 2.0 / std::sqrt(static_cast<double>(series.size()));
    for (std::size_t k = 0; k <= max_lag; ++k) {
        out.lags.push_back(k);
        out.coefficients.push_back(kappas[k]);
    }
    return out;
}

/**
 * Normalized cross-correlation: coefficient[k] pairs a_t with b_{t-k}, so a
 * peak at positive k means b leads a by k steps. Both series must share the
 * same grid. Normalization uses full-series means and norms, so values lie
 * in [-1, 1].
 */
inline Correlogram cross_correlation(const RegularSeries& a, const RegularSeries& b,
                                     std::size_t max_lag) {
    if (a.start() != b.start() || a.step() != b.step() || a.size() != b.size()) {
        throw std::invalid_argument("cross_correlation: series grids differ");
    }
    detail::check_series(a, max_lag, "cross_correlation");
    const std::size_t n = a.size();
    const double ma = detail::mean_of(a.values());
    const double mb = detail::mean_of(b.values());
    double na = 0.0, nb = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
        na += (a[t] - ma) * (a[t] - ma);
        nb += (b[t] - mb) * (b[t] - mb);
    }
    if (na <= 0.0 || nb <= 0.0) {
        throw std::invalid_argument("cross_correlation: constant input series");
    }
    const double norm = std::sqrt(na * nb);

    Correlogram out;
    out.confidence_band = 2.0 / std::sqrt(static_cast<double>(n));
    for (std::size_t k = 0; k <= max_lag; ++k) {
        double s = 0.0;
        for (std::size_t t = k; t < n; ++t) {
            s += (a[t] - ma) * (b[t - k] - mb);
        }
        out.lags.push_back(k);
        out.coefficients.push_back(s / norm);
    }
    return out;
}

/// Classical additive decomposition: series = trend + seasonal + residual.
struct Decomposition {
    RegularSeries trend;
    RegularSeries seasonal;
    RegularSeries residual;
};

/**
 * Classical additive decomposition with a centered moving average.
 *
 * For an even period p the trend is the standard 2xp MA (half weight on the
 * two outermost samples); for odd p a plain centered MA of width p. Trend
 * endpoints, where the centered window does not fit, are filled by linear
 * extrapolation of the two nearest interior trend values. The seasonal
 * component is the per-phase mean of (series - trend), re-centered so the
 * period sums to zero. Components use Unit::generic: they are diagnostics,
 * not measurements, and e.g. the seasonal part of an accumulated series
 * oscillates around zero.
 */
inline Decomposition decompose(const RegularSeries& series, std::size_t period = 24) {
    if (period < 2) {
        throw std::invalid_argument("decompose: period must be at least 2");
    }
    if (series.size() < 2 * period + 1) {
        throw std::invalid_argument("decompose: need at least two full periods plus one "
                                    "sample, have " + std::to_string(series.size()));
    }
    const std::size_t n = series.size();
    const auto& v = series.values();
    const std::size_t half = period / 2;

    std::vector<double> trend(n, 0.0);
    const std::size_t lo = half;
    const std::size_t hi = n - half - 1;  // centered window fits for i in [lo, hi]
    for (std::size_t i = lo; i <= hi; ++i) {
        double s = 0.0;
        if (period % 2 == 0) {
            s += 0.5 * v[i - half] + 0.5 * v[i + half];
            for (std::size_t j = i - half + 1; j < i + half; ++j) s += v[j];
        } else {
            for (std::size_t j = i - half; j <= i + half; ++j) s += v[j];
        }
        trend[i] = s / static_cast<double>(period);
    }
    // Linear extrapolation into the uncovered margins.
    {
        const double slope_lo = trend[lo + 1] - trend[lo];
        for (std::size_t i = lo; i-- > 0;) {
            trend[i] = trend[lo] - slope_lo * static_cast<double>(lo - i);
        }
        const double slope_hi = trend[hi] - trend[hi - 1];
        for (std::size_t i = hi + 1; i < n; ++i) {
            trend[i] = trend[hi] + slope_hi * static_cast<double>(i - hi);
        }
    }

    // Per-phase means of the detrended series, re-centered to sum to zero.
    std::vector<double> phase_sum(period, 0.0);
    std::vector<std::size_t> phase_count(period, 0);
    for (std::size_t i = 0; i < n; ++i) {
        phase_sum[i % period] += v[i] - trend[i];
        phase_count[i % period] += 1;
    }
    std::vector<double> phase_mean(period);
    double grand = 0.0;
    for (std::size_t p = 0; p < period; ++p) {
        phase_mean[p] = phase_sum[p] / static_cast<double>(phase_count[p]);
        grand += phase_mean[p];
    }
    grand /= static_cast<double>(period);
    for (double& m : phase_mean) m -= grand;

    std::vector<double> seasonal(n), residual(n);
    for (std::size_t i = 0; i < n; ++i) {
        seasonal[i] = phase_mean[i % period];
        residual[i] = v[i] - trend[i] - seasonal[i];
    }

    return Decomposition{
        RegularSeries(series.start(), series.step(), std::move(trend), Unit::generic),
        RegularSeries(series.start(), series.step(), std::move(seasonal), Unit::generic),
        RegularSeries(series.start(), series.step(), std::move(residual), Unit::generic),
    };
}

/// Rolling mean and (sample) variance over trailing windows. Entry i of the
/// outputs describes the window ending at index window + i - 1, so both
/// vectors have size() - window + 1 entries.
struct RollingStats {
    std::size_t window = 0;
    std::vector<double> mean;
    std::vector<double> variance;
};

inline RollingStats rolling_stats(const RegularSeries& series, std::size_t window) {
    if (window < 2) {
        throw std::invalid_argument("rolling_stats: window must be at least 2");
    }
    if (series.size() < window) {
        throw std::invalid_argument("rolling_stats: series shorter than window");
    }
    const auto& v = series.values();
    const std::size_t n = series.size();
    RollingStats out;
    out.window = window;
    out.mean.reserve(n - window + 1);
    out.variance.reserve(n - window + 1);
    // Recomputed per window (no sliding update): O(n * window) but immune to
    // cancellation drift, and n is small here.
    for (std::size_t end = window; end <= n; ++end) {
        double m = 0.0;
        for (std::size_t j = end - window; j < end; ++j) m += v[j];
        m /= static_cast<double>(window);
        double s2 = 0.0;
        for (std::size_t j = end - window; j < end; ++j) {
            s2 += (v[j] - m) * (v[j] - m);
        }
        s2 /= static_cast<double>(window - 1);
        out.mean.push_back(m);
        out.variance.push_back(s2);
    }
    return out;
}

}  // namespace heatcast::analysis
