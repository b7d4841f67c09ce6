#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace heatcast {

/// What a series' values measure. Determines which invariants apply:
/// kwh_accumulated series must be non-decreasing, kwh_per_step and
/// generic carry no ordering constraint.
enum class Unit {
    kwh_accumulated,
    kwh_per_step,
    deg_c,
    generic,  // derived/diagnostic series (decomposition components, residuals)
};

inline const char* unit_name(Unit u) {
    switch (u) {
        case Unit::kwh_accumulated: return "kwh_accumulated";
        case Unit::kwh_per_step: return "kwh_per_step";
        case Unit::deg_c: return "deg_c";
        case Unit::generic: return "generic";
    }
    return "unknown";
}

struct RawPoint {
    std::int64_t timestamp = 0;  // seconds since the Unix epoch, UTC
    double value = 0.0;

    bool operator==(const RawPoint&) const = default;
};

/**
 * Irregularly sampled measurements, as they come off a meter: strictly
 * increasing timestamps, finite values, arbitrary gaps between points.
 */
class RawSeries {
public:
    RawSeries(std::vector<RawPoint> points, Unit unit)
        : points_(std::move(points)), unit_(unit) {
        for (std::size_t i = 0; i < points_.size(); ++i) {
            if (!std::isfinite(points_[i].value)) {
                throw std::invalid_argument("RawSeries: non-finite value at row " +
                                            std::to_string(i));
            }
            if (i > 0 && points_[i].timestamp <= points_[i - 1].timestamp) {
                throw std::invalid_argument(
                    "RawSeries: timestamps not strictly increasing at row " +
                    std::to_string(i));
            }
        }
    }

    [[nodiscard]] const std::vector<RawPoint>& points() const { return points_; }
    [[nodiscard]] std::size_t size() const { return points_.size(); }
    [[nodiscard]] bool empty() const { return points_.empty(); }
    [[nodiscard]] Unit unit() const { return unit_; }
    [[nodiscard]] const RawPoint& operator[](std::size_t i) const { return points_[i]; }

    bool operator==(const RawSeries&) const = default;

private:
    std::vector<RawPoint> points_;
    Unit unit_;
};

/**
 * Evenly spaced samples: value i lives at start + i * step. Accumulated
 * energy series are required to be non-decreasing at construction, which is
 * also where counter resets and rollovers get rejected.
 */
class RegularSeries {
public:
    /// Empty diagnostic series; useful as a pre-assignment placeholder.
    RegularSeries() : start_(0), step_(1), unit_(Unit::generic) {}

    RegularSeries(std::int64_t start, std::int64_t step, std::vector<double> values,
                  Unit unit)
        : start_(start), step_(step), values_(std::move(values)), unit_(unit) {
        if (step_ <= 0) {
            throw std::invalid_argument("RegularSeries: step must be positive");
        }
        for (std::size_t i = 0; i < values_.size(); ++i) {
            if (!std::isfinite(values_[i])) {
                throw std::invalid_argument("RegularSeries: non-finite value at index " +
                                            std::to_string(i));
            }
            if (unit_ == Unit::kwh_accumulated && i > 0 &&
                values_[i] < values_[i - 1]) {
                throw std::invalid_argument(
                    "RegularSeries: accumulated energy decreases at index " +
                    std::to_string(i) + " (counter reset or corrupt data)");
            }
        }
    }

    [[nodiscard]] std::int64_t start() const { return start_; }
    [[nodiscard]] std::int64_t step() const { return step_; }
    [[nodiscard]] std::int64_t time_at(std::size_t i) const {
        return start_ + static_cast<std::int64_t>(i) * step_;
    }
    [[nodiscard]] const std::vector<double>& values() const { return values_; }
    [[nodiscard]] std::size_t size() const { return values_.size(); }
    [[nodiscard]] bool empty() const { return values_.empty(); }
    [[nodiscard]] Unit unit() const { return unit_; }
    [[nodiscard]] double operator[](std::size_t i) const { return values_[i]; }

    bool operator==(const RegularSeries&) const = default;

private:
    std::int64_t start_;
    std::int64_t step_;
    std::vector<double> values_;
    Unit unit_;
};

/**
 * Piecewise-linear resampling of a raw series onto a regular grid.
 *
 * Grid instants that coincide with a raw timestamp return that raw value
 * bit-for-bit (no arithmetic is applied). Grid instants outside
 * [first, last] raw timestamp are an error: extrapolating meter data
 * fabricates readings.
 */
inline RegularSeries resample(const RawSeries& raw, std::int64_t start,
                              std::int64_t step, std::size_t n) {
    if (step <= 0) throw std::invalid_argument("resample: step must be positive");
    if (n == 0) throw std::invalid_argument("resample: n must be at least 1");
    if (raw.empty()) throw std::invalid_argument("resample: raw series is empty");

    const auto& pts = raw.points();
    const std::int64_t grid_end = start + static_cast<std::int64_t>(n - 1) * step;
    if (start < pts.front().timestamp) {
        throw std::invalid_argument(
            "resample: grid starts before the first raw sample (refusing to "
            "extrapolate)");
    }
    if (grid_end > pts.back().timestamp) {
        throw std::invalid_argument(
            "resample: grid extends past the last raw sample (refusing to "
            "extrapolate)");
    }

    std::vector<double> out;
    out.reserve(n);
    std::size_t hi = 0;  // first raw index with timestamp >= grid instant
    for (std::size_t i = 0; i < n; ++i) {
        const std::int64_t t = start + static_cast<std::int64_t>(i) * step;
        while (pts[hi].timestamp < t) ++hi;
        if (pts[hi].timestamp == t) {
            out.push_back(pts[hi].value);
            continue;
        }
        const RawPoint& a = pts[hi - 1];
        const RawPoint& b = pts[hi];
        const double w = static_cast<double>(t - a.timestamp) /
                         static_cast<double>(b.timestamp - a.timestamp);
        out.push_back(a.value + w * (b.value - a.value));
    }
    return RegularSeries(start, step, std::move(out), raw.unit());
}

/// Running sum of a per-step load series: out[i] = sum of values[0..i].
/// Integration smooths sampling noise before model fitting.
inline RegularSeries accumulate(const RegularSeries& load) {
    if (load.unit() != Unit::kwh_per_step) {
        throw std::invalid_argument("accumulate: input must be a per-step load series");
    }
    std::vector<double> out;
    out.reserve(load.size());
    double sum = 0.0;
    for (double v : load.values()) {
        if (v < 0.0) {
            throw std::invalid_argument("accumulate: negative load value");
        }
        sum += v;
        out.push_back(sum);
    }
    return RegularSeries(load.start(), load.step(), std::move(out),
                         Unit::kwh_accumulated);
}

/**
 * First difference of an accumulated series, optionally re-aligned tau steps
 * earlier in time.
 *
 * The plain difference d[j] = acc[j+1] - acc[j] naturally carries the
 * timestamp of the interval's right edge. A model trained on lagged features
 * effectively predicts the increment one step late; shifting by tau drops the
 * first tau differences and relabels the rest tau steps earlier, so
 * out[k] = acc[k+tau+1] - acc[k+tau] at time start + (k+1) * step.
 * Output length is size - 1 - tau.
 */
inline RegularSeries differentiate_shift(const RegularSeries& acc, std::size_t tau = 0) {
    if (acc.unit() != Unit::kwh_accumulated) {
        throw std::invalid_argument("differentiate_shift: input must be accumulated energy");
    }
    if (acc.size() < 2 + tau) {
        throw std::invalid_argument(
            "differentiate_shift: need at least tau + 2 samples, have " +
            std::to_string(acc.size()));
    }
    const std::size_t n_out = acc.size() - 1 - tau;
    std::vector<double> out;
    out.reserve(n_out);
    for (std::size_t k = 0; k < n_out; ++k) {
        out.push_back(acc[k + tau + 1] - acc[k + tau]);
    }
    return RegularSeries(acc.start() + acc.step(), acc.step(), std::move(out),
                         Unit::kwh_per_step);
}

/// Contiguous slice [first, first + count) of a regular series.
inline RegularSeries slice(const RegularSeries& s, std::size_t first, std::size_t count) {
    if (first + count > s.size()) {
        throw std::invalid_argument("slice: range exceeds series length");
    }
    std::vector<double> vals(s.values().begin() + static_cast<std::ptrdiff_t>(first),
                             s.values().begin() + static_cast<std::ptrdiff_t>(first + count));
    return RegularSeries(s.time_at(first), s.step(), std::move(vals), s.unit());
}

}  // namespace heatcast
