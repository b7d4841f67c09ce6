#pragma once

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace heatcast {

struct NelderMeadOptions {
    std::size_t max_iterations = 500;
    double diameter_tol = 1e-8;  // stop when the simplex fits in this box
    double reflection = 1.0;
    double expansion = 2.0;
    double contraction = 0.5;
    double shrink = 0.5;
};

struct NelderMeadResult {
    std::vector<double> x;
    double f = 0.0;
    std::size_t iterations = 0;
    bool converged = false;  // simplex collapsed below diameter_tol
};

/**
 * Derivative-free simplex minimizer (Nelder-Mead).
 *
 * The initial simplex is the start point plus one vertex per coordinate,
 * displaced by `step` along that axis. Vertices are ordered by value with a
 * stable sort, so equal values keep their insertion order and the whole
 * procedure is deterministic. Infinite objective values are legal and simply
 * rank worst; the objective may use them to reject out-of-domain points.
 */
template <typename F>
NelderMeadResult nelder_mead(F&& f, std::vector<double> start, double step = 0.1,
                             NelderMeadOptions opts = {}) {
    const std::size_t dim = start.size();
    if (dim == 0) throw std::invalid_argument("nelder_mead: empty start point");

    std::vector<std::vector<double>> simplex;
    simplex.reserve(dim + 1);
    simplex.push_back(start);
    for (std::size_t d = 0; d < dim; ++d) {
        auto v = start;
        v[d] += step;
        simplex.push_back(std::move(v));
    }
    std::vector<double> fv(dim + 1);
    for (std::size_t k = 0; k <= dim; ++k) fv[k] = f(simplex[k]);

    std::vector<std::size_t> order(dim + 1);
    const auto sort_order = [&]() {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
    };
    const auto diameter = [&]() {
        double dia = 0.0;
        for (std::size_t d = 0; d < dim; ++d) {
            double lo = simplex[0][d], hi = simplex[0][d];
            for (std::size_t k = 1; k <= dim; ++k) {
                lo = std::min(lo, simplex[k][d]);
                hi = std::max(hi, simplex[k][d]);
            }
            dia = std::max(dia, hi - lo);
        }
        return dia;
    };

    NelderMeadResult result;
    for (; result.iterations < opts.max_iterations; ++result.iterations) {
        sort_order();
        if (diameter() < opts.diameter_tol) {
            result.converged = true;
            break;
        }
        const std::size_t best = order[0];
        const std::size_t worst = order[dim];
        const std::size_t second_worst = order[dim - 1];

        std::vector<double> centroid(dim, 0.0);
        for (std::size_t k = 0; k <= dim; ++k) {
            if (k == worst) continue;
            for (std::size_t d = 0; d < dim; ++d) centroid[d] += simplex[k][d];
        }
        for (double& c : centroid) c /= static_cast<double>(dim);

        const auto point_along = [&](double t) {
            std::vector<double> p(dim);
            for (std::size_t d = 0; d < dim; ++d) {
                p[d] = centroid[d] + t * (centroid[d] - simplex[worst][d]);
            }
            return p;
        };

        auto reflected = point_along(opts.reflection);
        const double fr = f(reflected);
        if (fr < fv[best]) {
            auto expanded = point_along(opts.expansion);
            const double fe = f(expanded);
            if (fe < fr) {
                simplex[worst] = std::move(expanded);
                fv[worst] = fe;
            } else {
                simplex[worst] = std::move(reflected);
                fv[worst] = fr;
            }
            continue;
        }
        if (fr < fv[second_worst]) {
            simplex[worst] = std::move(reflected);
            fv[worst] = fr;
            continue;
        }
        // Contract towards the better side of the worst vertex.
        if (fr < fv[worst]) {
            auto outside = point_along(opts.contraction);
            const double fc = f(outside);
            if (fc <= fr) {
                simplex[worst] = std::move(outside);
                fv[worst] = fc;
                continue;
            }
        } else {
            auto inside = point_along(-opts.contraction);
            const double fc = f(inside);
            if (fc < fv[worst]) {
                simplex[worst] = std::move(inside);
                fv[worst] = fc;
                continue;
            }
        }
        // Shrink everything towards the best vertex.
        for (std::size_t k = 0; k <= dim; ++k) {
            if (k == best) continue;
            for (std::size_t d = 0; d < dim; ++d) {
                simplex[k][d] =
                    simplex[best][d] + opts.shrink * (simplex[k][d] - simplex[best][d]);
            }
            fv[k] = f(simplex[k]);
        }
    }

    sort_order();
    result.x = simplex[order[0]];
    result.f = fv[order[0]];
    return result;
}

}  // namespace heatcast
