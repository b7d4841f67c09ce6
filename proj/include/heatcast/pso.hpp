#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

#include "heatcast/parallel.hpp"
#include "heatcast/rng.hpp"

namespace heatcast::pso {

inline constexpr std::size_t kDims = 3;
using Position = std::array<double, kDims>;

struct PsoConfig {
    std::size_t n_particles = 20;
    std::size_t n_iterations = 50;
    double inertia = 1.0;
    double c1 = 2.0;  // cognitive weight
    double c2 = 2.0;  // social weight
    // Per-dimension search ranges, positive reals. The search itself runs in
    // log10 space: these ranges span many decades and multiplicative moves
    // are the natural geometry for them.
    std::array<std::pair<double, double>, kDims> bounds{{
        {1e-3, 1e5},   // regularization C
        {1e-8, 1e-1},  // tube half-width epsilon
        {1e-3, 1e3},   // kernel width gamma
    }};
    std::uint64_t rng_seed = 1;
};

struct IterationBest {
    Position position;  // linear (de-logged) coordinates
    double fitness;
};

struct PsoResult {
    Position best_position;  // linear coordinates, inside the bounds
    double best_fitness = std::numeric_limits<double>::infinity();
    // Global best after initialization (entry 0) and after every iteration,
    // so history.size() == n_iterations + 1 and fitness is non-increasing.
    std::vector<IterationBest> history;
    std::size_t fitness_evaluations = 0;
};

/**
 * Gbest particle swarm over a 3-D box, searched in log10 coordinates.
 *
 * Update rule, per particle i and iteration:
 *   v <- w*v + c1*r1*(pbest_i - p) + c2*r2*(gbest - p)
 *   p <- p + v
 * r1 and r2 are two scalar uniforms drawn per particle per iteration (not
 * per dimension), so each random kick points along the line towards the
 * attractor. Velocities are clamped per dimension to half the (log-space)
 * box width; positions are clamped to the box with the offending velocity
 * component zeroed. Initial positions are uniform in the box, initial
 * velocities zero.
 *
 * Determinism: all r1/r2 pairs for an iteration are drawn from the single
 * RNG stream in particle order before any update runs, and best-reductions
 * scan particles in index order with strict-improvement ties, so results are
 * bit-identical for any n_threads. The fitness callback may therefore be
 * invoked concurrently; it must be safe to call from multiple threads.
 *
 * Fitness values that come back NaN are treated as +infinity so a single
 * diverged evaluation cannot poison the reduction.
 */
template <typename Fitness>
PsoResult optimize(Fitness&& fitness, const PsoConfig& cfg, unsigned n_threads = 1) {
    if (cfg.n_particles == 0) {
        throw std::invalid_argument("pso: n_particles must be at least 1");
    }
    for (const auto& [lo, hi] : cfg.bounds) {
        if (!(lo > 0.0) || !(hi > lo)) {
            throw std::invalid_argument(
                "pso: bounds must satisfy 0 < low < high in every dimension");
        }
    }

    std::array<double, kDims> lo{}, hi{}, vmax{};
    for (std::size_t d = 0; d < kDims; ++d) {
        lo[d] = std::log10(cfg.bounds[d].first);
        hi[d] = std::log10(cfg.bounds[d].second);
        vmax[d] = 0.5 * (hi[d] - lo[d]);
    }
    const auto delog = [](const Position& p) {
        Position out;
        for (std::size_t d = 0; d < kDims; ++d) out[d] = std::pow(10.0, p[d]);
        return out;
    };
    const auto sanitize = [](double f) {
        return std::isnan(f) ? std::numeric_limits<double>::infinity() : f;
    };

    const std::size_t n = cfg.n_particles;
    Rng rng(cfg.rng_seed);

    std::vector<Position> pos(n), vel(n, Position{}), pbest(n);
    std::vector<double> pbest_f(n), f(n);

    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t d = 0; d < kDims; ++d) {
            pos[i][d] = rng.uniform(lo[d], hi[d]);
        }
    }

    PsoResult result;
    heatcast::parallel_for(n, n_threads,
                         [&](std::size_t i) { f[i] = sanitize(fitness(delog(pos[i]))); });
    result.fitness_evaluations += n;

    std::size_t g = 0;
    for (std::size_t i = 0; i < n; ++i) {
        pbest[i] = pos[i];
        pbest_f[i] = f[i];
        if (f[i] < f[g]) g = i;
    }
    Position gbest = pbest[g];
    double gbest_f = pbest_f[g];
    result.history.push_back({delog(gbest), gbest_f});

    std::vector<std::array<double, 2>> r(n);
    for (std::size_t iter = 0; iter < cfg.n_iterations; ++iter) {
        // Draw every particle's randomness up front: the stream order is then
        // independent of evaluation order.
        for (std::size_t i = 0; i < n; ++i) {
            r[i][0] = rng.uniform01();
            r[i][1] = rng.uniform01();
        }
        heatcast::parallel_for(n, n_threads, [&](std::size_t i) {
            for (std::size_t d = 0; d < kDims; ++d) {
                double v = cfg.inertia * vel[i][d] +
                           cfg.c1 * r[i][0] * (pbest[i][d] - pos[i][d]) +
                           cfg.c2 * r[i][1] * (gbest[d] - pos[i][d]);
                v = std::clamp(v, -vmax[d], vmax[d]);
                double p = pos[i][d] + v;
                if (p < lo[d]) {
                    p = lo[d];
                    v = 0.0;
                } else if (p > hi[d]) {
                    p = hi[d];
                    v = 0.0;
                }
                vel[i][d] = v;
                pos[i][d] = p;
            }
            f[i] = sanitize(fitness(delog(pos[i])));
        });
        result.fitness_evaluations += n;

        for (std::size_t i = 0; i < n; ++i) {
            if (f[i] < pbest_f[i]) {
                pbest_f[i] = f[i];
                pbest[i] = pos[i];
            }
            if (pbest_f[i] < gbest_f) {
                gbest_f = pbest_f[i];
                gbest = pbest[i];
            }
        }
        result.history.push_back({delog(gbest), gbest_f});
    }

    result.best_position = delog(gbest);
    result.best_fitness = gbest_f;
    return result;
}

}  // namespace heatcast::pso
