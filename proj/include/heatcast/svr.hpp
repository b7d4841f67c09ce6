#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "heatcast/csv.hpp"

namespace heatcast::svr {

/// Kernel/regularization settings for epsilon-insensitive regression.
struct Hyperparams {
    double c = 1.0;        // box constraint, > 0
    double gamma = 1.0;    // RBF width, > 0
    double epsilon = 0.1;  // insensitive-tube half-width, >= 0

    void validate() const {
        if (!(c > 0.0) || !std::isfinite(c)) {
            throw std::invalid_argument("svr: C must be a positive finite number");
        }
        if (!(gamma > 0.0) || !std::isfinite(gamma)) {
            throw std::invalid_argument("svr: gamma must be a positive finite number");
        }
        if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) {
            throw std::invalid_argument("svr: epsilon must be finite and >= 0");
        }
    }
};

/// One training example: previous accumulated reading, previous outdoor
/// temperature, and the accumulated reading to predict.
struct FeatureRow {
    double h_lag1 = 0.0;      // accumulated energy at t-1
    double theta_lag1 = 0.0;  // outdoor temperature at t-1
    double target = 0.0;      // accumulated energy at t
};

using Point = std::array<double, 2>;

inline Point features(const FeatureRow& r) { return {r.h_lag1, r.theta_lag1}; }

/// z-score scaler. A constant column gets stddev 1 so transform degenerates
/// to mean-removal instead of dividing by zero.
struct Scaler {
    double mean = 0.0;
    double stddev = 1.0;

    [[nodiscard]] double transform(double x) const { return (x - mean) / stddev; }
    [[nodiscard]] double invert(double z) const { return mean + z * stddev; }
};

inline Scaler fit_scaler(std::span<const double> xs) {
    if (xs.empty()) throw std::invalid_argument("fit_scaler: empty input");
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    double var = 0.0;
    for (double x : xs) var += (x - mean) * (x - mean);
    var /= static_cast<double>(xs.size());
    const double sd = std::sqrt(var);
    return Scaler{mean, sd > 0.0 ? sd : 1.0};
}

inline double rbf_kernel(const Point& a, const Point& b, double gamma) {
    const double d0 = a[0] - b[0];
    const double d1 = a[1] - b[1];
    return std::exp(-gamma * (d0 * d0 + d1 * d1));
}

struct TrainOptions {
    double tol = 1e-3;           // KKT violation gap at which to stop
    std::size_t max_updates = 0; // pair updates before giving up; 0 = 10 * m^2
};

/// Optional solver instrumentation, filled by train() when passed in.
struct SmoDiagnostics {
    bool record_objective = false;     // in: keep a per-update objective trace
    std::size_t updates = 0;           // out: pair updates performed
    double kkt_gap = 0.0;              // out: final maximal KKT violation
    std::vector<double> objective;     // out: dual objective after each update
};

/**
 * Trained model in standardized coordinates. support_vectors hold
 * standardized inputs, dual_coefs the signed weights (alpha - alpha*, all in
 * [-C, C], summing to ~0), bias the offset of the standardized decision
 * function. The scalers that produced those coordinates travel with the
 * model so predict() can accept raw inputs.
 */
struct SvrModel {
    std::vector<Point> support_vectors;
    std::vector<double> dual_coefs;
    double bias = 0.0;
    Hyperparams hyper;
    std::array<Scaler, 2> feature_scaler{};
    Scaler target_scaler{};
    bool converged = true;
};

/// Decision function in standardized coordinates.
inline double predict_standardized(const SvrModel& m, const Point& z) {
    double acc = m.bias;
    for (std::size_t k = 0; k < m.support_vectors.size(); ++k) {
        acc += m.dual_coefs[k] * rbf_kernel(m.support_vectors[k], z, m.hyper.gamma);
    }
    return acc;
}

/// Prediction for a raw (unscaled) input point.
inline double predict(const SvrModel& m, const Point& x_raw) {
    const Point z{m.feature_scaler[0].transform(x_raw[0]),
                  m.feature_scaler[1].transform(x_raw[1])};
    return m.target_scaler.invert(predict_standardized(m, z));
}

/**
 * Trains by sequential minimal optimization on the dual.
 *
 * The dual is expressed over 2m variables a[0..2m): a[p] is the "up" weight
 * of row p (pushes the prediction up), a[p+m] the "down" weight, both in
 * [0, C], with sum(a_up) == sum(a_down). Row p's net coefficient is
 * beta_p = a[p] - a[p+m]. Each step picks the maximal violating pair (the
 * steepest feasible ascent direction among the KKT conditions), solves the
 * two-variable subproblem exactly, clips to the box, and updates the
 * gradient. Convergence is declared when the largest violation drops below
 * tol; hitting max_updates first yields the best iterate with
 * converged == false, never an exception.
 *
 * Inputs are expected standardized; pass the scalers used so they can be
 * embedded in the returned model. Identity scalers make the model operate on
 * raw coordinates.
 */
inline SvrModel train(std::span<const FeatureRow> rows, const Hyperparams& hyper,
                      const std::array<Scaler, 2>& feature_scaler,
                      const Scaler& target_scaler, TrainOptions opts = {},
                      SmoDiagnostics* diag = nullptr) {
    hyper.validate();
    const std::size_t m = rows.size();
    if (m < 2) {
        throw std::invalid_argument("svr::train: need at least 2 rows");
    }
    for (std::size_t i = 0; i < m; ++i) {
        if (!std::isfinite(rows[i].h_lag1) || !std::isfinite(rows[i].theta_lag1) ||
            !std::isfinite(rows[i].target)) {
            throw std::invalid_argument("svr::train: non-finite value in row " +
                                        std::to_string(i));
        }
    }
    if (!(opts.tol > 0.0)) {
        throw std::invalid_argument("svr::train: tol must be positive");
    }
    const std::size_t max_updates =
        opts.max_updates > 0 ? opts.max_updates : 10 * m * m;
    const double C = hyper.c;
    const double eps = hyper.epsilon;

    std::vector<double> K(m * m);
    for (std::size_t i = 0; i < m; ++i) {
        K[i * m + i] = 1.0;
        for (std::size_t j = i + 1; j < m; ++j) {
            const double k = rbf_kernel(features(rows[i]), features(rows[j]), hyper.gamma);
            K[i * m + j] = k;
            K[j * m + i] = k;
        }
    }

    const std::size_t n = 2 * m;
    std::vector<double> a(n, 0.0);
    std::vector<double> G(n);  // gradient of the (minimized) dual
    for (std::size_t p = 0; p < m; ++p) {
        G[p] = eps - rows[p].target;
        G[p + m] = eps + rows[p].target;
    }
    const auto sign_of = [m](std::size_t s) { return s < m ? 1.0 : -1.0; };

    // Dual objective in beta form, used only for the optional trace.
    const auto dual_objective = [&]() {
        std::vector<double> beta(m);
        for (std::size_t p = 0; p < m; ++p) beta[p] = a[p] - a[p + m];
        double obj = 0.0;
        for (std::size_t p = 0; p < m; ++p) {
            obj += rows[p].target * beta[p] - eps * std::abs(beta[p]);
            double kb = 0.0;
            for (std::size_t q = 0; q < m; ++q) kb += K[p * m + q] * beta[q];
            obj -= 0.5 * beta[p] * kb;
        }
        return obj;
    };

    constexpr double kInf = std::numeric_limits<double>::infinity();
    std::size_t updates = 0;
    bool converged = false;
    double up_best = -kInf, low_best = kInf;

    for (;;) {
        // Maximal violating pair: i maximizes -z_s * G[s] over the set still
        // allowed to increase, j minimizes it over the set allowed to
        // decrease, lowest index on ties. Each half of the split weights
        // carries a fixed sign, so the scan runs as a branch-free value
        // reduction per half (ineligible entries masked to the identity)
        // followed by a short first-match index recovery. Strict comparisons
        // plus >=/<= half preference reproduce the sequential
        // lowest-index-tie scan exactly.
        const double* ga = G.data();
        const double* aa = a.data();
        double up1 = -kInf, lo1 = kInf, up2 = -kInf, lo2 = kInf;
#pragma omp simd reduction(max : up1) reduction(min : lo1)
        for (std::size_t s = 0; s < m; ++s) {
            const double v = -ga[s];
            const double vu = aa[s] < C ? v : -kInf;
            const double vl = aa[s] > 0.0 ? v : kInf;
            up1 = vu > up1 ? vu : up1;
            lo1 = vl < lo1 ? vl : lo1;
        }
#pragma omp simd reduction(max : up2) reduction(min : lo2)
        for (std::size_t s = m; s < n; ++s) {
            const double v = ga[s];
            const double vu = aa[s] > 0.0 ? v : -kInf;
            const double vl = aa[s] < C ? v : kInf;
            up2 = vu > up2 ? vu : up2;
            lo2 = vl < lo2 ? vl : lo2;
        }
        up_best = up2 > up1 ? up2 : up1;
        low_best = lo2 < lo1 ? lo2 : lo1;
        std::size_t i = n, j = n;
        if (up_best > -kInf) {
            if (up1 >= up2) {
                for (std::size_t s = 0; s < m; ++s) {
                    if (aa[s] < C && -ga[s] == up_best) {
                        i = s;
                        break;
                    }
                }
            } else {
                for (std::size_t s = m; s < n; ++s) {
                    if (aa[s] > 0.0 && ga[s] == up_best) {
                        i = s;
                        break;
                    }
                }
            }
        }
        if (low_best < kInf) {
            if (lo1 <= lo2) {
                for (std::size_t s = 0; s < m; ++s) {
                    if (aa[s] > 0.0 && -ga[s] == low_best) {
                        j = s;
                        break;
                    }
                }
            } else {
                for (std::size_t s = m; s < n; ++s) {
                    if (aa[s] < C && ga[s] == low_best) {
                        j = s;
                        break;
                    }
                }
            }
        }
        if (i == n || j == n || up_best - low_best <= opts.tol) {
            converged = true;
            break;
        }
        if (updates >= max_updates) {
            break;
        }

        const std::size_t pi = i < m ? i : i - m;
        const std::size_t pj = j < m ? j : j - m;
        const double Kij = K[pi * m + pj];
        // RBF diagonal is 1, so the curvature along the pair direction is
        // 2 - 2*Kij in both sign cases; guard against a flat direction.
        const double quad = std::max(2.0 - 2.0 * Kij, 1e-12);
        const double old_ai = a[i], old_aj = a[j];

        if ((i < m) != (j < m)) {
            const double delta = (-G[i] - G[j]) / quad;
            const double diff = a[i] - a[j];
            a[i] += delta;
            a[j] += delta;
            if (diff > 0.0) {
                if (a[j] < 0.0) {
                    a[j] = 0.0;
                    a[i] = diff;
                }
                if (a[i] > C) {
                    a[i] = C;
                    a[j] = C - diff;
                }
            } else {
                if (a[i] < 0.0) {
                    a[i] = 0.0;
                    a[j] = -diff;
                }
                if (a[j] > C) {
                    a[j] = C;
                    a[i] = C + diff;
                }
            }
        } else {
            const double delta = (G[i] - G[j]) / quad;
            const double sum = a[i] + a[j];
            a[i] -= delta;
            a[j] += delta;
            if (sum > C) {
                if (a[i] > C) {
                    a[i] = C;
                    a[j] = sum - C;
                }
                if (a[j] > C) {
                    a[j] = C;
                    a[i] = sum - C;
                }
            } else {
                if (a[j] < 0.0) {
                    a[j] = 0.0;
                    a[i] = sum;
                }
                if (a[i] < 0.0) {
                    a[i] = 0.0;
                    a[j] = sum;
                }
            }
        }

        const double da_i = a[i] - old_ai;
        const double da_j = a[j] - old_aj;
        // Signed step sizes fold the +/- of each half into the (exact)
        // multiplications, leaving two vectorizable passes over the rows.
        const double ci = sign_of(i) * da_i;
        const double cj = sign_of(j) * da_j;
        const double* Ki = K.data() + pi * m;
        const double* Kj = K.data() + pj * m;
        double* gu = G.data();
        double* gl = G.data() + m;
#pragma omp simd
        for (std::size_t s = 0; s < m; ++s) {
            const double d = Ki[s] * ci + Kj[s] * cj;
            gu[s] += d;
            gl[s] -= d;
        }
        ++updates;
        if (diag != nullptr && diag->record_objective) {
            diag->objective.push_back(dual_objective());
        }
    }

    // Bias: average the KKT bound over the free variables when any exist,
    // otherwise take the midpoint of the violation interval.
    double bias = 0.0;
    {
        double sum_free = 0.0;
        std::size_t n_free = 0;
        for (std::size_t s = 0; s < n; ++s) {
            if (a[s] > 0.0 && a[s] < C) {
                sum_free += -sign_of(s) * G[s];
                ++n_free;
            }
        }
        if (n_free > 0) {
            bias = sum_free / static_cast<double>(n_free);
        } else if (std::isfinite(up_best) && std::isfinite(low_best)) {
            bias = 0.5 * (up_best + low_best);
        }
    }

    SvrModel model;
    model.hyper = hyper;
    model.feature_scaler = feature_scaler;
    model.target_scaler = target_scaler;
    model.bias = bias;
    model.converged = converged;
    for (std::size_t p = 0; p < m; ++p) {
        const double beta = a[p] - a[p + m];
        if (beta != 0.0) {
            model.support_vectors.push_back(features(rows[p]));
            model.dual_coefs.push_back(beta);
        }
    }
    if (diag != nullptr) {
        diag->updates = updates;
        diag->kkt_gap = up_best - low_best;
    }
    return model;
}

/// Positive parts of the tube violations |f(x_p) - y_p| - epsilon, in
/// standardized coordinates, one entry per row.
inline std::vector<double> tube_slacks(const SvrModel& m,
                                       std::span<const FeatureRow> rows) {
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& r : rows) {
        const double res = std::abs(predict_standardized(m, features(r)) - r.target);
        out.push_back(std::max(0.0, res - m.hyper.epsilon));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Serialization. Keys are emitted sorted (nlohmann's default object order),
// doubles as shortest round-trip decimals, so identical models produce
// identical bytes.
// ---------------------------------------------------------------------------

inline nlohmann::json to_json(const Scaler& s) {
    return {{"mean", s.mean}, {"stddev", s.stddev}};
}

inline Scaler scaler_from_json(const nlohmann::json& j) {
    return Scaler{j.at("mean").get<double>(), j.at("stddev").get<double>()};
}

inline nlohmann::json to_json(const SvrModel& m) {
    nlohmann::json sv = nlohmann::json::array();
    for (const auto& p : m.support_vectors) sv.push_back({p[0], p[1]});
    return {
        {"format", "heatcast-svr-model"},
        {"version", 1},
        {"hyperparams",
         {{"c", m.hyper.c}, {"gamma", m.hyper.gamma}, {"epsilon", m.hyper.epsilon}}},
        {"support_vectors", std::move(sv)},
        {"dual_coefs", m.dual_coefs},
        {"bias", m.bias},
        {"feature_scaler",
         nlohmann::json::array({to_json(m.feature_scaler[0]), to_json(m.feature_scaler[1])})},
        {"target_scaler", to_json(m.target_scaler)},
        {"converged", m.converged},
    };
}

inline SvrModel model_from_json(const nlohmann::json& j) {
    if (j.value("format", "") != "heatcast-svr-model") {
        throw std::runtime_error("svr: not a model file (bad format tag)");
    }
    if (j.value("version", 0) != 1) {
        throw std::runtime_error("svr: unsupported model version");
    }
    SvrModel m;
    const auto& hp = j.at("hyperparams");
    m.hyper.c = hp.at("c").get<double>();
    m.hyper.gamma = hp.at("gamma").get<double>();
    m.hyper.epsilon = hp.at("epsilon").get<double>();
    m.hyper.validate();
    for (const auto& p : j.at("support_vectors")) {
        m.support_vectors.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
    }
    m.dual_coefs = j.at("dual_coefs").get<std::vector<double>>();
    if (m.dual_coefs.size() != m.support_vectors.size()) {
        throw std::runtime_error("svr: dual_coefs/support_vectors size mismatch");
    }
    m.bias = j.at("bias").get<double>();
    m.feature_scaler[0] = scaler_from_json(j.at("feature_scaler").at(0));
    m.feature_scaler[1] = scaler_from_json(j.at("feature_scaler").at(1));
    m.target_scaler = scaler_from_json(j.at("target_scaler"));
    m.converged = j.value("converged", true);
    return m;
}

inline void save_model(const std::filesystem::path& path, const SvrModel& m) {
    write_text_file(path, to_json(m).dump(2) + "\n");
}

inline SvrModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open model file '" + path.string() + "'");
    }
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("malformed model file '" + path.string() +
                                 "': " + e.what());
    }
    try {
        return model_from_json(j);
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("malformed model file '" + path.string() +
                                 "': " + e.what());
    }
}

}  // namespace heatcast::svr
