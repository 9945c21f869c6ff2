#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "geometry.hpp"
#include "metrics.hpp"
#include "models.hpp"
#include "random.hpp"

namespace ppapprox {

/// Mean nearest-neighbour d0 distance; 1 for patterns with fewer than two points.
inline double nn_statistic(const PointPattern& rho) {
    const std::size_t n = rho.size();
    if (n <= 1) return 1.0;
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double best = 1.0;
        for (std::size_t j = 0; j < n; ++j)
            if (j != i) best = std::min(best, d0(rho[i], rho[j]));
        sum += best;
    }
    return sum / static_cast<double>(n);
}

/// The statistic of the transformed pattern restricted to J.
inline double transformed_statistic(const PointPattern& rho, const SpaceConfig& space, double w, double T) {
    const Box J = window_J(space);
    PointPattern img(rho.dim());
    for (std::size_t i = 0; i < rho.size(); ++i) {
        Point y = apply_transform(space, w, T, rho[i]);
        if (J.contains(y)) img.push_back(y);
    }
    return nn_statistic(img);
}

inline double smooth_indicator(double t, double slope, double x) {
    if (!(slope > 0.0)) throw std::invalid_argument("smooth_indicator needs slope > 0");
    if (x <= t) return 1.0;
    if (x >= t + 1.0 / slope) return 0.0;
    return 1.0 - slope * (x - t);
}

/// Kissing numbers in dimensions 1 to 8.
inline int kissing_number(int d) {
    static constexpr int table[] = {2, 6, 12, 24, 40, 72, 126, 240};
    if (d < 1 || d > 8) throw std::invalid_argument("kissing number table covers dimensions 1 to 8");
    return table[d - 1];
}

/// A point is the nearest neighbour of at most kissing(D) others, in either pattern of a matched pair.
inline double default_lipschitz_LD(int d) { return 1.0 + 2.0 * kissing_number(d); }

struct TestConfig {
    double alpha = 0.05;
    double slope = 50.0;
    double lipschitz_LD = 0.0;  ///< 0 selects the default for D
    double epsilon = 0.0;
    double null_ell = 1.0;
    SpaceConfig space;
    double T = 1.0;
    double w = 1.0;
    std::size_t replicates = 2000;
    std::uint64_t seed = 0;

    double LD() const { return lipschitz_LD > 0.0 ? lipschitz_LD : default_lipschitz_LD(space.dim()); }
    double target() const { return alpha - slope * LD() * epsilon; }
};

struct Calibration {
    double t_alpha = 0.0;
    double target = 0.0;
    std::vector<double> null_stats;

    /// Empirical mean of f_{t,slope} over the null sample.
    double smoothed_cdf(double t, double slope) const {
        double s = 0.0;
        for (double u : null_stats) s += smooth_indicator(t, slope, u);
        return s / static_cast<double>(null_stats.size());
    }
};

/// Statistics of `n` patterns of `model` on J_T, stream `tag`.
inline std::vector<double> simulate_statistics(const ProcessModel& model, double w, double T, std::size_t n,
                                               std::uint64_t seed, std::uint64_t tag, unsigned jobs = 1) {
    const Box window = window_JT(model.space, w, T);
    std::vector<double> out(n);
    parallel_for(n, jobs, [&](std::size_t i) {
        out[i] = transformed_statistic(sample(model, window, stream_seed(seed, tag, i)), model.space, w, T);
    });
    return out;
}

/// Solves mean f_{t,slope}(U(eta)) = alpha - slope L_D eps by bisection on a fixed null sample.
inline Calibration calibrate_from_sample(const TestConfig& cfg, std::vector<double> null_stats) {
    if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0, 1)");
    if (!(cfg.slope > 0.0)) throw std::invalid_argument("slope must be > 0");
    if (null_stats.empty()) throw std::invalid_argument("empty null sample");
    Calibration c;
    c.target = cfg.target();
    if (!(c.target > 0.0)) throw std::invalid_argument("infeasible test: alpha - slope L_D eps <= 0");
    if (!(c.target < 1.0)) throw std::invalid_argument("calibration target outside the empirical range");
    std::sort(null_stats.begin(), null_stats.end());
    c.null_stats = std::move(null_stats);
    double lo = c.null_stats.front() - 1.0 / cfg.slope;  // smoothed cdf = 0
    double hi = c.null_stats.back();                     // smoothed cdf = 1
    while (hi - lo > 1e-9) {
        const double mid = 0.5 * (lo + hi);
        if (c.smoothed_cdf(mid, cfg.slope) < c.target)
            lo = mid;
        else
            hi = mid;
    }
    c.t_alpha = hi;
    return c;
}

inline Calibration calibrate_critical_value(const TestConfig& cfg, unsigned jobs = 1) {
    cfg.space.validate();
    if (!(cfg.null_ell > 0.0)) throw std::invalid_argument("null intensity must be > 0");
    if (!(cfg.target() > 0.0)) throw std::invalid_argument("infeasible test: alpha - slope L_D eps <= 0");
    const ProcessModel null_model{cfg.space, HomogeneousPoisson{cfg.null_ell}};
    return calibrate_from_sample(
        cfg, simulate_statistics(null_model, cfg.w, cfg.T, cfg.replicates, cfg.seed, stream_tag("lrd-null"), jobs));
}

struct TestResult {
    double statistic = 0.0;
    double t_alpha = 0.0;
    bool reject = false;
    double size_deficit_bound = 0.0;  ///< bound on alpha - P[reject] under the null
};

inline TestResult run_test(const TestConfig& cfg, const Calibration& cal, const PointPattern& observed) {
    TestResult r;
    r.statistic = transformed_statistic(observed, cfg.space, cfg.w, cfg.T);
    r.t_alpha = cal.t_alpha;
    r.reject = r.statistic < cal.t_alpha;
    r.size_deficit_bound = cal.smoothed_cdf(cal.t_alpha, cfg.slope) -
                           cal.smoothed_cdf(cal.t_alpha - 1.0 / cfg.slope, cfg.slope) +
                           2.0 * cfg.slope * cfg.LD() * cfg.epsilon;
    return r;
}

/// Fraction of `stats` strictly below t.
inline double rejection_rate(const std::vector<double>& stats, double t) {
    if (stats.empty()) return 0.0;
    std::size_t k = 0;
    for (double u : stats) k += u < t ? 1 : 0;
    return static_cast<double>(k) / static_cast<double>(stats.size());
}

struct LipschitzSearch {
    std::size_t pairs = 0;
    std::size_t violations = 0;
    double max_ratio = 0.0;
    PointPattern worst_a, worst_b;
};

/// Falsification search for |U(a) - U(b)| <= L d1(a, b) over random equal-cardinality pairs in [0,1]^D.
/// Half the pairs perturb a subset of points slightly, where the ratio is largest.
inline LipschitzSearch lipschitz_search(int dim, double L, std::size_t pairs, std::size_t max_card,
                                        std::uint64_t seed) {
    Rng rng = make_rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_int_distribution<std::size_t> card(2, max_card);
    LipschitzSearch res;
    res.pairs = pairs;
    Point x(dim);
    for (std::size_t p = 0; p < pairs; ++p) {
        const std::size_t n = card(rng);
        const double spread = p % 3 == 0 ? 1.0 : 0.1;
        PointPattern a(dim), b(dim);
        for (std::size_t i = 0; i < n; ++i) {
            for (int d = 0; d < dim; ++d) x[d] = spread * unit(rng);
            a.push_back(x);
            if (p % 2 == 0) {
                for (int d = 0; d < dim; ++d) x[d] = spread * unit(rng);
            } else if (unit(rng) < 0.3) {
                for (int d = 0; d < dim; ++d) x[d] += 0.01 * spread * (unit(rng) - 0.5);
            }
            b.push_back(x);
        }
        const double dist = d1(a, b);
        if (dist <= 0.0) continue;
        const double ratio = std::fabs(nn_statistic(a) - nn_statistic(b)) / dist;
        if (ratio > L * (1.0 + 1e-12)) ++res.violations;
        if (ratio > res.max_ratio) {
            res.max_ratio = ratio;
            res.worst_a = a;
            res.worst_b = b;
        }
    }
    return res;
}

}  // namespace ppapprox
