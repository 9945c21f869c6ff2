#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "geometry.hpp"
#include "metrics.hpp"
#include "models.hpp"
#include "random.hpp"

namespace ppapprox {

/// log+(x) = max(ln x, 0).
inline double log_plus(double x) { return x > 1.0 ? std::log(x) : 0.0; }

struct DependencyGraphSpec {
    std::size_t n = 0;
    std::vector<std::vector<std::size_t>> strong;  ///< strong[i]: strong neighbours of i

    static DependencyGraphSpec empty(std::size_t n) { return {n, std::vector<std::vector<std::size_t>>(n)}; }

    void validate() const {
        if (strong.size() != n) throw std::invalid_argument("dependency graph: wrong neighbour list count");
        for (std::size_t i = 0; i < n; ++i) {
            std::vector<char> seen(n, 0);
            for (std::size_t j : strong[i]) {
                if (j >= n) throw std::invalid_argument("dependency graph: index out of range");
                if (j == i) throw std::invalid_argument("dependency graph: index listed as its own neighbour");
                if (seen[j]) throw std::invalid_argument("dependency graph: duplicate neighbour");
                seen[j] = 1;
            }
        }
    }

    /// Complement of {i} and the strong neighbours.
    std::vector<std::size_t> weak(std::size_t i) const {
        std::vector<char> mark(n, 0);
        mark[i] = 1;
        for (std::size_t j : strong[i]) mark[j] = 1;
        std::vector<std::size_t> out;
        for (std::size_t j = 0; j < n; ++j)
            if (!mark[j]) out.push_back(j);
        return out;
    }
};

struct IndicatorStats {
    std::vector<double> p;    ///< P(I_i = 1)
    std::vector<double> ez;   ///< E Z_i
    std::vector<double> eiz;  ///< E(I_i Z_i)
    std::vector<double> e;    ///< e_i
    double lambda = 0.0;

    // Monte Carlo standard errors; empty for exact statistics.
    std::vector<double> p_se, ez_se, eiz_se;

    std::size_t size() const { return p.size(); }

    void validate() const {
        const std::size_t n = p.size();
        if (ez.size() != n || eiz.size() != n || e.size() != n)
            throw std::invalid_argument("indicator stats: length mismatch");
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (!(p[i] >= 0.0 && p[i] <= 1.0) || !(ez[i] >= 0.0) || !(eiz[i] >= 0.0) || !(e[i] >= 0.0))
                throw std::invalid_argument("indicator stats: negative or out-of-range entry");
            s += p[i];
        }
        if (std::fabs(s - lambda) > 1e-12 * std::max(1.0, s))
            throw std::invalid_argument("indicator stats: lambda differs from the sum of p");
    }
};

/// The two sums shared by the local Stein bounds, skipping indices with p_i = 0.
struct SteinSums {
    double local = 0.0;  ///< sum of p_i^2 + p_i E Z_i + E(I_i Z_i)
    double mixing = 0.0; ///< sum of e_i
};

inline SteinSums stein_sums(const IndicatorStats& s) {
    s.validate();
    SteinSums out;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s.p[i] == 0.0) continue;
        out.local += s.p[i] * s.p[i] + s.p[i] * s.ez[i] + s.eiz[i];
        out.mixing += s.e[i];
    }
    return out;
}

inline double bound_thm_AA(const IndicatorStats& s) {
    if (!(s.lambda > 0.0)) throw std::invalid_argument("bound_thm_AA: lambda must be > 0");
    const SteinSums sums = stein_sums(s);
    return std::min(1.0, 1.0 / s.lambda) * sums.local + std::min(1.0, 1.0 / std::sqrt(s.lambda)) * sums.mixing;
}

inline double bound_prop_AC(double lam, double mu) {
    if (!(lam > 0.0) || !(mu > 0.0)) throw std::invalid_argument("bound_prop_AC: parameters must be > 0");
    return std::min({1.0, 1.0 / std::sqrt(lam), 1.0 / std::sqrt(mu)}) * std::fabs(lam - mu);
}

/// Factor in front of the local sum in the point-process Stein bound.
inline double stein_factor_pp(double lambda) {
    return std::min(1.0, 2.0 / lambda * (1.0 + 2.0 * log_plus(lambda / 2.0)));
}

inline double bound_thm_AD(const IndicatorStats& s) {
    if (!(s.lambda > 0.0)) throw std::invalid_argument("bound_thm_AD: lambda must be > 0");
    const SteinSums sums = stein_sums(s);
    return stein_factor_pp(s.lambda) * sums.local + std::min(1.0, 1.65 / std::sqrt(s.lambda)) * sums.mixing;
}

// Exact statistics by enumeration ------------------------------------------------

/// Joint pmf over {0,1}^n; bit i of the index is I_i.
using JointPmf = std::vector<double>;

inline void validate_joint(const JointPmf& joint, std::size_t n) {
    if (n > 20) throw std::invalid_argument("enumeration limited to n <= 20");
    if (joint.size() != (std::size_t{1} << n)) throw std::invalid_argument("joint pmf must have 2^n entries");
    double s = 0.0;
    for (double v : joint) {
        if (!(v >= 0.0)) throw std::invalid_argument("joint pmf has a negative entry");
        s += v;
    }
    if (std::fabs(s - 1.0) > 1e-10) throw std::invalid_argument("joint pmf does not sum to 1");
}

/// Marginal pmf of the sum W.
inline std::vector<double> sum_pmf(const JointPmf& joint, std::size_t n) {
    validate_joint(joint, n);
    std::vector<double> out(n + 1, 0.0);
    for (std::size_t x = 0; x < joint.size(); ++x) out[static_cast<std::size_t>(std::popcount(x))] += joint[x];
    return out;
}

namespace detail {

inline std::size_t mask_of(const std::vector<std::size_t>& idx) {
    std::size_t m = 0;
    for (std::size_t j : idx) m |= std::size_t{1} << j;
    return m;
}

/// Collapses x to the bits selected by idx, packed in order.
inline std::size_t pack_bits(std::size_t x, const std::vector<std::size_t>& idx) {
    std::size_t y = 0;
    for (std::size_t b = 0; b < idx.size(); ++b) y |= ((x >> idx[b]) & 1u) << b;
    return y;
}

}  // namespace detail

/// E|E(I_i | weak) - p_i|, by summing over configurations of the weak indicators.
inline double e_conditional(const JointPmf& joint, std::size_t i, const std::vector<std::size_t>& weak) {
    const std::size_t configs = std::size_t{1} << weak.size();
    std::vector<double> py(configs, 0.0), piy(configs, 0.0);
    double p = 0.0;
    for (std::size_t x = 0; x < joint.size(); ++x) {
        const std::size_t y = detail::pack_bits(x, weak);
        py[y] += joint[x];
        if ((x >> i) & 1u) {
            piy[y] += joint[x];
            p += joint[x];
        }
    }
    double e = 0.0;
    for (std::size_t y = 0; y < configs; ++y)
        if (py[y] > 0.0) e += py[y] * std::fabs(piy[y] / py[y] - p);
    return e;
}

/// 2 max_B |cov(I_i, 1_B)| over the sigma-field of the weak indicators. The maximizing event
/// collects the configurations where P(I_i = 1, Y = y) - p_i P(Y = y) has one sign.
inline double e_covariance(const JointPmf& joint, std::size_t i, const std::vector<std::size_t>& weak) {
    const std::size_t configs = std::size_t{1} << weak.size();
    std::vector<double> py(configs, 0.0), piy(configs, 0.0);
    double p = 0.0;
    for (std::size_t x = 0; x < joint.size(); ++x) {
        const std::size_t y = detail::pack_bits(x, weak);
        py[y] += joint[x];
        if ((x >> i) & 1u) {
            piy[y] += joint[x];
            p += joint[x];
        }
    }
    double pos = 0.0, neg = 0.0;
    for (std::size_t y = 0; y < configs; ++y) {
        const double c = piy[y] - p * py[y];
        (c > 0.0 ? pos : neg) += std::fabs(c);
    }
    return 2.0 * std::max(pos, neg);
}

inline IndicatorStats stats_by_enumeration(const JointPmf& joint, const DependencyGraphSpec& graph) {
    const std::size_t n = graph.n;
    graph.validate();
    validate_joint(joint, n);
    IndicatorStats s;
    s.p.assign(n, 0.0);
    s.ez.assign(n, 0.0);
    s.eiz.assign(n, 0.0);
    s.e.assign(n, 0.0);
    std::vector<std::size_t> strong_mask(n);
    for (std::size_t i = 0; i < n; ++i) strong_mask[i] = detail::mask_of(graph.strong[i]);
    for (std::size_t x = 0; x < joint.size(); ++x) {
        const double px = joint[x];
        if (px == 0.0) continue;
        for (std::size_t i = 0; i < n; ++i) {
            const double z = static_cast<double>(std::popcount(x & strong_mask[i]));
            s.ez[i] += px * z;
            if ((x >> i) & 1u) {
                s.p[i] += px;
                s.eiz[i] += px * z;
            }
        }
    }
    for (std::size_t i = 0; i < n; ++i) s.e[i] = e_conditional(joint, i, graph.weak(i));
    s.lambda = std::accumulate(s.p.begin(), s.p.end(), 0.0);
    return s;
}

/// Exact dTV(L(W), Po(lambda)) for an enumerable joint.
inline double exact_dtv_sum_vs_poisson(const JointPmf& joint, std::size_t n) {
    const auto w = sum_pmf(joint, n);
    double lambda = 0.0;
    for (std::size_t k = 0; k < w.size(); ++k) lambda += static_cast<double>(k) * w[k];
    TruncatedPmf pw{w, 0.0};
    return exact_dtv_pmf(pw, poisson_pmf(lambda)).value;
}

// Grid dependency structure and Monte Carlo statistics ---------------------------

/// Strong neighbours of cell (k, l): all other cells (i, j) with max_s |j_s - l_s| <= m.
inline DependencyGraphSpec grid_strong_graph(const GridSpec& grid, long m) {
    const std::size_t n = grid.cell_count();
    DependencyGraphSpec g = DependencyGraphSpec::empty(n);
    std::vector<CellIndex> idx(n);
    for (std::size_t f = 0; f < n; ++f) idx[f] = grid.cell_index(f);
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b < n; ++b) {
            if (a == b) continue;
            long dist = 0;
            for (int j = 0; j < grid.space.d2; ++j) dist = std::max(dist, std::labs(idx[a].l[j] - idx[b].l[j]));
            if (dist <= m) g.strong[a].push_back(b);
        }
    return g;
}

/// Cell indicators I_kl = 1{xi(C_kl) >= 1} of a pattern inside J_T.
inline std::vector<char> cell_indicators(const GridSpec& grid, const PointPattern& pattern) {
    std::vector<char> ind(grid.cell_count(), 0);
    for (std::size_t i = 0; i < pattern.size(); ++i) ind[grid.flat_index(grid.cell_of(pattern[i]))] = 1;
    return ind;
}

/// Monte Carlo estimates of p_i, E Z_i and E(I_i Z_i) with standard errors; e_i is left at 0.
inline IndicatorStats stats_by_mc(const ProcessModel& model, const GridSpec& grid, const DependencyGraphSpec& graph,
                                  std::size_t mc_n, std::uint64_t seed, unsigned jobs = 1) {
    if (mc_n < 1000) throw std::invalid_argument("stats_by_mc needs mc_n >= 1000");
    graph.validate();
    const std::size_t n = grid.cell_count();
    if (graph.n != n) throw std::invalid_argument("stats_by_mc: graph size differs from the cell count");
    const Box window = grid.window();
    const std::uint64_t tag = stream_tag("stats_by_mc");

    std::vector<std::vector<char>> draws(mc_n);
    parallel_for(mc_n, jobs, [&](std::size_t r) {
        draws[r] = cell_indicators(grid, sample(model, window, stream_seed(seed, tag, r)));
    });

    IndicatorStats s;
    s.p.assign(n, 0.0);
    s.ez.assign(n, 0.0);
    s.eiz.assign(n, 0.0);
    s.e.assign(n, 0.0);
    std::vector<double> p2(n, 0.0), ez2(n, 0.0), eiz2(n, 0.0);
    for (const auto& ind : draws) {
        for (std::size_t i = 0; i < n; ++i) {
            double z = 0.0;
            for (std::size_t j : graph.strong[i]) z += ind[j];
            const double ii = ind[i];
            s.p[i] += ii;
            p2[i] += ii * ii;
            s.ez[i] += z;
            ez2[i] += z * z;
            s.eiz[i] += ii * z;
            eiz2[i] += ii * z * ii * z;
        }
    }
    const double N = static_cast<double>(mc_n);
    auto finish = [N](std::vector<double>& mean, const std::vector<double>& sq) {
        std::vector<double> se(mean.size());
        for (std::size_t i = 0; i < mean.size(); ++i) {
            mean[i] /= N;
            const double var = std::max(sq[i] / N - mean[i] * mean[i], 0.0) * N / (N - 1.0);
            se[i] = std::sqrt(var / N);
        }
        return se;
    };
    s.p_se = finish(s.p, p2);
    s.ez_se = finish(s.ez, ez2);
    s.eiz_se = finish(s.eiz, eiz2);
    s.lambda = std::accumulate(s.p.begin(), s.p.end(), 0.0);
    return s;
}

}  // namespace ppapprox
