#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <span>
#include <stdexcept>
#include <vector>

#include "assignment.hpp"
#include "pattern.hpp"

namespace ppapprox {

using CountSample = std::vector<long>;
using RealSample = std::vector<double>;

/// Euclidean distance capped at 1.
inline double d0(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw std::invalid_argument("d0: dimension mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = x[i] - y[i];
        s += d * d;
    }
    return std::min(std::sqrt(s), 1.0);
}

/// Optimal-matching distance between patterns; 1 across cardinalities.
inline double d1(const PointPattern& a, const PointPattern& b) {
    if (a.size() != b.size()) return 1.0;
    const std::size_t n = a.size();
    if (n == 0) return 0.0;
    if (a.dim() != b.dim()) throw std::invalid_argument("d1: dimension mismatch");
    auto r = solve_assignment(n, [&](std::size_t i, std::size_t j) { return d0(a[i], b[j]); });
    return std::min(r.cost / static_cast<double>(n), 1.0);
}

/// Wasserstein distance over (patterns, d1) between two equal-size empirical samples.
inline double empirical_d2(const std::vector<PointPattern>& A, const std::vector<PointPattern>& B) {
    if (A.size() != B.size()) throw std::invalid_argument("empirical_d2: unequal sample counts");
    const std::size_t n = A.size();
    if (n == 0) throw std::invalid_argument("empirical_d2: empty samples");
    std::vector<double> cost(n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) cost[i * n + j] = d1(A[i], B[j]);
    return std::min(solve_assignment(cost, n).cost / static_cast<double>(n), 1.0);
}

/// Half the L1 distance between the two empirical pmfs.
inline double empirical_dtv(std::span<const long> a, std::span<const long> b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("empirical_dtv: empty sample");
    std::map<long, double> diff;
    for (long x : a) diff[x] += 1.0 / static_cast<double>(a.size());
    for (long x : b) diff[x] -= 1.0 / static_cast<double>(b.size());
    double s = 0.0;
    for (const auto& [k, v] : diff) s += std::fabs(v);
    return std::min(0.5 * s, 1.0);
}

namespace detail {

// Concave piecewise-linear function on [-1/2, 1/2], given by breakpoints.
struct ConcavePL {
    std::vector<double> x;
    std::vector<double> y;

    double at(double t) const {
        if (t <= x.front()) return y.front();
        if (t >= x.back()) return y.back();
        auto it = std::upper_bound(x.begin(), x.end(), t);
        const std::size_t j = static_cast<std::size_t>(it - x.begin());
        const double x0 = x[j - 1], x1 = x[j];
        if (x1 == x0) return std::max(y[j - 1], y[j]);
        return y[j - 1] + (y[j] - y[j - 1]) * (t - x0) / (x1 - x0);
    }
};

}  // namespace detail

/// Exact bounded-Wasserstein distance between two empirical real samples.
/// Maximizes sum_k c_k f_k over |f_k| <= 1/2 and |f_{k+1} - f_k| <= z_{k+1} - z_k
/// by propagating the concave value function along the sorted merged support.
inline double empirical_dbw(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("empirical_dbw: empty sample");
    std::map<double, double> w;
    for (double v : a) {
        if (!std::isfinite(v)) throw std::invalid_argument("empirical_dbw: non-finite value");
        w[v] += 1.0 / static_cast<double>(a.size());
    }
    for (double v : b) {
        if (!std::isfinite(v)) throw std::invalid_argument("empirical_dbw: non-finite value");
        w[v] -= 1.0 / static_cast<double>(b.size());
    }
    std::vector<double> z, c;
    for (const auto& [k, v] : w) {
        z.push_back(k);
        c.push_back(v);
    }

    constexpr double lo = -0.5, hi = 0.5;
    detail::ConcavePL V{{lo, hi}, {c[0] * lo, c[0] * hi}};
    for (std::size_t k = 1; k < z.size(); ++k) {
        const double gap = z[k] - z[k - 1];
        const std::size_t top = static_cast<std::size_t>(std::max_element(V.y.begin(), V.y.end()) - V.y.begin());

        // Sliding maximum over [g - gap, g + gap]: rising part shifts left, falling part right.
        detail::ConcavePL S;
        for (std::size_t i = 0; i <= top; ++i) {
            S.x.push_back(V.x[i] - gap);
            S.y.push_back(V.y[i]);
        }
        for (std::size_t i = top; i < V.x.size(); ++i) {
            S.x.push_back(V.x[i] + gap);
            S.y.push_back(V.y[i]);
        }

        detail::ConcavePL next;
        next.x.push_back(lo);
        next.y.push_back(S.at(lo));
        for (std::size_t i = 0; i < S.x.size(); ++i) {
            if (S.x[i] > lo && S.x[i] < hi) {
                next.x.push_back(S.x[i]);
                next.y.push_back(S.y[i]);
            }
        }
        next.x.push_back(hi);
        next.y.push_back(S.at(hi));
        for (std::size_t i = 0; i < next.x.size(); ++i) next.y[i] += c[k] * next.x[i];
        V = std::move(next);
    }
    const double best = *std::max_element(V.y.begin(), V.y.end());
    return std::clamp(best, 0.0, 1.0);
}

/// Pmf on {0, ..., K} with the mass left beyond K.
struct TruncatedPmf {
    std::vector<double> pmf;
    double tail = 0.0;
};

/// Poisson(lambda) pmf truncated where the remaining tail drops below tail_tol.
inline TruncatedPmf poisson_pmf(double lambda, double tail_tol = 1e-13) {
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw std::invalid_argument("poisson_pmf: bad lambda");
    TruncatedPmf out;
    if (lambda == 0.0) {
        out.pmf = {1.0};
        return out;
    }
    const double ll = std::log(lambda);
    for (long k = 0;; ++k) {
        const double pk = std::exp(static_cast<double>(k) * ll - lambda - std::lgamma(static_cast<double>(k) + 1.0));
        out.pmf.push_back(pk);
        const double ratio = lambda / static_cast<double>(k + 2);
        if (static_cast<double>(k + 1) > lambda && ratio < 1.0) {
            // P(X > k) <= p_{k+1} / (1 - lambda/(k+2)), p_{k+1} = p_k lambda/(k+1).
            const double bound = pk * lambda / static_cast<double>(k + 1) / (1.0 - ratio);
            if (bound < tail_tol) {
                out.tail = bound;
                break;
            }
        }
    }
    return out;
}

struct DtvValue {
    double value = 0.0;
    double error = 0.0;  ///< |true - value| <= error from truncation
};

/// Half L1 distance between two truncated pmfs, with the truncation error bound.
inline DtvValue exact_dtv_pmf(const TruncatedPmf& p, const TruncatedPmf& q, double tol = 1e-10) {
    auto mass = [](const TruncatedPmf& r) {
        double s = 0.0;
        for (double v : r.pmf) {
            if (!(v >= 0.0)) throw std::invalid_argument("exact_dtv_pmf: negative mass");
            s += v;
        }
        return s;
    };
    if (std::fabs(mass(p) - 1.0) > tol || std::fabs(mass(q) - 1.0) > tol || p.tail > tol || q.tail > tol)
        throw std::invalid_argument("exact_dtv_pmf: tail mass above tolerance");
    const std::size_t n = std::max(p.pmf.size(), q.pmf.size());
    double s = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double pk = k < p.pmf.size() ? p.pmf[k] : 0.0;
        const double qk = k < q.pmf.size() ? q.pmf[k] : 0.0;
        s += std::fabs(pk - qk);
    }
    return {0.5 * s, 0.5 * (p.tail + q.tail)};
}

}  // namespace ppapprox
