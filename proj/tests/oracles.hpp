#pragma once

// Brute-force reference implementations shared by unit tests and the acceptance runner.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <random>
#include <vector>

#include "ppapprox/pattern.hpp"

namespace oracle {

using ppapprox::Point;
using ppapprox::PointPattern;

inline PointPattern random_pattern(std::mt19937_64& rng, std::size_t n, std::size_t dim, double spread) {
    std::uniform_real_distribution<double> u(0.0, spread);
    PointPattern p(dim);
    Point x(dim);
    for (std::size_t i = 0; i < n; ++i) {
        for (auto& v : x) v = u(rng);
        p.push_back(x);
    }
    return p;
}

/// Matching distance by enumerating every permutation.
inline double d1_by_permutations(const PointPattern& a, const PointPattern& b) {
    if (a.size() != b.size()) return 1.0;
    if (a.empty()) return 0.0;
    std::vector<std::size_t> perm(a.size());
    std::iota(perm.begin(), perm.end(), 0);
    double best = INFINITY;
    do {
        double s = 0.0;
        for (std::size_t i = 0; i < perm.size(); ++i) {
            double e = 0.0;
            for (std::size_t d = 0; d < a.dim(); ++d) e += std::pow(a[i][d] - b[perm[i]][d], 2);
            s += std::min(std::sqrt(e), 1.0);
        }
        best = std::min(best, s);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return std::min(best / a.size(), 1.0);
}

/// Sample distance by enumerating every bijection between the clouds.
inline double d2_by_bijections(const std::vector<PointPattern>& A, const std::vector<PointPattern>& B) {
    std::vector<std::size_t> perm(A.size());
    std::iota(perm.begin(), perm.end(), 0);
    double best = INFINITY;
    do {
        double s = 0.0;
        for (std::size_t i = 0; i < A.size(); ++i) s += d1_by_permutations(A[i], B[perm[i]]);
        best = std::min(best, s / A.size());
    } while (std::next_permutation(perm.begin(), perm.end()));
    return std::min(best, 1.0);
}

/// Grid dynamic programme over f values; exact when supports sit on the 1/32 lattice.
inline double dbw_by_grid(const std::vector<double>& a, const std::vector<double>& b) {
    std::map<double, double> w;
    for (double v : a) w[v] += 1.0 / a.size();
    for (double v : b) w[v] -= 1.0 / b.size();
    const int G = 256;
    auto val = [&](int j) { return -0.5 + static_cast<double>(j) / G; };
    std::vector<double> best(G + 1, 0.0), next(G + 1);
    double prev_z = 0.0;
    bool first = true;
    for (const auto& [z, c] : w) {
        for (int j = 0; j <= G; ++j) {
            double m = -INFINITY;
            if (first) {
                m = 0.0;
            } else {
                for (int i = 0; i <= G; ++i)
                    if (std::fabs(val(i) - val(j)) <= z - prev_z + 1e-12) m = std::max(m, best[i]);
            }
            next[j] = m + c * val(j);
        }
        best = next;
        prev_z = z;
        first = false;
    }
    return std::clamp(*std::max_element(best.begin(), best.end()), 0.0, 1.0);
}

inline double poisson_pmf(double lambda, int k) {
    double p = std::exp(-lambda);
    for (int i = 1; i <= k; ++i) p *= lambda / i;
    return p;
}

/// Joint law of n indicators with heavy-tailed random weights.
inline std::vector<double> random_joint(std::mt19937_64& rng, std::size_t n) {
    std::gamma_distribution<double> g(0.3, 1.0);
    std::vector<double> j(std::size_t{1} << n);
    double s = 0.0;
    for (auto& v : j) s += (v = g(rng));
    for (auto& v : j) v /= s;
    return j;
}

/// Total variation between the law of the indicator sum and Po(sum of marginals).
inline double dtv_sum_vs_poisson(const std::vector<double>& joint, std::size_t n) {
    std::vector<double> w(n + 1, 0.0);
    double lambda = 0.0;
    for (std::size_t x = 0; x < joint.size(); ++x) {
        const int k = std::popcount(static_cast<std::uint64_t>(x));
        w[k] += joint[x];
        lambda += k * joint[x];
    }
    double tv = 0.0, mass = 0.0;
    for (std::size_t k = 0; k <= n; ++k) {
        const double q = poisson_pmf(lambda, static_cast<int>(k));
        tv += std::fabs(w[k] - q);
        mass += q;
    }
    return 0.5 * (tv + (1.0 - mass));
}

}  // namespace oracle
