#pragma once

#include <algorithm>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <vector>

namespace ppapprox {

struct AssignmentResult {
    double cost = 0.0;
    std::vector<std::size_t> row_to_col;
};

/// Min-cost perfect matching on a dense n x n cost matrix (row-major), by
/// shortest augmenting paths with row/column potentials. O(n^3).
template <class CostFn>
AssignmentResult solve_assignment(std::size_t n, CostFn&& cost) {
    AssignmentResult res;
    res.row_to_col.assign(n, 0);
    if (n == 0) return res;

    const double inf = std::numeric_limits<double>::infinity();
    // 1-based; column 0 is the virtual source.
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
    std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
    std::vector<double> minv(n + 1);
    std::vector<char> used(n + 1);

    for (std::size_t i = 1; i <= n; ++i) {
        p[0] = i;
        std::size_t j0 = 0;
        std::fill(minv.begin(), minv.end(), inf);
        std::fill(used.begin(), used.end(), 0);
        do {
            used[j0] = 1;
            const std::size_t i0 = p[j0];
            double delta = inf;
            std::size_t j1 = 0;
            for (std::size_t j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            if (j1 == 0) throw std::runtime_error("assignment: non-finite cost");
            for (std::size_t j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const std::size_t j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0 != 0);
    }

    for (std::size_t j = 1; j <= n; ++j) res.row_to_col[p[j] - 1] = j - 1;
    // Sum the original costs rather than trusting the potentials.
    for (std::size_t i = 0; i < n; ++i) res.cost += cost(i, res.row_to_col[i]);
    return res;
}

inline AssignmentResult solve_assignment(const std::vector<double>& cost, std::size_t n) {
    if (cost.size() != n * n) throw std::invalid_argument("cost matrix must be n x n");
    return solve_assignment(n, [&](std::size_t i, std::size_t j) { return cost[i * n + j]; });
}

}  // namespace ppapprox
