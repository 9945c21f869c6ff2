#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace ppapprox {

struct QuadratureResult {
    double value = 0.0;
    double error = 0.0;  ///< difference between the last two refinements
    int cells_per_axis = 0;
};

namespace detail {

inline constexpr std::array<double, 5> gl5_nodes{-0.9061798459386640, -0.5384693101056831, 0.0,
                                                  0.5384693101056831, 0.9061798459386640};
inline constexpr std::array<double, 5> gl5_weights{0.2369268850561891, 0.4786286704993665, 0.5688888888888889,
                                                    0.4786286704993665, 0.2369268850561891};

template <class F>
double composite_gl(F& f, const std::vector<double>& lo, const std::vector<double>& hi, int n) {
    const std::size_t d = lo.size();
    std::vector<double> step(d);
    for (std::size_t i = 0; i < d; ++i) step[i] = (hi[i] - lo[i]) / n;

    std::size_t total_nodes = 1;
    for (std::size_t i = 0; i < d; ++i) total_nodes *= static_cast<std::size_t>(n) * 5;

    std::vector<double> x(d);
    double sum = 0.0;
    for (std::size_t flat = 0; flat < total_nodes; ++flat) {
        std::size_t rem = flat;
        double weight = 1.0;
        for (std::size_t i = 0; i < d; ++i) {
            const std::size_t q = rem % 5;
            rem /= 5;
            const std::size_t cell = rem % static_cast<std::size_t>(n);
            rem /= static_cast<std::size_t>(n);
            const double mid = lo[i] + (static_cast<double>(cell) + 0.5) * step[i];
            x[i] = mid + 0.5 * step[i] * gl5_nodes[q];
            weight *= 0.5 * step[i] * gl5_weights[q];
        }
        sum += weight * f(x);
    }
    return sum;
}

}  // namespace detail

/// Tensor composite Gauss-Legendre on a box, doubling the cells per axis until
/// successive estimates agree to `tol` (absolute) or the budget is exhausted.
template <class F>
QuadratureResult integrate_box(F f, const std::vector<double>& lo, const std::vector<double>& hi,
                               double tol = 1e-8) {
    if (lo.size() != hi.size() || lo.empty()) throw std::invalid_argument("integrate_box: malformed box");
    if (lo.size() > 3) throw std::invalid_argument("integrate_box: at most 3 dimensions");
    const int max_cells = lo.size() == 1 ? 1024 : (lo.size() == 2 ? 128 : 32);
    QuadratureResult r;
    int n = 2;
    double prev = detail::composite_gl(f, lo, hi, n);
    while (true) {
        const int next = 2 * n;
        const double cur = detail::composite_gl(f, lo, hi, next);
        r = {cur, std::fabs(cur - prev), next};
        if (r.error <= tol || next >= max_cells) break;
        prev = cur;
        n = next;
    }
    return r;
}

}  // namespace ppapprox
