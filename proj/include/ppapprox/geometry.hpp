#pragma once

// Stretch transforms, observation windows and the cell grid on J_T.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "pattern.hpp"

namespace ppapprox {

enum class Mu2Kind { lebesgue, counting };

inline const char* to_string(Mu2Kind k) { return k == Mu2Kind::lebesgue ? "lebesgue" : "counting"; }

/// Smallest integer c >= 1 with c^d >= x (exact for the integer powers doubles represent).
inline long ceil_root(double x, int d) {
    if (!(x >= 1.0)) return 1;
    long c = static_cast<long>(std::ceil(std::pow(x, 1.0 / d)));
    c = std::max(c, 1L);
    while (c > 1 && std::pow(static_cast<double>(c - 1), d) >= x) --c;
    while (std::pow(static_cast<double>(c), d) < x) ++c;
    return c;
}

struct SpaceConfig {
    int d1 = 1;
    int d2 = 1;
    Mu2Kind mu2 = Mu2Kind::lebesgue;

    int dim() const noexcept { return d1 + d2; }

    void validate() const {
        if (d1 < 1 || d2 < 1) throw std::invalid_argument("d1 and d2 must be >= 1");
    }

    /// Counting mu2 needs T = n^{D2} for an integer n >= 1.
    bool admits(double T) const {
        if (!(T >= 1.0) || !std::isfinite(T)) return false;
        if (mu2 == Mu2Kind::lebesgue) return true;
        long n = ceil_root(T, d2);
        return std::pow(static_cast<double>(n), d2) == T;
    }

    void require_admissible(double T) const {
        if (!admits(T))
            throw std::invalid_argument("T = " + std::to_string(T) + " is not admissible for this space");
    }
};

/// w(T) = k * T^delta with k >= 1 and 0 < delta <= 1.
struct StretchSchedule {
    double k = 1.0;
    double delta = 1.0;

    void validate() const {
        if (!(k >= 1.0) || !std::isfinite(k)) throw std::invalid_argument("schedule k must be >= 1");
        if (!(delta > 0.0 && delta <= 1.0)) throw std::invalid_argument("schedule delta must lie in (0, 1]");
    }
    double operator()(double T) const { return k * std::pow(T, delta); }
    /// Constant c with w(T) <= c T for all T >= 1.
    double linear_constant() const { return k; }
};

/// Axis-aligned closed box.
struct Box {
    std::vector<double> lo;
    std::vector<double> hi;

    std::size_t dim() const noexcept { return lo.size(); }

    double lebesgue_volume() const {
        double v = 1.0;
        for (std::size_t i = 0; i < lo.size(); ++i) v *= std::max(hi[i] - lo[i], 0.0);
        return v;
    }

    bool contains(std::span<const double> x) const {
        for (std::size_t i = 0; i < lo.size(); ++i)
            if (x[i] < lo[i] || x[i] > hi[i]) return false;
        return true;
    }

    void validate() const {
        if (lo.size() != hi.size() || lo.empty()) throw std::invalid_argument("malformed box");
        for (std::size_t i = 0; i < lo.size(); ++i)
            if (!std::isfinite(lo[i]) || !std::isfinite(hi[i]) || lo[i] > hi[i])
                throw std::invalid_argument("unbounded or inverted box");
    }
};

/// Number of lattice sites of Z + 1/2 in [lo, hi], or [lo, hi) when half_open.
inline long lattice_sites(double lo, double hi, bool half_open = false) {
    if (hi < lo) return 0;
    // site j + 1/2; all quantities below are exact for moderate magnitudes.
    long first = static_cast<long>(std::ceil(lo - 0.5));
    long last = half_open ? static_cast<long>(std::ceil(hi - 0.5)) - 1
                          : static_cast<long>(std::floor(hi - 0.5));
    return std::max(0L, last - first + 1);
}

inline bool is_lattice_site(double t) {
    double twice = 2.0 * t;
    return std::floor(twice) == twice && std::fmod(std::fabs(twice), 2.0) == 1.0;
}

/// mu(box) for mu = Lebesgue^{D1} x mu2.
inline double mu_measure(const SpaceConfig& space, const Box& box) {
    double v = 1.0;
    for (int i = 0; i < space.d1; ++i) v *= std::max(box.hi[i] - box.lo[i], 0.0);
    for (int j = space.d1; j < space.dim(); ++j) {
        if (space.mu2 == Mu2Kind::lebesgue)
            v *= std::max(box.hi[j] - box.lo[j], 0.0);
        else
            v *= static_cast<double>(lattice_sites(box.lo[j], box.hi[j]));
    }
    return v;
}

inline void check_transform_args(const SpaceConfig& space, double w, double T, std::span<const double> x) {
    if (!(T >= 1.0) || !(w >= 1.0)) throw std::invalid_argument("transform needs T >= 1 and w >= 1");
    if (x.size() != static_cast<std::size_t>(space.dim())) throw std::invalid_argument("point dimension mismatch");
    require_finite(x);
}

/// theta_T(s, t) = (w^{1/D1} s, T^{-1/D2} t).
inline Point apply_transform(const SpaceConfig& space, double w, double T, std::span<const double> x) {
    check_transform_args(space, w, T, x);
    const double a = std::pow(w, 1.0 / space.d1);
    const double b = std::pow(T, -1.0 / space.d2);
    Point y(x.begin(), x.end());
    for (int i = 0; i < space.d1; ++i) y[i] *= a;
    for (int j = space.d1; j < space.dim(); ++j) y[j] *= b;
    return y;
}

inline Point invert_transform(const SpaceConfig& space, double w, double T, std::span<const double> y) {
    check_transform_args(space, w, T, y);
    const double a = std::pow(w, 1.0 / space.d1);
    const double b = std::pow(T, 1.0 / space.d2);
    Point x(y.begin(), y.end());
    for (int i = 0; i < space.d1; ++i) x[i] /= a;
    for (int j = space.d1; j < space.dim(); ++j) x[j] *= b;
    return x;
}

inline PointPattern apply_transform(const SpaceConfig& space, double w, double T, const PointPattern& rho) {
    PointPattern out(rho.dim());
    out.reserve(rho.size());
    for (std::size_t i = 0; i < rho.size(); ++i) out.push_back(apply_transform(space, w, T, rho[i]));
    return out;
}

inline Box transform_box(const SpaceConfig& space, double w, double T, const Box& box) {
    return {apply_transform(space, w, T, box.lo), apply_transform(space, w, T, box.hi)};
}

/// J = [-1, 1]^D.
inline Box window_J(const SpaceConfig& space) {
    return {std::vector<double>(space.dim(), -1.0), std::vector<double>(space.dim(), 1.0)};
}

/// J_T = theta_T^{-1}(J).
inline Box window_JT(const SpaceConfig& space, double w, double T) {
    Box b = window_J(space);
    return {invert_transform(space, w, T, b.lo), invert_transform(space, w, T, b.hi)};
}

/// Image of J_T under the volume preserving transform with stretch T^{1/D1}.
inline Box window_J_tilde(const SpaceConfig& space, double w, double T) {
    Box b = window_J(space);
    const double r = std::pow(T / w, 1.0 / space.d1);
    for (int i = 0; i < space.d1; ++i) {
        b.lo[i] = -r;
        b.hi[i] = r;
    }
    return b;
}

struct CellIndex {
    std::vector<long> k;
    std::vector<long> l;
    bool operator==(const CellIndex&) const = default;
};

/// Discretization of J_T into the cuboids C_kl.
struct GridSpec {
    SpaceConfig space;
    double T = 1.0;
    double h = 1.0;
    double w = 1.0;
    long n1 = 0;
    long n2 = 0;

    long per_axis_d1() const noexcept { return 2 * n1 + 2; }
    long per_axis_d2() const noexcept { return 2 * n2 + 2; }

    std::size_t cell_count() const {
        double c = std::pow(static_cast<double>(per_axis_d1()), space.d1) *
                   std::pow(static_cast<double>(per_axis_d2()), space.d2);
        return static_cast<std::size_t>(c);
    }

    /// Unclipped pre-image cell width in the D1 directions, (w h)^{-1/D1}.
    double d1_width() const { return std::pow(w * h, -1.0 / space.d1); }
    double s_half() const { return std::pow(w, -1.0 / space.d1); }
    double t_half() const { return std::pow(T, 1.0 / space.d2); }

    double d1_edge(long k) const { return static_cast<double>(k - n1 - 1) * d1_width(); }
    double d2_edge(long l) const { return static_cast<double>(l - n2 - 1); }

    Box window() const { return window_JT(space, w, T); }

    std::size_t flat_index(const CellIndex& c) const {
        std::size_t f = 0;
        for (long k : c.k) f = f * per_axis_d1() + static_cast<std::size_t>(k);
        for (long l : c.l) f = f * per_axis_d2() + static_cast<std::size_t>(l);
        return f;
    }

    CellIndex cell_index(std::size_t flat) const {
        CellIndex c{std::vector<long>(space.d1), std::vector<long>(space.d2)};
        for (int j = space.d2 - 1; j >= 0; --j) {
            c.l[j] = static_cast<long>(flat % per_axis_d2());
            flat /= per_axis_d2();
        }
        for (int i = space.d1 - 1; i >= 0; --i) {
            c.k[i] = static_cast<long>(flat % per_axis_d1());
            flat /= per_axis_d1();
        }
        return c;
    }

    /// C_kl after clipping to J_T.
    Box cell_box(const CellIndex& c) const {
        Box b{std::vector<double>(space.dim()), std::vector<double>(space.dim())};
        const double sh = s_half(), th = t_half();
        for (int i = 0; i < space.d1; ++i) {
            b.lo[i] = std::clamp(d1_edge(c.k[i]), -sh, sh);
            b.hi[i] = std::clamp(d1_edge(c.k[i] + 1), -sh, sh);
        }
        for (int j = 0; j < space.d2; ++j) {
            b.lo[space.d1 + j] = std::clamp(d2_edge(c.l[j]), -th, th);
            b.hi[space.d1 + j] = std::clamp(d2_edge(c.l[j] + 1), -th, th);
        }
        return b;
    }
    Box cell_box(std::size_t flat) const { return cell_box(cell_index(flat)); }

    /// Lebesgue x mu2 measure of the half-open clipped cell.
    double cell_measure(const CellIndex& c) const {
        Box b = cell_box(c);
        double v = 1.0;
        for (int i = 0; i < space.d1; ++i) v *= b.hi[i] - b.lo[i];
        for (int j = 0; j < space.d2; ++j) {
            const double lo = b.lo[space.d1 + j], hi = b.hi[space.d1 + j];
            if (space.mu2 == Mu2Kind::lebesgue)
                v *= hi - lo;
            else
                v *= static_cast<double>(lattice_sites(lo, hi, c.l[j] != per_axis_d2() - 1));
        }
        return v;
    }

    Point cell_center(const CellIndex& c) const {
        Box b = cell_box(c);
        Point x(space.dim());
        for (int i = 0; i < space.dim(); ++i) x[i] = 0.5 * (b.lo[i] + b.hi[i]);
        return x;
    }

    /// The cell containing x; upper faces are open except on the upper boundary of J_T.
    CellIndex cell_of(std::span<const double> x) const {
        if (x.size() != static_cast<std::size_t>(space.dim())) throw std::invalid_argument("point dimension mismatch");
        require_finite(x);
        const double sh = s_half(), th = t_half();
        CellIndex c{std::vector<long>(space.d1), std::vector<long>(space.d2)};
        const double a = d1_width();
        for (int i = 0; i < space.d1; ++i) {
            if (x[i] < -sh || x[i] > sh) throw std::out_of_range("point outside J_T");
            c.k[i] = locate(x[i], static_cast<long>(std::floor(x[i] / a)) + n1 + 1, per_axis_d1(),
                            [this](long k) { return d1_edge(k); });
        }
        for (int j = 0; j < space.d2; ++j) {
            const double t = x[space.d1 + j];
            if (t < -th || t > th) throw std::out_of_range("point outside J_T");
            c.l[j] = locate(t, static_cast<long>(std::floor(t)) + n2 + 1, per_axis_d2(),
                            [this](long l) { return d2_edge(l); });
        }
        return c;
    }

    /// Bound on the d0-diameter of every image cell R_kl.
    double image_diameter_bound() const {
        return std::sqrt(space.d1 * std::pow(h, -2.0 / space.d1) + space.d2 * std::pow(T, -2.0 / space.d2));
    }

private:
    template <class Edge>
    static long locate(double x, long guess, long count, Edge edge) {
        long k = std::clamp(guess, 0L, count - 1);
        while (k > 0 && x < edge(k)) --k;
        while (k < count - 1 && x >= edge(k + 1)) ++k;
        return k;
    }
};

/// Grid for an already evaluated w(T).
inline GridSpec build_grid_at(const SpaceConfig& space, double w, double T, double h) {
    space.validate();
    if (!(h >= 1.0) || !std::isfinite(h)) throw std::invalid_argument("h must be >= 1");
    if (!(w >= 1.0) || !std::isfinite(w)) throw std::invalid_argument("w(T) must be >= 1");
    space.require_admissible(T);
    GridSpec g;
    g.space = space;
    g.T = T;
    g.h = h;
    g.w = w;
    g.n1 = ceil_root(h, space.d1) - 1;
    g.n2 = ceil_root(T, space.d2) - 1;
    return g;
}

inline GridSpec build_grid(const SpaceConfig& space, const StretchSchedule& schedule, double T, double h) {
    schedule.validate();
    return build_grid_at(space, schedule(T), T, h);
}

/// Volume of the unit ball in R^d.
inline double unit_ball_volume(int d) {
    return std::pow(M_PI, 0.5 * d) / std::tgamma(0.5 * d + 1.0);
}

}  // namespace ppapprox
