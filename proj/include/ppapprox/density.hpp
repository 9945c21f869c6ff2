#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "geometry.hpp"
#include "metrics.hpp"
#include "models.hpp"
#include "quadrature.hpp"
#include "random.hpp"

namespace ppapprox {

struct KernelSpec {
    std::string name;
    int d1 = 1;
    std::function<double(std::span<const double>)> evaluate;
    double lipschitz = 0.0;      ///< l(K) on the closed unit cube
    double l2_norm = 0.0;        ///< ||K||_2
    double second_moment = 0.0;  ///< integral of s_1^2 K(s)
    bool symmetric = true;       ///< even in every coordinate

    double operator()(std::span<const double> s) const {
        for (double x : s)
            if (x < -1.0 || x > 1.0) return 0.0;
        return evaluate(s);
    }
};

inline KernelSpec uniform_kernel(int d1) {
    const double level = std::pow(2.0, -d1);
    return {"uniform", d1, [level](std::span<const double>) { return level; }, 0.0, std::pow(2.0, -0.5 * d1),
            1.0 / 3.0, true};
}

/// Product of (1 - |s_i|); gradient norm at most sqrt(D1).
inline KernelSpec triangular_kernel(int d1) {
    return {"triangular", d1,
            [](std::span<const double> s) {
                double v = 1.0;
                for (double x : s) v *= 1.0 - std::fabs(x);
                return v;
            },
            std::sqrt(static_cast<double>(d1)), std::pow(2.0 / 3.0, 0.5 * d1), 1.0 / 6.0, true};
}

/// (1 + s)/2 on [-1, 1]: integrates to 1 but has a nonzero first moment.
inline KernelSpec tilted_kernel() {
    return {"tilted", 1, [](std::span<const double> s) { return 0.5 * (1.0 + s[0]); }, 0.5, std::sqrt(2.0 / 3.0),
            1.0 / 3.0, false};
}

inline KernelSpec kernel_by_name(const std::string& name, int d1) {
    if (name == "uniform") return uniform_kernel(d1);
    if (name == "triangular") return triangular_kernel(d1);
    if (name == "tilted" && d1 == 1) return tilted_kernel();
    throw std::invalid_argument("unknown kernel '" + name + "'");
}

struct KernelValidation {
    bool ok = true;
    double integral = 0.0;
    std::vector<double> first_moments;
    double l2_norm = 0.0;
    double max_lipschitz_ratio = 0.0;
    std::vector<std::string> failures;
};

/// Checks support, unit mass, zero mean and the Lipschitz constant on random pairs.
inline KernelValidation validate_kernel(const KernelSpec& K, std::size_t pairs = 20000, std::uint64_t seed = 1) {
    if (K.d1 < 1 || K.d1 > 3) throw std::invalid_argument("kernel validation supports D1 <= 3");
    KernelValidation v;
    const std::vector<double> lo(K.d1, -1.0), hi(K.d1, 1.0);
    v.integral = integrate_box([&](const std::vector<double>& s) { return K(s); }, lo, hi).value;
    v.l2_norm = std::sqrt(integrate_box([&](const std::vector<double>& s) { return K(s) * K(s); }, lo, hi).value);
    for (int i = 0; i < K.d1; ++i)
        v.first_moments.push_back(
            integrate_box([&](const std::vector<double>& s) { return s[i] * K(s); }, lo, hi).value);
    if (std::fabs(v.integral - 1.0) > 1e-6) v.failures.push_back("kernel does not integrate to 1");
    for (int i = 0; i < K.d1; ++i)
        if (std::fabs(v.first_moments[i]) > 1e-6)
            v.failures.push_back("kernel first moment is nonzero in coordinate " + std::to_string(i));

    Rng rng = make_rng(seed);
    std::uniform_real_distribution<double> in(-1.0, 1.0), out(1.0, 3.0);
    std::vector<double> x(K.d1), y(K.d1);
    for (std::size_t p = 0; p < pairs; ++p) {
        double d2 = 0.0;
        for (int i = 0; i < K.d1; ++i) {
            x[i] = in(rng);
            y[i] = in(rng);
            d2 += (x[i] - y[i]) * (x[i] - y[i]);
        }
        const double dist = std::min(std::sqrt(d2), 1.0);
        if (dist > 0.0) v.max_lipschitz_ratio = std::max(v.max_lipschitz_ratio, std::fabs(K.evaluate(x) - K.evaluate(y)) / dist);
        // Outside the cube: push one coordinate beyond +-1.
        const int axis = static_cast<int>(p % static_cast<std::size_t>(K.d1));
        y = x;
        y[axis] = (p % 2 == 0 ? 1.0 : -1.0) * out(rng);
        if (K(y) != 0.0) {
            v.failures.push_back("kernel is nonzero outside the unit cube");
            break;
        }
    }
    if (v.max_lipschitz_ratio > K.lipschitz * (1.0 + 1e-6) + 1e-12)
        v.failures.push_back("observed Lipschitz ratio exceeds the declared constant");
    v.ok = v.failures.empty();
    return v;
}

/// mu(J_T): 2^D T / w for Lebesgue mu2, the matching lattice count otherwise.
inline double window_measure(const SpaceConfig& space, double w, double T) {
    return mu_measure(space, window_JT(space, w, T));
}

/// (1/|J_T|) sum over points of 2^{D1} K(w^{1/D1} s).
inline double estimate_density_at_zero(const PointPattern& pattern, const KernelSpec& K, const SpaceConfig& space,
                                       double T, double w) {
    if (K.d1 != space.d1) throw std::invalid_argument("kernel dimension differs from D1");
    const double scale = std::pow(w, 1.0 / space.d1);
    const double c = std::pow(2.0, space.d1);
    std::vector<double> s(space.d1);
    double sum = 0.0;
    for (std::size_t i = 0; i < pattern.size(); ++i) {
        const auto x = pattern[i];
        for (int d = 0; d < space.d1; ++d) s[d] = scale * x[d];
        sum += c * K(s);
    }
    return sum / window_measure(space, w, T);
}

/// 2 kappa nu^M e^{-nu} / M!.
inline double delta_T(double kappa, double nu, long M) {
    if (M < 1) throw std::invalid_argument("delta_T needs M >= 1");
    if (nu == 0.0) return 0.0;
    const double Md = static_cast<double>(M);
    return 2.0 * kappa * std::exp(Md * std::log(nu) - nu - std::lgamma(Md + 1.0));
}

struct DensityBound3A {
    double value = 0.0;
    double delta = 0.0;
    bool m_below_3nu = false;  ///< M < 3 nu(J_T): outside the stated regime
};

inline DensityBound3A bound_thm_3A(double d2_bound, const KernelSpec& K, long M, double kappa, double nu,
                                   const SpaceConfig& space, double T, double w) {
    if (M < 1) throw std::invalid_argument("bound_thm_3A needs M >= 1");
    DensityBound3A r;
    r.delta = delta_T(kappa, nu, M);
    r.m_below_3nu = static_cast<double>(M) < 3.0 * nu;
    const double l = K.lipschitz;
    const double factor = l * w * static_cast<double>(M) / (std::pow(2.0, space.d2) * T) + 1.0;
    r.value = factor * d2_bound + std::pow(2.0, space.d1) * l * r.delta;
    return r;
}

struct DensityBound3C {
    double value = 0.0;
    double sd_term = 0.0;
    double bias_term = 0.0;
    double L_prime = 0.0;
    bool remainder_unquantified = true;  ///< a little-o term is not included in value
};

inline DensityBound3C bound_thm_3C(double dbw_part, const KernelSpec& K, double kappa, const DensitySpec& density,
                                   const SpaceConfig& space, double T, double w) {
    if (!density.smooth2) throw std::invalid_argument("bound_thm_3C needs a twice differentiable density");
    if (!K.symmetric) throw std::invalid_argument("bound_thm_3C closed form needs a symmetric kernel");
    DensityBound3C r;
    r.sd_term = std::sqrt(kappa / std::pow(2.0, space.d2)) * K.l2_norm * std::sqrt(w / T);
    r.L_prime = std::fabs(0.5 * density.laplacian_at_zero(space.d1) * K.second_moment);
    r.bias_term = r.L_prime / std::pow(w, 2.0 / space.d1);
    // Quadratic and constant densities have a constant Hessian: the Taylor remainder is zero.
    r.remainder_unquantified = density.form == DensitySpec::Form::custom_table;
    r.value = dbw_part + r.sd_term + r.bias_term;
    return r;
}

/// Intensity at the origin of the D1 coordinates.
inline double intensity_at_zero(const ProcessModel& model) {
    return std::visit(
        [&](const auto& m) -> double {
            using M = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<M, HomogeneousPoisson>) {
                return m.ell;
            } else if constexpr (std::is_same_v<M, InhomogeneousPoisson>) {
                return m.density(std::vector<double>(model.space.d1, 0.0));
            } else if constexpr (std::is_same_v<M, ClusterBounded>) {
                return m.parent_rate * m.mean_size();
            } else {
                const auto pi = stationary_distribution(m.transition);
                double mean = 0.0;
                for (std::size_t i = 0; i < pi.size(); ++i) mean += pi[i] * m.rates[i];
                return mean;
            }
        },
        model.variant);
}

struct DensityExperiment {
    double p0 = 0.0;
    double mean = 0.0;
    double sd = 0.0;
    double mean_se = 0.0;
    double dbw = 0.0;  ///< empirical dBW to the point mass at p(0)
    std::vector<double> estimates;
};

inline DensityExperiment mc_density_experiment(const ProcessModel& model, const KernelSpec& K, double T, double w,
                                               std::size_t replicates, std::uint64_t seed, unsigned jobs = 1) {
    if (replicates < 1000) throw std::invalid_argument("mc_density_experiment needs replicates >= 1000");
    const Box window = window_JT(model.space, w, T);
    const std::uint64_t tag = stream_tag("density");
    DensityExperiment r;
    r.p0 = intensity_at_zero(model);
    r.estimates.resize(replicates);
    parallel_for(replicates, jobs, [&](std::size_t i) {
        r.estimates[i] =
            estimate_density_at_zero(sample(model, window, stream_seed(seed, tag, i)), K, model.space, T, w);
    });
    const double n = static_cast<double>(replicates);
    for (double v : r.estimates) r.mean += v;
    r.mean /= n;
    double ss = 0.0;
    for (double v : r.estimates) ss += (v - r.mean) * (v - r.mean);
    r.sd = std::sqrt(ss / (n - 1.0));
    r.mean_se = r.sd / std::sqrt(n);
    const std::vector<double> point{r.p0};
    r.dbw = empirical_dbw(r.estimates, point);
    return r;
}

}  // namespace ppapprox
