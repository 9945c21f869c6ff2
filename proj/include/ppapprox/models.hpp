#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "geometry.hpp"
#include "pattern.hpp"
#include "quadrature.hpp"
#include "random.hpp"

namespace ppapprox {

enum class MixingKind { rho, beta, phi };

inline const char* to_string(MixingKind k) {
    switch (k) {
        case MixingKind::rho: return "rho";
        case MixingKind::beta: return "beta";
        case MixingKind::phi: return "phi";
    }
    return "?";
}

/// alpha(v) = c v^r; c = 0 gives the zero function.
struct AlphaCheck {
    double c = 0.0;
    double r = 1.0;

    double operator()(double v) const {
        if (c == 0.0 || v <= 0.0) return 0.0;
        return c * std::pow(v, r);
    }
    void validate() const {
        if (!(c >= 0.0) || !(r > 0.0)) throw std::invalid_argument("alpha check needs c >= 0 and r > 0");
    }
};

/// Decreasing mixing-rate function; c = 0 gives the zero function.
struct BetaCheck {
    enum class Family { power, finite_range, geometric };

    Family family = Family::power;
    double c = 0.0;
    double s = 1.0;      ///< power: c (1+u)^{-(1+s) D2 / 2}
    int d2 = 1;
    double u0 = 0.0;     ///< finite_range: c 1{u < u0}
    double gamma = 0.0;  ///< geometric: c gamma^{floor(u)}

    static BetaCheck zero() { return {}; }
    static BetaCheck power(double c, double s, int d2) { return {Family::power, c, s, d2, 0.0, 0.0}; }
    static BetaCheck finite_range(double c, double u0) { return {Family::finite_range, c, 1.0, 1, u0, 0.0}; }
    static BetaCheck geometric(double c, double gamma) { return {Family::geometric, c, 1.0, 1, 0.0, gamma}; }

    double operator()(double u) const {
        if (c == 0.0) return 0.0;
        switch (family) {
            case Family::power: return c * std::pow(1.0 + u, -(1.0 + s) * d2 / 2.0);
            case Family::finite_range: return u < u0 ? c : 0.0;
            case Family::geometric: return c * std::pow(gamma, std::floor(u));
        }
        return 0.0;
    }

    /// Decay exponent in u for the power family.
    double power_exponent() const { return (1.0 + s) * d2 / 2.0; }

    void validate() const {
        if (!(c >= 0.0)) throw std::invalid_argument("beta check needs c >= 0");
        if (family == Family::geometric && !(gamma >= 0.0 && gamma < 1.0))
            throw std::invalid_argument("geometric beta check needs 0 <= gamma < 1");
        if (family == Family::power && d2 < 1) throw std::invalid_argument("power beta check needs d2 >= 1");
    }
};

struct ConditionCertificate {
    double kappa = 0.0;
    double iota = 0.0;
    AlphaCheck alpha;
    BetaCheck beta;
    MixingKind kind = MixingKind::rho;
    bool all_kinds = false;  ///< beta bounds every coefficient directly (independence, finite range)
    std::string derivation;

    void validate() const {
        if (!(kappa >= 0.0) || !(iota >= 0.0) || iota > kappa)
            throw std::invalid_argument("certificate needs 0 <= iota <= kappa");
        alpha.validate();
        beta.validate();
    }
};

/// Density of the expectation measure, a function of the D1 coordinates only.
struct DensitySpec {
    enum class Form { constant, separable_quadratic, custom_table };

    Form form = Form::constant;
    double ell = 0.0;                 ///< constant
    double a = 0.0, b = 0.0;          ///< a + b |s|^2
    std::vector<double> radii;        ///< custom_table: piecewise linear in |s|, constant beyond the last knot
    std::vector<double> values;
    std::optional<std::pair<double, double>> regularity;  ///< (L, z)
    bool smooth2 = false;

    static DensitySpec constant(double ell) {
        DensitySpec d;
        d.ell = ell;
        d.smooth2 = true;
        d.regularity = std::make_pair(0.0, 1.0);
        return d;
    }
    static DensitySpec quadratic(double a, double b) {
        DensitySpec d;
        d.form = Form::separable_quadratic;
        d.a = a;
        d.b = b;
        d.smooth2 = true;
        d.regularity = std::make_pair(std::fabs(b), 2.0);
        return d;
    }

    void validate() const {
        if (form == Form::custom_table) {
            if (radii.size() != values.size() || radii.empty() || radii.front() != 0.0)
                throw std::invalid_argument("custom_table needs matching knots starting at radius 0");
            for (std::size_t i = 1; i < radii.size(); ++i)
                if (!(radii[i] > radii[i - 1])) throw std::invalid_argument("custom_table radii must increase");
            if (smooth2) throw std::invalid_argument("custom_table densities are not twice differentiable");
        }
    }

    double radial(double r) const {
        if (r >= radii.back()) return values.back();
        auto it = std::upper_bound(radii.begin(), radii.end(), r);
        const std::size_t j = static_cast<std::size_t>(it - radii.begin());
        const double t = (r - radii[j - 1]) / (radii[j] - radii[j - 1]);
        return values[j - 1] + t * (values[j] - values[j - 1]);
    }

    double operator()(std::span<const double> s) const {
        double r2 = 0.0;
        for (double x : s) r2 += x * x;
        switch (form) {
            case Form::constant: return ell;
            case Form::separable_quadratic: return a + b * r2;
            case Form::custom_table: return radial(std::sqrt(r2));
        }
        return 0.0;
    }

    /// Range of |s|^2 over an axis box in the D1 coordinates.
    static std::pair<double, double> radius2_range(const std::vector<double>& lo, const std::vector<double>& hi) {
        double mn = 0.0, mx = 0.0;
        for (std::size_t i = 0; i < lo.size(); ++i) {
            const double near = (lo[i] <= 0.0 && hi[i] >= 0.0) ? 0.0 : std::min(std::fabs(lo[i]), std::fabs(hi[i]));
            const double far = std::max(std::fabs(lo[i]), std::fabs(hi[i]));
            mn += near * near;
            mx += far * far;
        }
        return {mn, mx};
    }

    /// (inf, sup) of p over an axis box in the D1 coordinates.
    std::pair<double, double> range(const std::vector<double>& lo, const std::vector<double>& hi) const {
        auto [r2min, r2max] = radius2_range(lo, hi);
        switch (form) {
            case Form::constant: return {ell, ell};
            case Form::separable_quadratic: {
                const double p1 = a + b * r2min, p2 = a + b * r2max;
                return {std::min(p1, p2), std::max(p1, p2)};
            }
            case Form::custom_table: {
                const double rmin = std::sqrt(r2min), rmax = std::sqrt(r2max);
                double mn = std::min(radial(rmin), radial(rmax)), mx = std::max(radial(rmin), radial(rmax));
                for (std::size_t i = 0; i < radii.size(); ++i)
                    if (radii[i] > rmin && radii[i] < rmax) {
                        mn = std::min(mn, values[i]);
                        mx = std::max(mx, values[i]);
                    }
                return {mn, mx};
            }
        }
        return {0.0, 0.0};
    }

    /// Integral of p over an axis box in the D1 coordinates.
    double integral(const std::vector<double>& lo, const std::vector<double>& hi) const {
        double vol = 1.0;
        for (std::size_t i = 0; i < lo.size(); ++i) vol *= std::max(hi[i] - lo[i], 0.0);
        switch (form) {
            case Form::constant: return ell * vol;
            case Form::separable_quadratic: {
                double quad = 0.0;
                for (std::size_t i = 0; i < lo.size(); ++i) {
                    const double len = hi[i] - lo[i];
                    if (len <= 0.0) return 0.0;
                    const double m2 = (hi[i] * hi[i] * hi[i] - lo[i] * lo[i] * lo[i]) / 3.0;
                    quad += m2 * vol / len;
                }
                return a * vol + b * quad;
            }
            case Form::custom_table:
                if (vol == 0.0) return 0.0;
                return integrate_box([this](const std::vector<double>& s) { return (*this)(s); }, lo, hi, 1e-10).value;
        }
        return 0.0;
    }

    /// Laplacian of p at 0; only for twice differentiable forms.
    double laplacian_at_zero(int d1) const {
        if (!smooth2) throw std::invalid_argument("density is not marked twice differentiable");
        return form == Form::separable_quadratic ? 2.0 * b * d1 : 0.0;
    }
};

struct HomogeneousPoisson {
    double ell = 0.0;
};
struct InhomogeneousPoisson {
    DensitySpec density;
};
/// Neyman-Scott process: Poisson parents, offspring i.i.d. uniform in the radius-R ball.
struct ClusterBounded {
    double parent_rate = 0.0;
    std::vector<double> size_pmf;  ///< size_pmf[i] = P(cluster size = i + 1)
    double radius = 0.5;

    std::size_t max_size() const { return size_pmf.size(); }
    double mean_size() const {
        double m = 0.0;
        for (std::size_t i = 0; i < size_pmf.size(); ++i) m += (i + 1.0) * size_pmf[i];
        return m;
    }
    double second_factorial_moment() const {
        double m = 0.0;
        for (std::size_t i = 0; i < size_pmf.size(); ++i) m += (i + 1.0) * i * size_pmf[i];
        return m;
    }
};
/// Cox process on the lattice Z + 1/2 (D2 = 1) driven by a stationary Markov chain of states.
struct MarkovModulated {
    std::vector<std::vector<double>> transition;
    std::vector<double> rates;
};

using ModelVariant = std::variant<HomogeneousPoisson, InhomogeneousPoisson, ClusterBounded, MarkovModulated>;

struct ProcessModel {
    SpaceConfig space;
    ModelVariant variant;
};

// Markov chain helpers -------------------------------------------------------

inline std::vector<double> stationary_distribution(const std::vector<std::vector<double>>& P) {
    const int n = static_cast<int>(P.size());
    Eigen::MatrixXd A(n + 1, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) A(i, j) = P[j][i] - (i == j ? 1.0 : 0.0);
    A.row(n).setOnes();
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n + 1);
    rhs(n) = 1.0;
    Eigen::VectorXd pi = A.colPivHouseholderQr().solve(rhs);
    std::vector<double> out(n);
    for (int i = 0; i < n; ++i) out[i] = std::max(pi(i), 0.0);
    return out;
}

/// Dobrushin contraction coefficient: the largest total variation distance between two rows.
inline double dobrushin_coefficient(const std::vector<std::vector<double>>& P) {
    double best = 0.0;
    for (std::size_t i = 0; i < P.size(); ++i)
        for (std::size_t j = i + 1; j < P.size(); ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < P[i].size(); ++k) s += std::fabs(P[i][k] - P[j][k]);
            best = std::max(best, 0.5 * s);
        }
    return best;
}

inline std::vector<std::vector<double>> time_reversal(const std::vector<std::vector<double>>& P) {
    const auto pi = stationary_distribution(P);
    auto R = P;
    for (std::size_t i = 0; i < P.size(); ++i)
        for (std::size_t j = 0; j < P.size(); ++j) R[i][j] = pi[i] > 0.0 ? pi[j] * P[j][i] / pi[i] : P[i][j];
    return R;
}

inline void validate(const ProcessModel& model) {
    model.space.validate();
    std::visit(
        [&](const auto& m) {
            using M = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<M, HomogeneousPoisson>) {
                if (!(m.ell >= 0.0) || !std::isfinite(m.ell)) throw std::invalid_argument("rate must be >= 0");
            } else if constexpr (std::is_same_v<M, InhomogeneousPoisson>) {
                m.density.validate();
            } else if constexpr (std::is_same_v<M, ClusterBounded>) {
                if (model.space.mu2 != Mu2Kind::lebesgue)
                    throw std::invalid_argument("cluster model needs lebesgue mu2");
                if (!(m.parent_rate >= 0.0) || !(m.radius > 0.0) || m.size_pmf.empty())
                    throw std::invalid_argument("cluster model needs parent_rate >= 0, radius > 0, sizes");
                double s = 0.0;
                for (double p : m.size_pmf) {
                    if (!(p >= 0.0)) throw std::invalid_argument("cluster size pmf must be nonnegative");
                    s += p;
                }
                if (std::fabs(s - 1.0) > 1e-12) throw std::invalid_argument("cluster size pmf must sum to 1");
            } else {
                if (model.space.mu2 != Mu2Kind::counting || model.space.d2 != 1)
                    throw std::invalid_argument("markov-modulated model needs counting mu2 and D2 = 1");
                const std::size_t n = m.transition.size();
                if (n == 0 || m.rates.size() != n) throw std::invalid_argument("transition/rates size mismatch");
                for (const auto& row : m.transition) {
                    if (row.size() != n) throw std::invalid_argument("transition matrix must be square");
                    double s = 0.0;
                    for (double p : row) {
                        if (!(p >= 0.0)) throw std::invalid_argument("transition entries must be >= 0");
                        s += p;
                    }
                    if (std::fabs(s - 1.0) > 1e-12) throw std::invalid_argument("transition rows must sum to 1");
                }
                for (double r : m.rates)
                    if (!(r >= 0.0)) throw std::invalid_argument("rates must be >= 0");
            }
        },
        model.variant);
}

// Expectation measure ---------------------------------------------------------

inline std::vector<double> d1_part(const std::vector<double>& v, int d1) { return {v.begin(), v.begin() + d1}; }

inline double expectation_measure(const ProcessModel& model, const Box& box) {
    box.validate();
    const SpaceConfig& sp = model.space;
    if (box.dim() != static_cast<std::size_t>(sp.dim())) throw std::invalid_argument("box dimension mismatch");
    return std::visit(
        [&](const auto& m) -> double {
            using M = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<M, HomogeneousPoisson>) {
                return m.ell * mu_measure(sp, box);
            } else if constexpr (std::is_same_v<M, InhomogeneousPoisson>) {
                Box d2box{{box.lo.begin() + sp.d1, box.lo.end()}, {box.hi.begin() + sp.d1, box.hi.end()}};
                double m2 = 1.0;
                for (int j = 0; j < sp.d2; ++j)
                    m2 *= sp.mu2 == Mu2Kind::lebesgue ? d2box.hi[j] - d2box.lo[j]
                                                      : static_cast<double>(lattice_sites(d2box.lo[j], d2box.hi[j]));
                return m.density.integral(d1_part(box.lo, sp.d1), d1_part(box.hi, sp.d1)) * m2;
            } else if constexpr (std::is_same_v<M, ClusterBounded>) {
                return m.parent_rate * m.mean_size() * box.lebesgue_volume();
            } else {
                const auto pi = stationary_distribution(m.transition);
                double mean = 0.0;
                for (std::size_t i = 0; i < pi.size(); ++i) mean += pi[i] * m.rates[i];
                return mean * mu_measure(sp, box);
            }
        },
        model.variant);
}

// Certificates ----------------------------------------------------------------

/// Certificate for Conditions 1-3. `s_extent` is the largest D1 half-width of the
/// windows considered; J_T has half-width w(T)^{-1/D1} <= 1, so 1 covers every T >= 1.
inline ConditionCertificate certificate_for(const ProcessModel& model, double s_extent = 1.0) {
    validate(model);
    const SpaceConfig& sp = model.space;
    ConditionCertificate cert;
    std::visit(
        [&](const auto& m) {
            using M = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<M, HomogeneousPoisson> || std::is_same_v<M, InhomogeneousPoisson>) {
                double lo = 0.0, hi = 0.0;
                if constexpr (std::is_same_v<M, HomogeneousPoisson>) {
                    lo = hi = m.ell;
                } else {
                    std::tie(lo, hi) = m.density.range(std::vector<double>(sp.d1, -s_extent),
                                                       std::vector<double>(sp.d1, s_extent));
                }
                if (lo < 0.0) throw std::invalid_argument("density is negative on the window family");
                cert.kappa = hi;
                cert.iota = lo;
                cert.alpha = {2.0 * hi * hi, 1.0};
                cert.beta = BetaCheck::zero();
                cert.kind = MixingKind::phi;
                cert.all_kinds = true;
                cert.derivation =
                    "Poisson: E[N^2 1{N>=2}] = lam^2 + lam(1-e^-lam) <= 2 lam^2 <= 2 kappa^2 v^2; independent increments";
            } else if constexpr (std::is_same_v<M, ClusterBounded>) {
                const double lam = m.parent_rate * m.mean_size();
                const double ball = unit_ball_volume(sp.dim()) * std::pow(m.radius, sp.dim());
                const double c = 2.0 * 2.0 * (lam * lam + m.parent_rate * m.second_factorial_moment() / ball);
                cert.kappa = cert.iota = lam;
                cert.alpha = {c, 1.0};
                cert.beta = BetaCheck::finite_range(1.0, 2.0 * m.radius);
                cert.kind = MixingKind::phi;
                cert.all_kinds = true;
                cert.derivation =
                    "cluster: E[N^2 1{N>=2}] <= 2 E[N(N-1)] <= 2 (lam^2 + parent_rate E[S(S-1)]/|B_R|) v^2, "
                    "safety factor 2; dependence range 2R";
            } else {
                const auto pi = stationary_distribution(m.transition);
                double mean = 0.0, rmax = 0.0;
                for (std::size_t i = 0; i < pi.size(); ++i) {
                    mean += pi[i] * m.rates[i];
                    rmax = std::max(rmax, m.rates[i]);
                }
                const double delta =
                    std::max(dobrushin_coefficient(m.transition), dobrushin_coefficient(time_reversal(m.transition)));
                cert.kappa = cert.iota = mean;
                cert.alpha = {2.0 * rmax * rmax, 1.0};
                cert.beta = delta == 0.0 ? BetaCheck::zero() : BetaCheck::geometric(2.0 * delta, delta);
                cert.kind = MixingKind::phi;
                cert.all_kinds = false;
                cert.derivation =
                    "markov: mixed Poisson counts, E[N^2 1{N>=2}] <= 2 E[Lam^2] <= 2 rmax^2 v^2; "
                    "phi <= delta_rev^{n} + delta^{n}, n = floor(u) + 1";
            }
        },
        model.variant);
    cert.validate();
    return cert;
}

// Sampling --------------------------------------------------------------------

inline long poisson_draw(Rng& rng, double mean) {
    if (!(mean > 0.0)) return 0;
    return std::poisson_distribution<long>(mean)(rng);
}

inline double uniform_draw(Rng& rng, double lo, double hi) {
    return lo + (hi - lo) * std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

/// Uniform point of `box` under Lebesgue^{D1} x mu2.
inline void draw_location(Rng& rng, const SpaceConfig& sp, const Box& box, Point& x) {
    for (int i = 0; i < sp.d1; ++i) x[i] = uniform_draw(rng, box.lo[i], box.hi[i]);
    for (int j = sp.d1; j < sp.dim(); ++j) {
        if (sp.mu2 == Mu2Kind::lebesgue) {
            x[j] = uniform_draw(rng, box.lo[j], box.hi[j]);
        } else {
            const long first = static_cast<long>(std::ceil(box.lo[j] - 0.5));
            const long count = lattice_sites(box.lo[j], box.hi[j]);
            x[j] = static_cast<double>(first + std::uniform_int_distribution<long>(0, count - 1)(rng)) + 0.5;
        }
    }
}

inline PointPattern sample(const ProcessModel& model, const Box& window, std::uint64_t seed) {
    validate(model);
    window.validate();
    const SpaceConfig& sp = model.space;
    const int D = sp.dim();
    if (window.dim() != static_cast<std::size_t>(D)) throw std::invalid_argument("window dimension mismatch");
    Rng rng = make_rng(seed);
    PointPattern out(static_cast<std::size_t>(D));
    Point x(D);

    std::visit(
        [&](const auto& m) {
            using M = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<M, HomogeneousPoisson> || std::is_same_v<M, InhomogeneousPoisson>) {
                const double nu = expectation_measure(model, window);
                const long n = poisson_draw(rng, nu);
                if (n == 0) return;
                if constexpr (std::is_same_v<M, HomogeneousPoisson>) {
                    for (long i = 0; i < n; ++i) {
                        draw_location(rng, sp, window, x);
                        out.push_back(x);
                    }
                } else {
                    const double envelope =
                        m.density.range(d1_part(window.lo, sp.d1), d1_part(window.hi, sp.d1)).second;
                    std::uniform_real_distribution<double> unit(0.0, 1.0);
                    for (long i = 0; i < n; ++i) {
                        while (true) {
                            draw_location(rng, sp, window, x);
                            const double p = m.density(std::span<const double>(x.data(), sp.d1));
                            if (p > envelope * (1.0 + 1e-12))
                                throw std::runtime_error("density exceeds its rejection envelope");
                            if (unit(rng) * envelope <= p) break;
                        }
                        out.push_back(x);
                    }
                }
            } else if constexpr (std::is_same_v<M, ClusterBounded>) {
                Box inflated = window;
                for (int i = 0; i < D; ++i) {
                    inflated.lo[i] -= m.radius;
                    inflated.hi[i] += m.radius;
                }
                const long parents = poisson_draw(rng, m.parent_rate * inflated.lebesgue_volume());
                std::discrete_distribution<int> size_dist(m.size_pmf.begin(), m.size_pmf.end());
                Point parent(D), off(D);
                for (long q = 0; q < parents; ++q) {
                    for (int i = 0; i < D; ++i) parent[i] = uniform_draw(rng, inflated.lo[i], inflated.hi[i]);
                    const int size = size_dist(rng) + 1;
                    for (int c = 0; c < size; ++c) {
                        double r2;
                        do {
                            r2 = 0.0;
                            for (int i = 0; i < D; ++i) {
                                off[i] = uniform_draw(rng, -m.radius, m.radius);
                                r2 += off[i] * off[i];
                            }
                        } while (r2 > m.radius * m.radius);
                        for (int i = 0; i < D; ++i) x[i] = parent[i] + off[i];
                        if (window.contains(x)) out.push_back(x);
                    }
                }
            } else {
                const long count = lattice_sites(window.lo[sp.d1], window.hi[sp.d1]);
                if (count == 0) return;
                const long first = static_cast<long>(std::ceil(window.lo[sp.d1] - 0.5));
                double vol1 = 1.0;
                for (int i = 0; i < sp.d1; ++i) vol1 *= window.hi[i] - window.lo[i];
                const auto pi = stationary_distribution(m.transition);
                int state = std::discrete_distribution<int>(pi.begin(), pi.end())(rng);
                for (long site = 0; site < count; ++site) {
                    if (site > 0)
                        state = std::discrete_distribution<int>(m.transition[state].begin(),
                                                                m.transition[state].end())(rng);
                    const long n = poisson_draw(rng, m.rates[state] * vol1);
                    for (long i = 0; i < n; ++i) {
                        for (int d = 0; d < sp.d1; ++d) x[d] = uniform_draw(rng, window.lo[d], window.hi[d]);
                        x[sp.d1] = static_cast<double>(first + site) + 0.5;
                        out.push_back(x);
                    }
                }
            }
        },
        model.variant);
    return out;
}

// Orderliness verification --------------------------------------------------

/// v = mu1([a, b]) mu2([c, d + 1]) for the rectangle [a, b] x [c, d].
inline double orderliness_volume(const SpaceConfig& sp, const Box& rect) {
    double v = 1.0;
    for (int i = 0; i < sp.d1; ++i) v *= rect.hi[i] - rect.lo[i];
    for (int j = sp.d1; j < sp.dim(); ++j)
        v *= sp.mu2 == Mu2Kind::lebesgue ? rect.hi[j] + 1.0 - rect.lo[j]
                                         : static_cast<double>(lattice_sites(rect.lo[j], rect.hi[j] + 1.0));
    return v;
}

struct OrderlinessRow {
    Box rect;
    double v = 0.0;
    double estimate = 0.0;  ///< MC mean of N^2 1{N >= 2}
    double se = 0.0;
    double bound = 0.0;     ///< v alpha(v)
    double ratio = 0.0;     ///< estimate / bound
    bool violated = false;  ///< lower 3-se confidence bound exceeds the certified bound
};

inline std::vector<OrderlinessRow> verify_orderliness(const ProcessModel& model, const ConditionCertificate& cert,
                                                      const std::vector<Box>& rects, std::size_t mc_n,
                                                      std::uint64_t seed, unsigned jobs = 1) {
    if (mc_n < 1000) throw std::invalid_argument("verify_orderliness needs mc_n >= 1000");
    std::vector<OrderlinessRow> rows;
    const std::uint64_t tag = stream_tag("verify_orderliness");
    for (std::size_t r = 0; r < rects.size(); ++r) {
        OrderlinessRow row;
        row.rect = rects[r];
        row.v = orderliness_volume(model.space, rects[r]);
        row.bound = row.v * cert.alpha(row.v);
        std::vector<double> vals(mc_n);
        parallel_for(mc_n, jobs, [&](std::size_t i) {
            const double n = static_cast<double>(
                sample(model, rects[r], stream_seed(seed, tag + r, i)).size());
            vals[i] = n >= 2.0 ? n * n : 0.0;
        });
        double mean = 0.0, sq = 0.0;
        for (double v : vals) mean += v;
        mean /= static_cast<double>(mc_n);
        for (double v : vals) sq += (v - mean) * (v - mean);
        row.estimate = mean;
        row.se = std::sqrt(sq / static_cast<double>(mc_n - 1) / static_cast<double>(mc_n));
        const double lower = row.estimate - 3.0 * row.se;
        if (row.bound > 0.0) {
            row.ratio = row.estimate / row.bound;
            row.violated = lower / row.bound > 1.0;
        } else {
            row.ratio = row.estimate > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
            row.violated = lower > 0.0;
        }
        rows.push_back(row);
    }
    return rows;
}

/// Checks |p(s) - p(0)| <= L |s|^z on `samples` uniform points of the D1 box [-extent, extent]^{D1}.
inline bool verify_regularity(const DensitySpec& density, int d1, double extent, std::size_t samples,
                              std::uint64_t seed) {
    if (!density.regularity) return false;
    const auto [L, z] = *density.regularity;
    Rng rng = make_rng(seed);
    const std::vector<double> zero(d1, 0.0);
    const double p0 = density(zero);
    std::vector<double> s(d1);
    for (std::size_t i = 0; i < samples; ++i) {
        double r2 = 0.0;
        for (int d = 0; d < d1; ++d) {
            s[d] = uniform_draw(rng, -extent, extent);
            r2 += s[d] * s[d];
        }
        if (std::fabs(density(s) - p0) > L * std::pow(std::sqrt(r2), z) * (1.0 + 1e-12) + 1e-15) return false;
    }
    return true;
}

}  // namespace ppapprox
