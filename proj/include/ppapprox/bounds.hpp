#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <vector>

#include "geometry.hpp"
#include "models.hpp"
#include "random.hpp"
#include "stein.hpp"

namespace ppapprox {

enum class Theorem { d2_rho_210, d2_rho_211, d2_beta, d2_phi, dtv_counts, d2_tilde, d2_fixed_limit };

inline constexpr std::array<std::pair<Theorem, std::string_view>, 7> theorem_names{{
    {Theorem::d2_rho_210, "d2_rho_210"},
    {Theorem::d2_rho_211, "d2_rho_211"},
    {Theorem::d2_beta, "d2_beta"},
    {Theorem::d2_phi, "d2_phi"},
    {Theorem::dtv_counts, "dtv_counts"},
    {Theorem::d2_tilde, "d2_tilde"},
    {Theorem::d2_fixed_limit, "d2_fixed_limit"},
}};

inline std::string to_string(Theorem t) {
    for (const auto& [k, v] : theorem_names)
        if (k == t) return std::string(v);
    return "?";
}

inline std::optional<Theorem> theorem_from_string(std::string_view s) {
    for (const auto& [k, v] : theorem_names)
        if (v == s) return k;
    return std::nullopt;
}

/// Which quantitative form the measure-preserving variants build on.
enum class BaseForm { form_210, form_211 };

struct BoundInputs {
    SpaceConfig space;
    StretchSchedule schedule;
    double T = 1.0;
    double h = 1.0;
    long m = 0;
    ConditionCertificate certificate;
    Theorem theorem = Theorem::d2_rho_210;
    BaseForm base = BaseForm::form_210;
    std::optional<std::pair<double, double>> regularity;  ///< (L, z)

    double w() const { return schedule(T); }
};

/// Fixed term labels, in report and CSV order.
inline constexpr std::array<std::string_view, 9> term_labels{
    "discretization_d1",   "discretization_d2_dir", "strong_neighborhood",
    "orderliness_cells",   "orderliness_poisson",   "orderliness_sections",
    "mixing",              "mixing_orderliness",    "fixed_limit"};

struct BoundTerm {
    std::string label;
    double value = 0.0;
};

struct BoundReport {
    Theorem theorem = Theorem::d2_rho_210;
    std::vector<BoundTerm> terms;
    double total = 0.0;
    double total_clamped = 0.0;
    double epsilon = 0.0;
    double L = 1.0;
    double lambda_lower = 0.0;
    double nu_lower = 0.0;  ///< iota mu(J_T)
    double nu_upper = 0.0;  ///< kappa mu(J_T)
    bool infinite = false;

    /// Value of a term, 0 when the theorem has no such term.
    double term(std::string_view label) const {
        for (const auto& t : terms)
            if (t.label == label) return t.value;
        return 0.0;
    }

    void add(std::string_view label, double v) { terms.push_back({std::string(label), v}); }

    void finish() {
        total = 0.0;
        for (const auto& t : terms) total += t.value;
        infinite = std::isinf(total);
        total_clamped = std::min(total, 1.0);
    }
};

/// 1 + max(ln x, 0).
inline double log_up(double x) {
    if (!(x > 0.0)) throw std::invalid_argument("log_up needs x > 0");
    return 1.0 + log_plus(x);
}

inline double lemma_2F_gap(const SpaceConfig& space, const ConditionCertificate& cert, double w, double h) {
    const double wh = w * h;
    if (!(wh >= 1.0)) throw std::invalid_argument("lemma_2F_gap needs w h >= 1");
    return std::pow(2.0, space.d2 - 2) / wh * cert.alpha(std::pow(2.0, space.d2) / wh);
}

inline double epsilon_T(const SpaceConfig& space, const ConditionCertificate& cert, double w, double h) {
    if (!(cert.iota > 0.0)) throw std::invalid_argument("epsilon_T needs iota > 0");
    const double a = cert.alpha(std::pow(2.0, space.d2) / (w * h));
    const double par = 1.0 - std::pow(2.0, space.dim() + space.d2 - 2) / cert.iota * a;
    if (!(par > 0.0)) return std::numeric_limits<double>::infinity();
    return 1.0 / par - 1.0;
}

/// Lower bound 2^D (T/w)(iota - 2^{D+D2-2} alpha(2^{D2}/(w h))) v 0 on lambda = sum of p_kl.
inline double lambda_lower_bound(const SpaceConfig& space, const ConditionCertificate& cert, double w, double T,
                                 double h) {
    const double a = cert.alpha(std::pow(2.0, space.d2) / (w * h));
    const double v = std::pow(2.0, space.dim()) * T / w * (cert.iota - std::pow(2.0, space.dim() + space.d2 - 2) * a);
    return std::max(v, 0.0);
}

namespace detail {

enum class MixingUse { rho, beta, phi };

/// beta_check as it enters a theorem needing the given mixing kind.
inline BetaCheck mixing_function_for(const ConditionCertificate& cert, MixingUse use) {
    if (cert.all_kinds) return cert.beta;
    switch (use) {
        case MixingUse::rho:
            if (cert.kind == MixingKind::rho) return cert.beta;
            if (cert.kind == MixingKind::phi) {
                // rho <= 2 sqrt(phi(B,C) phi(C,B)), both directions bounded by beta_check.
                BetaCheck b = cert.beta;
                b.c *= 2.0;
                return b;
            }
            break;
        case MixingUse::beta:
            if (cert.kind == MixingKind::beta || cert.kind == MixingKind::phi) return cert.beta;
            break;
        case MixingUse::phi:
            if (cert.kind == MixingKind::phi) return cert.beta;
            break;
    }
    throw std::invalid_argument(std::string("certificate of kind ") + to_string(cert.kind) +
                                " is incompatible with the selected theorem");
}

struct Common {
    int d1, d2, D;
    double T, w, h, m, kappa, iota;
    long n2;
    double eps;
    bool eps_inf;
    double a_cells;     ///< alpha(2^{D2}/(w h))
    double a_sections;  ///< alpha(2^D (2m+1)^{D2}/w)
    double mu_JT;       ///< 2^D T / w
    bool mixing_off;    ///< m > 2 n2 + 1
};

inline Common common(const BoundInputs& in) {
    in.space.validate();
    in.schedule.validate();
    in.certificate.validate();
    if (!(in.T >= 1.0) || !std::isfinite(in.T)) throw std::invalid_argument("T must be >= 1");
    if (!(in.h >= 1.0) || !std::isfinite(in.h)) throw std::invalid_argument("h must be >= 1");
    if (in.m < 0) throw std::invalid_argument("m must be >= 0");
    if (!(in.certificate.iota > 0.0)) throw std::invalid_argument("bounds need iota > 0");
    const GridSpec grid = build_grid(in.space, in.schedule, in.T, in.h);
    Common c{};
    c.d1 = in.space.d1;
    c.d2 = in.space.d2;
    c.D = in.space.dim();
    c.T = in.T;
    c.w = grid.w;
    c.h = in.h;
    c.m = static_cast<double>(in.m);
    c.kappa = in.certificate.kappa;
    c.iota = in.certificate.iota;
    c.n2 = grid.n2;
    c.eps = epsilon_T(in.space, in.certificate, c.w, c.h);
    c.eps_inf = std::isinf(c.eps);
    c.a_cells = in.certificate.alpha(std::pow(2.0, c.d2) / (c.w * c.h));
    c.a_sections = in.certificate.alpha(std::pow(2.0, c.D) * std::pow(2.0 * c.m + 1.0, c.d2) / c.w);
    c.mu_JT = std::pow(2.0, c.D) * c.T / c.w;
    c.mixing_off = in.m > 2 * grid.n2 + 1;
    return c;
}

inline void fill_aux(BoundReport& r, const BoundInputs& in, const Common& c) {
    r.theorem = in.theorem;
    r.epsilon = c.eps;
    r.lambda_lower = lambda_lower_bound(in.space, in.certificate, c.w, c.T, c.h);
    r.nu_lower = c.iota * c.mu_JT;
    r.nu_upper = c.kappa * c.mu_JT;
}

inline double pow2(double e) { return std::pow(2.0, e); }

/// Factor min(1, 1.65 sqrt(1+eps) sqrt(w/(2^D iota T))) on the mixing sum.
inline double mixing_factor(const Common& c) {
    if (c.eps_inf) return 1.0;
    return std::min(1.0, 1.65 * std::sqrt(1.0 + c.eps) * std::sqrt(c.w / (pow2(c.D) * c.iota * c.T)));
}

inline double L_factor(const Common& c) {
    if (c.eps_inf) return 1.0;
    const double inv = 2.0 * (1.0 + c.eps) * c.w / (pow2(c.D) * c.iota * c.T);
    return std::min(1.0, inv * (1.0 + 2.0 * log_plus(pow2(c.D - 1) * c.kappa * c.T / c.w)));
}

inline void discretization_terms(BoundReport& r, const Common& c, double d1_stretch) {
    r.add("discretization_d1", d1_stretch * std::sqrt(static_cast<double>(c.d1)) / std::pow(c.h, 1.0 / c.d1));
    r.add("discretization_d2_dir", std::sqrt(static_cast<double>(c.d2)) / std::pow(c.T, 1.0 / c.d2));
}

inline double cells_term(const Common& c) { return pow2(2 * c.D + c.d2 - 1) * c.T / c.w * c.a_cells; }

/// The five non-mixing terms of the rho-mixing d2 bound.
inline void terms_210_core(BoundReport& r, const Common& c, double d1_stretch) {
    const double L = L_factor(c);
    r.L = L;
    discretization_terms(r, c, d1_stretch);
    r.add("strong_neighborhood",
          L * pow2(2 * c.D + 2 * c.d1) * c.kappa * c.kappa * c.T * std::pow(2.0 * c.m + 1.0, c.d2) / (c.w * c.w));
    r.add("orderliness_cells", cells_term(c));
    r.add("orderliness_sections", L * pow2(c.D + c.d2) *
                                      std::pow(std::pow(c.T, 1.0 / c.d2) + c.m + 1.0, c.d2) / c.w * c.a_sections);
}

inline double rho_mixing_210(const Common& c, const BetaCheck& beta) {
    if (c.mixing_off) return 0.0;
    const double b = beta(c.m);
    if (b == 0.0) return 0.0;
    return mixing_factor(c) * pow2(2 * c.D) * std::sqrt(c.kappa) * std::sqrt(c.h / c.w) * c.T * b;
}

inline BoundReport report_210(const BoundInputs& in, double d1_stretch) {
    const Common c = common(in);
    const BetaCheck beta = mixing_function_for(in.certificate, MixingUse::rho);
    BoundReport r;
    fill_aux(r, in, c);
    terms_210_core(r, c, d1_stretch);
    r.add("mixing", rho_mixing_210(c, beta));
    r.finish();
    return r;
}

inline BoundReport report_211(const BoundInputs& in, double d1_stretch) {
    const Common c = common(in);
    const BetaCheck beta = mixing_function_for(in.certificate, MixingUse::rho);
    BoundReport r;
    fill_aux(r, in, c);
    r.L = L_factor(c);
    discretization_terms(r, c, d1_stretch);
    const double inf = std::numeric_limits<double>::infinity();
    const double lu = log_up(pow2(c.D - 1) * c.kappa * c.T / c.w);
    // With eps infinite every term carrying (1 + eps) is infinite, whatever the other factors.
    const double one_eps = c.eps_inf ? inf : 1.0 + c.eps;
    r.add("strong_neighborhood", c.eps_inf ? inf
                                           : pow2(c.D + 2 * c.d1 + 2) * c.kappa * c.kappa / c.iota * one_eps * lu *
                                                 std::pow(2.0 * c.m + 1.0, c.d2) / c.w);
    r.add("orderliness_cells", cells_term(c));
    r.add("orderliness_sections", c.eps_inf ? inf
                                            : pow2(c.d2 + 2) * std::pow(5.0, c.d2) / c.iota * one_eps * lu *
                                                  c.a_sections);
    double mix = 0.0;
    if (c.eps_inf) {
        mix = inf;
    } else if (!c.mixing_off) {
        const double b = beta(c.m);
        if (b != 0.0)
            mix = pow2(1.5 * c.D + 1.0) * std::sqrt(c.kappa / c.iota) * std::sqrt(one_eps) * std::sqrt(c.T * c.h) * b;
    }
    r.add("mixing", mix);
    r.finish();
    return r;
}

}  // namespace detail

inline BoundReport bound_2_10(const BoundInputs& in) {
    if (in.theorem != Theorem::d2_rho_210) throw std::invalid_argument("bound_2_10 needs theorem d2_rho_210");
    return detail::report_210(in, 1.0);
}

inline BoundReport bound_2_11(const BoundInputs& in) {
    if (in.theorem != Theorem::d2_rho_211) throw std::invalid_argument("bound_2_11 needs theorem d2_rho_211");
    return detail::report_211(in, 1.0);
}

/// Beta or phi mixing: the rho-bound terms with the mixing sum recomputed from the cell-row estimates.
inline BoundReport bound_thm_2D(const BoundInputs& in) {
    using namespace detail;
    if (in.theorem != Theorem::d2_beta && in.theorem != Theorem::d2_phi)
        throw std::invalid_argument("bound_thm_2D needs theorem d2_beta or d2_phi");
    const Common c = common(in);
    const bool is_beta = in.theorem == Theorem::d2_beta;
    const BetaCheck beta = mixing_function_for(in.certificate, is_beta ? MixingUse::beta : MixingUse::phi);
    BoundReport r;
    fill_aux(r, in, c);
    terms_210_core(r, c, 1.0);
    const double F = mixing_factor(c);
    double mix = 0.0, mix_ord = 0.0;
    if (!c.mixing_off) {
        const double b = beta(c.m);
        if (is_beta) {
            // Per cell row: sum_k e_kl <= 2 beta(m) + 2^{D+1} alpha(2^D/w)/w; at most 4^{D2} T rows.
            const double rows = std::pow(4.0, c.d2) * c.T;
            mix = b == 0.0 ? 0.0 : F * rows * 2.0 * b;
            const double a = in.certificate.alpha(pow2(c.D) / c.w);
            mix_ord = a == 0.0 ? 0.0 : F * rows * pow2(c.D + 1) * a / c.w;
        } else {
            // e_kl <= 2 beta(m) kappa/(h w) on at most 4^D h T cells.
            mix = b == 0.0 ? 0.0 : F * pow2(2 * c.D + 1) * c.kappa * c.T * b / c.w;
        }
    }
    r.add("mixing", mix);
    if (is_beta) r.add("mixing_orderliness", mix_ord);
    r.finish();
    return r;
}

/// Total variation between the point counts.
inline BoundReport bound_thm_2G(const BoundInputs& in) {
    using namespace detail;
    if (in.theorem != Theorem::dtv_counts) throw std::invalid_argument("bound_thm_2G needs theorem dtv_counts");
    const Common c = common(in);
    const BetaCheck beta = mixing_function_for(in.certificate, MixingUse::rho);
    BoundReport r;
    fill_aux(r, in, c);

    const double ratio = c.w / (pow2(c.D) * c.iota * c.T);
    const double local_factor = c.eps_inf ? 1.0 : std::min(1.0, (1.0 + c.eps) * ratio);
    const double mix_factor = c.eps_inf ? 1.0 : std::min(1.0, std::sqrt(1.0 + c.eps) * std::sqrt(ratio));
    r.L = local_factor;

    const double cells = pow2(2 * c.D + c.d2 - 2) * c.T / c.w * c.a_cells;
    r.add("strong_neighborhood", local_factor * pow2(2 * c.D + 2 * c.d1) * c.kappa * c.kappa * c.T *
                                     std::pow(2.0 * c.m + 1.0, c.d2) / (c.w * c.w));
    r.add("orderliness_cells", cells);
    r.add("orderliness_poisson",
          cells == 0.0 ? 0.0 : std::min(1.0, pow2(-0.5 * c.D) * std::sqrt(c.w / (c.iota * c.T))) * cells);
    r.add("orderliness_sections", local_factor * pow2(c.D + c.d2) *
                                      std::pow(std::pow(c.T, 1.0 / c.d2) + c.m + 1.0, c.d2) / c.w * c.a_sections);
    double mix = 0.0;
    if (!c.mixing_off) {
        const double b = beta(c.m);
        if (b != 0.0) mix = mix_factor * pow2(2 * c.D) * std::sqrt(c.kappa) * std::sqrt(c.h / c.w) * c.T * b;
    }
    r.add("mixing", mix);
    r.finish();
    return r;
}

/// Volume-preserving transformation: the D1 discretization term gains (T/w)^{1/D1}.
inline BoundReport bound_thm_2I(const BoundInputs& in) {
    if (in.theorem != Theorem::d2_tilde && in.theorem != Theorem::d2_fixed_limit)
        throw std::invalid_argument("bound_thm_2I needs theorem d2_tilde");
    const double stretch = std::pow(in.T / in.w(), 1.0 / in.space.d1);
    BoundReport r = in.base == BaseForm::form_210 ? detail::report_210(in, stretch) : detail::report_211(in, stretch);
    r.theorem = in.theorem;
    return r;
}

/// Approximation by the fixed-intensity Poisson process p(0) Lebesgue, under a regularity (L, z) of p.
inline BoundReport bound_thm_2K(const BoundInputs& in) {
    if (in.theorem != Theorem::d2_fixed_limit) throw std::invalid_argument("bound_thm_2K needs theorem d2_fixed_limit");
    if (!in.regularity) throw std::invalid_argument("bound_thm_2K needs a regularity (L, z)");
    const auto [L, z] = *in.regularity;
    if (!(L >= 0.0) || !(z > 0.0)) throw std::invalid_argument("regularity needs L >= 0 and z > 0");
    BoundReport r = bound_thm_2I(in);
    const int d1 = in.space.d1, d2 = in.space.d2;
    const double extra = std::pow(2.0, (z + d1 + 2.0 * d2) / 2.0) * (d1 / (z + d1)) * L * unit_ball_volume(d1) * in.T /
                         std::pow(in.w(), 1.0 + z / d1);
    r.add("fixed_limit", extra);
    r.finish();
    return r;
}

inline BoundReport evaluate_bound(const BoundInputs& in) {
    switch (in.theorem) {
        case Theorem::d2_rho_210: return bound_2_10(in);
        case Theorem::d2_rho_211: return bound_2_11(in);
        case Theorem::d2_beta:
        case Theorem::d2_phi: return bound_thm_2D(in);
        case Theorem::dtv_counts: return bound_thm_2G(in);
        case Theorem::d2_tilde: return bound_thm_2I(in);
        case Theorem::d2_fixed_limit: return bound_thm_2K(in);
    }
    throw std::invalid_argument("unknown theorem");
}

// Parameter optimization ------------------------------------------------------

struct OptimizedBound {
    long m = 0;
    double h = 1.0;
    BoundReport report;
};

/// Exhaustive grid minimization of the total; ties go to the smaller m, then the smaller h.
inline OptimizedBound optimize_parameters(const BoundInputs& base, const std::vector<long>& m_grid,
                                          const std::vector<double>& h_grid, unsigned jobs = 1) {
    if (m_grid.empty() || h_grid.empty()) throw std::invalid_argument("optimize_parameters needs nonempty grids");
    const std::size_t n = m_grid.size() * h_grid.size();
    std::vector<BoundReport> reports(n);
    parallel_for(n, jobs, [&](std::size_t i) {
        BoundInputs in = base;
        in.m = m_grid[i / h_grid.size()];
        in.h = h_grid[i % h_grid.size()];
        reports[i] = evaluate_bound(in);
    });
    std::size_t best = 0;
    auto key = [&](std::size_t i) {
        return std::make_tuple(reports[i].total, m_grid[i / h_grid.size()], h_grid[i % h_grid.size()]);
    };
    for (std::size_t i = 1; i < n; ++i)
        if (key(i) < key(best)) best = i;
    return {m_grid[best / h_grid.size()], h_grid[best % h_grid.size()], reports[best]};
}

/// m in {0, 1, 2, 4, ...} up to ceil(T^{1/D2}); h in {1, T^{1/2}, T, T^{3/2}}.
inline std::pair<std::vector<long>, std::vector<double>> auto_grids(const SpaceConfig& space, double T) {
    std::vector<long> ms{0};
    const long top = static_cast<long>(std::ceil(std::pow(T, 1.0 / space.d2) - 1e-9));
    for (long m = 1; m < top; m *= 2) ms.push_back(m);
    if (top >= 1 && ms.back() != top) ms.push_back(top);
    std::vector<double> hs{1.0};
    for (double e : {0.5, 1.0, 1.5}) {
        const double h = std::pow(T, e);
        if (h > hs.back()) hs.push_back(h);
    }
    return {ms, hs};
}

/// Fine grids for slope studies: m on a 2^{1/8} geometric ladder up to 2 T^{1/D2} + 2, h = 2^{j/4} up to T^3.
inline std::pair<std::vector<long>, std::vector<double>> fine_grids(const SpaceConfig& space, double T) {
    std::vector<long> ms{0};
    const double top = 2.0 * std::pow(T, 1.0 / space.d2) + 2.0;
    for (int j = 0;; ++j) {
        const long m = std::lround(std::pow(2.0, j / 8.0));
        if (static_cast<double>(m) > top) break;
        if (m != ms.back()) ms.push_back(m);
    }
    std::vector<double> hs;
    for (int j = 0;; ++j) {
        const double h = std::pow(2.0, j / 4.0);
        if (h > T * T * T) break;
        hs.push_back(h);
    }
    return {ms, hs};
}

/// Least-squares slope of log y against log x.
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("loglog_slope needs two or more points");
    double mx = 0.0, my = 0.0;
    const double n = static_cast<double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw std::invalid_argument("loglog_slope needs positive values");
        mx += std::log(x[i]);
        my += std::log(y[i]);
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = std::log(x[i]) - mx;
        sxy += dx * (std::log(y[i]) - my);
        sxx += dx * dx;
    }
    return sxy / sxx;
}

}  // namespace ppapprox
