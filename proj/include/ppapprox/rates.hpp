#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "models.hpp"

namespace ppapprox {

/// Exact fraction with 64-bit parts; enough for exponent arithmetic on small inputs.
struct Rational {
    long long num = 0;
    long long den = 1;

    Rational() = default;
    Rational(long long n) : num(n), den(1) {}  // NOLINT(google-explicit-constructor)
    Rational(long long n, long long d) : num(n), den(d) {
        if (d == 0) throw std::domain_error("rational with zero denominator");
        normalize();
    }

    void normalize() {
        if (den < 0) {
            num = -num;
            den = -den;
        }
        const long long g = std::gcd(num < 0 ? -num : num, den);
        if (g > 1) {
            num /= g;
            den /= g;
        }
    }

    double to_double() const { return static_cast<double>(num) / static_cast<double>(den); }
    std::string str() const { return den == 1 ? std::to_string(num) : std::to_string(num) + "/" + std::to_string(den); }

    friend Rational operator+(Rational a, Rational b) { return {a.num * b.den + b.num * a.den, a.den * b.den}; }
    friend Rational operator-(Rational a, Rational b) { return {a.num * b.den - b.num * a.den, a.den * b.den}; }
    friend Rational operator*(Rational a, Rational b) { return {a.num * b.num, a.den * b.den}; }
    friend Rational operator/(Rational a, Rational b) {
        if (b.num == 0) throw std::domain_error("rational division by zero");
        return {a.num * b.den, a.den * b.num};
    }
    friend Rational operator-(Rational a) { return {-a.num, a.den}; }
    friend bool operator==(Rational a, Rational b) { return a.num == b.num && a.den == b.den; }
    friend bool operator<(Rational a, Rational b) { return a.num * b.den < b.num * a.den; }
    friend bool operator<=(Rational a, Rational b) { return !(b < a); }
    friend bool operator>(Rational a, Rational b) { return b < a; }
    friend bool operator>=(Rational a, Rational b) { return !(a < b); }
    friend std::ostream& operator<<(std::ostream& os, Rational r) { return os << r.str(); }
};

/// Power-family setting: w(T) ~ T^delta, alpha(v) ~ v^r, beta(u) ~ u^{-b}.
struct RateConfig {
    Rational delta{1};
    Rational r{1};
    Rational b{2};
    MixingKind kind = MixingKind::rho;
    int d1 = 1;
    int d2 = 1;
};

struct RateResult {
    Rational exponent;
    Rational x;  ///< m ~ T^x
    Rational q;  ///< h ~ T^q
    std::vector<std::string> binding;  ///< terms attaining the maximum at the optimum
};

namespace detail {

/// Exponent of T in one bound term, affine in (x, q).
struct ExponentTerm {
    std::string label;
    Rational cx, cq, c0;
    Rational at(Rational x, Rational q) const { return cx * x + cq * q + c0; }
};

inline std::vector<ExponentTerm> exponent_terms(const RateConfig& cfg) {
    const Rational d1(cfg.d1), d2(cfg.d2), delta = cfg.delta, r = cfg.r, b = cfg.b;
    const Rational half(1, 2);
    std::vector<ExponentTerm> t{
        {"discretization_d1", 0, Rational(-1) / d1, 0},
        {"discretization_d2_dir", 0, 0, Rational(-1) / d2},
        {"strong_neighborhood", d2, 0, -delta},
        {"orderliness_cells", 0, -r, Rational(1) - delta - r * delta},
        {"orderliness_sections", r * d2, 0, -(r * delta)},
    };
    switch (cfg.kind) {
        case MixingKind::rho: t.push_back({"mixing", -b, half, half}); break;
        case MixingKind::beta:
            t.push_back({"mixing", -b, 0, (Rational(1) + delta) * half});
            t.push_back({"mixing_orderliness", 0, 0, (Rational(1) - delta) * half - r * delta});
            break;
        case MixingKind::phi: t.push_back({"mixing", -b, 0, (Rational(1) - delta) * half}); break;
    }
    return t;
}

/// Constraint g . (x, q, z) + g0 >= 0.
struct HalfSpace {
    Rational gx, gq, gz, g0;
    Rational eval(Rational x, Rational q, Rational z) const { return gx * x + gq * q + gz * z + g0; }
};

inline Rational det3(const Rational m[3][3]) {
    return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
           m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
}

}  // namespace detail

/// Asymptotic exponent of the bound total in T, minimized over m = T^x (0 <= x <= 1/D2) and
/// h = T^q (q >= 0) with logarithmic factors dropped. Solved exactly as a small linear program
/// by enumerating the vertices of {z >= every term exponent}.
inline RateResult rate_exponent(const RateConfig& cfg) {
    if (cfg.d1 < 1 || cfg.d2 < 1) throw std::invalid_argument("rate_exponent needs D1, D2 >= 1");
    if (!(cfg.delta > Rational(0)) || cfg.delta > Rational(1)) throw std::invalid_argument("rate_exponent needs 0 < delta <= 1");
    if (!(cfg.r > Rational(0)) || !(cfg.b > Rational(0)))
        throw std::invalid_argument("rate_exponent: degenerate family (alpha and beta exponents must be > 0)");

    using detail::HalfSpace;
    const auto terms = detail::exponent_terms(cfg);
    const Rational xmax = Rational(1) / Rational(cfg.d2);
    std::vector<HalfSpace> cons;
    for (const auto& t : terms) cons.push_back({-t.cx, -t.cq, 1, -t.c0});
    cons.push_back({1, 0, 0, 0});     // x >= 0
    cons.push_back({-1, 0, 0, xmax}); // x <= 1/D2
    cons.push_back({0, 1, 0, 0});     // q >= 0

    std::optional<RateResult> best;
    const std::size_t n = cons.size();
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = a + 1; b < n; ++b)
            for (std::size_t c = b + 1; c < n; ++c) {
                const HalfSpace* rows[3] = {&cons[a], &cons[b], &cons[c]};
                Rational M[3][3], rhs[3];
                for (int i = 0; i < 3; ++i) {
                    M[i][0] = rows[i]->gx;
                    M[i][1] = rows[i]->gq;
                    M[i][2] = rows[i]->gz;
                    rhs[i] = -rows[i]->g0;
                }
                const Rational det = detail::det3(M);
                if (det == Rational(0)) continue;
                Rational sol[3];
                for (int k = 0; k < 3; ++k) {
                    Rational Mk[3][3];
                    for (int i = 0; i < 3; ++i)
                        for (int j = 0; j < 3; ++j) Mk[i][j] = j == k ? rhs[i] : M[i][j];
                    sol[k] = detail::det3(Mk) / det;
                }
                bool feasible = true;
                for (const auto& h : cons)
                    if (h.eval(sol[0], sol[1], sol[2]) < Rational(0)) {
                        feasible = false;
                        break;
                    }
                if (!feasible) continue;
                const bool better = !best || sol[2] < best->exponent ||
                                    (sol[2] == best->exponent &&
                                     (sol[0] < best->x || (sol[0] == best->x && sol[1] < best->q)));
                if (better) best = RateResult{sol[2], sol[0], sol[1], {}};
            }
    if (!best) throw std::runtime_error("rate_exponent: no feasible vertex");
    for (const auto& t : terms)
        if (t.at(best->x, best->q) == best->exponent) best->binding.push_back(t.label);
    return *best;
}

enum class ConvergenceRule { cor2B, cor2J, cor2L };

struct ConvergenceResult {
    bool converges = false;
    double required = 0.0;  ///< threshold 1+s must exceed
    std::string binding;
    std::string explanation;
};

/// Sufficient conditions for the bound to vanish as T grows, for w >= k T^delta,
/// alpha(v) = O(v^r) and beta(u) = O(u^{-(1+s) D2/2}).
inline ConvergenceResult convergence_check(double delta, double r, double s_plus_1, ConvergenceRule rule,
                                           double z = 0.0, int d1 = 1) {
    if (!(delta > 0.0 && delta <= 1.0) || !(r > 0.0)) throw std::invalid_argument("convergence_check: bad delta or r");
    ConvergenceResult res;
    const double mixed = (1.0 - delta) / delta * ((1.0 + r) / r);
    const double other = rule == ConvergenceRule::cor2B ? 1.0 / delta : (2.0 - delta) / delta;
    const char* other_name = rule == ConvergenceRule::cor2B ? "1/delta" : "(2-delta)/delta";
    if (mixed >= other) {
        res.required = mixed;
        res.binding = "((1-delta)/delta)((1+r)/r)";
    } else {
        res.required = other;
        res.binding = other_name;
    }
    res.converges = s_plus_1 > res.required;
    std::ostringstream os;
    os << "1+s = " << s_plus_1 << (res.converges ? " > " : " <= ") << res.required << " (" << res.binding << ")";
    if (rule == ConvergenceRule::cor2L) {
        const double zreq = (1.0 - delta) / delta * d1;
        const bool zok = z > zreq;
        os << "; z = " << z << (zok ? " > " : " <= ") << zreq << " ((1-delta)/delta D1)";
        if (!zok) {
            if (res.converges) res.binding = "((1-delta)/delta) D1";
            res.converges = false;
        }
    }
    res.explanation = os.str();
    return res;
}

}  // namespace ppapprox
