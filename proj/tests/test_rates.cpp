#include <gtest/gtest.h>

#include <cmath>

#include "ppapprox/bounds.hpp"
#include "ppapprox/rates.hpp"

using namespace ppapprox;

namespace {

RateConfig example(MixingKind kind, int d1, int d2 = 1) {
    RateConfig c;
    c.delta = 1;
    c.r = 1;
    c.b = Rational(2 * d2);
    c.kind = kind;
    c.d1 = d1;
    c.d2 = d2;
    return c;
}

Theorem theorem_for(MixingKind k) {
    switch (k) {
        case MixingKind::rho: return Theorem::d2_rho_210;
        case MixingKind::beta: return Theorem::d2_beta;
        case MixingKind::phi: return Theorem::d2_phi;
    }
    return Theorem::d2_rho_210;
}

// Oracle: for each pair of parameter exponents (m = T^x, h = T^q), the numeric slope of every
// evaluated term between two large T; the largest term slope, minimized over an exponent grid.
double numeric_rate(MixingKind kind, int d1) {
    ConditionCertificate cert;
    cert.kappa = cert.iota = 1.0;
    cert.alpha = {1.0, 1.0};
    cert.beta = BetaCheck::power(1.0, 3.0, 1);
    cert.kind = kind == MixingKind::rho ? MixingKind::rho : MixingKind::phi;
    BoundInputs in;
    in.space = {d1, 1, Mu2Kind::lebesgue};
    in.certificate = cert;
    in.theorem = theorem_for(kind);
    const double T1 = std::pow(2.0, 20), T2 = std::pow(2.0, 30);
    double best = INFINITY;
    for (int i = 0; i <= 60; ++i)
        for (int j = 0; j <= 120; ++j) {
            const double x = i / 60.0, q = j / 60.0;
            BoundReport r[2];
            int k = 0;
            for (double T : {T1, T2}) {
                in.T = T;
                in.m = std::llround(std::pow(T, x));
                in.h = std::pow(T, q);
                r[k++] = evaluate_bound(in);
            }
            double worst = -INFINITY;
            for (std::size_t t = 0; t < r[0].terms.size(); ++t) {
                const double a = r[0].terms[t].value, b = r[1].terms[t].value;
                if (a > 0.0 && b > 0.0) worst = std::max(worst, std::log(b / a) / std::log(T2 / T1));
            }
            best = std::min(best, worst);
        }
    return best;
}

}  // namespace

TEST(RationalArithmetic, Normalizes) {
    EXPECT_EQ(Rational(2, -4), Rational(-1, 2));
    EXPECT_EQ(Rational(1, 3) + Rational(1, 6), Rational(1, 2));
    EXPECT_EQ((Rational(3, 7) / Rational(3, 14)).str(), "2");
    EXPECT_LT(Rational(-3, 7), Rational(-1, 3));
    EXPECT_THROW(Rational(1, 0), std::domain_error);
}

TEST(RateExponent, ExampleFamilies) {
    for (int d1 = 1; d1 <= 4; ++d1) {
        EXPECT_EQ(rate_exponent(example(MixingKind::beta, d1)).exponent, Rational(-1, 3)) << d1;
        EXPECT_EQ(rate_exponent(example(MixingKind::phi, d1)).exponent, Rational(-2, 3)) << d1;
        EXPECT_EQ(rate_exponent(example(MixingKind::rho, d1)).exponent, Rational(-3, d1 + 6)) << d1;
    }
}

TEST(RateExponent, OptimalParameters) {
    const RateResult r1 = rate_exponent(example(MixingKind::rho, 1));
    EXPECT_EQ(r1.x, Rational(4, 7));
    EXPECT_EQ(r1.q, Rational(3, 7));
    const RateResult r3 = rate_exponent(example(MixingKind::rho, 3));
    EXPECT_EQ(r3.x, Rational(2, 3));
    EXPECT_EQ(r3.q, Rational(1));
    EXPECT_FALSE(r3.binding.empty());
}

TEST(RateExponent, MatchesNumericSlopeSearch) {
    for (MixingKind k : {MixingKind::rho, MixingKind::beta, MixingKind::phi})
        for (int d1 : {1, 2}) {
            const double exact = rate_exponent(example(k, d1)).exponent.to_double();
            EXPECT_NEAR(numeric_rate(k, d1), exact, 0.03) << to_string(k) << " D1=" << d1;
        }
}

TEST(RateExponent, RejectsDegenerateFamilies) {
    RateConfig c = example(MixingKind::rho, 1);
    c.r = 0;
    EXPECT_THROW(rate_exponent(c), std::invalid_argument);
    c = example(MixingKind::rho, 1);
    c.delta = Rational(3, 2);
    EXPECT_THROW(rate_exponent(c), std::invalid_argument);
}

TEST(Convergence, Examples) {
    const ConvergenceResult a = convergence_check(1.0, 0.5, 1.01, ConvergenceRule::cor2B);
    EXPECT_TRUE(a.converges);
    EXPECT_DOUBLE_EQ(a.required, 1.0);
    const ConvergenceResult b = convergence_check(0.5, 1.0, 2.0, ConvergenceRule::cor2B);
    EXPECT_FALSE(b.converges);
    EXPECT_DOUBLE_EQ(b.required, 2.0);
    EXPECT_TRUE(convergence_check(0.5, 1.0, 2.01, ConvergenceRule::cor2B).converges);
    EXPECT_DOUBLE_EQ(convergence_check(0.5, 1.0, 2.0, ConvergenceRule::cor2J).required, 3.0);
}

TEST(Convergence, SimplifiedConditionSuffices) {
    for (int i = 1; i <= 40; ++i)
        for (int j = 1; j <= 40; ++j) {
            const double delta = i / 40.0, r = j / 10.0;
            if (!(r > (1.0 - delta) / (1.0 + delta))) continue;
            const double s1 = 2.0 / delta + 1e-9;
            EXPECT_TRUE(convergence_check(delta, r, s1, ConvergenceRule::cor2B).converges)
                << "delta=" << delta << " r=" << r;
        }
}

TEST(Convergence, FixedLimitNeedsRegularity) {
    const ConvergenceResult ok = convergence_check(0.5, 1.0, 10.0, ConvergenceRule::cor2L, 2.0, 1);
    EXPECT_TRUE(ok.converges);
    const ConvergenceResult bad = convergence_check(0.5, 1.0, 10.0, ConvergenceRule::cor2L, 0.5, 1);
    EXPECT_FALSE(bad.converges);
    EXPECT_NE(bad.explanation.find("z ="), std::string::npos);
}
