#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "ppapprox/bounds.hpp"

using namespace ppapprox;

namespace {

ConditionCertificate power_certificate(double kappa, double iota, double ca, double cb, int d2,
                                       MixingKind kind = MixingKind::rho) {
    ConditionCertificate c;
    c.kappa = kappa;
    c.iota = iota;
    c.alpha = {ca, 1.0};
    c.beta = cb == 0.0 ? BetaCheck::zero() : BetaCheck::power(cb, 3.0, d2);  // (1+u)^{-2 D2}
    c.kind = kind;
    return c;
}

BoundInputs inputs(int d1, int d2, double T, double h, long m, const ConditionCertificate& cert, Theorem th,
                   StretchSchedule sched = {1.0, 1.0}) {
    BoundInputs in;
    in.space = {d1, d2, Mu2Kind::lebesgue};
    in.schedule = sched;
    in.T = T;
    in.h = h;
    in.m = m;
    in.certificate = cert;
    in.theorem = th;
    return in;
}

// Second evaluation of the rho-mixing d2 bound in extended precision.
long double oracle_210(int d1, int d2, long double T, long double w, long double h, long double m, long double kappa,
                       long double iota, long double ca, long double cb) {
    using std::pow;
    const long double D = d1 + d2;
    auto alpha = [&](long double v) { return ca * v; };
    auto beta = [&](long double u) { return cb * pow(1.0L + u, -2.0L * d2); };
    const long double par = 1.0L - pow(2.0L, D + d2 - 2) / iota * alpha(pow(2.0L, d2) / (w * h));
    const long double eps = par > 0.0L ? 1.0L / par - 1.0L : INFINITY;  // min(1, .) clamps the factors
    const long double lg = std::log(pow(2.0L, D - 1) * kappa * T / w);
    const long double L =
        std::min(1.0L, 2.0L * (1.0L + eps) * w / (pow(2.0L, D) * iota * T) * (1.0L + 2.0L * std::max(lg, 0.0L)));
    long double t = std::sqrt((long double)d1) / pow(h, 1.0L / d1) + std::sqrt((long double)d2) / pow(T, 1.0L / d2);
    t += L * pow(2.0L, 2 * D + 2 * d1) * kappa * kappa * T * pow(2 * m + 1, (long double)d2) / (w * w);
    t += pow(2.0L, 2 * D + d2 - 1) * (T / w) * alpha(pow(2.0L, d2) / (w * h));
    t += L * pow(2.0L, D + d2) * (pow(pow(T, 1.0L / d2) + m + 1, (long double)d2) / w) *
         alpha(pow(2.0L, D) * pow(2 * m + 1, (long double)d2) / w);
    t += std::min(1.0L, 1.65L * std::sqrt(1.0L + eps) * std::sqrt(w / (pow(2.0L, D) * iota * T))) * pow(2.0L, 2 * D) *
         std::sqrt(kappa) * std::sqrt(h / w) * T * beta(m);
    return t;
}

void expect_sum_of_terms(const BoundReport& r) {
    double s = 0.0;
    for (const auto& t : r.terms) {
        EXPECT_GE(t.value, 0.0) << t.label;
        s += t.value;
    }
    EXPECT_NEAR(r.total, s, 1e-12 * std::max(1.0, std::fabs(s)));
}

}  // namespace

TEST(Helpers, LogUp) {
    EXPECT_DOUBLE_EQ(log_up(0.5), 1.0);
    EXPECT_DOUBLE_EQ(log_up(1.0), 1.0);
    EXPECT_NEAR(log_up(std::exp(2.0)), 3.0, 1e-15);
    EXPECT_THROW(log_up(0.0), std::invalid_argument);
}

TEST(Helpers, CellGap) {
    const SpaceConfig sp{1, 1, Mu2Kind::lebesgue};
    EXPECT_EQ(lemma_2F_gap(sp, power_certificate(1, 1, 0, 0, 1), 4.0, 4.0), 0.0);
    EXPECT_NEAR(lemma_2F_gap(sp, power_certificate(1, 1, 1, 0, 1), 4.0, 4.0), 1.0 / 256.0, 1e-17);
    EXPECT_THROW(lemma_2F_gap(sp, power_certificate(1, 1, 1, 0, 1), 0.5, 1.0), std::invalid_argument);
}

TEST(Helpers, CellGapCoversPoissonCells) {
    // Poisson cells: nu(C) - P(N(C) >= 1) = lam - (1 - e^{-lam}) <= gap.
    const SpaceConfig sp{1, 1, Mu2Kind::lebesgue};
    for (double wh : {1.0, 4.0, 16.0, 256.0}) {
        const double lam = std::pow(2.0, sp.d2) / wh / 2.0;  // cell measure bound 2^{D2}/(w h) over 2
        const double exact = lam - (1.0 - std::exp(-lam));
        EXPECT_LE(exact, lemma_2F_gap(sp, power_certificate(1, 1, 2, 0, 1), wh, 1.0));
    }
}

TEST(Helpers, Epsilon) {
    const SpaceConfig sp{1, 1, Mu2Kind::lebesgue};
    EXPECT_EQ(epsilon_T(sp, power_certificate(1, 1, 0, 0, 1), 4.0, 1.0), 0.0);
    EXPECT_NEAR(epsilon_T(sp, power_certificate(1, 1, 1, 0, 1), 8.0, 8.0), 1.0 / 15.0, 1e-15);
    EXPECT_TRUE(std::isinf(epsilon_T(sp, power_certificate(1, 1, 100, 0, 1), 1.0, 1.0)));
    EXPECT_THROW(epsilon_T(sp, power_certificate(1, 0, 1, 0, 1), 1.0, 1.0), std::invalid_argument);
}

TEST(RhoBound, IdealPoissonKeepsThreeTerms) {
    const BoundReport r = bound_2_10(inputs(1, 1, 64, 8, 2, power_certificate(1, 1, 0, 0, 1), Theorem::d2_rho_210));
    EXPECT_GT(r.term("discretization_d1"), 0.0);
    EXPECT_GT(r.term("discretization_d2_dir"), 0.0);
    EXPECT_GT(r.term("strong_neighborhood"), 0.0);
    EXPECT_EQ(r.term("orderliness_cells"), 0.0);
    EXPECT_EQ(r.term("orderliness_sections"), 0.0);
    EXPECT_EQ(r.term("mixing"), 0.0);
    expect_sum_of_terms(r);
}

TEST(RhoBound, MatchesExtendedPrecisionOracle) {
    const BoundReport r = bound_2_10(inputs(1, 1, 256, 256, 4, power_certificate(1, 1, 1, 1, 1), Theorem::d2_rho_210));
    const long double o = oracle_210(1, 1, 256, 256, 256, 4, 1, 1, 1, 1);
    EXPECT_NEAR(r.total, static_cast<double>(o), 1e-10 * static_cast<double>(o));
}

TEST(RhoBound, RandomInputsMatchOracle) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int t = 0; t < 200; ++t) {
        const int d1 = 1 + t % 3, d2 = 1 + (t / 3) % 2;
        const double T = std::pow(2.0, 2 + 10 * u(rng));
        const double h = std::pow(T, 2.0 * u(rng));
        const long m = static_cast<long>(std::floor(3.0 * std::pow(T, 1.0 / d2) * u(rng)));
        const double kappa = 0.5 + 2.0 * u(rng), iota = kappa * (0.2 + 0.8 * u(rng));
        const double ca = 0.5 * u(rng), cb = 2.0 * u(rng);
        const BoundInputs in = inputs(d1, d2, T, h, m, power_certificate(kappa, iota, ca, cb, d2), Theorem::d2_rho_210);
        const BoundReport r = bound_2_10(in);
        if (r.infinite) continue;
        const long double o = oracle_210(d1, d2, T, T, h, m, kappa, iota, ca, m > 2 * build_grid(in.space, in.schedule, T, h).n2 + 1 ? 0.0 : cb);
        ASSERT_NEAR(r.total, static_cast<double>(o), 1e-10 * static_cast<double>(o)) << "case " << t;
        expect_sum_of_terms(r);
    }
}

TEST(RhoBound, AlphaTermsLinearInConstant) {
    const BoundReport a = bound_2_10(inputs(1, 1, 64, 64, 3, power_certificate(1, 1, 0.01, 1, 1), Theorem::d2_rho_210));
    const BoundReport b = bound_2_10(inputs(1, 1, 64, 64, 3, power_certificate(1, 1, 0.02, 1, 1), Theorem::d2_rho_210));
    EXPECT_NEAR(b.term("orderliness_cells"), 2.0 * a.term("orderliness_cells"), 1e-15);
    EXPECT_GE(b.term("orderliness_sections"), a.term("orderliness_sections"));
}

TEST(RoughBound, HandValue) {
    const BoundReport r = bound_2_11(inputs(1, 1, 16, 16, 0, power_certificate(1, 1, 0, 0, 1), Theorem::d2_rho_211));
    const double oracle = 1.0 / 16 + 1.0 / 16 + 64.0 * (1.0 + std::log(2.0)) / 16.0;
    EXPECT_NEAR(r.total, oracle, 1e-13);
    expect_sum_of_terms(r);
}

TEST(RoughBound, InfiniteEpsilonFlagged) {
    const BoundReport r = bound_2_11(inputs(1, 1, 16, 1, 1, power_certificate(1, 1, 10, 1, 1), Theorem::d2_rho_211));
    EXPECT_TRUE(r.infinite);
    EXPECT_TRUE(std::isinf(r.total));
    EXPECT_EQ(r.total_clamped, 1.0);
}

TEST(OtherMixing, ZeroFunctionsRemoveMixing) {
    for (Theorem th : {Theorem::d2_beta, Theorem::d2_phi}) {
        const BoundReport r =
            bound_thm_2D(inputs(1, 1, 64, 8, 1, power_certificate(1, 1, 0, 0, 1, MixingKind::phi), th));
        EXPECT_EQ(r.term("mixing"), 0.0);
        EXPECT_EQ(r.term("mixing_orderliness"), 0.0);
    }
}

TEST(OtherMixing, PhiTermClosedForm) {
    const auto cert = power_certificate(1.5, 1, 0, 1, 1, MixingKind::phi);
    const BoundReport r = bound_thm_2D(inputs(1, 1, 64, 8, 3, cert, Theorem::d2_phi));
    const double F = std::min(1.0, 1.65 * std::sqrt(64.0 / (4.0 * 64.0)));
    EXPECT_NEAR(r.term("mixing"), F * 32.0 * 1.5 * 64.0 * std::pow(4.0, -2.0) / 64.0, 1e-12);
}

TEST(OtherMixing, KindCompatibility) {
    EXPECT_THROW(bound_thm_2D(inputs(1, 1, 16, 4, 1, power_certificate(1, 1, 0, 1, 1, MixingKind::rho), Theorem::d2_phi)),
                 std::invalid_argument);
    EXPECT_THROW(bound_thm_2D(inputs(1, 1, 16, 4, 1, power_certificate(1, 1, 0, 1, 1, MixingKind::beta), Theorem::d2_phi)),
                 std::invalid_argument);
    EXPECT_NO_THROW(
        bound_thm_2D(inputs(1, 1, 16, 4, 1, power_certificate(1, 1, 0, 1, 1, MixingKind::phi), Theorem::d2_beta)));
    EXPECT_THROW(bound_2_10(inputs(1, 1, 16, 4, 1, power_certificate(1, 1, 0, 1, 1, MixingKind::beta), Theorem::d2_rho_210)),
                 std::invalid_argument);
}

TEST(OtherMixing, PhiImprovesOnRhoOrder) {
    // Rho mixing grows like sqrt(T h), phi like sqrt(T/w) up to the common factor; with w = T and h = T
    // the log-log slope of the ratio is -(1/2)(log h + log w)/log T = -1.
    const auto cert = power_certificate(1, 1, 0, 1, 1, MixingKind::phi);
    std::vector<double> Ts, ratio;
    for (int k = 8; k <= 16; ++k) {
        const double T = std::pow(2.0, k);
        const long m = 4;
        BoundInputs phi = inputs(1, 1, T, T, m, cert, Theorem::d2_phi);
        ConditionCertificate rc = cert;
        rc.kind = MixingKind::rho;
        BoundInputs rho = inputs(1, 1, T, T, m, rc, Theorem::d2_rho_210);
        Ts.push_back(T);
        ratio.push_back(bound_thm_2D(phi).term("mixing") / bound_2_10(rho).term("mixing"));
    }
    EXPECT_NEAR(loglog_slope(Ts, ratio), -1.0, 0.05);
}

TEST(Counts, IdealCertificateLeavesStrongNeighbourhood) {
    const BoundReport r = bound_thm_2G(inputs(1, 1, 64, 8, 2, power_certificate(1, 1, 0, 0, 1), Theorem::dtv_counts));
    EXPECT_GT(r.total, 0.0);
    EXPECT_EQ(r.total, r.term("strong_neighborhood"));
    expect_sum_of_terms(r);
}

TEST(Counts, NoDiscretizationTerms) {
    const BoundReport r = bound_thm_2G(inputs(1, 1, 64, 8, 2, power_certificate(1, 1, 0.1, 1, 1), Theorem::dtv_counts));
    EXPECT_EQ(r.term("discretization_d1"), 0.0);
    EXPECT_EQ(r.term("discretization_d2_dir"), 0.0);
    expect_sum_of_terms(r);
}

TEST(Transformed, UnitStretchMatchesRho) {
    const auto cert = power_certificate(1, 1, 0.1, 1, 1);
    const BoundReport a = bound_2_10(inputs(1, 1, 128, 32, 3, cert, Theorem::d2_rho_210));
    const BoundReport b = bound_thm_2I(inputs(1, 1, 128, 32, 3, cert, Theorem::d2_tilde));
    ASSERT_EQ(a.terms.size(), b.terms.size());
    for (std::size_t i = 0; i < a.terms.size(); ++i) {
        EXPECT_EQ(a.terms[i].label, b.terms[i].label);
        EXPECT_EQ(a.terms[i].value, b.terms[i].value);
    }
}

TEST(Transformed, OnlyFirstTermStretches) {
    const auto cert = power_certificate(1, 1, 0.1, 1, 1);
    const StretchSchedule half{1.0, 0.5};  // w = 16 at T = 256
    const BoundReport a = bound_2_10(inputs(1, 1, 256, 32, 3, cert, Theorem::d2_rho_210, half));
    const BoundReport b = bound_thm_2I(inputs(1, 1, 256, 32, 3, cert, Theorem::d2_tilde, half));
    EXPECT_NEAR(b.term("discretization_d1"), 16.0 * a.term("discretization_d1"), 1e-14);
    for (const auto& t : a.terms) {
        if (t.label == "discretization_d1") continue;
        EXPECT_EQ(t.value, b.term(t.label)) << t.label;
    }
}

TEST(FixedLimit, ExtraTerm) {
    auto in = inputs(1, 1, 16, 16, 1, power_certificate(1, 1, 0, 0, 1), Theorem::d2_fixed_limit);
    in.regularity = std::make_pair(1.0, 1.0);
    const BoundReport r = bound_thm_2K(in);
    EXPECT_NEAR(r.term("fixed_limit"), 0.25, 1e-15);
    in.regularity = std::make_pair(0.0, 1.0);
    auto tilde = in;
    tilde.theorem = Theorem::d2_tilde;
    EXPECT_EQ(bound_thm_2K(in).total, bound_thm_2I(tilde).total);
    in.regularity.reset();
    EXPECT_THROW(bound_thm_2K(in), std::invalid_argument);
}

TEST(Optimizer, SinglePointGrid) {
    const auto base = inputs(1, 1, 64, 1, 0, power_certificate(1, 1, 0.1, 1, 1), Theorem::d2_rho_210);
    const OptimizedBound ob = optimize_parameters(base, {3}, {5.0});
    EXPECT_EQ(ob.m, 3);
    EXPECT_EQ(ob.h, 5.0);
    auto in = base;
    in.m = 3;
    in.h = 5.0;
    EXPECT_EQ(ob.report.total, evaluate_bound(in).total);
    EXPECT_THROW(optimize_parameters(base, {}, {1.0}), std::invalid_argument);
}

TEST(Optimizer, NoMixingPicksSmallestM) {
    const auto base = inputs(1, 1, 64, 1, 0, power_certificate(1, 1, 0.1, 0, 1), Theorem::d2_rho_210);
    const OptimizedBound ob = optimize_parameters(base, {2, 0, 5, 1}, {1.0, 8.0, 64.0});
    EXPECT_EQ(ob.m, 0);
}

TEST(Optimizer, BeatsEveryGridPoint) {
    const auto base = inputs(2, 1, 128, 1, 0, power_certificate(1, 1, 0.05, 1, 1), Theorem::d2_rho_210);
    const auto [ms, hs] = auto_grids(base.space, base.T);
    const OptimizedBound ob = optimize_parameters(base, ms, hs, 2);
    for (long m : ms)
        for (double h : hs) {
            auto in = base;
            in.m = m;
            in.h = h;
            EXPECT_LE(ob.report.total, evaluate_bound(in).total);
        }
}

TEST(Slope, LeastSquares) {
    std::vector<double> x, y;
    for (int k = 1; k <= 6; ++k) {
        x.push_back(std::pow(2.0, k));
        y.push_back(3.0 * std::pow(2.0, -0.5 * k));
    }
    EXPECT_NEAR(loglog_slope(x, y), -0.5, 1e-12);
    EXPECT_THROW(loglog_slope({1.0}, {1.0}), std::invalid_argument);
}

TEST(Labels, RoundTrip) {
    for (const auto& [t, name] : theorem_names) {
        EXPECT_EQ(to_string(t), name);
        EXPECT_EQ(theorem_from_string(name), t);
    }
    EXPECT_FALSE(theorem_from_string("nope").has_value());
}
