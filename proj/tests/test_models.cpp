#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "ppapprox/models.hpp"

using namespace ppapprox;

namespace {

const SpaceConfig k11{1, 1, Mu2Kind::lebesgue};

Box box(std::vector<double> lo, std::vector<double> hi) { return {std::move(lo), std::move(hi)}; }

std::vector<double> counts(const ProcessModel& m, const Box& b, int n, std::uint64_t tag) {
    std::vector<double> c(n);
    for (int i = 0; i < n; ++i) c[i] = static_cast<double>(sample(m, b, stream_seed(99, tag, i)).size());
    return c;
}

double mean(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / v.size(); }

double variance(const std::vector<double>& v) {
    const double m = mean(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return s / (v.size() - 1);
}

double correlation(const std::vector<double>& a, const std::vector<double>& b) {
    const double ma = mean(a), mb = mean(b);
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    return sab / std::sqrt(saa * sbb);
}

}  // namespace

TEST(Sampling, EmptyModelGivesEmptyPattern) {
    const ProcessModel m{k11, HomogeneousPoisson{0.0}};
    for (int i = 0; i < 20; ++i) EXPECT_TRUE(sample(m, box({-3, -3}, {3, 3}), i).empty());
}

TEST(Sampling, PoissonMeanCount) {
    const ProcessModel m{k11, HomogeneousPoisson{2.0}};
    const auto c = counts(m, box({0, 0}, {1, 1}), 10000, 1);
    EXPECT_NEAR(mean(c), 2.0, 3.0 * std::sqrt(2.0 / 10000));
    EXPECT_NEAR(variance(c), 2.0, 0.15);
}

TEST(Sampling, SameSeedSamePattern) {
    const ProcessModel m{k11, ClusterBounded{1.0, {0.5, 0.5}, 0.3}};
    const Box b = box({-2, -2}, {2, 2});
    const PointPattern a = sample(m, b, 42), c = sample(m, b, 42);
    EXPECT_EQ(a.coords(), c.coords());
    EXPECT_NE(a.coords(), sample(m, b, 43).coords());
}

TEST(Sampling, PointsStayInWindow) {
    const SpaceConfig sp{2, 1, Mu2Kind::lebesgue};
    const ProcessModel m{sp, ClusterBounded{3.0, {0.2, 0.3, 0.5}, 0.4}};
    const Box b = box({-1, 0, -2}, {1, 0.5, 2});
    for (int s = 0; s < 50; ++s) {
        const PointPattern p = sample(m, b, s);
        for (std::size_t i = 0; i < p.size(); ++i) ASSERT_TRUE(b.contains(p[i]));
    }
}

TEST(Sampling, SingletonClustersArePoisson) {
    const double rate = 1.5;
    const ProcessModel m{k11, ClusterBounded{rate, {1.0}, 0.25}};
    const Box b = box({0, 0}, {1, 2});
    const int n = 20000;
    const auto c = counts(m, b, n, 2);
    const double lam = rate * 2.0;
    std::vector<double> observed(8, 0.0);
    for (double v : c) observed[std::min<std::size_t>(static_cast<std::size_t>(v), 7)] += 1.0;
    double chi2 = 0.0, tail = 1.0;
    for (int k = 0; k < 8; ++k) {
        double p = std::exp(-lam);
        for (int i = 1; i <= k; ++i) p *= lam / i;
        if (k == 7) p = tail;
        tail -= p;
        chi2 += std::pow(observed[k] - n * p, 2) / (n * p);
    }
    // 7 degrees of freedom: the 0.999 quantile is 24.32.
    EXPECT_LT(chi2, 24.32);
}

TEST(ExpectationMeasure, ClosedForms) {
    EXPECT_NEAR(expectation_measure({k11, HomogeneousPoisson{3.0}}, box({0, 0}, {2, 0.5})), 3.0, 1e-14);
    const ProcessModel quad{k11, InhomogeneousPoisson{DensitySpec::quadratic(1.0, 1.0)}};
    EXPECT_NEAR(expectation_measure(quad, box({0, 0}, {1, 1})), 4.0 / 3.0, 1e-14);
    const ProcessModel cl{k11, ClusterBounded{2.0, {0.5, 0.5}, 0.5}};
    EXPECT_NEAR(expectation_measure(cl, box({0, 0}, {1, 1})), 3.0, 1e-14);
}

TEST(ExpectationMeasure, MatchesMonteCarloMeans) {
    const SpaceConfig counting{1, 1, Mu2Kind::counting};
    DensitySpec table;
    table.form = DensitySpec::Form::custom_table;
    table.radii = {0.0, 0.5, 1.0};
    table.values = {2.0, 1.0, 0.5};
    const std::vector<ProcessModel> models{
        {k11, HomogeneousPoisson{1.5}},
        {k11, InhomogeneousPoisson{DensitySpec::quadratic(1.0, 2.0)}},
        {k11, InhomogeneousPoisson{table}},
        {k11, ClusterBounded{0.8, {0.3, 0.3, 0.4}, 0.3}},
        {counting, MarkovModulated{{{0.9, 0.1}, {0.2, 0.8}}, {0.5, 3.0}}},
    };
    const Box b = box({-1, -2}, {1, 2});
    for (std::size_t i = 0; i < models.size(); ++i) {
        const auto c = counts(models[i], b, 4000, 10 + i);
        const double se = std::sqrt(variance(c) / c.size());
        EXPECT_NEAR(mean(c), expectation_measure(models[i], b), 3.0 * se + 1e-12) << "model " << i;
    }
}

TEST(Markov, StationaryAndDobrushin) {
    const std::vector<std::vector<double>> P{{0.9, 0.1}, {0.1, 0.9}};
    EXPECT_NEAR(dobrushin_coefficient(P), std::fabs(P[0][0] + P[1][1] - 1.0), 1e-15);
    EXPECT_NEAR(dobrushin_coefficient(P), 0.8, 1e-15);
    const std::vector<std::vector<double>> Q{{0.9, 0.1}, {0.2, 0.8}};
    const auto pi = stationary_distribution(Q);
    EXPECT_NEAR(pi[0], 2.0 / 3.0, 1e-12);
    EXPECT_NEAR(pi[1], 1.0 / 3.0, 1e-12);
    const auto R = time_reversal(Q);
    for (std::size_t i = 0; i < 2; ++i) EXPECT_NEAR(R[i][0] + R[i][1], 1.0, 1e-12);
}

TEST(Certificates, HomogeneousPoisson) {
    const ConditionCertificate c = certificate_for({k11, HomogeneousPoisson{1.0}});
    EXPECT_EQ(c.kappa, 1.0);
    EXPECT_EQ(c.iota, 1.0);
    EXPECT_DOUBLE_EQ(c.alpha(0.3), 0.6);
    EXPECT_EQ(c.alpha(0.0), 0.0);
    EXPECT_EQ(c.beta(0.0), 0.0);
    EXPECT_TRUE(c.all_kinds);
}

TEST(Certificates, MarkovGeometricDecay) {
    const SpaceConfig counting{1, 1, Mu2Kind::counting};
    const ConditionCertificate c = certificate_for({counting, MarkovModulated{{{0.9, 0.1}, {0.1, 0.9}}, {1.0, 2.0}}});
    EXPECT_EQ(c.kind, MixingKind::phi);
    for (double u : {0.0, 1.0, 2.5, 7.0}) EXPECT_NEAR(c.beta(u + 1.0) / c.beta(u), 0.8, 1e-12);
    EXPECT_NEAR(c.beta(3.7), 1.6 * std::pow(0.8, 3), 1e-12);
}

TEST(Certificates, ClusterFiniteRange) {
    const ConditionCertificate c = certificate_for({k11, ClusterBounded{1.0, {0.5, 0.5}, 0.5}});
    EXPECT_GT(c.beta(0.99), 0.0);
    EXPECT_EQ(c.beta(1.0), 0.0);
    EXPECT_EQ(c.beta(5.0), 0.0);
    EXPECT_NEAR(c.kappa, 1.5, 1e-15);
}

TEST(Certificates, InvariantsByConstruction) {
    const std::vector<ProcessModel> models{
        {k11, HomogeneousPoisson{2.0}},
        {k11, InhomogeneousPoisson{DensitySpec::quadratic(1.0, 0.5)}},
        {k11, ClusterBounded{0.5, {0.2, 0.8}, 0.25}},
        {{1, 1, Mu2Kind::counting}, MarkovModulated{{{0.7, 0.3}, {0.4, 0.6}}, {1.0, 4.0}}},
    };
    for (const auto& m : models) {
        const ConditionCertificate c = certificate_for(m);
        EXPECT_EQ(c.alpha(0.0), 0.0);
        EXPECT_LE(c.iota, c.kappa);
        double prev = c.beta(0.0);
        for (double u = 0.25; u < 20.0; u += 0.25) {
            EXPECT_LE(c.beta(u), prev);
            prev = c.beta(u);
        }
    }
}

TEST(Certificates, QuadraticDensityRange) {
    const ConditionCertificate c =
        certificate_for({k11, InhomogeneousPoisson{DensitySpec::quadratic(1.0, 0.5)}}, 0.25);
    EXPECT_NEAR(c.iota, 1.0, 1e-15);
    EXPECT_NEAR(c.kappa, 1.0 + 0.5 * 0.0625, 1e-15);
}

TEST(Orderliness, PoissonWithinBand) {
    const ProcessModel m{k11, HomogeneousPoisson{1.0}};
    const auto cert = certificate_for(m);
    const auto rows = verify_orderliness(m, cert, {box({0, 0}, {0.05, 1.0}), box({0, 0}, {0.5, 1.0})}, 20000, 5);
    for (const auto& r : rows) {
        EXPECT_FALSE(r.violated);
        EXPECT_LE(r.ratio - 3.0 * r.se / r.bound, 1.0);
    }
}

TEST(Orderliness, ClosedFormMoment) {
    const ProcessModel m{k11, HomogeneousPoisson{2.0}};
    const Box rect = box({0, 0}, {0.5, 0.5});
    const auto rows = verify_orderliness(m, certificate_for(m), {rect}, 40000, 6);
    const double lam = 2.0 * 0.25;
    const double exact = lam * lam + lam * (1.0 - std::exp(-lam));
    EXPECT_NEAR(rows[0].estimate, exact, 3.0 * rows[0].se);
    EXPECT_DOUBLE_EQ(rows[0].v, 0.5 * 1.5);
}

TEST(Orderliness, ZeroIntensity) {
    const ProcessModel m{k11, HomogeneousPoisson{0.0}};
    const auto rows = verify_orderliness(m, certificate_for(m), {box({0, 0}, {1, 1})}, 1000, 7);
    EXPECT_EQ(rows[0].estimate, 0.0);
    EXPECT_FALSE(rows[0].violated);
}

TEST(Orderliness, FlagsWrongCertificate) {
    const ProcessModel m{k11, HomogeneousPoisson{1.0}};
    ConditionCertificate wrong = certificate_for(m);
    wrong.alpha = {1.0, 3.0};
    const auto rows = verify_orderliness(m, wrong, {box({0, 0}, {0.1, 0.5})}, 20000, 8);
    EXPECT_TRUE(rows[0].violated);
}

TEST(Orderliness, NeedsEnoughSamples) {
    const ProcessModel m{k11, HomogeneousPoisson{1.0}};
    EXPECT_THROW(verify_orderliness(m, certificate_for(m), {box({0, 0}, {1, 1})}, 999, 1), std::invalid_argument);
}

TEST(Independence, DisjointPoissonBoxesUncorrelated) {
    const ProcessModel m{k11, HomogeneousPoisson{1.0}};
    const int n = 5000;
    std::vector<double> a(n), b(n);
    for (int i = 0; i < n; ++i) {
        const PointPattern p = sample(m, box({-1, -1}, {1, 1}), stream_seed(3, 3, i));
        for (std::size_t j = 0; j < p.size(); ++j) (p[j][0] < 0.0 ? a[i] : b[i]) += 1.0;
    }
    EXPECT_LT(std::fabs(correlation(a, b)), 3.0 / std::sqrt(n));
}

TEST(Independence, SeparatedClusterSlabsUncorrelated) {
    const double R = 0.25;
    const ProcessModel m{k11, ClusterBounded{2.0, {0.2, 0.3, 0.5}, R}};
    const int n = 5000;
    std::vector<double> a(n), b(n), near_a(n), near_b(n);
    for (int i = 0; i < n; ++i) {
        const PointPattern p = sample(m, box({-1, -2}, {1, 2}), stream_seed(4, 4, i));
        for (std::size_t j = 0; j < p.size(); ++j) {
            const double t = p[j][1];
            if (t < -2.0 * R) a[i] += 1.0;
            if (t >= 0.0) b[i] += 1.0;
            if (t >= -R && t < 0.0) near_a[i] += 1.0;
            if (t >= 0.0 && t < R) near_b[i] += 1.0;
        }
    }
    EXPECT_LT(std::fabs(correlation(a, b)), 3.0 / std::sqrt(n));
    // Thin adjacent slabs share clusters: the correlation is visible.
    EXPECT_GT(correlation(near_a, near_b), 3.0 / std::sqrt(n));
}

TEST(Regularity, QuadraticAndTable) {
    EXPECT_TRUE(verify_regularity(DensitySpec::quadratic(1.0, 0.5), 1, 1.0, 5000, 1));
    DensitySpec liar = DensitySpec::quadratic(1.0, 0.5);
    liar.regularity = std::make_pair(0.1, 2.0);
    EXPECT_FALSE(verify_regularity(liar, 1, 1.0, 5000, 1));
}

TEST(Validation, RejectsMalformedModels) {
    EXPECT_THROW(validate({k11, HomogeneousPoisson{-1.0}}), std::invalid_argument);
    EXPECT_THROW(validate({k11, ClusterBounded{1.0, {0.5, 0.4}, 0.5}}), std::invalid_argument);
    EXPECT_THROW(validate({k11, MarkovModulated{{{1.0}}, {1.0}}}), std::invalid_argument);
    EXPECT_THROW(validate({{1, 1, Mu2Kind::counting}, MarkovModulated{{{0.5, 0.6}, {0.5, 0.5}}, {1, 1}}}),
                 std::invalid_argument);
}
