#include <gtest/gtest.h>

#include <random>

#include <boost/math/special_functions/beta.hpp>

#include "harnack_lab/exit_measures.hpp"

using namespace harnack_lab;

namespace {

struct Case {
    int d;
    double alpha;
};

Vec random_point(std::mt19937_64& g, int d, double radius) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    while (true) {
        Vec v(d);
        for (int i = 0; i < d; ++i) v[i] = u(g) * radius;
        if (norm(v) < radius) return v;
    }
}

std::vector<double> exit_radii(const StableParams& p, const Ball& b, long n, std::uint64_t seed) {
    Rng rng(RngStream{seed, 0});
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(n));
    for (long i = 0; i < n; ++i) out.push_back(dist(sample_exit(p, b, b.center, rng), b.center));
    return out;
}

}  // namespace

TEST(ExitMeasures, FullExteriorHasUnitMass) {
    const std::vector<Case> cases = {{1, 0.5}, {1, 1.0}, {1, 1.5}, {2, 0.5}, {2, 1.0}, {2, 1.5}, {3, 1.0}};
    for (const auto& c : cases) {
        const auto p = StableParams::make(c.d, c.alpha);
        const Ball b(Vec::axis(c.d, 0, -0.3), 0.8);
        const Vec x = b.center + Vec::axis(c.d, 0, 0.55);
        EXPECT_NEAR(exit_mass(p, b, x, Annulus{b.center, b.radius, kInf}), 1.0, 1e-6);
        EXPECT_NEAR(harmonic_extend(p, b, ConstantData{1.0}, x), 1.0, 1e-6);
        EXPECT_EQ(harmonic_extend(p, b, ConstantData{0.0}, x), 0.0);
    }
}

TEST(ExitMeasures, MirrorHalfSpacesFromTheCenter) {
    for (const auto& c : std::vector<Case>{{1, 1.0}, {2, 0.7}, {3, 1.5}}) {
        const auto p = StableParams::make(c.d, c.alpha);
        const Ball b(Vec::axis(c.d, 0, 0.25), 1.0);
        const Vec e = Vec::axis(c.d, 0);
        const double right = exit_mass(p, b, b.center, HalfSpaces::single(e, 0.25 + 1.0));
        const double left = exit_mass(p, b, b.center, HalfSpaces::single(e * -1.0, 1.0 - 0.25));
        EXPECT_NEAR(right, left, 1e-8);
        EXPECT_GT(right, 0.0);
        EXPECT_LE(right, 0.5 + 1e-9);
    }
}

TEST(ExitMeasures, RegionMeetingTheBallIsRejected) {
    const auto p = StableParams::make(2, 1.0);
    const Ball b(Vec::zero(2), 1.0);
    EXPECT_THROW(exit_mass(p, b, Vec::zero(2), Annulus{Vec::zero(2), 0.5, kInf}), DomainError);
    EXPECT_THROW(exit_mass(p, b, Vec::zero(2), HalfSpaces::single(Vec::axis(2, 0), 0.9)), DomainError);
    EXPECT_THROW(exit_mass(p, b, Vec::axis(2, 0, 1.0), Annulus{Vec::zero(2), 1.0, kInf}), DomainError);
    EXPECT_THROW(harmonic_extend(p, b, RadialPower{Vec::zero(2), 1.0, 1.5}, Vec::zero(2)), DomainError);
}

// Cauchy process on the line: V = 1/Y^2 ~ arcsine law, so mu_0(|y| > 2) = (2/pi) asin(1/2) = 1/3.
TEST(ExitMeasures, CauchyFarMassAgreesWithSamples) {
    const auto p = StableParams::make(1, 1.0);
    const Ball b(Vec{0.0}, 1.0);
    const double quad = exit_mass(p, b, Vec{0.0}, Annulus{Vec{0.0}, 2.0, kInf});
    EXPECT_NEAR(quad, 1.0 / 3.0, 1e-8);
    Rng rng(RngStream{42, 0});
    const long n = 1000000;
    long k = 0;
    for (long i = 0; i < n; ++i)
        if (std::abs(sample_exit(p, b, Vec{0.0}, rng)[0]) > 2.0) ++k;
    const double phat = static_cast<double>(k) / n;
    EXPECT_NEAR(phat, quad, 3.0 * std::sqrt(quad * (1.0 - quad) / n));
}

TEST(ExitMeasures, SamplerRadialLawMatchesQuadrature) {
    for (const auto& c : std::vector<Case>{{1, 0.5}, {2, 1.0}, {3, 1.5}}) {
        const auto p = StableParams::make(c.d, c.alpha);
        const Ball b(Vec::zero(c.d), 1.0);
        for (double s : {1.05, 1.5, 3.0}) {
            const double quad = exit_mass(p, b, b.center, Annulus{b.center, 1.0, s});
            EXPECT_NEAR(quad, exit_radius_cdf(p, s), 1e-6);
        }
        const double ks = ks_distance_cdf(exit_radii(p, b, 100000, 7), [&](double s) { return exit_radius_cdf(p, s); });
        EXPECT_LT(ks, 0.01) << "d=" << c.d << " alpha=" << c.alpha;
    }
}

TEST(ExitMeasures, SamplerIsIsotropicAndSelfSimilar) {
    for (const auto& c : std::vector<Case>{{2, 0.5}, {3, 1.2}}) {
        const auto p = StableParams::make(c.d, c.alpha);
        const Ball b(Vec::axis(c.d, 1, 2.0), 1.0);
        Rng rng(RngStream{11, 3});
        const long n = 100000;
        Vec mean = Vec::zero(c.d);
        for (long i = 0; i < n; ++i) {
            const Vec y = sample_exit(p, b, b.center, rng) - b.center;
            mean = mean + y * (1.0 / (norm(y) * n));
        }
        const double sd = std::sqrt(1.0 / (c.d * static_cast<double>(n)));
        for (int i = 0; i < c.d; ++i) EXPECT_LT(std::abs(mean[i]), 3.0 * sd);

        std::vector<double> unit = exit_radii(p, Ball(Vec::zero(c.d), 1.0), n, 5);
        std::vector<double> big = exit_radii(p, Ball(Vec::zero(c.d), 2.5), n, 6);
        for (auto& v : big) v /= 2.5;
        EXPECT_LT(ks_distance(unit, big), 0.01);
    }
}

TEST(ExitMeasures, SamplerEnforcesTheCenterContract) {
    const auto p = StableParams::make(2, 1.0);
    Rng rng(RngStream{1, 1});
    EXPECT_THROW(sample_exit(p, Ball(Vec::zero(2), 1.0), Vec{0.1, 0.0}, rng), ContractViolation);
}

TEST(ExitMeasures, WalkOnPlainBallIsOneExactStep) {
    const auto p = StableParams::make(2, 0.8);
    const Ball b(Vec{0.5, -0.5}, 1.5);
    const auto region = RegionSpec::ball(b);
    Rng rng(RngStream{21, 0});
    std::vector<double> wos;
    for (int i = 0; i < 100000; ++i) {
        const ExitSample s = wos_exit(p, region, b.center, rng);
        ASSERT_EQ(s.steps, 1);
        ASSERT_FALSE(region.contains(s.point));
        wos.push_back(dist(s.point, b.center));
    }
    EXPECT_LT(ks_distance(wos, exit_radii(p, b, 100000, 22)), 0.01);
}

// Exit laws from an off-center start with full and half inscribed balls are the same law.
TEST(ExitMeasures, WalkSafetyFactorDoesNotChangeTheLaw) {
    const auto p = StableParams::make(2, 1.0);
    const auto region = RegionSpec::ball_minus(Ball(Vec::zero(2), 1.0), {Ball(Vec{0.5, 0.0}, 0.2)});
    const Vec x{-0.2, 0.3};
    const int n = 40000;
    Rng r1(RngStream{31, 0}), r2(RngStream{32, 0});
    std::vector<double> a, b;
    long hits_a = 0, hits_b = 0;
    for (int i = 0; i < n; ++i) {
        const ExitSample s1 = wos_exit(p, region, x, r1, 100000, 1.0);
        const ExitSample s2 = wos_exit(p, region, x, r2, 100000, 0.5);
        ASSERT_FALSE(region.contains(s1.point));
        ASSERT_FALSE(region.contains(s2.point));
        a.push_back(s1.point[0]);
        b.push_back(s2.point[0]);
        hits_a += s1.hit_obstacle;
        hits_b += s2.hit_obstacle;
    }
    // 99.9% two-sample critical value is 1.95 sqrt(2/n).
    EXPECT_LT(ks_distance(a, b), 1.95 * std::sqrt(2.0 / n));
    const double pa = static_cast<double>(hits_a) / n, pb = static_cast<double>(hits_b) / n;
    EXPECT_NEAR(pa, pb, 4.0 * std::sqrt(2.0 * pa * (1.0 - pa) / n));
    EXPECT_GT(pa, 0.0);
}

TEST(ExitMeasures, TruncatedWalksAreCountedNotDropped) {
    const auto p = StableParams::make(2, 1.0);
    const auto region = RegionSpec::annulus(Vec::zero(2), 0.3, 1.0);
    const HitEstimate h = estimate_hit_probability(p, region, Vec{0.6, 0.0}, 5000, 3, 1, 0.99, 2);
    EXPECT_GT(h.truncated, 0);
    EXPECT_EQ(h.valid + h.truncated, 5000);
    EXPECT_LE(h.ci.lo, h.ci.hi);
    EXPECT_THROW(wos_exit(p, region, Vec{0.1, 0.0}, *std::make_unique<Rng>(RngStream{0, 0})), DomainError);
}

TEST(ExitMeasures, HitEstimateIsIndependentOfJobs) {
    const auto p = StableParams::make(2, 1.0);
    const auto region = RegionSpec::ball_minus(Ball(Vec::zero(2), 1.0), {Ball(Vec{0.5, 0.0}, 0.1)});
    const HitEstimate a = estimate_hit_probability(p, region, Vec::zero(2), 50000, 9, 1);
    const HitEstimate b = estimate_hit_probability(p, region, Vec::zero(2), 50000, 9, 3);
    EXPECT_EQ(a.hits, b.hits);
    EXPECT_EQ(a.total_steps, b.total_steps);
}

TEST(ExitMeasures, CompositionWithItselfIsExact) {
    const auto p = StableParams::make(2, 1.0);
    const Ball U(Vec::zero(2), 1.0);
    EXPECT_EQ(composition_residual(p, U, U, Vec{0.2, 0.1}, Annulus{Vec::zero(2), 2.0, kInf}), 0.0);
}

TEST(ExitMeasures, CauchyCompositionResidual) {
    const auto p = StableParams::make(1, 1.0);
    const double res =
        composition_residual(p, Ball(Vec{0.0}, 0.5), Ball(Vec{0.0}, 1.0), Vec{0.0}, Annulus{Vec{0.0}, 2.0, kInf});
    EXPECT_LE(res, 1e-4);
}

// Randomized nested pairs, concentric and not, in d = 1 and 2.
TEST(ExitMeasures, CompositionResidualOnRandomNestedBalls) {
    std::mt19937_64 g(17);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    QuadratureSpec q;
    q.rel_tol = 1e-3;
    const double alphas[] = {0.5, 1.0, 1.5};
    for (int k = 0; k < 20; ++k) {
        const int d = 1 + k % 2;
        const auto p = StableParams::make(d, alphas[k % 3]);
        const Ball U(random_point(g, d, 1.0), 0.5 + u(g));
        const double rv = U.radius * (0.2 + 0.6 * u(g));
        const Vec vc = k % 4 < 2 ? U.center : U.center + random_point(g, d, 0.95 * (U.radius - rv));
        const Ball V(vc, rv);
        const Vec x = V.center + random_point(g, d, 0.9 * rv);
        const ExteriorRegion E = k % 3 == 0
                                     ? ExteriorRegion{Annulus{U.center, U.radius * 1.5, kInf}}
                                     : ExteriorRegion{HalfSpaces::single(Vec::axis(d, 0), U.center[0] + U.radius * 1.2)};
        EXPECT_LE(composition_residual(p, V, U, x, E, q), 1e-4) << "config " << k;
    }
}

// h = harmonic extension of a Gaussian bump over U satisfies h(x) = int h dmu_x^V.
TEST(ExitMeasures, HarmonicExtensionMeanValue) {
    std::mt19937_64 g(23);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    QuadratureSpec q;
    q.rel_tol = 1e-3;
    for (int k = 0; k < 8; ++k) {
        const int d = 1 + k % 2;
        const auto p = StableParams::make(d, 0.4 + 1.2 * u(g));
        const Ball U(Vec::zero(d), 1.0);
        const Ball V(random_point(g, d, 0.3), 0.3 + 0.35 * u(g));
        const Vec x = V.center + random_point(g, d, 0.8 * V.radius);
        const ExteriorData f = GaussianBump{Vec::axis(d, 0, 1.6), 0.3, 2.0};
        const double h = harmonic_extend(p, U, f, x, q);
        EXPECT_GE(h, 0.0);
        EXPECT_LE(h, 2.0);
        EXPECT_NEAR(compose(p, V, U, x, f, q), h, 1e-4) << "config " << k;
    }
}

// For V inside U inside A: mu_x^U(A^c) >= mu_x^V(A^c).
TEST(ExitMeasures, ExitMassOfOuterComplementGrowsWithTheBall) {
    std::mt19937_64 g(29);
    for (const auto& c : std::vector<Case>{{1, 0.5}, {2, 1.0}, {3, 1.5}}) {
        const auto p = StableParams::make(c.d, c.alpha);
        const Ball U(Vec::zero(c.d), 1.0), V(Vec::axis(c.d, 0, 0.2), 0.5);
        const ExteriorRegion outside_A = Annulus{Vec::axis(c.d, 0, 0.1), 1.6, kInf};
        for (int k = 0; k < 5; ++k) {
            const Vec x = V.center + random_point(g, c.d, 0.45);
            EXPECT_GE(exit_mass(p, U, x, outside_A), exit_mass(p, V, x, outside_A));
        }
    }
}

// h_n = int (h ^ n) dmu_x^V increases in n and stays below h for unbounded h.
TEST(ExitMeasures, TruncationIsMonotone) {
    for (const auto& c : std::vector<Case>{{1, 1.5}, {2, 1.2}}) {
        const auto p = StableParams::make(c.d, c.alpha);
        const Ball U(Vec::zero(c.d), 2.0), V(Vec::zero(c.d), 1.0);
        const ExteriorData f = RadialPower{Vec::zero(c.d), 1.0, 0.9 * c.alpha};
        QuadratureSpec q;
        q.rel_tol = 1e-3;
        for (double t : {0.0, 0.4, -0.7}) {
            const Vec x = Vec::axis(c.d, 0, t);
            const double h = harmonic_extend(p, U, f, x, q);
            double prev = 0.0, first = 0.0;
            for (double n : {1.0, 2.0, 4.0, 8.0, 64.0}) {
                const double hn = compose(p, V, U, x, f, q, n);
                EXPECT_GE(hn, prev - 1e-7);
                EXPECT_LE(hn, h * (1.0 + 1e-5));
                if (n == 1.0) first = hn;
                prev = hn;
            }
            // The tail of |y|^{0.9 alpha} is heavy, so h_n approaches h slowly.
            EXPECT_GT(prev, first);
        }
    }
}
