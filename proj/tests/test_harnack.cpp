#include <gtest/gtest.h>

#include "harnack_lab/harnack.hpp"

using namespace harnack_lab;

namespace {

QuadratureSpec tight() {
    QuadratureSpec q;
    q.rel_tol = 1e-10;
    return q;
}

}  // namespace

TEST(Harnack, GoldenConstants) {
    const HarnackConstants hc = derive_constants(HarnackInputs{0.25, 0.25, 0.25, 0.25, 1.0, 1.0, 1.0});
    EXPECT_EQ(hc.theta, Rational(1, 16));
    EXPECT_EQ(hc.l, 2);
    EXPECT_EQ(hc.a, Rational(1, 16));
    EXPECT_EQ(hc.beta, Rational(1, 256));
    EXPECT_EQ(hc.beta_tilde, Rational(1, 256));
    EXPECT_EQ(hc.j0, 712);
    EXPECT_EQ(hc.k0, 4);
    // 2 (257/256) 4 * 256 * 16^6
    EXPECT_EQ(hc.K, Rational(2 * 257 * 4) * rpow(Rational(16), 6));
    EXPECT_EQ(to_string(hc.K), "34493956096");
}

// Independent check of the minimal integers by direct search in exact arithmetic.
TEST(Harnack, MinimalIntegersAreMinimal) {
    const HarnackConstants hc = derive_constants(HarnackInputs{0.3, 0.2, 0.25, 0.25, 1.5, 1.25, 2.0});
    const Rational opb = 1 + hc.beta;
    EXPECT_GT(hc.a * rpow(opb, hc.j0), 1);
    EXPECT_LE(hc.a * rpow(opb, hc.j0 - 1), 1);
    const Rational rhs = (1 - hc.theta) / hc.j0;
    EXPECT_LT(rpow(hc.theta, hc.k0 - 1), rhs);
    EXPECT_GE(rpow(hc.theta, hc.k0 - 2), rhs);
    EXPECT_LE(rpow(exact_rational(0.3), hc.l), hc.theta);
    EXPECT_GT(rpow(exact_rational(0.3), hc.l - 1), hc.theta);
    EXPECT_EQ(hc.theta, exact_rational(0.2) / 4);
    EXPECT_LE(hc.beta_tilde, hc.beta);
    EXPECT_LE(hc.beta, Rational(1, 4));
}

// a (1 + beta)^j = 1 exactly at j = 2: the strict inequality needs j0 = 3.
TEST(Harnack, ExactTieIsResolvedStrictly) {
    HarnackInputs in{0.25, 0.25, 0.25, 0.25, 1.0, 1.0, 1.0};
    const HarnackConstants base = derive_constants(in);
    const Rational opb = 1 + base.beta;
    EXPECT_GT(base.a * rpow(opb, base.j0), 1);
    EXPECT_EQ(detail::growth_sign(Rational(1, 4), Rational(2), 2), 0);
    EXPECT_EQ(detail::growth_sign(Rational(1, 4), Rational(2), 3), 1);
    EXPECT_EQ(detail::growth_sign(Rational(1, 4), Rational(2), 1), -1);
}

TEST(Harnack, DerivationIsDeterministic) {
    const HarnackInputs in{0.17, 0.29, 0.11, 0.07, 1.3, 2.2, 1.7};
    const auto a = derive_constants(in), b = derive_constants(in);
    EXPECT_EQ(to_string(a.K), to_string(b.K));
    EXPECT_EQ(a.j0, b.j0);
    EXPECT_EQ(to_double(a.K), to_double(b.K));
}

TEST(Harnack, KIsMonotoneInCjAndEta) {
    HarnackInputs in;
    Rational prev = 0;
    for (double cJ : {1.0, 1.5, 2.0, 4.0}) {
        in.cJ = cJ;
        const Rational K = derive_constants(in).K;
        EXPECT_GE(K, prev);
        prev = K;
    }
    in.cJ = 1.0;
    Rational prev_K = -1, prev_beta = 0;
    int prev_j0 = 1 << 30;
    for (double eta : {0.05, 0.1, 0.2, 0.3}) {
        in.eta = eta;
        const auto hc = derive_constants(in);
        EXPECT_GT(hc.beta, prev_beta);
        EXPECT_LE(hc.j0, prev_j0);
        if (prev_K >= 0) {
            EXPECT_LE(hc.K, prev_K);
        }
        prev_K = hc.K;
        prev_beta = hc.beta;
        prev_j0 = hc.j0;
    }
}

TEST(Harnack, RejectsInputsOutsideTheirRanges) {
    EXPECT_THROW(derive_constants(HarnackInputs{0.4, 0.25, 0.25, 0.25, 1, 1, 1}), DomainError);
    EXPECT_THROW(derive_constants(HarnackInputs{0.25, 0.25, 0.0, 0.25, 1, 1, 1}), DomainError);
    EXPECT_THROW(derive_constants(HarnackInputs{0.25, 0.25, 0.25, 0.25, 0.5, 1, 1}), DomainError);
    EXPECT_THROW(exact_rational(kInf), DomainError);
}

TEST(Harnack, ExactRationalRoundTrips) {
    for (double v : {0.25, 0.1, 1.0 / 3.0, 3.0e-300, 12345.678, 1.0})
        EXPECT_EQ(to_double(exact_rational(v)), v);
    EXPECT_EQ(exact_rational(0.375), Rational(3, 8));
}

TEST(Harnack, RadiusChainGolden) {
    const auto hc = derive_constants(HarnackInputs{});
    const RadiusChain ch = radius_chain(hc, 1.0, 1.0, 200);
    EXPECT_NEAR(ch.q, 256.0 / 257.0, 1e-15);
    // Sum over n >= 1 of r_n = r0 q / (1 - q) = 256 r0 = R / 256.
    EXPECT_NEAR(ch.total, 1.0 / 256.0, 1e-14);
    EXPECT_NEAR(ch.margin, 1.0 / 16.0 - 1.0 / 256.0, 1e-14);
    EXPECT_LT(ch.bound + ch.total, 2.0 * ch.bound);
    EXPECT_LE(ch.m0_residual, 1e-12);
    for (std::size_t i = 1; i < ch.radii.size(); ++i) EXPECT_LT(ch.radii[i], ch.radii[i - 1]);
}

TEST(Harnack, ChainGrowsAsBetaShrinks) {
    auto hc = derive_constants(HarnackInputs{});
    double prev = 0.0;
    for (int s : {1, 2, 4}) {
        HarnackConstants h = hc;
        h.beta = hc.beta / s;
        const double total = radius_chain(h, 1.0, 1.0).total;
        EXPECT_GT(total, prev);
        prev = total;
    }
    HarnackConstants broken = hc;
    broken.k0 = 1;
    EXPECT_THROW(radius_chain(broken, 1.0, 1.0), ContractViolation);
}

TEST(Harnack, PipelineInputsAreAdmissible) {
    for (const auto& [d, alpha] : std::vector<std::pair<int, double>>{{1, 0.5}, {2, 0.5}, {2, 1.0}}) {
        const auto p = StableParams::make(d, alpha);
        const auto [in, rep] = pipeline_inputs(p);
        EXPECT_TRUE(rep.pass) << d << " " << alpha;
        EXPECT_NO_THROW(in.validate());
        EXPECT_LE(std::ldexp(1.0, -static_cast<int>(rep.get("k"))), in.theta1);
        EXPECT_NEAR(in.a1, std::pow(doubling_constant(p), -rep.get("k")), 1e-15);
        const auto hc = derive_constants(in);
        EXPECT_GE(to_double(hc.K), 1.0);
        EXPECT_NO_THROW(radius_chain(hc, d - alpha, 1.0));
    }
    EXPECT_THROW(pipeline_inputs(StableParams::make(1, 1.0)), DomainError);
}

TEST(Harnack, ConstantDataHasRatioOne) {
    const auto p = StableParams::make(2, 1.0);
    const auto rep = harnack_empirical(p, Vec::zero(2), 1.0, 1.0 / 16.0, 3.45e10, {{"one", ConstantData{1.0}}}, 5, tight());
    EXPECT_NEAR(rep.max_ratio, 1.0, 1e-10);
    EXPECT_TRUE(rep.pass);
}

TEST(Harnack, FamilyRatiosAreBoundedAndScaleFree) {
    const double K = to_double(derive_constants(HarnackInputs{}).K);
    for (const auto& [d, alpha] : std::vector<std::pair<int, double>>{{1, 0.5}, {1, 1.0}, {2, 1.0}}) {
        const auto p = StableParams::make(d, alpha);
        const Vec x0 = Vec::axis(d, 0, 0.3);
        std::vector<std::vector<double>> ratios;
        for (double R : {0.5, 1.0, 10.0}) {
            const Vec c = x0 * R;
            const auto rep = harnack_empirical(p, c, R, 1.0 / 16.0, K, harnack_family(d, c, R), 5, tight());
            EXPECT_TRUE(rep.pass);
            EXPECT_FALSE(rep.violation);
            ratios.push_back(rep.ratio);
        }
        // The far half-space data is nonconstant, so its ratio exceeds 1.
        EXPECT_GT(ratios[1][1], 1.0);
        for (std::size_t k = 0; k < ratios[1].size(); ++k) {
            EXPECT_NEAR(ratios[0][k], ratios[1][k], 1e-6 * ratios[1][k]);
            EXPECT_NEAR(ratios[2][k], ratios[1][k], 1e-6 * ratios[1][k]);
        }
    }
}

TEST(Harnack, BallGridStaysInsideTheBall) {
    const Ball b(Vec{1.0, -2.0}, 0.5);
    const auto g = ball_grid(b, 6);
    EXPECT_GT(g.size(), 10u);
    for (const auto& y : g) EXPECT_TRUE(b.contains_open(y));
    EXPECT_THROW(ball_grid(b, 1), DomainError);
    // The coarsest odd grid keeps the axis points, pulled just inside the sphere.
    const auto g3 = ball_grid(b, 3);
    EXPECT_EQ(g3.size(), 5u);
    for (const auto& y : g3) EXPECT_TRUE(b.contains_open(y));
}

TEST(Harnack, HolderFitOnTheCauchyLine) {
    const auto p = StableParams::make(1, 1.0);
    const auto rep = holder_fit(p, Vec{0.0}, 1.0, holder_family(1, Vec{0.0}, 1.0), {}, tight());
    EXPECT_TRUE(rep.pass);
    EXPECT_GT(rep.beta_hat, 0.0);
    EXPECT_LE(rep.worst_bound_ratio, 1.05);
    EXPECT_NEAR(rep.beta_hat, 1.022056438, 1e-6);
}

TEST(Harnack, HolderExponentIsScaleFree) {
    const auto p = StableParams::make(2, 0.5);
    const auto a = holder_fit(p, Vec::zero(2), 1.0, holder_family(2, Vec::zero(2), 1.0), {}, tight());
    const auto b = holder_fit(p, Vec{3.0, 3.0}, 10.0, holder_family(2, Vec{3.0, 3.0}, 10.0), {}, tight());
    EXPECT_TRUE(a.pass);
    EXPECT_NEAR(a.beta_hat, b.beta_hat, 1e-6);
}

TEST(Harnack, HolderConstantDataIsTrivial) {
    const auto p = StableParams::make(1, 0.5);
    const auto rep = holder_fit(p, Vec{0.0}, 1.0, {{"one", ConstantData{1.0}}});
    EXPECT_TRUE(rep.constant_data);
    EXPECT_TRUE(rep.pass);
    EXPECT_TRUE(std::isnan(rep.beta_hat));
    EXPECT_THROW(holder_fit(p, Vec{0.0}, 1.0, {{"two", ConstantData{2.0}}}), DomainError);
}

TEST(Harnack, TruncationTailIsControlledByK) {
    const double K = to_double(derive_constants(HarnackInputs{}).K);
    for (const auto& [d, alpha] : std::vector<std::pair<int, double>>{{1, 1.0}, {2, 0.5}}) {
        const auto p = StableParams::make(d, alpha);
        const auto rep = truncation_check(p, Vec::zero(d), 1.0, 1.0 / 16.0, K, 0.5 * alpha, {2.0, 4.0, 8.0}, 5, tight());
        EXPECT_TRUE(rep.pass);
        for (std::size_t i = 1; i < rep.levels.size(); ++i) EXPECT_LT(rep.center_diff[i], rep.center_diff[i - 1]);
    }
    // (f - 2)_+ for f = |y|^{1/2} on the Cauchy line, from the center of the unit interval.
    const auto rep = truncation_check(StableParams::make(1, 1.0), Vec{0.0}, 1.0, 1.0 / 16.0, K, 0.5, {2.0}, 3, tight());
    EXPECT_NEAR(rep.center_diff[0], 0.318983666, 1e-6);
}
