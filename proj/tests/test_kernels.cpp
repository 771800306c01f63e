#include <gtest/gtest.h>

#include <boost/math/special_functions/gamma.hpp>
#include <random>

#include "harnack_lab/exit_measures.hpp"
#include "harnack_lab/kernels.hpp"

using namespace harnack_lab;

namespace {

struct Case {
    int d;
    double alpha;
};

const std::vector<Case> kTransient = {{1, 0.5}, {2, 0.5}, {2, 1.0}, {2, 1.5}, {3, 0.5}, {3, 1.0}, {3, 1.5}};

Vec random_point(std::mt19937_64& g, int d, double radius) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    while (true) {
        Vec v(d);
        for (int i = 0; i < d; ++i) v[i] = u(g) * radius;
        if (norm(v) < radius) return v;
    }
}

}  // namespace

TEST(Kernels, RieszGreenExamples) {
    const auto p = StableParams::make(1, 0.5);
    EXPECT_EQ(riesz_green(p, Vec{0.3}, Vec{0.3}), kInf);
    EXPECT_DOUBLE_EQ(riesz_green(p, Vec{0.0}, Vec{1.0}), p.A_riesz);
    EXPECT_NEAR(riesz_green(p, Vec{0.0}, Vec{4.0}), p.A_riesz / 2.0, 1e-15);
}

TEST(Kernels, RieszConstantMatchesGammaFormula) {
    // d = 3, alpha = 2 would be the Newtonian 1/(4 pi); alpha -> 2 limit checks the constant.
    const double a3 = StableParams::riesz_constant(3, 1.999999);
    EXPECT_NEAR(a3, 1.0 / (4.0 * kPi), 1e-6);
    const auto p = StableParams::make(2, 1.0);
    EXPECT_NEAR(p.A_riesz, 1.0 / (2.0 * kPi), 1e-15);
    EXPECT_NEAR(StableParams::make(1, 1.0).C_poisson, 1.0 / kPi, 1e-15);
    EXPECT_TRUE(std::isnan(StableParams::make(1, 1.0).A_riesz));
}

TEST(Kernels, LevyDensityExamples) {
    const auto p = StableParams::make(2, 1.0);
    EXPECT_DOUBLE_EQ(levy_density(p, Vec{1.0, 0.0}), p.A_levy);
    EXPECT_NEAR(levy_density(p, Vec{2.0, 0.0}), p.A_levy / 8.0, 1e-15);
    const Vec z{0.3, -0.7};
    EXPECT_NEAR(levy_density(p, z) / levy_density(p, z * 2.0), 8.0, 1e-12);
    EXPECT_THROW(levy_density(p, Vec{0.0, 0.0}), DomainError);
}

TEST(Kernels, RieszSymmetryHomogeneityTriangle) {
    std::mt19937_64 g(11);
    std::uniform_real_distribution<double> s(0.1, 10.0);
    for (const auto& c : kTransient) {
        const auto p = StableParams::make(c.d, c.alpha);
        const double C = doubling_constant(p);
        double worst = 0.0;
        for (int i = 0; i < 10000; ++i) {
            const Vec x = random_point(g, c.d, 3.0), y = random_point(g, c.d, 3.0), z = random_point(g, c.d, 3.0);
            EXPECT_EQ(riesz_green(p, x, y), riesz_green(p, y, x));
            const double lhs = std::min(riesz_green(p, x, z), riesz_green(p, y, z));
            worst = std::max(worst, lhs / riesz_green(p, x, y));
            if (i < 200) {
                const double sc = s(g);
                EXPECT_NEAR(riesz_green(p, x * sc, y * sc), std::pow(sc, c.alpha - c.d) * riesz_green(p, x, y),
                            1e-12 * riesz_green(p, x * sc, y * sc));
                const Vec zz = x - y;
                EXPECT_NEAR(levy_density(p, zz * sc), std::pow(sc, -c.d - c.alpha) * levy_density(p, zz),
                            1e-12 * levy_density(p, zz * sc));
            }
        }
        EXPECT_LE(worst, C * (1.0 + 1e-12)) << "d=" << c.d << " alpha=" << c.alpha;
    }
}

TEST(Kernels, PoissonKernelDomainAndSymmetry) {
    const auto p = StableParams::make(2, 1.0);
    const Ball b(Vec{0.0, 0.0}, 1.0);
    EXPECT_THROW(poisson_kernel_ball(p, b, Vec{1.0, 0.0}, Vec{2.0, 0.0}), DomainError);
    EXPECT_THROW(poisson_kernel_ball(p, b, Vec{0.0, 0.0}, Vec{0.5, 0.0}), DomainError);
    const double a = poisson_kernel_ball(p, b, b.center, Vec{1.7, 0.0});
    const double c = poisson_kernel_ball(p, b, b.center, Vec{1.7 * std::cos(2.0), 1.7 * std::sin(2.0)});
    EXPECT_NEAR(a, c, 1e-14);
    // Exit law of U(0,r) from 0 is the push-forward of the unit law under z -> r z.
    const double r = 3.5;
    const Ball br(Vec{0.0, 0.0}, r);
    EXPECT_NEAR(poisson_kernel_ball(p, br, br.center, Vec{1.7 * r, 0.2 * r}),
                std::pow(r, -2.0) * poisson_kernel_ball(p, b, b.center, Vec{1.7, 0.2}), 1e-14);
}

// Exterior mass of the Poisson kernel equals one for random balls and start points.
TEST(Kernels, PoissonKernelNormalizationProperty) {
    std::mt19937_64 g(5);
    std::uniform_real_distribution<double> rr(0.2, 5.0), frac(0.0, 0.95);
    const std::vector<Case> cases = {{1, 0.5}, {1, 1.0}, {1, 1.5}, {2, 0.5}, {2, 1.0}, {2, 1.5},
                                     {3, 0.5}, {3, 1.0}, {3, 1.5}};
    for (const auto& c : cases) {
        const auto p = StableParams::make(c.d, c.alpha);
        for (int k = 0; k < 3; ++k) {
            const double r = rr(g);
            const Ball b(random_point(g, c.d, 2.0), r);
            const Vec x = b.center + random_point(g, c.d, 1.0) * (frac(g) * r);
            const double m = exit_mass(p, b, x, Annulus{b.center, r, kInf});
            EXPECT_NEAR(m, 1.0, 1e-6) << "d=" << c.d << " alpha=" << c.alpha;
        }
    }
}

// Independent oracle: the radial law from the center has the closed form
// P(|Y| > s r) = I_{1/s^2}(alpha/2, 1 - alpha/2).
TEST(Kernels, CenteredRadialTailMatchesIncompleteBeta) {
    for (const auto& c : std::vector<Case>{{1, 1.0}, {2, 0.5}, {3, 1.5}}) {
        const auto p = StableParams::make(c.d, c.alpha);
        const Ball b(Vec::zero(c.d), 1.0);
        for (double s : {1.1, 2.0, 5.0}) {
            const double q = exit_mass(p, b, b.center, Annulus{b.center, s, kInf});
            EXPECT_NEAR(q, boost::math::ibeta(0.5 * c.alpha, 1.0 - 0.5 * c.alpha, 1.0 / (s * s)), 1e-7);
        }
    }
    // Cauchy on the line: P(|Y| > 2) = (2/pi) arcsin(1/2) = 1/3.
    EXPECT_NEAR(1.0 - exit_radius_cdf(StableParams::make(1, 1.0), 2.0), 1.0 / 3.0, 1e-14);
}

TEST(Kernels, ScaleFunctionConstants) {
    const auto p = StableParams::make(2, 1.0);
    EXPECT_DOUBLE_EQ(doubling_constant(p), 2.0);
    EXPECT_DOUBLE_EQ(scale_g(p, 0.5), 2.0 * scale_g(p, 1.0));
    EXPECT_DOUBLE_EQ(theta_for_factor(p, 16.0), 1.0 / 16.0);
    EXPECT_DOUBLE_EQ(scale_m0(p, 3.0), 1.0 / scale_g(p, 3.0));

    const auto q = StableParams::make(1, 0.5);
    const double t = theta_for_factor(q, 2.0);
    EXPECT_LT(t, 0.25);
    for (int i = -60; i <= 60; ++i) {
        const double r = std::pow(10.0, i / 10.0);
        EXPECT_LE(2.0 * scale_g(q, r), scale_g(q, t * r) * (1.0 + 1e-14)) << r;
    }
    for (double M : {1.0, 1.5, 4.0, 100.0}) {
        const double th = theta_for_factor(p, M);
        EXPECT_LE(M, std::pow(th, p.alpha - p.d));
    }
}

TEST(Kernels, BallGreenQuadratureMatchesClosedForm) {
    std::mt19937_64 g(3);
    QuadratureSpec q;
    q.rel_tol = 1e-7;
    for (const auto& c : kTransient) {
        const auto p = StableParams::make(c.d, c.alpha);
        const Ball b(Vec::axis(c.d, 0, 0.4), 1.3);
        for (int k = 0; k < 2; ++k) {
            const Vec x = b.center + random_point(g, c.d, 1.2);
            const Vec y = b.center + random_point(g, c.d, 1.2);
            const double quad = green_function_ball(p, b, x, y, q);
            const double closed = green_function_ball_closed(p, b, x, y);
            EXPECT_NEAR(quad, closed, 1e-5 * closed) << "d=" << c.d << " alpha=" << c.alpha;
            if (k == 0) {
                EXPECT_NEAR(quad, green_function_ball(p, b, y, x, q), 1e-5 * closed);
            }
        }
        EXPECT_EQ(green_function_ball(p, b, b.center, Vec::axis(c.d, 0, 5.0)), 0.0);
        EXPECT_EQ(green_function_ball(p, b, b.center, b.center), kInf);
    }
}

TEST(Kernels, BallGreenDomainMonotonicity) {
    for (const auto& c : kTransient) {
        const auto p = StableParams::make(c.d, c.alpha);
        const Ball big(Vec::zero(c.d), 1.0), small(Vec::axis(c.d, 0, 0.1), 0.6);
        const Vec x = Vec::axis(c.d, 0, 0.2), y = Vec::axis(c.d, 0, -0.15);
        EXPECT_LE(green_function_ball(p, small, x, y), green_function_ball(p, big, x, y) * (1.0 + 1e-6));
        EXPECT_LE(green_function_ball(p, big, x, y), riesz_green(p, x, y));
    }
}

// G_{U(y,r)}(., y) >= G(., y)/2 on U(y, 2 theta r) for theta below theta_M, M = 2 c_D.
TEST(Kernels, HalfGreenNearThePole) {
    std::mt19937_64 g(9);
    for (const auto& c : kTransient) {
        const auto p = StableParams::make(c.d, c.alpha);
        const double theta = 0.999 * theta_for_factor(p, 2.0 * doubling_constant(p));
        const double r = 2.0;
        const Ball b(Vec::zero(c.d), r);
        for (int k = 0; k < 40; ++k) {
            const Vec z = random_point(g, c.d, 2.0 * theta * r);
            if (norm(z) == 0.0) continue;
            const double lhs = green_function_ball_closed(p, b, z, b.center);
            EXPECT_GE(lhs, 0.5 * riesz_green(p, z, b.center));
        }
        const Vec edge = Vec::axis(c.d, 0, 2.0 * theta * r * 0.999);
        EXPECT_GE(green_function_ball(p, b, edge, b.center), 0.5 * riesz_green(p, edge, b.center));
    }
}

// Recurrent Cauchy case: closed form at (0, 1/2) of the unit ball, (1/pi) acosh 2, checked against
// an occupation-time estimate from exact Cauchy increments on a fine time grid.
TEST(Kernels, CauchyBallGreenOccupationOracle) {
    const auto p = StableParams::make(1, 1.0);
    const Ball b(Vec{0.0}, 1.0);
    const double closed = green_function_ball_closed(p, b, Vec{0.0}, Vec{0.5});
    EXPECT_NEAR(closed, std::acosh(2.0) / kPi, 1e-12);
    EXPECT_NEAR(closed, 0.4192007, 1e-6);  // frozen

    std::mt19937_64 g(2024);
    std::cauchy_distribution<double> cauchy(0.0, 1.0);
    const double dt = 2e-4, half = 0.05;
    const int paths = 6000;
    double occ = 0.0, occ2 = 0.0;
    for (int i = 0; i < paths; ++i) {
        double x = 0.0, t_in = 0.0;
        while (std::abs(x) < 1.0) {
            if (std::abs(x - 0.5) < half) t_in += dt;
            x += dt * cauchy(g);
        }
        const double v = t_in / (2.0 * half);
        occ += v;
        occ2 += v * v;
    }
    const double mean = occ / paths, se = std::sqrt((occ2 / paths - mean * mean) / paths);
    // Bin averaging and missed excursions bias by well under 3%.
    EXPECT_NEAR(mean, closed, 4.0 * se + 0.03 * closed);
}

TEST(Kernels, GreenOperationsRejectRecurrentCase) {
    const auto p = StableParams::make(1, 1.0);
    EXPECT_THROW(riesz_green(p, Vec{0.0}, Vec{1.0}), DomainError);
    EXPECT_THROW(green_function_ball(p, Ball(Vec{0.0}, 1.0), Vec{0.0}, Vec{0.5}), DomainError);
    EXPECT_THROW(theta_for_factor(p, 2.0), DomainError);
    EXPECT_NO_THROW(poisson_kernel_ball(p, Ball(Vec{0.0}, 1.0), Vec{0.0}, Vec{2.0}));
}

TEST(Kernels, CubeSelfEnergy) {
    for (double a : {0.5, 1.0, 1.5}) {
        if (a < 1.0) {
            EXPECT_NEAR(cube_self_energy(1, a), 2.0 / (a * (a + 1.0)), 1e-12);
        }
        // Independent route: orthant-wise nested quadrature of the difference density.
        EXPECT_NEAR(cube_self_energy(2, a), cube_pair_energy_uncached(2, a, {0, 0, 0}), 1e-6);
    }
    EXPECT_NEAR(cube_self_energy(3, 1.5), cube_pair_energy_uncached(3, 1.5, {0, 0, 0}), 1e-5);
    // Far offsets approach the point value.
    EXPECT_NEAR(cube_pair_energy(2, 1.0, {6, 0, 0}), 1.0 / 6.0, 6e-3 / 6.0);
}
