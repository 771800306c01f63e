#pragma once
// Exit measures of balls: quadrature against the Poisson kernel, exact sampling from the
// center, walk-on-spheres for balls with obstacles, harmonic extension and composition.

#include <algorithm>
#include <cmath>
#include <vector>

#include "harnack_lab/exterior_data.hpp"
#include "harnack_lab/kernels.hpp"
#include "harnack_lab/quadrature.hpp"
#include "harnack_lab/random.hpp"

namespace harnack_lab {

// A breakpoint along a ray from the ball center; grade > 1 clusters nodes on both sides.
struct RayBreak {
    double s = 0.0;
    double grade = 1.0;
};

namespace detail {

inline bool collinear_with(const Vec& c, const Vec& x, const Vec& a) {
    const Vec u = x - c, v = a - c;
    const double uu = norm2(u), vv = norm2(v), uv = dot(u, v);
    if (uu == 0.0 || vv == 0.0) return true;
    return uu * vv - uv * uv <= 1e-24 * uu * vv;
}

}  // namespace detail

// Integral of phi(z) P_b(x, z) dz over |z - c| > r in polar coordinates around c.
// `breaks(theta, out)` appends breakpoints along the ray c + s theta; `decay` is the decay
// exponent of phi at infinity (phi = O(|z|^{-decay})), which sets the tail map. With
// `piecewise_constant`, phi is constant between consecutive breaks and pieces where it
// vanishes are skipped.
template <class Phi, class Breaks>
double polar_exit_integral(const StableParams& p, const Ball& b, const Vec& x, Phi&& phi, Breaks&& breaks,
                           double decay, const QuadratureSpec& q, bool axisymmetric,
                           const std::vector<Vec>& kinks = {}, bool piecewise_constant = false) {
    const double r = b.radius;
    const Vec& c = b.center;
    const Vec xc = x - c;
    const double xc2 = norm2(xc);
    const double inner_gap = r * r - xc2;
    const double tail = p.alpha + decay;
    if (!(tail > 0.0)) throw DomainError("exterior data grows too fast to be integrable against the exit law");
    const QuadratureSpec qi = q.inner(0.1);
    const double lo_grade = 2.0 / (2.0 - p.alpha);
    std::vector<RayBreak> br;
    auto on_ray = [&](const Vec& theta) {
        br.clear();
        breaks(theta, br);
        std::sort(br.begin(), br.end(), [](const RayBreak& a, const RayBreak& b2) { return a.s < b2.s; });
        // Parameter u = s - r keeps the gap |z-c|^2 - r^2 = u (2r + u) exact near the sphere.
        auto g = [&](double u) {
            const double s = r + u;
            const Vec zr = theta * s;
            return phi(c + zr) * poisson_kernel_gaps(p, inner_gap, u * (2.0 * r + u), norm2(zr - xc)) *
                   std::pow(s, p.d - 1);
        };
        auto vanishes = [&](double u) { return piecewise_constant && phi(c + theta * (r + u)) == 0.0; };
        double total = 0.0;
        double lo = 0.0, lg = lo_grade;
        for (const auto& k : br) {
            const double ku = k.s - r;
            if (!(ku > lo) || !std::isfinite(ku)) {
                if (ku == lo) lg = std::max(lg, k.grade);
                continue;
            }
            if (!vanishes(0.5 * (lo + ku))) total += integrate_piece(g, RadialPiece{lo, ku, lg, k.grade, tail, 0.0}, qi);
            lo = ku;
            lg = k.grade;
        }
        const double split = std::max(lo + r, 2.0 * lo);
        if (!vanishes(split)) total += integrate_piece(g, RadialPiece{lo, kInf, lg, 1.0, tail, split}, qi);
        return total;
    };
    const Frame frame = Frame::with_axis(xc2 > 0.0 ? xc : Vec::axis(p.d, 0));
    return integrate_sphere(frame, on_ray, q, axisymmetric && p.d == 3, kinks);
}

namespace detail {

inline bool data_axisymmetric(const ExteriorData& f, const Ball& b, const Vec& x) {
    if (x.dim != 3) return false;
    if (std::holds_alternative<ConstantData>(f)) return true;
    if (const auto* rp = std::get_if<RadialPower>(&f)) return collinear_with(b.center, x, rp->center);
    if (const auto* gb = std::get_if<GaussianBump>(&f)) return collinear_with(b.center, x, gb->center);
    if (const auto* ind = std::get_if<IndicatorData>(&f))
        if (const auto* a = std::get_if<Annulus>(&ind->region)) return collinear_with(b.center, x, a->center);
    return false;
}

}  // namespace detail

// h(x) = int f dmu_x^B for exterior data f.
inline double harmonic_extend(const StableParams& p, const Ball& b, const ExteriorData& f, const Vec& x,
                              const QuadratureSpec& q = {}) {
    require_dim(p, x);
    if (!b.contains_open(x)) throw DomainError("harmonic_extend: x must lie in the open ball");
    validate_data(f, b, p.alpha);
    auto phi = [&](const Vec& z) { return data_value(f, z); };
    auto breaks = [&](const Vec& theta, std::vector<RayBreak>& out) {
        std::vector<double> s;
        data_breakpoints(f, b.center, theta, s);
        for (double v : s) out.push_back({v, 1.0});
    };
    std::vector<Vec> kinks;
    data_angular_kinks(f, b.center, kinks);
    return polar_exit_integral(p, b, x, phi, breaks, data_decay(f), q, detail::data_axisymmetric(f, b, x), kinks,
                               std::holds_alternative<IndicatorData>(f) || std::holds_alternative<ConstantData>(f));
}

inline double exit_integral(const StableParams& p, const Ball& b, const Vec& x, const ExteriorData& f,
                            const QuadratureSpec& q = {}) {
    return harmonic_extend(p, b, f, x, q);
}

// mu_x^B(E) for a region E disjoint from the closed ball.
inline double exit_mass(const StableParams& p, const Ball& b, const Vec& x, const ExteriorRegion& E,
                        const QuadratureSpec& q = {}) {
    require_dim(p, x);
    if (!b.contains_open(x)) throw DomainError("exit_mass: x must lie in the open ball");
    if (region_meets_ball(E, b)) throw DomainError("exit_mass: region must not meet the closed ball");
    return harmonic_extend(p, b, IndicatorData{E, 1.0}, x, q);
}

// int phi dmu_x^V where phi = f outside U and phi = int f dmu_y^U inside U (optionally capped
// at `cap`): the right-hand side of the composition identity for V inside U.
inline double compose(const StableParams& p, const Ball& V, const Ball& U, const Vec& x, const ExteriorData& f,
                      const QuadratureSpec& q = {}, double cap = kInf) {
    require_dim(p, x);
    if (!V.contains_open(x)) throw DomainError("compose: x must lie in V");
    const bool same = V.center == U.center && V.radius == U.radius;
    if (!same && !(dist(V.center, U.center) + V.radius < U.radius))
        throw DomainError("compose: closure of V must lie inside U");
    validate_data(f, U, p.alpha);
    const QuadratureSpec q_inner = q.inner(1.0);
    auto phi = [&](const Vec& z) {
        double v = U.contains_open(z) ? harmonic_extend(p, U, f, z, q_inner) : data_value(f, z);
        return std::min(v, cap);
    };
    auto breaks = [&](const Vec& theta, std::vector<RayBreak>& out) {
        std::vector<double> s;
        data_breakpoints(f, V.center, theta, s);
        for (double v : s) out.push_back({v, 1.0});
        const Interval in_u = ray_ball(V.center, theta, U.center, U.radius);
        out.push_back({in_u.hi, 2.0});
    };
    // Nested balls sharing the axis keep the whole integrand axisymmetric.
    const bool axisym = detail::data_axisymmetric(f, U, x) && detail::collinear_with(V.center, x, U.center) &&
                        detail::data_axisymmetric(f, V, x);
    std::vector<Vec> kinks;
    data_angular_kinks(f, V.center, kinks);
    // Outside U the integrand is f itself; inside U it is positive for nonnegative f.
    return polar_exit_integral(p, V, x, phi, breaks, data_decay(f), q, axisym, kinks,
                               std::holds_alternative<IndicatorData>(f) || std::holds_alternative<ConstantData>(f));
}

// |mu_x^U(E) - int mu_y^U(E) dmu_x^V(y)|.
inline double composition_residual(const StableParams& p, const Ball& V, const Ball& U, const Vec& x,
                                   const ExteriorRegion& E, const QuadratureSpec& q = {}) {
    if (region_meets_ball(E, U)) throw DomainError("composition_residual: E must lie outside U");
    const double lhs = exit_mass(p, U, x, E, q);
    const double rhs = compose(p, V, U, x, IndicatorData{E, 1.0}, q);
    return std::abs(lhs - rhs);
}

// ---- sampling ----

// Exit point of B started at its center: V = r^2/|Y-c|^2 ~ Beta(alpha/2, 1 - alpha/2).
inline Vec sample_exit_unchecked(const StableParams& p, const Vec& center, double r, Rng& rng) {
    const double v = rng.beta(0.5 * p.alpha, 1.0 - 0.5 * p.alpha);
    const double radius = r / std::sqrt(std::max(v, 1e-300));
    return center + rng.direction(p.d) * radius;
}

inline Vec sample_exit(const StableParams& p, const Ball& b, const Vec& x, Rng& rng) {
    require_dim(p, x);
    if (dist(x, b.center) > 1e-12 * b.radius)
        throw ContractViolation("sample_exit only samples from the ball center");
    return sample_exit_unchecked(p, b.center, b.radius, rng);
}

struct ExitSample {
    Vec point;
    long steps = 0;
    bool hit_obstacle = false;
    bool truncated = false;  // max_steps reached; the sample must be discarded and counted
};

inline ExitSample wos_exit(const StableParams& p, const RegionSpec& region, const Vec& x, Rng& rng,
                           long max_steps = 100000, double safety = 1.0) {
    require_dim(p, x);
    if (!region.contains(x)) throw DomainError("wos_exit: x must lie in the open region");
    if (!(safety > 0.0 && safety <= 1.0)) throw DomainError("wos_exit: safety factor must lie in (0, 1]");
    ExitSample out;
    Vec cur = x;
    while (true) {
        if (out.steps >= max_steps) {
            out.truncated = true;
            out.point = cur;
            return out;
        }
        const double rho = safety * region.distance_to_complement(cur);
        cur = sample_exit_unchecked(p, cur, rho, rng);
        ++out.steps;
        if (!region.contains(cur)) break;
    }
    out.point = cur;
    out.hit_obstacle = region.in_obstacle(cur);
    return out;
}

struct HitEstimate {
    long hits = 0;
    long valid = 0;
    long truncated = 0;
    long total_steps = 0;
    ProportionCI ci;
};

// Probability that the walk from x ends in the obstacle set, with a Wilson interval.
inline HitEstimate estimate_hit_probability(const StableParams& p, const RegionSpec& region, const Vec& x, long paths,
                                            std::uint64_t seed, int jobs = 1, double level = 0.99,
                                            long max_steps = 100000) {
    auto body = [&](long count, Rng& rng) {
        HitEstimate h;
        for (long i = 0; i < count; ++i) {
            const ExitSample s = wos_exit(p, region, x, rng, max_steps);
            h.total_steps += s.steps;
            if (s.truncated) {
                ++h.truncated;
                continue;
            }
            ++h.valid;
            if (s.hit_obstacle) ++h.hits;
        }
        return h;
    };
    auto merge = [](HitEstimate a, const HitEstimate& b) {
        a.hits += b.hits;
        a.valid += b.valid;
        a.truncated += b.truncated;
        a.total_steps += b.total_steps;
        return a;
    };
    HitEstimate h = run_chunked<HitEstimate>(paths, 20000, seed, jobs, body, merge);
    h.ci = wilson_interval(h.hits, h.valid, level);
    return h;
}

}  // namespace harnack_lab
