#pragma once
// Numerical checks of the hypotheses behind the Harnack inequality, instantiated for the
// isotropic alpha-stable process: jump-kernel comparability, exit-law comparability (HJ),
// hitting estimates (KS), capacity and hitting lower bounds (G3/RV), the landing mass delta_0,
// the Ikeda-Watanabe identity, and ball-average potentials.

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include <boost/math/special_functions/beta.hpp>

#include "harnack_lab/capacity.hpp"
#include "harnack_lab/exit_measures.hpp"
#include "harnack_lab/kernels.hpp"
#include "harnack_lab/quadrature.hpp"
#include "harnack_lab/random.hpp"
#include "harnack_lab/report.hpp"

namespace harnack_lab {

// Fixed, well-spread unit directions (both signs in d = 1, 8 in d = 2, 14 in d = 3).
inline std::vector<Vec> grid_directions(int d) {
    std::vector<Vec> out;
    if (d == 1) return {Vec{1.0}, Vec{-1.0}};
    if (d == 2) {
        for (int k = 0; k < 8; ++k) out.push_back(Vec{std::cos(k * kPi / 4.0 + 0.1), std::sin(k * kPi / 4.0 + 0.1)});
        return out;
    }
    for (int i = 0; i < 3; ++i)
        for (double s : {1.0, -1.0}) out.push_back(Vec::axis(3, i, s));
    const double c = 1.0 / std::sqrt(3.0);
    for (int m = 0; m < 8; ++m) out.push_back(Vec{m & 1 ? c : -c, m & 2 ? c : -c, m & 4 ? c : -c});
    return out;
}

// ---- (KKz): n(z) <= c_J n(z + y) whenever |y| < 2 theta |z| ----

inline ConditionReport check_kkz(const StableParams& p, double theta, long trials, std::uint64_t seed) {
    if (!(theta > 0.0 && theta < 0.5)) throw DomainError("check_kkz: theta must lie in (0, 1/2)");
    ConditionReport rep;
    rep.name = "kkz";
    const double bound = std::pow(1.0 + 2.0 * theta, p.d + p.alpha);
    rep.threshold = bound;
    Rng rng(RngStream{seed, 0});
    double worst = 1.0;  // y = 0
    Vec wz, wy;
    for (long i = 0; i < trials; ++i) {
        const Vec z = rng.direction(p.d) * std::exp(std::log(0.1) + rng.uniform() * std::log(100.0));
        const double rho = 2.0 * theta * norm(z) * std::pow(rng.uniform(), 1.0 / p.d);
        const Vec y = rng.direction(p.d) * rho;
        const double ratio = levy_density(p, z) / levy_density(p, z + y);
        if (ratio > worst) {
            worst = ratio;
            wz = z;
            wy = y;
        }
    }
    // The supremum sits at y aligned with z, |y| -> 2 theta |z|.
    rep.columns = {"t", "ratio"};
    for (int k = 1; k <= 12; ++k) {
        const double t = 2.0 * theta * (1.0 - std::pow(10.0, -k));
        const Vec z = Vec::axis(p.d, 0, 1.0);
        const double ratio = levy_density(p, z) / levy_density(p, z * (1.0 + t));
        rep.rows.push_back({t, ratio});
        if (ratio > worst) {
            worst = ratio;
            wz = z;
            wy = z * t;
        }
    }
    rep.constant = worst;
    rep.sample_count = trials;
    rep.set("theta", theta);
    rep.set("analytic_bound", bound);
    rep.set("gap", bound - worst);
    if (wz.dim) rep.witnesses.push_back("z=" + fmt(wz) + " y=" + fmt(wy));
    rep.pass = worst <= bound * (1.0 + 1e-9) && bound - worst <= 1e-9 * bound;
    return rep;
}

// ---- radial profile comparability ----

struct RadialProfile {
    enum class Kind { power, power_log, truncated_power, constant };
    Kind kind = Kind::power;
    double exponent = 2.0;   // n0(t) = t^{-exponent} ...
    double log_power = 0.0;  // ... * (1 + |log t|)^{log_power}
    double cutoff = 1.0;     // truncated: zero for t >= cutoff
    double value = 1.0;      // constant profile

    double operator()(double t) const {
        switch (kind) {
            case Kind::power: return std::pow(t, -exponent);
            case Kind::power_log: return std::pow(t, -exponent) * std::pow(1.0 + std::abs(std::log(t)), log_power);
            case Kind::truncated_power: return t < cutoff ? std::pow(t, -exponent) : 0.0;
            case Kind::constant: return value;
        }
        return 0.0;
    }
    std::string label() const {
        switch (kind) {
            case Kind::power: return "power";
            case Kind::power_log: return "power_log";
            case Kind::truncated_power: return "truncated_power";
            case Kind::constant: return "constant";
        }
        return "?";
    }
};

// Best C0 with C0^{-1} <= n0(t)/n0(s) <= C0 for 0 < s < t < (1 + theta) s on a log grid of s.
inline ConditionReport check_radial_profile(const RadialProfile& n0, double theta, double s_min = 1e-3,
                                            double s_max = 1e3, int s_points = 200, int t_points = 50) {
    if (!(theta > 0.0)) throw DomainError("check_radial_profile: theta must be positive");
    if (!(s_min > 0.0 && s_max > s_min)) throw DomainError("check_radial_profile: bad s range");
    ConditionReport rep;
    rep.name = "profile";
    double two_sided = 1.0, one_sided = 0.0;
    bool vanished = false;
    for (int i = 0; i < s_points && !vanished; ++i) {
        const double s = s_min * std::pow(s_max / s_min, static_cast<double>(i) / (s_points - 1));
        const double ns = n0(s);
        for (int k = 1; k <= t_points; ++k) {
            // The last point approaches the open edge t = (1 + theta) s.
            const double frac = k < t_points ? static_cast<double>(k) / t_points : 1.0 - 1e-12;
            const double t = s * (1.0 + theta * frac);
            const double nt = n0(t);
            if (!(ns > 0.0) || !(nt > 0.0)) {
                vanished = true;
                rep.witnesses.push_back("profile vanishes: s=" + fmt(s) + " t=" + fmt(t));
                break;
            }
            const double ratio = nt / ns;
            one_sided = std::max(one_sided, ratio);
            two_sided = std::max({two_sided, ratio, 1.0 / ratio});
        }
    }
    rep.set("theta", theta);
    rep.set("one_sided_C0", vanished ? kInf : std::max(1.0, one_sided));
    rep.set("two_sided_C0", vanished ? kInf : two_sided);
    rep.constant = vanished ? kInf : two_sided;
    rep.pass = !vanished && std::isfinite(two_sided);
    rep.flags.push_back("profile=" + n0.label());
    return rep;
}

// ---- (HJ): density of mu_x^{U(x, theta r)} <= c_J * density of mu_y^{U(x, r)} outside U(x, r) ----

inline std::vector<Vec> default_hj_test_points(const Vec& x, double r) {
    std::vector<Vec> out;
    for (double f : {1.001, 1.01, 1.1, 1.5, 2.0, 4.0, 10.0, 100.0})
        for (const auto& e : grid_directions(x.dim)) out.push_back(x + e * (f * r));
    return out;
}

inline ConditionReport check_hj(const StableParams& p, const Vec& x, double r, double theta,
                                std::vector<Vec> test_points = {}) {
    require_dim(p, x);
    if (!(theta > 0.0 && theta < 1.0 / 3.0)) throw DomainError("check_hj: theta must lie in (0, 1/3)");
    if (!(r > 0.0)) throw DomainError("check_hj: radius must be positive");
    if (test_points.empty()) test_points = default_hj_test_points(x, r);
    const Ball inner(x, theta * r), outer(x, r);
    std::vector<Vec> ys{x};
    for (double f : {0.5, 0.99})
        for (const auto& e : grid_directions(p.d)) ys.push_back(x + e * (f * theta * theta * r));
    ConditionReport rep;
    rep.name = "hj";
    rep.columns = {"y_index", "z_index", "ratio"};
    double raw = 0.0;
    for (std::size_t iz = 0; iz < test_points.size(); ++iz) {
        const Vec& z = test_points[iz];
        if (!(dist(z, x) > r)) throw DomainError("check_hj: test points must lie outside U(x, r)");
        const double num = poisson_kernel_ball(p, inner, x, z);
        for (std::size_t iy = 0; iy < ys.size(); ++iy) {
            const double ratio = num / poisson_kernel_ball(p, outer, ys[iy], z);
            rep.rows.push_back({static_cast<double>(iy), static_cast<double>(iz), ratio});
            if (ratio > raw) {
                raw = ratio;
                rep.witnesses.assign(1, "y=" + fmt(ys[iy]) + " z=" + fmt(z));
            }
        }
    }
    rep.sample_count = static_cast<long>(rep.rows.size());
    rep.set("theta", theta);
    rep.set("raw_max_ratio", raw);
    rep.constant = std::max(1.0, raw);
    rep.pass = std::isfinite(rep.constant);
    return rep;
}

// ---- constants shared with the KS check ----

// c2 realized by the capacity of a ball: cap U(x, r) >= c2^{-1} G-scale(r)^{-1}.
inline double c2_from_capacity(const StableParams& p, double r, double cap_lower) {
    return 1.0 / (green_scale(p, r) * cap_lower);
}

// eta = (2 c_D c^3 c1^2 c2)^{-1}.
inline double eta_from_constants(double c_D, double c, double c1, double c2) {
    return 1.0 / (2.0 * c_D * c * c * c * c1 * c1 * c2);
}

// ---- (KS): mu_y^{U(x,r) \ F}(F) >= eta cap F / cap U(x, theta r) ----

struct KsOptions {
    long paths = 1000000;
    std::uint64_t seed = 1;
    int jobs = 1;
    double level = 0.99;
    double c1 = 1.0;
    double cap_h_F = 0.0;  // 0: smallest obstacle radius / 8
    double cap_h_U = 0.0;  // 0: theta r / 10
    long max_steps = 100000;
};

inline ConditionReport check_ks(const StableParams& p, const Ball& outer, const std::vector<Ball>& F, double theta,
                                const Vec& y, const KsOptions& opt = {}) {
    p.require_transient("check_ks");
    require_dim(p, y);
    if (!(theta > 0.0 && theta < 1.0)) throw DomainError("check_ks: theta must lie in (0, 1)");
    const Ball U_small(outer.center, theta * outer.radius);
    if (!U_small.contains_open(y)) throw DomainError("check_ks: y must lie in U(x, theta r)");
    for (const auto& f : F) {
        if (!(dist(f.center, outer.center) + f.radius < U_small.radius))
            throw DomainError("check_ks: obstacles must lie inside U(x, theta r)");
    }
    ConditionReport rep;
    rep.name = "ks";
    rep.set("theta", theta);
    const double c_D = doubling_constant(p);
    double hU = opt.cap_h_U > 0.0 ? opt.cap_h_U : U_small.radius / 10.0;
    const CapacityBracket capU = capacity_lp(p, CompactSet::ball(U_small), hU);
    const double c2 = c2_from_capacity(p, U_small.radius, capU.lower);
    const double eta = eta_from_constants(c_D, 1.0, opt.c1, c2);
    rep.set("c_D", c_D);
    rep.set("c2", c2);
    rep.set("c1", opt.c1);
    rep.set("eta", eta);
    rep.set("cap_U_lower", capU.lower);
    rep.set("cap_U_upper", capU.upper);
    rep.constant = eta;
    if (F.empty()) {
        rep.set("rhs", 0.0);
        rep.set("ci_lo", 0.0);
        rep.flags.push_back("empty obstacle: trivially satisfied");
        rep.threshold = 0.0;
        rep.pass = true;
        return rep;
    }
    double rmin = kInf;
    CompactSet Fset;
    for (const auto& f : F) {
        Fset.balls.push_back(f);
        rmin = std::min(rmin, f.radius);
    }
    const double hF = opt.cap_h_F > 0.0 ? opt.cap_h_F : rmin / 8.0;
    const CapacityBracket capF = capacity_lp(p, Fset, hF);
    const double rhs = eta * capF.lower / capU.upper;
    HitEstimate h;
    if (std::any_of(F.begin(), F.end(), [&](const Ball& f) { return f.contains_closed(y); })) {
        // Started in F: the exit law of U \ F is the point mass at y.
        h.hits = h.valid = opt.paths;
        h.ci = ProportionCI{1.0, 1.0, 1.0};
        rep.flags.push_back("y in F: hitting probability is 1");
    } else {
        const auto region = RegionSpec::ball_minus(outer, F);
        h = estimate_hit_probability(p, region, y, opt.paths, opt.seed, opt.jobs, opt.level, opt.max_steps);
    }
    rep.sample_count = opt.paths;
    rep.set("cap_F_lower", capF.lower);
    rep.set("cap_F_upper", capF.upper);
    rep.set("hits", static_cast<double>(h.hits));
    rep.set("valid", static_cast<double>(h.valid));
    rep.set("truncated", static_cast<double>(h.truncated));
    rep.set("mean_steps", static_cast<double>(h.total_steps) / std::max(1L, opt.paths));
    rep.set("p_hat", h.ci.estimate);
    rep.set("ci_lo", h.ci.lo);
    rep.set("ci_hi", h.ci.hi);
    rep.set("rhs", rhs);
    rep.set("margin", h.ci.lo - rhs);
    rep.threshold = rhs;
    const bool reliable = h.truncated <= opt.paths / 1000;
    if (!reliable) rep.flags.push_back("unreliable: truncated walks exceed 0.1% of the budget");
    rep.pass = reliable && h.ci.lo >= rhs;
    return rep;
}

// ---- (G3)/(RV): hitting probability of a closed ball from outside ----

struct G3Options {
    long paths = 200000;
    std::uint64_t seed = 1;
    int jobs = 1;
    double level = 0.99;
    std::vector<double> truncation = {4.0, 8.0, 16.0};  // T = factor * max(r, |y - x|)
    long max_steps = 100000;
};

// Weights c_i with sum c_i p(T_i) = p_inf when p(T) = p_inf + sum_{j < n} a_j T^{-j k}.
inline std::vector<double> richardson_weights(const std::vector<double>& T, double k) {
    const std::size_t n = T.size();
    // Solve the transposed Vandermonde system in t_i = T_i^{-k}: sum c_i t_i^j = [j == 0].
    std::vector<double> t(n), c(n);
    for (std::size_t i = 0; i < n; ++i) t[i] = std::pow(T[i], -k);
    for (std::size_t i = 0; i < n; ++i) {
        // Lagrange basis at 0.
        double l = 1.0;
        for (std::size_t j = 0; j < n; ++j)
            if (j != i) l *= t[j] / (t[j] - t[i]);
        c[i] = l;
    }
    return c;
}

inline ConditionReport check_g3_rv(const StableParams& p, const Ball& B, const std::vector<Vec>& far_points,
                                   const G3Options& opt = {}) {
    p.require_transient("check_g3_rv");
    if (far_points.empty()) throw DomainError("check_g3_rv: no far points");
    if (opt.truncation.size() < 2 || opt.truncation.size() > 5) throw DomainError("check_g3_rv: need two to five truncation radii");
    const Vec& x = B.center;
    const double r = B.radius;
    const double kexp = p.d - p.alpha;
    const double z = normal_quantile_two_sided(opt.level);
    ConditionReport rep;
    rep.name = "g3";
    rep.columns = {"point_index", "distance", "T", "p_hat", "ci_lo", "ci_hi"};
    const double c2_cap = 1.0 / (green_scale(p, r) * ball_capacity(p, r));
    double c2_rv = 0.0, c2_rv_hi = 0.0;
    bool monotone = true, agree = true;
    for (std::size_t i = 0; i < far_points.size(); ++i) {
        const Vec& y = far_points[i];
        require_dim(p, y);
        const double D = dist(y, x);
        if (!(D > r)) throw DomainError("check_g3_rv: far points must lie outside the closed ball");
        std::vector<double> ps, sig;
        for (std::size_t k = 0; k < opt.truncation.size(); ++k) {
            const double T = opt.truncation[k] * std::max(r, D);
            const auto region = RegionSpec::annulus(x, r, T);
            const HitEstimate h = estimate_hit_probability(p, region, y, opt.paths, opt.seed + 7919 * (i * 31 + k),
                                                           opt.jobs, opt.level, opt.max_steps);
            const double ph = h.ci.estimate;
            ps.push_back(ph);
            sig.push_back(std::sqrt(std::max(ph * (1.0 - ph), 1e-12) / std::max(1L, h.valid)));
            rep.rows.push_back({static_cast<double>(i), D, T, ph, h.ci.lo, h.ci.hi});
            if (h.truncated > opt.paths / 1000) rep.flags.push_back("unreliable: truncation at point " + std::to_string(i));
        }
        for (std::size_t k = 0; k + 1 < ps.size(); ++k)
            if (ps[k] > ps[k + 1] + 3.0 * std::hypot(sig[k], sig[k + 1])) monotone = false;
        // Escape through the truncation sphere costs ~ T^{alpha-d} with corrections in higher
        // powers; eliminate one term per extra radius.
        const auto w = richardson_weights(opt.truncation, kexp);
        double p_inf = 0.0, var = 0.0;
        for (std::size_t k = 0; k < ps.size(); ++k) {
            p_inf += w[k] * ps[k];
            var += w[k] * w[k] * sig[k] * sig[k];
        }
        const double s_inf = std::sqrt(var);
        const double exact = ball_hitting_probability(p, r, D);
        if (std::abs(p_inf - exact) > z * s_inf + 1e-3) {
            agree = false;
            rep.witnesses.push_back("point " + std::to_string(i) + ": extrapolated " + fmt(p_inf) + " vs " + fmt(exact));
        }
        const double G_yx = riesz_green(p, y, x);
        const double c = G_yx / (green_scale(p, r) * p_inf);
        const double c_hi = G_yx / (green_scale(p, r) * std::max(p_inf - z * s_inf, 1e-12));
        c2_rv = std::max(c2_rv, c);
        c2_rv_hi = std::max(c2_rv_hi, c_hi);
        rep.set("p_inf_" + std::to_string(i), p_inf);
        rep.set("p_inf_sigma_" + std::to_string(i), s_inf);
        rep.set("p_exact_" + std::to_string(i), exact);
    }
    if (!monotone) rep.flags.push_back("extrapolation non-monotone in T");
    rep.sample_count = opt.paths * static_cast<long>(opt.truncation.size() * far_points.size());
    rep.set("c2_capacity", c2_cap);
    rep.set("c2_rv", c2_rv);
    rep.set("c2_rv_upper", c2_rv_hi);
    rep.constant = std::max(c2_cap, c2_rv);
    // (G3) implies (RV) with the same constant: the (RV) estimate may not exceed the capacity one.
    const bool consistent = c2_rv <= c2_cap * (1.0 + 1e-9) || c2_rv_hi / c2_rv - 1.0 >= c2_rv / c2_cap - 1.0;
    rep.set("consistent", consistent ? 1.0 : 0.0);
    rep.pass = monotone && agree && consistent;
    return rep;
}

// ---- delta_0 = mu_x^{U(x, theta^2 r)}(U(x, r)) ----

inline ConditionReport check_j0(const StableParams& p, double theta, const std::vector<double>& radii = {0.1, 1.0, 10.0},
                                const QuadratureSpec& q = {}) {
    if (!(theta > 0.0 && theta < 1.0 / 3.0)) throw DomainError("check_j0: theta must lie in (0, 1/3)");
    if (radii.empty()) throw DomainError("check_j0: no radii");
    ConditionReport rep;
    rep.name = "j0";
    rep.columns = {"r", "delta0"};
    double lo = kInf, hi = -kInf;
    for (double r : radii) {
        const Vec x = Vec::zero(p.d);
        const Ball small(x, theta * theta * r);
        const double v = exit_mass(p, small, x, Annulus{x, small.radius, r}, q);
        rep.rows.push_back({r, v});
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    const double closed = exit_radius_cdf(p, 1.0 / (theta * theta));
    rep.constant = lo;
    rep.set("theta", theta);
    rep.set("delta0_closed_form", closed);
    rep.set("scale_spread", hi - lo);
    rep.set("closed_form_error", std::max(std::abs(hi - closed), std::abs(lo - closed)));
    rep.pass = lo > 0.0 && hi - lo <= 1e-8 * hi;
    return rep;
}

// ---- Ikeda-Watanabe: exit density = int_B G_B(x, w) n(z - w) dw ----

// Multiplicative perturbations of the three normalization constants, for sensitivity tests.
struct IwFactors {
    double green = 1.0;
    double levy = 1.0;
    double poisson = 1.0;
};

inline double iw_exit_density(const StableParams& p, const Ball& b, const Vec& x, const Vec& z,
                              const QuadratureSpec& q = {}, const IwFactors& fac = {}) {
    require_dim(p, x);
    require_dim(p, z);
    if (!b.contains_open(x)) throw DomainError("iw_exit_density: x must lie in the open ball");
    if (!(dist(z, b.center) > b.radius)) throw DomainError("iw_exit_density: z must lie outside the closed ball");
    // Polar coordinates around x, axis toward the point of the sphere nearest z.
    const Vec zc = z - b.center;
    const Vec nearest = b.center + zc * (b.radius / norm(zc));
    const Vec axis = dist(nearest, x) > 0.0 ? nearest - x : zc;
    const Frame frame = Frame::with_axis(axis);
    const QuadratureSpec qi = q.inner(0.1);
    const double lo_grade = p.alpha < 1.0 ? 1.0 / p.alpha : 2.0;
    auto on_ray = [&](const Vec& theta) {
        const double rho_max = ray_ball(x, theta, b.center, b.radius).hi;
        auto g = [&](double rho) {
            const Vec w = x + theta * rho;
            if (!b.contains_open(w)) return 0.0;
            return green_function_ball_closed(p, b, x, w) * levy_density(p, z - w) * std::pow(rho, p.d - 1);
        };
        return integrate_piece(g, RadialPiece{0.0, rho_max, lo_grade, 2.0, 1.0}, qi);
    };
    const bool axisym = p.d > 1 && detail::collinear_with(b.center, x, z);
    return fac.green * fac.levy * integrate_sphere(frame, on_ray, q, axisym);
}

inline ConditionReport iw_crosscheck(const StableParams& p, const Ball& b, int nx = 10, int nz = 10,
                                     const QuadratureSpec& q = {}, const IwFactors& fac = {}) {
    ConditionReport rep;
    rep.name = "iw";
    rep.columns = {"x_index", "z_index", "iw_density", "poisson_kernel", "rel_err"};
    const int d = p.d;
    // x spreads over radii 0 .. 0.9 r; z over distances 1.01 r .. 100 r, in rotating directions.
    std::vector<Vec> xs, zs;
    auto dir = [&](int k) {
        if (d == 1) return Vec{k % 2 ? -1.0 : 1.0};
        const double a = 2.399963229728653 * k;  // golden angle
        if (d == 2) return Vec{std::cos(a), std::sin(a)};
        const double mu = 1.0 - 2.0 * ((k + 0.5) / 10.0 - std::floor((k + 0.5) / 10.0));
        const double s = std::sqrt(1.0 - mu * mu);
        return Vec{mu, s * std::cos(a), s * std::sin(a)};
    };
    for (int i = 0; i < nx; ++i) xs.push_back(b.center + dir(i) * (b.radius * 0.9 * i / std::max(1, nx - 1)));
    const double zf[] = {1.01, 1.05, 1.2, 1.5, 2.0, 3.0, 5.0, 10.0, 30.0, 100.0};
    for (int j = 0; j < nz; ++j) zs.push_back(b.center + dir(j + 3) * (b.radius * zf[j % 10]));
    double worst = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i)
        for (std::size_t j = 0; j < zs.size(); ++j) {
            if (dist(zs[j], b.center) - b.radius < 1e-3 * b.radius) continue;
            const double iw = iw_exit_density(p, b, xs[i], zs[j], q, fac);
            const double pk = fac.poisson * poisson_kernel_ball(p, b, xs[i], zs[j]);
            const double err = std::abs(iw - pk) / pk;
            rep.rows.push_back({static_cast<double>(i), static_cast<double>(j), iw, pk, err});
            if (err > worst) {
                worst = err;
                rep.witnesses.assign(1, "x=" + fmt(xs[i]) + " z=" + fmt(zs[j]));
            }
        }
    rep.sample_count = static_cast<long>(rep.rows.size());
    rep.constant = worst;
    rep.threshold = 0.02;
    rep.set("max_rel_err", worst);
    rep.set("C_IW", 1.0);
    rep.set("M_IW", 1.0);
    rep.pass = worst <= rep.threshold;
    return rep;
}

// ---- G lambda_U <= c2 g(r) for the normalized volume on a ball ----

// G applied to the uniform probability on B(c, r), evaluated at distance a from c.
inline double ball_average_potential(const StableParams& p, double r, double a, const QuadratureSpec& q = {}) {
    p.require_transient("ball_average_potential");
    const Vec c = Vec::zero(p.d);
    const Vec x = Vec::axis(p.d, 0, a);
    auto f = [&](const Vec& theta) { return std::pow(ray_ball(x, theta, c, r).hi, p.alpha) / p.alpha; };
    const double ang = integrate_sphere(Frame::standard(p.d), f, q, true);
    return p.A_riesz * ang / (ball_volume(p.d) * std::pow(r, p.d));
}

inline ConditionReport check_lambda_g(const StableParams& p, const std::vector<double>& radii = {0.1, 1.0, 10.0},
                                      int grid = 40, const QuadratureSpec& q = {}) {
    p.require_transient("check_lambda_g");
    ConditionReport rep;
    rep.name = "lambda_g";
    rep.columns = {"r", "a_over_r", "potential_over_g"};
    double lo = kInf, hi = -kInf;
    bool center_max = true;
    for (double r : radii) {
        double best = -kInf;
        int arg = -1;
        for (int k = 0; k < grid; ++k) {
            const double a = r * k / grid;
            const double v = ball_average_potential(p, r, a, q) / scale_g(p, r);
            rep.rows.push_back({r, a / r, v});
            if (v > best) {
                best = v;
                arg = k;
            }
        }
        if (arg != 0) center_max = false;
        lo = std::min(lo, best);
        hi = std::max(hi, best);
    }
    const double center = p.A_riesz * p.d / p.alpha;
    rep.constant = hi;
    rep.set("c2", hi);
    rep.set("center_closed_form", center);
    rep.set("scale_spread", hi - lo);
    rep.set("center_error", std::abs(hi - center));
    rep.set("max_at_center", center_max ? 1.0 : 0.0);
    rep.pass = center_max && hi - lo <= 1e-8 * hi && std::abs(hi - center) <= 1e-7 * center;
    return rep;
}

// ---- G_{U(y,r)}(., y) >= G(., y)/2 on U(y, 2 theta r) ----

inline ConditionReport check_ggb(const StableParams& p, double r, double theta, long samples, std::uint64_t seed,
                                 int quadrature_points = 0, const QuadratureSpec& q = {}) {
    p.require_transient("check_ggb");
    ConditionReport rep;
    rep.name = "ggb";
    const double limit = theta_for_factor(p, 2.0 * doubling_constant(p));
    rep.set("theta", theta);
    rep.set("theta_limit", limit);
    if (!(theta < limit)) rep.flags.push_back("theta at or above theta_M");
    const Vec y = Vec::zero(p.d);
    const Ball b(y, r);
    Rng rng(RngStream{seed, 0});
    double worst = kInf;
    for (long i = 0; i < samples; ++i) {
        // Include the far edge of U(y, 2 theta r), where the ratio is smallest.
        const double rho = 2.0 * theta * r * (i % 10 == 0 ? 1.0 - 1e-9 : std::pow(rng.uniform(), 1.0 / p.d));
        const Vec z = y + rng.direction(p.d) * std::max(rho, 1e-6 * r);
        double gb = green_function_ball_closed(p, b, z, y);
        if (i < quadrature_points) {
            const double gq = green_function_ball(p, b, z, y, q);
            rep.set("quadrature_check_" + std::to_string(i), std::abs(gq - gb) / gb);
            gb = gq;
        }
        const double ratio = gb / riesz_green(p, z, y);
        if (ratio < worst) {
            worst = ratio;
            rep.witnesses.assign(1, "z=" + fmt(z));
        }
    }
    rep.sample_count = samples;
    rep.constant = worst;
    rep.threshold = 0.5;
    rep.pass = theta < limit && worst >= 0.5;
    return rep;
}

}  // namespace harnack_lab
