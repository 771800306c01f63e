#pragma once
// Kernels of the isotropic alpha-stable process on R^d: Riesz potential kernel, Levy
// density, Poisson kernel and Green function of a ball, and the power scale function.

#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <array>
#include <cmath>
#include <map>
#include <mutex>
#include <string>
#include <tuple>

#include "harnack_lab/geometry.hpp"
#include "harnack_lab/quadrature.hpp"

namespace harnack_lab {

struct StableParams {
    int d = 1;
    double alpha = 1.0;
    double A_riesz = 0.0;    // NaN when d <= alpha (no finite potential kernel)
    double A_levy = 0.0;
    double C_poisson = 0.0;

    static double riesz_constant(int d, double alpha) {
        if (!(d > alpha)) return std::nan("");
        return std::tgamma(0.5 * (d - alpha)) /
               (std::pow(2.0, alpha) * std::pow(kPi, 0.5 * d) * std::tgamma(0.5 * alpha));
    }
    static double levy_constant(int d, double alpha) {
        return alpha * std::pow(2.0, alpha - 1.0) * std::tgamma(0.5 * (d + alpha)) /
               (std::pow(kPi, 0.5 * d) * std::tgamma(1.0 - 0.5 * alpha));
    }
    static double poisson_constant(int d, double alpha) {
        return std::tgamma(0.5 * d) * std::pow(kPi, -0.5 * d - 1.0) * std::sin(0.5 * kPi * alpha);
    }

    // Parameters with the standard normalization (generator -(-Laplacian)^{alpha/2}).
    static StableParams make(int d, double alpha) {
        if (d < 1 || d > kMaxDim) throw DomainError("d must be in [1, " + std::to_string(kMaxDim) + "]");
        if (!(alpha > 0.0 && alpha < 2.0)) throw DomainError("alpha must lie in (0, 2)");
        StableParams p;
        p.d = d;
        p.alpha = alpha;
        p.A_riesz = riesz_constant(d, alpha);
        p.A_levy = levy_constant(d, alpha);
        p.C_poisson = poisson_constant(d, alpha);
        return p;
    }

    bool transient() const { return d > alpha; }
    void require_transient(const char* what) const {
        if (!transient())
            throw DomainError(std::string(what) + " needs d > alpha (transient case)");
    }
};

inline void require_dim(const StableParams& p, const Vec& x) {
    if (x.dim != p.d) throw DomainError("point dimension does not match d");
}

inline double riesz_green(const StableParams& p, const Vec& x, const Vec& y) {
    p.require_transient("riesz_green");
    require_dim(p, x);
    require_dim(p, y);
    const double r = dist(x, y);
    if (r == 0.0) return kInf;
    return p.A_riesz * std::pow(r, p.alpha - p.d);
}

inline double levy_density(const StableParams& p, const Vec& z) {
    require_dim(p, z);
    const double r = norm(z);
    if (r == 0.0) throw DomainError("levy_density is undefined at z = 0");
    return p.A_levy * std::pow(r, -p.d - p.alpha);
}

// Poisson kernel in terms of squared distances; no validation.
inline double poisson_kernel_raw(const StableParams& p, double r, double x_c2, double y_c2, double x_y2) {
    return p.C_poisson * std::pow((r * r - x_c2) / (y_c2 - r * r), 0.5 * p.alpha) * std::pow(x_y2, -0.5 * p.d);
}

// Same kernel from the gaps r^2 - |x-c|^2 and |y-c|^2 - r^2, which callers near the sphere
// compute without cancellation.
inline double poisson_kernel_gaps(const StableParams& p, double inner_gap, double outer_gap, double x_y2) {
    return p.C_poisson * std::pow(inner_gap / outer_gap, 0.5 * p.alpha) * std::pow(x_y2, -0.5 * p.d);
}

inline double poisson_kernel_ball(const StableParams& p, const Ball& b, const Vec& x, const Vec& y) {
    require_dim(p, x);
    require_dim(p, y);
    const double xc2 = norm2(x - b.center), yc2 = norm2(y - b.center), r2 = b.radius * b.radius;
    if (!(xc2 < r2)) throw DomainError("poisson_kernel_ball: x must lie in the open ball");
    if (!(yc2 > r2)) throw DomainError("poisson_kernel_ball: y must lie outside the closed ball");
    return poisson_kernel_raw(p, b.radius, xc2, yc2, norm2(x - y));
}

// Radial law of the exit point from the center: P(|Y - c| <= s r) for s >= 1.
inline double exit_radius_cdf(const StableParams& p, double s) {
    if (s <= 1.0) return 0.0;
    if (std::isinf(s)) return 1.0;
    return boost::math::ibetac(0.5 * p.alpha, 1.0 - 0.5 * p.alpha, 1.0 / (s * s));
}

// ---- scale function g(r) = r^{alpha - d} ----

inline double scale_g(const StableParams& p, double r) {
    if (!(r > 0.0)) throw DomainError("scale_g needs r > 0");
    return std::pow(r, p.alpha - p.d);
}
inline double scale_m0(const StableParams& p, double r) {
    if (!(r > 0.0)) throw DomainError("scale_m0 needs r > 0");
    return std::pow(r, p.d - p.alpha);
}
// c_D with g(r/2) = c_D g(r).
inline double doubling_constant(const StableParams& p) { return std::pow(2.0, p.d - p.alpha); }

// Largest theta < 1/4 with M g(r) <= g(theta r) for every r.
inline double theta_for_factor(const StableParams& p, double M) {
    p.require_transient("theta_for_factor");
    if (!(M >= 1.0)) throw DomainError("theta_for_factor needs M >= 1");
    const double cap = std::nextafter(0.25, 0.0);
    double t = std::pow(M, -1.0 / (p.d - p.alpha));
    if (t >= cap) return cap;
    // Guard the floating-point root so the inequality holds exactly as evaluated.
    while (std::pow(t, p.alpha - p.d) < M) t = std::nextafter(t, 0.0);
    return t;
}

// G(x, y) for |x - y| = r; the scale for which G is comparable to g with c = 1.
inline double green_scale(const StableParams& p, double r) {
    p.require_transient("green_scale");
    return p.A_riesz * scale_g(p, r);
}

// ---- Green function of a ball ----

// Closed form via the incomplete beta function (d > alpha), the logarithm (d = alpha = 1)
// or a one-dimensional integral (d < alpha).
inline double green_function_ball_closed(const StableParams& p, const Ball& b, const Vec& x, const Vec& y) {
    require_dim(p, x);
    require_dim(p, y);
    const double r2 = b.radius * b.radius;
    const double ax = r2 - norm2(x - b.center), ay = r2 - norm2(y - b.center);
    if (!(ax > 0.0) || !(ay > 0.0)) return 0.0;
    const double xy2 = norm2(x - y);
    if (xy2 == 0.0) return kInf;
    const double w = ax * ay / (r2 * xy2);
    const double a = 0.5 * p.alpha;
    if (p.transient()) {
        const double b2 = 0.5 * (p.d - p.alpha);
        const double u = w / (1.0 + w);
        return p.A_riesz * std::pow(xy2, 0.5 * (p.alpha - p.d)) * boost::math::ibeta(a, b2, u);
    }
    if (p.d == 1 && p.alpha == 1.0) return std::log(std::sqrt(w) + std::sqrt(1.0 + w)) / kPi;
    const double kappa = std::tgamma(0.5 * p.d) /
                         (std::pow(2.0, p.alpha) * std::pow(kPi, 0.5 * p.d) * std::pow(std::tgamma(a), 2));
    // s = w t^{1/a} removes the s^{a-1} singularity at 0.
    auto f = [&](double t) {
        if (t <= 0.0) return 0.0;
        return w / a * std::pow(1.0 + w * std::pow(t, 1.0 / a), -0.5 * p.d);
    };
    QuadratureSpec q;
    q.rel_tol = 1e-12;
    return kappa * std::pow(xy2, 0.5 * (p.alpha - p.d)) * integrate(f, 0.0, 1.0, q).value;
}

// Defining formula G_B(x,y) = G(x,y) - int G(z,y) P(x,z) dz by quadrature.
inline double green_function_ball(const StableParams& p, const Ball& b, const Vec& x, const Vec& y,
                                  const QuadratureSpec& q = {}) {
    p.require_transient("green_function_ball");
    require_dim(p, x);
    require_dim(p, y);
    if (!b.contains_open(x) || !b.contains_open(y)) return 0.0;
    if (x == y) return kInf;
    const double r = b.radius;
    const double xc2 = norm2(x - b.center);
    const Vec yc = y - b.center;
    const Vec xc = x - b.center;
    const QuadratureSpec qi = q.inner(0.1);
    // Rays c + (r + u) theta, u > 0; the gap |z-c|^2 - r^2 = u (2r + u) stays exact near the sphere.
    auto on_ray = [&](const Vec& theta) {
        auto g = [&](double u) {
            const double s = r + u;
            const Vec z = theta * s;
            return p.A_riesz * std::pow(norm2(z - yc), 0.5 * (p.alpha - p.d)) *
                   poisson_kernel_gaps(p, r * r - xc2, u * (2.0 * r + u), norm2(z - xc)) * std::pow(s, p.d - 1);
        };
        RadialPiece piece{0.0, kInf, 2.0 / (2.0 - p.alpha), 1.0, static_cast<double>(p.d), r};
        return integrate_piece(g, piece, qi);
    };
    const Vec axis = norm2(xc) > 0.0 ? xc : (norm2(yc) > 0.0 ? yc : Vec::axis(p.d, 0));
    const Frame frame = Frame::with_axis(axis);
    // Collinear with the center: the integrand is axisymmetric about the axis.
    bool axisym = false;
    if (p.d == 3) {
        const Vec e = frame.e[0];
        const double perp_y = norm2(yc - e * dot(yc, e)), perp_x = norm2(xc - e * dot(xc, e));
        axisym = perp_y <= 1e-24 * (1.0 + norm2(yc)) && perp_x <= 1e-24 * (1.0 + norm2(xc));
    }
    const double harmonic_part = integrate_sphere(frame, on_ray, q, axisym);
    return riesz_green(p, x, y) - harmonic_part;
}

// ---- closed forms used as references ----

// Riesz capacity of a ball of radius r (equilibrium total mass for G = A_riesz |x-y|^{alpha-d}).
inline double ball_capacity(const StableParams& p, double r) {
    p.require_transient("ball_capacity");
    return std::pow(r, p.d - p.alpha) * std::tgamma(0.5 * p.d) /
           (p.A_riesz * std::tgamma(1.0 + 0.5 * (p.d - p.alpha)) * std::tgamma(0.5 * p.alpha));
}

// Probability of ever hitting the closed ball of radius r from distance dist > r to its center.
inline double ball_hitting_probability(const StableParams& p, double r, double distance) {
    p.require_transient("ball_hitting_probability");
    if (distance <= r) return 1.0;
    return boost::math::ibeta(0.5 * (p.d - p.alpha), 0.5 * p.alpha, r * r / (distance * distance));
}

// E|U - V|^{alpha-d} for U, V independent uniform on the unit cube [0,1]^d.
// Pyramid coordinates t = s (1, a_2, ..., a_d) make the radial integral a polynomial moment.
inline double cube_self_energy(int d, double alpha) {
    auto radial = [&](const double* as, int m) {
        // coefficients of (1 - s) prod_j (1 - s a_j)
        double c[kMaxDim + 1] = {1.0, -1.0, 0.0, 0.0};
        int deg = 1;
        double n2 = 1.0;
        for (int j = 0; j < m; ++j) {
            for (int k = deg + 1; k >= 1; --k) c[k] -= as[j] * c[k - 1];
            ++deg;
            n2 += as[j] * as[j];
        }
        double s = 0.0;
        for (int k = 0; k <= deg; ++k) s += c[k] / (alpha + k);
        return std::pow(n2, 0.5 * (alpha - d)) * s;
    };
    const double sym = std::pow(2.0, d) * d;
    QuadratureSpec q;
    q.rel_tol = 1e-12;
    if (d == 1) return sym * radial(nullptr, 0);
    if (d == 2) {
        auto f = [&](double a) { return radial(&a, 1); };
        return sym * integrate(f, 0.0, 1.0, q).value;
    }
    auto outer = [&](double a) {
        auto f = [&](double b) {
            double as[2] = {a, b};
            return radial(as, 2);
        };
        return integrate(f, 0.0, 1.0, q).value;
    };
    return sym * integrate(outer, 0.0, 1.0, q).value;
}

// E|k + U - V|^{alpha-d} for U, V independent uniform on the unit cube and an integer offset
// k != 0. U - V has density prod(1 - |t_i|) on [-1,1]^d; each orthant is integrated separately
// so the kinks of the density sit on panel edges.
inline double cube_pair_energy_uncached(int d, double alpha, std::array<int, kMaxDim> k) {
    const double pw = 0.5 * (alpha - d);
    QuadratureSpec q;
    q.rel_tol = 1e-8;
    q.max_subdivisions = 400;
    auto f = [&](const double* t) {
        double r2 = 0.0, w = 1.0;
        for (int i = 0; i < d; ++i) {
            const double x = k[static_cast<std::size_t>(i)] + t[i];
            r2 += x * x;
            w *= 1.0 - std::abs(t[i]);
        }
        return r2 > 0.0 ? std::pow(r2, pw) * w : 0.0;
    };
    double total = 0.0;
    double t[kMaxDim] = {0.0, 0.0, 0.0};
    for (int mask = 0; mask < (1 << d); ++mask) {
        double lo[kMaxDim];
        for (int i = 0; i < d; ++i) lo[i] = (mask >> i & 1) ? 0.0 : -1.0;
        auto lvl3 = [&](double t3) {
            t[2] = t3;
            return f(t);
        };
        auto lvl2 = [&](double t2) {
            t[1] = t2;
            if (d == 2) return f(t);
            return integrate(lvl3, lo[2], lo[2] + 1.0, q.inner(0.01)).value;
        };
        auto lvl1 = [&](double t1) {
            t[0] = t1;
            if (d == 1) return f(t);
            return integrate(lvl2, lo[1], lo[1] + 1.0, q.inner(0.1)).value;
        };
        total += integrate(lvl1, lo[0], lo[0] + 1.0, q).value;
    }
    return total;
}

// Cached by (d, alpha, sorted |k|); thread safe.
inline double cube_pair_energy(int d, double alpha, std::array<int, kMaxDim> k) {
    for (auto& v : k) v = std::abs(v);
    std::sort(k.begin(), k.begin() + d);
    static std::mutex mu;
    static std::map<std::tuple<int, double, std::array<int, kMaxDim>>, double> cache;
    const auto key = std::make_tuple(d, alpha, k);
    {
        std::lock_guard<std::mutex> lock(mu);
        auto it = cache.find(key);
        if (it != cache.end()) return it->second;
    }
    const double v = cube_pair_energy_uncached(d, alpha, k);
    std::lock_guard<std::mutex> lock(mu);
    cache.emplace(key, v);
    return v;
}

}  // namespace harnack_lab
