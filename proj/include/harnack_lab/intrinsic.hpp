#pragma once
// Green-function intrinsic geometry: w-normalization w = min(G(., y0), 1), the (w,w)-triangle
// constant, the quasi-metric q = 1/G~(x,y) + 1/G~(y,x) on finite clouds, its metrization by
// shortest-path chaining of q^eps, and the ball inclusions between rho~-balls and level sets of G.

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "harnack_lab/conditions.hpp"
#include "harnack_lab/exit_measures.hpp"
#include "harnack_lab/kernels.hpp"
#include "harnack_lab/random.hpp"
#include "harnack_lab/report.hpp"

namespace harnack_lab {

struct NormalizedKernel {
    StableParams p;
    Vec y0;
    Box region;
    bool identity = false;  // w = 1
    double lambda_inf = 1.0;

    double w(const Vec& x) const { return identity ? 1.0 : std::min(riesz_green(p, x, y0), 1.0); }
    double G(const Vec& x, const Vec& y) const { return riesz_green(p, x, y); }
    double Gt(const Vec& x, const Vec& y) const { return G(x, y) / (w(x) * w(y)); }
    // |y - y0| beyond which w < 1.
    double level_radius() const { return std::pow(p.A_riesz, 1.0 / (p.d - p.alpha)); }
};

inline NormalizedKernel make_kernel(const StableParams& p, const Vec& y0, const Box& region, bool identity = false) {
    p.require_transient("make_kernel");
    require_dim(p, y0);
    if (!region.contains_open(y0)) throw DomainError("normalize_w: y0 must lie in the interior of the region");
    NormalizedKernel nk{p, y0, region, identity, 1.0};
    // w decreases with |x - y0|, so its infimum over the box sits at the farthest corner.
    nk.lambda_inf = nk.w(region.farthest_corner(y0));
    return nk;
}

// w as exterior data for exit-measure integrals.
inline ExteriorData w_data(const NormalizedKernel& nk) {
    CustomData c;
    if (nk.identity) return ConstantData{1.0};
    c.f = [nk](const Vec& y) { return nk.w(y); };
    c.lower = 0.0;
    c.upper = 1.0;
    c.decay = nk.p.d - nk.p.alpha;
    c.label = "w";
    return c;
}

// Checks int w dmu_x^U <= w(x) on random balls inside the region that avoid y0.
inline std::pair<NormalizedKernel, ConditionReport> normalize_w(const StableParams& p, const Vec& y0, const Box& region,
                                                                int n_balls = 10, std::uint64_t seed = 1,
                                                                const QuadratureSpec& q = {}, bool identity = false) {
    NormalizedKernel nk = make_kernel(p, y0, region, identity);
    ConditionReport rep;
    rep.name = "w_superharmonic";
    rep.columns = {"ball_index", "radius", "integral", "w_x", "ratio"};
    rep.set("lambda_inf", nk.lambda_inf);
    rep.set("level_radius", nk.identity ? 0.0 : nk.level_radius());
    Rng rng(RngStream{seed, 0});
    const int d = p.d;
    double worst = 0.0;
    int made = 0;
    for (int tries = 0; made < n_balls && tries < 1000 * n_balls; ++tries) {
        Vec c(d);
        for (int i = 0; i < d; ++i) c[i] = region.lo[i] + rng.uniform() * (region.hi[i] - region.lo[i]);
        double room = kInf;
        for (int i = 0; i < d; ++i) room = std::min({room, c[i] - region.lo[i], region.hi[i] - c[i]});
        const double r = room * (0.2 + 0.7 * rng.uniform());
        if (!(r > 0.0) || !(dist(c, y0) > r)) continue;
        const Ball b(c, r);
        const Vec x = c + rng.direction(d) * (r * 0.8 * rng.uniform());
        const double I = harmonic_extend(p, b, w_data(nk), x, q);
        const double wx = nk.w(x);
        rep.rows.push_back({static_cast<double>(made), r, I, wx, I / wx});
        if (I / wx > worst) {
            worst = I / wx;
            rep.witnesses.assign(1, "ball " + fmt(c) + " r=" + fmt(r) + " x=" + fmt(x));
        }
        ++made;
    }
    rep.sample_count = made;
    rep.constant = worst;
    rep.threshold = 1.0 + 1e-4;
    rep.pass = made == n_balls && worst <= rep.threshold;
    return {nk, rep};
}

// ---- clouds ----

inline std::vector<Vec> random_cloud(const Box& region, int n, std::uint64_t seed, std::uint64_t stream = 0) {
    Rng rng(RngStream{seed, stream});
    std::vector<Vec> pts;
    const int d = region.lo.dim;
    for (int k = 0; k < n; ++k) {
        Vec v(d);
        for (int i = 0; i < d; ++i) v[i] = region.lo[i] + rng.uniform() * (region.hi[i] - region.lo[i]);
        pts.push_back(v);
    }
    return pts;
}

inline Eigen::MatrixXd kernel_matrix(const NormalizedKernel& nk, const std::vector<Vec>& pts) {
    const auto n = static_cast<Eigen::Index>(pts.size());
    Eigen::MatrixXd K(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) K(i, j) = i == j ? kInf : nk.Gt(pts[i], pts[j]);
    return K;
}

struct TriangleResult {
    double c_tilde = 0.0;
    int i = -1, j = -1, k = -1;  // argmax triple (x, y, z)
};

// max over distinct triples of min(G~(x,z), G~(y,z)) / G~(x,y).
inline TriangleResult triangle_constant(const Eigen::MatrixXd& Gt) {
    const auto n = Gt.rows();
    if (n < 3) throw DomainError("triangle_constant: need at least three points");
    TriangleResult out;
    for (Eigen::Index x = 0; x < n; ++x)
        for (Eigen::Index y = 0; y < n; ++y) {
            if (y == x) continue;
            const double gxy = Gt(x, y);
            for (Eigen::Index z = 0; z < n; ++z) {
                if (z == x || z == y) continue;
                const double v = std::min(Gt(x, z), Gt(y, z)) / gxy;
                if (v > out.c_tilde) out = {v, static_cast<int>(x), static_cast<int>(y), static_cast<int>(z)};
            }
        }
    return out;
}

struct QuasiMetricCloud {
    std::vector<Vec> points;
    Eigen::MatrixXd q;
    double kappa = 0.0;  // max q(x,z) / (q(x,y) + q(y,z))
};

inline double quasi_triangle_constant(const Eigen::MatrixXd& q) {
    const auto n = q.rows();
    double kappa = 0.0;
    for (Eigen::Index x = 0; x < n; ++x)
        for (Eigen::Index z = x + 1; z < n; ++z)
            for (Eigen::Index y = 0; y < n; ++y) {
                if (y == x || y == z) continue;
                kappa = std::max(kappa, q(x, z) / (q(x, y) + q(y, z)));
            }
    return kappa;
}

inline QuasiMetricCloud make_cloud(const std::vector<Vec>& pts, Eigen::MatrixXd q) {
    const auto n = static_cast<Eigen::Index>(pts.size());
    if (q.rows() != n || q.cols() != n) throw DomainError("make_cloud: matrix size does not match the cloud");
    if (n > 2000) throw DomainError("make_cloud: clouds are capped at 2000 points");
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) {
            if (i == j ? q(i, j) != 0.0 : !(q(i, j) > 0.0)) throw DomainError("make_cloud: q must be positive off the diagonal");
            if (q(i, j) != q(j, i)) throw DomainError("make_cloud: q must be symmetric");
        }
    QuasiMetricCloud c{pts, std::move(q), 0.0};
    c.kappa = n >= 3 ? quasi_triangle_constant(c.q) : 1.0;
    return c;
}

inline QuasiMetricCloud make_cloud(const NormalizedKernel& nk, const std::vector<Vec>& pts) {
    const auto n = static_cast<Eigen::Index>(pts.size());
    Eigen::MatrixXd q = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j) {
            q(i, j) = 1.0 / nk.Gt(pts[i], pts[j]) + 1.0 / nk.Gt(pts[j], pts[i]);
            q(j, i) = q(i, j);
        }
    return make_cloud(pts, std::move(q));
}

struct MetrizationResult {
    Eigen::MatrixXd rho;
    double epsilon = 1.0;
    double gamma = 1.0;
    double C_achieved = kInf;        // needs the kernel; see comparability_constant
    bool lower_bound_checked = false;
    bool lower_bound_holds = false;  // rho >= q^eps / 4
    bool upper_bound_holds = false;  // rho <= q^eps
    double worst_triangle_excess = 0.0;
    std::vector<std::string> flags;
};

inline double default_epsilon(double kappa) {
    return 2.0 * kappa <= 2.0 ? 1.0 : std::min(1.0, std::log(2.0) / std::log(2.0 * kappa));
}

// Largest relative violation of rho(x,z) <= rho(x,y) + rho(y,z); zero for a metric.
inline double triangle_excess(const Eigen::MatrixXd& rho) {
    const auto n = rho.rows();
    double worst = 0.0;
    for (Eigen::Index x = 0; x < n; ++x)
        for (Eigen::Index y = 0; y < n; ++y)
            for (Eigen::Index z = 0; z < n; ++z) {
                const double lhs = rho(x, z), rhs = rho(x, y) + rho(y, z);
                if (lhs > rhs) worst = std::max(worst, (lhs - rhs) / std::max(lhs, 1e-300));
            }
    return worst;
}

// All-pairs shortest paths on the complete graph with weights q^eps (eps <= 0: default).
inline MetrizationResult metrize(const QuasiMetricCloud& cloud, double epsilon = 0.0) {
    const auto n = cloud.q.rows();
    MetrizationResult out;
    out.epsilon = epsilon > 0.0 ? epsilon : default_epsilon(cloud.kappa);
    if (!(out.epsilon > 0.0 && out.epsilon <= 1.0)) throw DomainError("metrize: epsilon must lie in (0, 1]");
    out.gamma = 1.0 / out.epsilon;
    const Eigen::MatrixXd qe = cloud.q.array().pow(out.epsilon).matrix();
    Eigen::MatrixXd rho = qe;
    // Rounding can leave an ulp-size violation after one sweep; repeat until nothing moves so
    // the triangle inequality holds exactly as evaluated.
    for (bool changed = true; changed;) {
        changed = false;
        for (Eigen::Index k = 0; k < n; ++k)
            for (Eigen::Index i = 0; i < n; ++i) {
                const double rik = rho(i, k);
                for (Eigen::Index j = 0; j < n; ++j) {
                    const double via = rik + rho(k, j);
                    if (via < rho(i, j)) {
                        rho(i, j) = via;
                        changed = true;
                    }
                }
            }
    }
    out.rho = rho;
    out.upper_bound_holds = (rho.array() <= qe.array()).all();
    out.lower_bound_checked = std::pow(2.0 * cloud.kappa, out.epsilon) <= 2.0 * (1.0 + 1e-12);
    if (out.lower_bound_checked) {
        out.lower_bound_holds = (rho.array() >= 0.25 * qe.array() * (1.0 - 1e-12)).all();
    } else {
        out.flags.push_back("epsilon violates (2 kappa)^eps <= 2: lower bound not asserted");
    }
    out.worst_triangle_excess = triangle_excess(rho);
    return out;
}

// Smallest C with C^{-1} rho^{-gamma} <= G~ <= C rho^{-gamma} over distinct cloud pairs.
inline double comparability_constant(const Eigen::MatrixXd& Gt, const MetrizationResult& mr) {
    const auto n = Gt.rows();
    double C = 1.0;
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) {
            if (i == j) continue;
            const double t = Gt(i, j) * std::pow(mr.rho(i, j), mr.gamma);
            C = std::max({C, t, 1.0 / t});
        }
    return C;
}

// ---- inclusions U~(x, b r) in V(x, r^gamma / C) in U~(x, r) ----

inline ConditionReport verify_inclusions(const NormalizedKernel& nk, const MetrizationResult& mr,
                                         const QuasiMetricCloud& cloud, const std::vector<int>& centers,
                                         std::vector<double> radii = {}) {
    if (!std::isfinite(mr.C_achieved)) throw DomainError("verify_inclusions: comparability constant not computed");
    const auto n = static_cast<int>(cloud.points.size());
    double lambda = nk.lambda_inf;
    for (const auto& y : cloud.points) lambda = std::min(lambda, nk.w(y));
    const double C = mr.C_achieved, gamma = mr.gamma;
    const double b = std::pow(lambda / C, 2.0 / gamma);
    ConditionReport rep;
    rep.name = "inclusions";
    rep.set("lambda", lambda);
    rep.set("C", C);
    rep.set("gamma", gamma);
    rep.set("beta", b);
    rep.columns = {"center", "r", "inner_count", "level_count", "outer_count"};
    if (radii.empty()) {
        const double top = mr.rho.maxCoeff();
        for (int k = 0; k <= 12; ++k) radii.push_back(top * 1.1 * std::pow(0.6, k));
    }
    bool ok = true;
    for (int x : centers) {
        if (x < 0 || x >= n) throw DomainError("verify_inclusions: center index out of range");
        for (double r : radii) {
            const double s = std::pow(r, gamma) / C;
            int inner = 0, level = 0, outer = 0;
            for (int y = 0; y < n; ++y) {
                const bool in_inner = y == x || mr.rho(x, y) < b * r;
                const bool in_level = y == x || 1.0 / nk.G(cloud.points[y], cloud.points[x]) < s;
                const bool in_outer = y == x || mr.rho(x, y) < r;
                inner += in_inner;
                level += in_level;
                outer += in_outer;
                if ((in_inner && !in_level) || (in_level && !in_outer)) {
                    ok = false;
                    rep.witnesses.push_back("center " + std::to_string(x) + " point " + std::to_string(y) + " r=" + fmt(r));
                }
            }
            rep.rows.push_back({static_cast<double>(x), r, static_cast<double>(inner), static_cast<double>(level),
                                static_cast<double>(outer)});
        }
    }
    rep.sample_count = static_cast<long>(rep.rows.size());
    rep.constant = C;
    rep.pass = ok;
    return rep;
}

// ---- normalized exit measures mu~_x^U = (w / w(x)) mu_x^U ----

// int phi dmu~_x^U for nonnegative exterior data phi.
inline double normalized_exit_integral(const NormalizedKernel& nk, const Ball& b, const Vec& x, const ExteriorData& phi,
                                       const QuadratureSpec& q = {}) {
    if (nk.identity) return harmonic_extend(nk.p, b, phi, x, q);
    CustomData prod;
    prod.f = [&](const Vec& y) { return data_value(phi, y) * nk.w(y); };
    const auto bounds = data_bounds(phi, b);
    prod.lower = std::min(0.0, bounds.first);
    prod.upper = std::max(0.0, bounds.second);
    prod.decay = data_decay(phi) + (nk.p.d - nk.p.alpha);
    prod.label = "phi*w";
    return harmonic_extend(nk.p, b, prod, x, q) / nk.w(x);
}

inline double normalized_exit_mass(const NormalizedKernel& nk, const Ball& b, const Vec& x, const QuadratureSpec& q = {}) {
    return normalized_exit_integral(nk, b, x, ConstantData{1.0}, q);
}

// |h(x)/w(x) - int (h/w) dmu~_x^V| for h the harmonic extension of f from U, V inside U.
inline double harmonic_correspondence_residual(const NormalizedKernel& nk, const Ball& V, const Ball& U, const Vec& x,
                                               const ExteriorData& f, const QuadratureSpec& q = {}) {
    const double lhs = harmonic_extend(nk.p, U, f, x, q) / nk.w(x);
    // (h/w) w = h, so the normalized mean value is the plain one divided by w(x).
    const double rhs = compose(nk.p, V, U, x, f, q) / nk.w(x);
    return std::abs(lhs - rhs);
}

// (HJ') for plain Riesz G: V(x, s) is the ball of radius (A s)^{1/(d-alpha)}; returns the
// level-set radius found by bisection on G, so the reduction to (HJ) is checked independently.
inline double level_set_radius(const StableParams& p, double s) {
    p.require_transient("level_set_radius");
    const Vec o = Vec::zero(p.d);
    double lo = 0.0, hi = 1.0;
    while (1.0 / riesz_green(p, Vec::axis(p.d, 0, hi), o) < s) hi *= 2.0;
    for (int k = 0; k < 200 && hi - lo > 1e-15 * hi; ++k) {
        const double mid = 0.5 * (lo + hi);
        (1.0 / riesz_green(p, Vec::axis(p.d, 0, mid), o) < s ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

inline ConditionReport check_hj_prime(const StableParams& p, const Vec& x, double s, double theta) {
    const double R = level_set_radius(p, s);
    const double ratio = level_set_radius(p, theta * s) / R;
    ConditionReport rep = check_hj(p, x, R, ratio);
    rep.name = "hj_prime";
    rep.set("level_theta", theta);
    rep.set("radius", R);
    rep.set("radius_ratio", ratio);
    return rep;
}

}  // namespace harnack_lab
