#pragma once
// Riesz capacity of finite unions of balls and boxes: lattice LP for the primal value, a
// verified upper certificate, and checks of the quasi-capacity axioms.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "harnack_lab/geometry.hpp"
#include "harnack_lab/kernels.hpp"
#include "harnack_lab/lp.hpp"

namespace harnack_lab {

// Finite union of closed balls and closed boxes.
struct CompactSet {
    std::vector<Ball> balls;
    std::vector<Box> boxes;

    static CompactSet ball(const Ball& b) { return {{b}, {}}; }
    static CompactSet box(const Box& b) { return {{}, {b}}; }

    bool empty() const { return balls.empty() && boxes.empty(); }
    int dim() const { return balls.empty() ? (boxes.empty() ? 0 : boxes[0].dim()) : balls[0].dim(); }
    bool contains(const Vec& y) const {
        for (const auto& b : balls)
            if (b.contains_closed(y)) return true;
        for (const auto& b : boxes)
            if (b.contains(y)) return true;
        return false;
    }
    CompactSet united(const CompactSet& o) const {
        CompactSet u = *this;
        u.balls.insert(u.balls.end(), o.balls.begin(), o.balls.end());
        u.boxes.insert(u.boxes.end(), o.boxes.begin(), o.boxes.end());
        return u;
    }
    CompactSet translated(const Vec& t) const {
        CompactSet u = *this;
        for (auto& b : u.balls) b.center += t;
        for (auto& b : u.boxes) {
            b.lo += t;
            b.hi += t;
        }
        return u;
    }
    // Axis-aligned bounding box (as lo/hi vectors; may be degenerate).
    std::pair<Vec, Vec> bounds() const {
        const int d = dim();
        Vec lo(d), hi(d);
        for (int i = 0; i < d; ++i) {
            lo[i] = kInf;
            hi[i] = -kInf;
        }
        for (const auto& b : balls)
            for (int i = 0; i < d; ++i) {
                lo[i] = std::min(lo[i], b.center[i] - b.radius);
                hi[i] = std::max(hi[i], b.center[i] + b.radius);
            }
        for (const auto& b : boxes)
            for (int i = 0; i < d; ++i) {
                lo[i] = std::min(lo[i], b.lo[i]);
                hi[i] = std::max(hi[i], b.hi[i]);
            }
        return {lo, hi};
    }
};

struct DiscreteMeasure {
    std::vector<Vec> points;
    std::vector<double> weights;

    double total() const {
        double s = 0.0;
        for (double w : weights) s += w;
        return s;
    }
};

// Lattice points anchor + h k (k integer) with their integer coordinates.
struct LatticeGrid {
    Vec anchor;
    double h = 0.0;
    std::vector<std::array<long, kMaxDim>> index;
    std::vector<Vec> points;
};

namespace detail {

// The cube y + [-h/2, h/2]^d lies in one convex component of A.
inline bool cell_inside(const CompactSet& A, const Vec& y, double h) {
    const int d = y.dim;
    auto all_corners = [&](auto&& inside) {
        for (int mask = 0; mask < (1 << d); ++mask) {
            Vec c = y;
            for (int i = 0; i < d; ++i) c[i] += (mask >> i & 1) ? 0.5 * h : -0.5 * h;
            if (!inside(c)) return false;
        }
        return true;
    };
    for (const auto& b : A.balls)
        if (all_corners([&](const Vec& c) { return b.contains_closed(c); })) return true;
    for (const auto& b : A.boxes)
        if (all_corners([&](const Vec& c) { return b.contains(c); })) return true;
    return false;
}

}  // namespace detail

// Lattice points anchor + h k inside A; with `whole_cells`, only points whose cell lies in A.
inline LatticeGrid lattice_in(const CompactSet& A, double h, const Vec& anchor, bool whole_cells = false) {
    if (!(h > 0.0)) throw DomainError("grid spacing must be positive");
    LatticeGrid g{anchor, h, {}, {}};
    if (A.empty()) return g;
    const int d = A.dim();
    // Membership is decided in anchor-relative coordinates so translated copies give the same lattice.
    const CompactSet rel = A.translated(-anchor);
    const auto [lo, hi] = rel.bounds();
    std::array<long, kMaxDim> kmin{}, kmax{};
    for (int i = 0; i < d; ++i) {
        kmin[i] = static_cast<long>(std::floor(lo[i] / h)) - 1;
        kmax[i] = static_cast<long>(std::ceil(hi[i] / h)) + 1;
    }
    std::array<long, kMaxDim> k = kmin;
    while (true) {
        Vec y(d);
        for (int i = 0; i < d; ++i) y[i] = h * static_cast<double>(k[i]);
        if (whole_cells ? detail::cell_inside(rel, y, h) : rel.contains(y)) {
            g.index.push_back(k);
            g.points.push_back(anchor + y);
        }
        int i = 0;
        while (i < d) {
            if (++k[i] <= kmax[i]) break;
            k[i] = kmin[i];
            ++i;
        }
        if (i == d) break;
    }
    return g;
}

inline Vec default_anchor(const CompactSet& A) {
    const auto [lo, hi] = A.bounds();
    return (lo + hi) * 0.5;
}

// Lebesgue measure of A approximated by lattice counting (exactly additive on a common lattice).
inline double grid_volume(const CompactSet& A, double h, const Vec& anchor) {
    if (A.empty()) return 0.0;
    return static_cast<double>(lattice_in(A, h, anchor).points.size()) * std::pow(h, A.dim());
}

// Points on the boundary of A at spacing about `spacing`, used to tighten certificate checks.
inline std::vector<Vec> boundary_samples(const CompactSet& A, double spacing) {
    std::vector<Vec> out;
    const int d = A.dim();
    for (const auto& b : A.balls) {
        if (d == 1) {
            out.push_back(b.center + Vec{b.radius});
            out.push_back(b.center - Vec{b.radius});
        } else if (d == 2) {
            const int n = std::max(8, static_cast<int>(std::ceil(2.0 * kPi * b.radius / spacing)));
            for (int i = 0; i < n; ++i) {
                const double t = 2.0 * kPi * (i + 0.5) / n;
                out.push_back(b.center + Vec{b.radius * std::cos(t), b.radius * std::sin(t)});
            }
        } else {
            const int n = std::max(32, static_cast<int>(std::ceil(4.0 * kPi * b.radius * b.radius / (spacing * spacing))));
            const double golden = kPi * (3.0 - std::sqrt(5.0));
            for (int i = 0; i < n; ++i) {
                const double z = 1.0 - 2.0 * (i + 0.5) / n, s = std::sqrt(1.0 - z * z), t = golden * i;
                out.push_back(b.center + Vec{s * std::cos(t), s * std::sin(t), z} * b.radius);
            }
        }
    }
    for (const auto& b : A.boxes) {
        std::array<int, kMaxDim> n{};
        for (int i = 0; i < d; ++i) n[i] = std::max(1, static_cast<int>(std::ceil((b.hi[i] - b.lo[i]) / spacing)));
        std::array<int, kMaxDim> k{};
        while (true) {
            bool on_face = false;
            Vec y(d);
            for (int i = 0; i < d; ++i) {
                y[i] = b.lo[i] + (b.hi[i] - b.lo[i]) * k[i] / n[i];
                on_face = on_face || k[i] == 0 || k[i] == n[i];
            }
            if (on_face) out.push_back(y);
            int i = 0;
            while (i < d) {
                if (++k[i] <= n[i]) break;
                k[i] = 0;
                ++i;
            }
            if (i == d) break;
        }
    }
    return out;
}

inline double potential(const StableParams& p, const DiscreteMeasure& nu, const Vec& y) {
    double s = 0.0;
    for (std::size_t j = 0; j < nu.points.size(); ++j) {
        const double r2 = norm2(y - nu.points[j]);
        if (r2 == 0.0) return kInf;
        s += nu.weights[j] * std::pow(r2, 0.5 * (p.alpha - p.d));
    }
    return p.A_riesz * s;
}

struct CertificateResult {
    bool accepted = false;
    double upper = kInf;       // ||nu|| when accepted
    double min_potential = 0.0;
    Vec worst_point;
};

// Accepts nu as an upper certificate for cap A when G nu >= 1 at every check point, up to a
// relative rounding slack of 1e-12.
inline CertificateResult capacity_upper_certificate(const StableParams& p, const CompactSet& A,
                                                    const DiscreteMeasure& nu, const std::vector<Vec>& check_points) {
    p.require_transient("capacity_upper_certificate");
    CertificateResult out;
    out.min_potential = kInf;
    for (const auto& y : check_points) {
        if (!A.contains(y)) continue;
        const double v = potential(p, nu, y);
        if (v < out.min_potential) {
            out.min_potential = v;
            out.worst_point = y;
        }
    }
    out.accepted = out.min_potential >= 1.0 - 1e-12 && std::isfinite(nu.total()) && nu.total() > 0.0;
    if (out.accepted) out.upper = nu.total();
    return out;
}

struct CapacityBracket {
    double lower = 0.0;
    double upper = 0.0;
    double grid_resolution = 0.0;
    double cert_inflation = 0.0;  // nu = (1 + cert_inflation) * equilibrium
    DiscreteMeasure equilibrium;
    std::size_t check_points = 0;
    bool direct_solve = false;    // K w = 1 had a positive solution (optimal by LP duality)
    long pivots = 0;
    Vec worst_check_point;
};

inline std::vector<Vec> certificate_grid(const CompactSet& A, double h, const Vec& anchor) {
    auto fine = lattice_in(A, 0.5 * h, anchor).points;
    auto bd = boundary_samples(A, 0.5 * h);
    fine.insert(fine.end(), bd.begin(), bd.end());
    return fine;
}

// LP estimate of cap A on the lattice of spacing h with a certified upper bound.
inline CapacityBracket capacity_lp(const StableParams& p, const CompactSet& A, double h,
                                   std::optional<Vec> anchor = std::nullopt) {
    p.require_transient("capacity_lp");
    CapacityBracket out;
    out.grid_resolution = h;
    if (A.empty()) return out;
    const Vec a = anchor ? *anchor : default_anchor(A);
    // Support cells lie inside A, so the discretized measure never leaves the set.
    const LatticeGrid grid = lattice_in(A, h, a, true);
    const auto n = static_cast<Eigen::Index>(grid.points.size());
    if (n == 0) throw DomainError("capacity_lp: grid spacing too coarse, no lattice point in the set");
    const int d = p.d;
    // Distances from integer offsets make the matrix exactly translation invariant.
    Eigen::MatrixXd K(n, n);
    const double diag = p.A_riesz * std::pow(h, p.alpha - d) * cube_self_energy(d, p.alpha);
    // Cells at lattice distance <= 2 use exact cell-to-cell averages; farther pairs use point values.
    const double scale = p.A_riesz * std::pow(h, p.alpha - d);
    for (Eigen::Index i = 0; i < n; ++i) {
        K(i, i) = diag;
        for (Eigen::Index j = 0; j < i; ++j) {
            double k2 = 0.0;
            long kmax = 0;
            std::array<int, kMaxDim> off{};
            for (int c = 0; c < d; ++c) {
                const long dk = grid.index[i][c] - grid.index[j][c];
                off[c] = static_cast<int>(dk);
                kmax = std::max(kmax, std::abs(dk));
                k2 += static_cast<double>(dk * dk);
            }
            K(i, j) = K(j, i) = kmax <= 2 ? scale * cube_pair_energy(d, p.alpha, off)
                                          : scale * std::pow(k2, 0.5 * (p.alpha - d));
        }
    }
    Eigen::VectorXd w;
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);
    {
        w = K.partialPivLu().solve(ones);
        // Positive w with K w = 1 is optimal: y = w is dual feasible (K symmetric) with equal objective.
        out.direct_solve = w.allFinite() && (w.array() > 0.0).all() && ((K * w - ones).cwiseAbs().maxCoeff() < 1e-9);
    }
    if (!out.direct_solve) {
        const LpResult lp = simplex_max(K, ones, ones);
        if (lp.status != LpResult::Status::optimal) throw std::runtime_error("capacity_lp: simplex did not converge");
        w = lp.x;
        out.pivots = lp.pivots;
    }
    out.lower = w.sum();
    out.equilibrium.points = grid.points;
    out.equilibrium.weights.assign(w.data(), w.data() + n);

    const auto check = certificate_grid(A, h, a);
    out.check_points = check.size();
    DiscreteMeasure nu = out.equilibrium;
    const CertificateResult probe = capacity_upper_certificate(p, A, nu, check);
    out.worst_check_point = probe.worst_point;
    if (!(probe.min_potential > 0.0) || !std::isfinite(probe.min_potential)) {
        out.upper = kInf;
        return out;
    }
    // Smallest inflation making G nu >= 1 on the check grid, nudged for rounding.
    out.cert_inflation = std::max(0.0, 1.0 / probe.min_potential - 1.0);
    double factor = (1.0 + out.cert_inflation) * (1.0 + 1e-12);
    for (int attempt = 0; attempt < 20; ++attempt) {
        for (auto& v : nu.weights) v *= factor;
        const CertificateResult cert = capacity_upper_certificate(p, A, nu, check);
        if (cert.accepted) {
            out.upper = cert.upper;
            out.cert_inflation = nu.total() / out.lower - 1.0;
            return out;
        }
        nu = out.equilibrium;
        factor *= 1.0 + 1e-9 * (attempt + 1);
    }
    out.upper = kInf;
    return out;
}

// ---- quasi-capacities ----

struct QuasiCapacity {
    std::function<double(const CompactSet&)> evaluate;
    double constant_c = 1.0;
    std::string name = "m";
};

struct SetPair {
    CompactSet a, b;
    bool a_subset_b = false;
};

struct QuasiCapacityReport {
    bool monotone = true;
    double worst_monotone_ratio = 0.0;  // max m(A)/m(B) over nested pairs (<= 1 required)
    double best_c = 0.0;                // max m(A u B)/(m(A) + m(B))
    bool subadditive = true;
    std::optional<double> c0;           // (T) sandwich constant for the ball family
    bool pass = true;
};

// Monotonicity, c-subadditivity and, for balls, c0^{-1} m0(r) <= m(U(x,r)) <= c0 m0(r).
inline QuasiCapacityReport quasi_capacity_axioms(const QuasiCapacity& m, const std::vector<SetPair>& family,
                                                 const std::vector<Ball>& balls = {},
                                                 std::function<double(double)> m0 = {}) {
    if (family.empty() && balls.empty()) throw DomainError("quasi_capacity_axioms: empty family");
    QuasiCapacityReport rep;
    for (const auto& pr : family) {
        const double ma = m.evaluate(pr.a), mb = m.evaluate(pr.b);
        if (pr.a_subset_b) {
            const double ratio = mb > 0.0 ? ma / mb : (ma > 0.0 ? kInf : 0.0);
            rep.worst_monotone_ratio = std::max(rep.worst_monotone_ratio, ratio);
            if (ma > mb * (1.0 + 1e-12)) rep.monotone = false;
        }
        const double mu = m.evaluate(pr.a.united(pr.b));
        const double denom = ma + mb;
        const double c = denom > 0.0 ? mu / denom : (mu > 0.0 ? kInf : 0.0);
        rep.best_c = std::max(rep.best_c, c);
    }
    rep.subadditive = rep.best_c <= m.constant_c * (1.0 + 1e-12);
    if (!balls.empty() && m0) {
        double c0 = 1.0;
        for (const auto& b : balls) {
            const double v = m.evaluate(CompactSet::ball(b)), ref = m0(b.radius);
            c0 = std::max({c0, v / ref, ref / v});
        }
        rep.c0 = c0;
    }
    rep.pass = rep.monotone && rep.subadditive && (!rep.c0 || std::isfinite(*rep.c0));
    return rep;
}

}  // namespace harnack_lab
