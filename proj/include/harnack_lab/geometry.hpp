#pragma once
// Small fixed-capacity vectors, balls, boxes and orthonormal frames in R^d, d <= 3.

#include <algorithm>
#include <array>
#include <cmath>
#include <initializer_list>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace harnack_lab {

inline constexpr int kMaxDim = 3;
inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kPi = 3.14159265358979323846;

// Raised when an argument lies outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Raised when a caller breaks an operation's calling contract (e.g. off-center sampling).
class ContractViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

struct Vec {
    std::array<double, kMaxDim> c{};
    int dim = 0;

    Vec() = default;
    explicit Vec(int d) : dim(d) {
        if (d < 1 || d > kMaxDim)
            throw DomainError("dimension must be in [1, " + std::to_string(kMaxDim) + "]");
    }
    Vec(std::initializer_list<double> xs) : Vec(static_cast<int>(xs.size())) {
        std::copy(xs.begin(), xs.end(), c.begin());
    }
    static Vec zero(int d) { return Vec(d); }
    static Vec axis(int d, int k, double len = 1.0) {
        Vec v(d);
        v[k] = len;
        return v;
    }
    static Vec from(const std::vector<double>& xs) {
        Vec v(static_cast<int>(xs.size()));
        std::copy(xs.begin(), xs.end(), v.c.begin());
        return v;
    }

    double& operator[](int i) { return c[static_cast<std::size_t>(i)]; }
    double operator[](int i) const { return c[static_cast<std::size_t>(i)]; }

    Vec& operator+=(const Vec& o) {
        for (int i = 0; i < dim; ++i) c[i] += o.c[i];
        return *this;
    }
    Vec& operator-=(const Vec& o) {
        for (int i = 0; i < dim; ++i) c[i] -= o.c[i];
        return *this;
    }
    Vec& operator*=(double s) {
        for (int i = 0; i < dim; ++i) c[i] *= s;
        return *this;
    }
    std::vector<double> to_vector() const { return {c.begin(), c.begin() + dim}; }
};

inline Vec operator+(Vec a, const Vec& b) { return a += b; }
inline Vec operator-(Vec a, const Vec& b) { return a -= b; }
inline Vec operator*(Vec a, double s) { return a *= s; }
inline Vec operator*(double s, Vec a) { return a *= s; }
inline Vec operator-(Vec a) { return a *= -1.0; }

inline bool operator==(const Vec& a, const Vec& b) {
    if (a.dim != b.dim) return false;
    for (int i = 0; i < a.dim; ++i)
        if (a.c[i] != b.c[i]) return false;
    return true;
}

inline double dot(const Vec& a, const Vec& b) {
    double s = 0.0;
    for (int i = 0; i < a.dim; ++i) s += a.c[i] * b.c[i];
    return s;
}
inline double norm2(const Vec& a) { return dot(a, a); }
inline double norm(const Vec& a) { return std::sqrt(norm2(a)); }
inline double dist(const Vec& a, const Vec& b) { return norm(a - b); }

inline void require_same_dim(const Vec& a, const Vec& b) {
    if (a.dim != b.dim) throw DomainError("dimension mismatch between points");
}

// Open ball U(center, radius).
struct Ball {
    Vec center;
    double radius = 1.0;

    Ball() = default;
    Ball(Vec c, double r) : center(c), radius(r) {
        if (!(r > 0.0) || !std::isfinite(r)) throw DomainError("ball radius must be positive and finite");
    }
    int dim() const { return center.dim; }
    bool contains_open(const Vec& y) const { return dist(y, center) < radius; }
    bool contains_closed(const Vec& y) const { return dist(y, center) <= radius; }
};

// Axis-aligned box [lo, hi], treated as closed unless stated otherwise.
struct Box {
    Vec lo, hi;

    Box() = default;
    Box(Vec l, Vec h) : lo(l), hi(h) {
        require_same_dim(l, h);
        for (int i = 0; i < l.dim; ++i)
            if (!(l[i] < h[i])) throw DomainError("box requires lo < hi in every coordinate");
    }
    int dim() const { return lo.dim; }
    bool contains(const Vec& y) const {
        for (int i = 0; i < lo.dim; ++i)
            if (y[i] < lo[i] || y[i] > hi[i]) return false;
        return true;
    }
    bool contains_open(const Vec& y) const {
        for (int i = 0; i < lo.dim; ++i)
            if (y[i] <= lo[i] || y[i] >= hi[i]) return false;
        return true;
    }
    double volume() const {
        double v = 1.0;
        for (int i = 0; i < lo.dim; ++i) v *= hi[i] - lo[i];
        return v;
    }
    // Euclidean distance from y to the closed box (0 inside).
    double distance(const Vec& y) const {
        double s = 0.0;
        for (int i = 0; i < lo.dim; ++i) {
            double e = std::max({lo[i] - y[i], 0.0, y[i] - hi[i]});
            s += e * e;
        }
        return std::sqrt(s);
    }
    Vec farthest_corner(const Vec& y) const {
        Vec v(lo.dim);
        for (int i = 0; i < lo.dim; ++i)
            v[i] = (std::abs(y[i] - lo[i]) > std::abs(y[i] - hi[i])) ? lo[i] : hi[i];
        return v;
    }
};

// Parameter interval [lo, hi] along a ray, lo <= hi (hi may be +inf).
struct Interval {
    double lo = 0.0, hi = 0.0;
};

// Ray origin + s*dir (|dir| = 1) against the open ball: the parameter interval inside it.
// Empty optional-like result encoded as lo > hi.
inline Interval ray_ball(const Vec& origin, const Vec& dir, const Vec& center, double radius) {
    Vec oc = origin - center;
    double b = dot(oc, dir);
    double cc = norm2(oc) - radius * radius;
    double disc = b * b - cc;
    if (disc <= 0.0) return {1.0, 0.0};
    double sq = std::sqrt(disc);
    return {-b - sq, -b + sq};
}

inline Interval ray_box(const Vec& origin, const Vec& dir, const Box& box) {
    double t0 = -kInf, t1 = kInf;
    for (int i = 0; i < origin.dim; ++i) {
        if (dir[i] == 0.0) {
            if (origin[i] < box.lo[i] || origin[i] > box.hi[i]) return {1.0, 0.0};
            continue;
        }
        double a = (box.lo[i] - origin[i]) / dir[i];
        double b = (box.hi[i] - origin[i]) / dir[i];
        if (a > b) std::swap(a, b);
        t0 = std::max(t0, a);
        t1 = std::min(t1, b);
    }
    if (t0 >= t1) return {1.0, 0.0};
    return {t0, t1};
}

// Orthonormal frame whose first axis is a prescribed unit vector.
struct Frame {
    std::array<Vec, kMaxDim> e;
    int dim = 0;

    static Frame with_axis(const Vec& axis) {
        Frame f;
        f.dim = axis.dim;
        double n = norm(axis);
        Vec a = n > 0.0 ? axis * (1.0 / n) : Vec::axis(axis.dim, 0);
        f.e[0] = a;
        for (int k = 1; k < f.dim; ++k) {
            // Gram-Schmidt on the coordinate axis least aligned with what we have.
            int best = 0;
            double best_score = kInf;
            for (int j = 0; j < f.dim; ++j) {
                double score = 0.0;
                for (int m = 0; m < k; ++m) score += std::abs(f.e[m][j]);
                if (score < best_score) {
                    best_score = score;
                    best = j;
                }
            }
            Vec v = Vec::axis(f.dim, best);
            for (int m = 0; m < k; ++m) v -= f.e[m] * dot(v, f.e[m]);
            f.e[k] = v * (1.0 / norm(v));
        }
        return f;
    }
    static Frame standard(int d) { return with_axis(Vec::axis(d, 0)); }
};

// Surface area of the unit sphere S^{d-1}.
inline double sphere_area(int d) { return 2.0 * std::pow(kPi, 0.5 * d) / std::tgamma(0.5 * d); }
// Volume of the unit ball in R^d.
inline double ball_volume(int d) { return std::pow(kPi, 0.5 * d) / std::tgamma(0.5 * d + 1.0); }

}  // namespace harnack_lab
