#pragma once
// Regions E and data functions f living outside a ball, plus the domains walked by
// walk-on-spheres. Every region reports its exact parameter intervals along a ray, so
// quadrature never has to resolve an indicator jump by subdivision.

#include <algorithm>
#include <functional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "harnack_lab/geometry.hpp"

namespace harnack_lab {

// {r_in < |y - center| < r_out}; r_out may be +inf. Annulus{c, r, inf} is the full exterior of B(c, r).
struct Annulus {
    Vec center;
    double r_in = 0.0;
    double r_out = kInf;
};

// Intersection of open half-spaces {y : normal_k . y > offset_k}.
struct HalfSpaces {
    std::vector<Vec> normals;
    std::vector<double> offsets;

    static HalfSpaces single(const Vec& normal, double offset) { return {{normal}, {offset}}; }
};

// Union of closed boxes (an indicator grid).
struct BoxUnion {
    std::vector<Box> boxes;
};

using ExteriorRegion = std::variant<Annulus, HalfSpaces, BoxUnion>;

namespace detail {

inline void merge_intervals(std::vector<Interval>& v) {
    std::sort(v.begin(), v.end(), [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
    std::vector<Interval> out;
    for (const auto& iv : v) {
        if (!(iv.hi > iv.lo)) continue;
        if (!out.empty() && iv.lo <= out.back().hi)
            out.back().hi = std::max(out.back().hi, iv.hi);
        else
            out.push_back(iv);
    }
    v.swap(out);
}

}  // namespace detail

// Sorted disjoint parameter intervals {s : origin + s dir in E}, for unit `dir`.
inline std::vector<Interval> ray_intervals(const ExteriorRegion& E, const Vec& origin, const Vec& dir) {
    std::vector<Interval> out;
    if (const auto* a = std::get_if<Annulus>(&E)) {
        Interval outer{-kInf, kInf};
        if (std::isfinite(a->r_out)) outer = ray_ball(origin, dir, a->center, a->r_out);
        if (!(outer.hi > outer.lo)) return out;
        Interval hole{1.0, 0.0};
        if (a->r_in > 0.0) hole = ray_ball(origin, dir, a->center, a->r_in);
        if (!(hole.hi > hole.lo)) {
            out.push_back(outer);
        } else {
            out.push_back({outer.lo, std::min(outer.hi, hole.lo)});
            out.push_back({std::max(outer.lo, hole.hi), outer.hi});
        }
    } else if (const auto* h = std::get_if<HalfSpaces>(&E)) {
        double lo = -kInf, hi = kInf;
        for (std::size_t k = 0; k < h->normals.size(); ++k) {
            const double nd = dot(h->normals[k], dir);
            const double gap = h->offsets[k] - dot(h->normals[k], origin);
            if (nd > 0.0)
                lo = std::max(lo, gap / nd);
            else if (nd < 0.0)
                hi = std::min(hi, gap / nd);
            else if (!(gap < 0.0))
                return out;
        }
        out.push_back({lo, hi});
    } else {
        for (const auto& b : std::get<BoxUnion>(E).boxes) out.push_back(ray_box(origin, dir, b));
    }
    detail::merge_intervals(out);
    return out;
}

inline bool region_contains(const ExteriorRegion& E, const Vec& y) {
    if (const auto* a = std::get_if<Annulus>(&E)) {
        const double r = dist(y, a->center);
        return r > a->r_in && r < a->r_out;
    }
    if (const auto* h = std::get_if<HalfSpaces>(&E)) {
        for (std::size_t k = 0; k < h->normals.size(); ++k)
            if (!(dot(h->normals[k], y) > h->offsets[k])) return false;
        return true;
    }
    for (const auto& b : std::get<BoxUnion>(E).boxes)
        if (b.contains(y)) return true;
    return false;
}

// True when E meets the closed ball in a set of positive volume.
inline bool region_meets_ball(const ExteriorRegion& E, const Ball& b) {
    if (const auto* a = std::get_if<Annulus>(&E)) {
        const double D = dist(a->center, b.center);
        const double nearest = std::max(0.0, D - b.radius), farthest = D + b.radius;
        return nearest < a->r_out && farthest > a->r_in && !(D == 0.0 && b.radius <= a->r_in);
    }
    if (const auto* h = std::get_if<HalfSpaces>(&E)) {
        // Dykstra's algorithm projects the center onto the closed polyhedron.
        const std::size_t m = h->normals.size();
        Vec x = b.center;
        std::vector<Vec> inc(m, Vec::zero(b.dim()));
        for (int it = 0; it < 20000; ++it) {
            const Vec prev = x;
            for (std::size_t k = 0; k < m; ++k) {
                const Vec y = x + inc[k];
                Vec proj = y;
                const double gap = h->offsets[k] - dot(h->normals[k], y);
                if (gap > 0.0) proj = y + h->normals[k] * (gap / norm2(h->normals[k]));
                inc[k] = y - proj;
                x = proj;
            }
            if (dist(prev, x) < 1e-14 * (1.0 + b.radius)) break;
        }
        for (std::size_t k = 0; k < m; ++k)
            if (dot(h->normals[k], x) < h->offsets[k] - 1e-9 * (1.0 + b.radius)) return false;  // empty
        return dist(x, b.center) < b.radius * (1.0 - 1e-12);
    }
    for (const auto& box : std::get<BoxUnion>(E).boxes)
        if (box.distance(b.center) < b.radius) return true;
    return false;
}

// ---- exterior data f ----

struct ConstantData {
    double value = 1.0;
};
struct IndicatorData {
    ExteriorRegion region;
    double value = 1.0;
};
// amplitude * exp(-|y - center|^2 / (2 width^2))
struct GaussianBump {
    Vec center;
    double width = 1.0;
    double amplitude = 1.0;
};
// amplitude * |y - center|^exponent. Integrable against exit laws iff exponent < alpha; a
// negative exponent needs the center inside the closed ball so no singularity sits outside it.
struct RadialPower {
    Vec center;
    double amplitude = 1.0;
    double exponent = -1.0;
};
// Arbitrary callback with declared bounds; no breakpoint information.
struct CustomData {
    std::function<double(const Vec&)> f;
    double lower = -kInf;
    double upper = kInf;
    std::string label = "custom";
    double decay = 0.0;  // as in data_decay; negative for growth
};

using ExteriorData = std::variant<ConstantData, IndicatorData, GaussianBump, RadialPower, CustomData>;

inline double data_value(const ExteriorData& f, const Vec& y) {
    return std::visit(
        [&](const auto& g) -> double {
            using T = std::decay_t<decltype(g)>;
            if constexpr (std::is_same_v<T, ConstantData>) return g.value;
            else if constexpr (std::is_same_v<T, IndicatorData>) return region_contains(g.region, y) ? g.value : 0.0;
            else if constexpr (std::is_same_v<T, GaussianBump>)
                return g.amplitude * std::exp(-norm2(y - g.center) / (2.0 * g.width * g.width));
            else if constexpr (std::is_same_v<T, RadialPower>)
                return g.amplitude * std::pow(dist(y, g.center), g.exponent);
            else return g.f(y);
        },
        f);
}

// Parameters along origin + s dir where f is not smooth or has a narrow feature.
inline void data_breakpoints(const ExteriorData& f, const Vec& origin, const Vec& dir, std::vector<double>& out) {
    if (const auto* ind = std::get_if<IndicatorData>(&f)) {
        for (const auto& iv : ray_intervals(ind->region, origin, dir)) {
            if (std::isfinite(iv.lo)) out.push_back(iv.lo);
            if (std::isfinite(iv.hi)) out.push_back(iv.hi);
        }
    } else if (const auto* gb = std::get_if<GaussianBump>(&f)) {
        const double s0 = dot(gb->center - origin, dir);
        for (double k : {-4.0, -1.5, 0.0, 1.5, 4.0}) out.push_back(s0 + k * gb->width);
    }
}

// Directions from `origin` across which the ray integral of f has a derivative singularity:
// rays parallel to a half-space face, tangent to an annulus circle, or through a polygon or box
// corner. Only used for planar angular integration.
inline void data_angular_kinks(const ExteriorData& f, const Vec& origin, std::vector<Vec>& out) {
    if (origin.dim != 2) return;
    auto perp = [](const Vec& v) { return Vec{-v[1], v[0]}; };
    auto toward = [&](const Vec& y) {
        const Vec v = y - origin;
        if (norm2(v) > 0.0) out.push_back(v * (1.0 / norm(v)));
    };
    // A bump is smooth but narrow seen from afar; a panel edge at its direction resolves it.
    if (const auto* gb = std::get_if<GaussianBump>(&f)) toward(gb->center);
    const auto* ind = std::get_if<IndicatorData>(&f);
    if (!ind) return;
    if (const auto* a = std::get_if<Annulus>(&ind->region)) {
        const Vec v = a->center - origin;
        const double D = norm(v);
        for (double rho : {a->r_in, a->r_out}) {
            if (!(rho > 0.0) || !std::isfinite(rho) || !(D > rho)) continue;
            const double ang = std::asin(rho / D);
            const Vec u = v * (1.0 / D), w = perp(u);
            out.push_back(u * std::cos(ang) + w * std::sin(ang));
            out.push_back(u * std::cos(ang) - w * std::sin(ang));
        }
    } else if (const auto* h = std::get_if<HalfSpaces>(&ind->region)) {
        const std::size_t m = h->normals.size();
        for (std::size_t k = 0; k < m; ++k) {
            const Vec t = perp(h->normals[k]) * (1.0 / norm(h->normals[k]));
            out.push_back(t);
            out.push_back(t * -1.0);
            for (std::size_t l = k + 1; l < m; ++l) {
                const Vec& n1 = h->normals[k];
                const Vec& n2 = h->normals[l];
                const double det = n1[0] * n2[1] - n1[1] * n2[0];
                if (std::abs(det) < 1e-14) continue;
                const double b1 = h->offsets[k], b2 = h->offsets[l];
                toward(Vec{(b1 * n2[1] - b2 * n1[1]) / det, (n1[0] * b2 - n2[0] * b1) / det});
            }
        }
    } else {
        for (const auto& b : std::get<BoxUnion>(ind->region).boxes)
            for (int c = 0; c < 4; ++c) toward(Vec{c & 1 ? b.hi[0] : b.lo[0], c & 2 ? b.hi[1] : b.lo[1]});
    }
}

// Decay exponent beta with |f(y)| = O(|y|^{-beta}) at infinity (negative for growth).
inline double data_decay(const ExteriorData& f) {
    if (const auto* rp = std::get_if<RadialPower>(&f)) return -rp->exponent;
    if (std::holds_alternative<GaussianBump>(f)) return 4.0;
    if (const auto* cd = std::get_if<CustomData>(&f)) return cd->decay;
    return 0.0;
}

// Closed interval containing the range of f outside the ball b.
inline std::pair<double, double> data_bounds(const ExteriorData& f, const Ball& b) {
    return std::visit(
        [&](const auto& g) -> std::pair<double, double> {
            using T = std::decay_t<decltype(g)>;
            if constexpr (std::is_same_v<T, ConstantData>) return {g.value, g.value};
            else if constexpr (std::is_same_v<T, IndicatorData>) return {std::min(0.0, g.value), std::max(0.0, g.value)};
            else if constexpr (std::is_same_v<T, GaussianBump>)
                return {std::min(0.0, g.amplitude), std::max(0.0, g.amplitude)};
            else if constexpr (std::is_same_v<T, RadialPower>) {
                if (g.exponent > 0.0) return {std::min(0.0, g.amplitude * kInf), std::max(0.0, g.amplitude * kInf)};
                const double nearest = std::max(b.radius - dist(g.center, b.center), 0.0);
                const double top = nearest > 0.0 ? g.amplitude * std::pow(nearest, g.exponent) : g.amplitude * kInf;
                return {std::min(0.0, top), std::max(0.0, top)};
            } else return {g.lower, g.upper};
        },
        f);
}

inline void validate_data(const ExteriorData& f, const Ball& b, double alpha) {
    if (const auto* rp = std::get_if<RadialPower>(&f)) {
        if (!(rp->exponent < alpha))
            throw DomainError("radial data with exponent >= alpha is not integrable against exit laws");
        if (rp->exponent < 0.0 && !b.contains_closed(rp->center))
            throw DomainError("radial data with a negative exponent needs its center inside the closed ball");
    }
    if (const auto* gb = std::get_if<GaussianBump>(&f))
        if (!(gb->width > 0.0)) throw DomainError("gaussian bump width must be positive");
    if (const auto* cd = std::get_if<CustomData>(&f))
        if (!cd->f) throw DomainError("custom data without a callback");
}

// ---- domains for walk-on-spheres ----

// Open ball minus finitely many closed balls (an annulus when the single obstacle is concentric).
struct RegionSpec {
    Ball outer;
    std::vector<Ball> obstacles;

    static RegionSpec ball(const Ball& b) { return {b, {}}; }
    static RegionSpec ball_minus(const Ball& b, std::vector<Ball> obs) {
        RegionSpec r{b, std::move(obs)};
        r.validate();
        return r;
    }
    static RegionSpec annulus(const Vec& center, double r_inner, double r_outer) {
        if (!(r_inner < r_outer)) throw DomainError("annulus needs r_inner < r_outer");
        return ball_minus(Ball(center, r_outer), {Ball(center, r_inner)});
    }

    void validate() const {
        for (const auto& o : obstacles)
            if (!(dist(o.center, outer.center) + o.radius < outer.radius))
                throw DomainError("obstacle closure must lie inside the open ambient ball");
    }
    int dim() const { return outer.dim(); }
    bool contains(const Vec& y) const {
        if (!outer.contains_open(y)) return false;
        for (const auto& o : obstacles)
            if (o.contains_closed(y)) return false;
        return true;
    }
    bool in_obstacle(const Vec& y) const {
        for (const auto& o : obstacles)
            if (o.contains_closed(y)) return true;
        return false;
    }
    double distance_to_complement(const Vec& y) const {
        double d = outer.radius - dist(y, outer.center);
        for (const auto& o : obstacles) d = std::min(d, dist(y, o.center) - o.radius);
        return d;
    }
};

}  // namespace harnack_lab
