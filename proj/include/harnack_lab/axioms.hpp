#pragma once
// (M0)/(M1) on randomized balls: unit exit mass, the composition identity for nested balls and the
// mean-value property of harmonic extensions.

#include <cmath>
#include <cstdint>
#include <string>

#include "harnack_lab/exit_measures.hpp"
#include "harnack_lab/report.hpp"

namespace harnack_lab {

namespace detail {

inline Vec point_in_ball(Rng& rng, const Vec& c, double r) {
    return c + rng.direction(c.dim) * (r * std::pow(rng.uniform(), 1.0 / c.dim));
}

}  // namespace detail

// Rows: kind (0 mass, 1 composition, 2 mean value), index, residual.
inline ConditionReport verify_axioms(const StableParams& p, int configs, std::uint64_t seed, double tolerance = 1e-4,
                                     const QuadratureSpec& q = {}) {
    if (configs < 1) throw DomainError("verify_axioms: need at least one configuration");
    ConditionReport rep;
    rep.name = "axioms";
    rep.threshold = tolerance;
    rep.columns = {"kind", "index", "residual"};
    const int d = p.d;
    Rng rng(RngStream{seed, 0});
    double worst[3] = {0.0, 0.0, 0.0};
    auto record = [&](int kind, int k, double res) {
        rep.rows.push_back({static_cast<double>(kind), static_cast<double>(k), res});
        if (!(res <= worst[kind])) worst[kind] = res;  // NaN propagates
        ++rep.sample_count;
    };
    for (int k = 0; k < configs; ++k) {
        const Ball b(detail::point_in_ball(rng, Vec::zero(d), 1.0), 0.5 + rng.uniform());
        const Vec x = detail::point_in_ball(rng, b.center, 0.95 * b.radius);
        record(0, k, std::abs(harmonic_extend(p, b, ConstantData{1.0}, x, q) - 1.0));
    }
    for (int k = 0; k < configs; ++k) {
        const Ball U(detail::point_in_ball(rng, Vec::zero(d), 1.0), 0.5 + rng.uniform());
        const double rv = U.radius * (0.2 + 0.6 * rng.uniform());
        // Half the pairs are concentric.
        const Vec vc = k % 2 == 0 ? U.center : detail::point_in_ball(rng, U.center, 0.95 * (U.radius - rv));
        const Ball V(vc, rv);
        const Vec x = detail::point_in_ball(rng, V.center, 0.9 * rv);
        const Vec n = rng.direction(d);
        const ExteriorRegion E = k % 3 == 0 ? ExteriorRegion{Annulus{U.center, U.radius * 1.5, kInf}}
                                            : ExteriorRegion{HalfSpaces::single(n, dot(n, U.center) + U.radius * 1.2)};
        record(1, k, composition_residual(p, V, U, x, E, q));
    }
    for (int k = 0; k < configs; ++k) {
        const Ball U(Vec::zero(d), 1.0);
        const Ball V(detail::point_in_ball(rng, Vec::zero(d), 0.3), 0.3 + 0.35 * rng.uniform());
        const Vec x = detail::point_in_ball(rng, V.center, 0.8 * V.radius);
        const ExteriorData f = GaussianBump{rng.direction(d) * 1.6, 0.3, 2.0};
        record(2, k, std::abs(compose(p, V, U, x, f, q) - harmonic_extend(p, U, f, x, q)));
    }
    rep.set("mass_max_residual", worst[0]);
    rep.set("composition_max_residual", worst[1]);
    rep.set("mean_value_max_residual", worst[2]);
    rep.constant = std::max({worst[0], worst[1], worst[2]});
    rep.pass = rep.constant <= tolerance;
    for (int kind = 0; kind < 3; ++kind)
        if (!(worst[kind] <= tolerance))
            rep.witnesses.push_back(std::string(kind == 0 ? "mass" : kind == 1 ? "composition" : "mean value") +
                                    " residual " + fmt(worst[kind]));
    return rep;
}

}  // namespace harnack_lab
