#pragma once
// Adaptive Gauss-Kronrod quadrature, graded radial segments and sphere integrals.
//
// Every exterior or interior integral in the library is written in polar coordinates
// around a chosen origin: an angular integral over S^{d-1} of a radial integral along
// rays. Radial pieces carry optional algebraic grading at their ends (power maps that
// absorb endpoint singularities such as (s - r)^{-alpha/2}) and an optional power-law
// tail map for unbounded pieces.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <queue>
#include <vector>

#include "harnack_lab/geometry.hpp"

namespace harnack_lab {

struct QuadratureSpec {
    double rel_tol = 1e-6;
    double abs_tol = 1e-15;
    int max_subdivisions = 200;

    // Tolerance handed to an integral nested inside another one.
    QuadratureSpec inner(double factor = 0.1) const {
        QuadratureSpec q = *this;
        q.rel_tol = rel_tol * factor;
        q.abs_tol = abs_tol * factor;
        return q;
    }
};

struct QuadResult {
    double value = 0.0;
    double error = 0.0;
    long evaluations = 0;
    bool converged = true;
};

namespace detail {

inline constexpr double kXgk[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr double kWgk[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr double kWg[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
    double a, b, value, error;
    bool operator<(const Panel& o) const { return error < o.error; }
};

// One 15-point Kronrod panel with the QUADPACK error heuristic.
template <class F>
Panel gk15(F& f, double a, double b) {
    const double center = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    double fv1[7], fv2[7];
    const double fc = f(center);
    double resg = fc * kWg[3];
    double resk = fc * kWgk[7];
    double resabs = std::abs(resk);
    for (int j = 0; j < 3; ++j) {
        const int jtw = 2 * j + 1;
        const double dx = half * kXgk[jtw];
        const double f1 = f(center - dx), f2 = f(center + dx);
        fv1[jtw] = f1;
        fv2[jtw] = f2;
        resg += kWg[j] * (f1 + f2);
        resk += kWgk[jtw] * (f1 + f2);
        resabs += kWgk[jtw] * (std::abs(f1) + std::abs(f2));
    }
    for (int j = 0; j < 4; ++j) {
        const int jtwm1 = 2 * j;
        const double dx = half * kXgk[jtwm1];
        const double f1 = f(center - dx), f2 = f(center + dx);
        fv1[jtwm1] = f1;
        fv2[jtwm1] = f2;
        resk += kWgk[jtwm1] * (f1 + f2);
        resabs += kWgk[jtwm1] * (std::abs(f1) + std::abs(f2));
    }
    const double reskh = resk * 0.5;
    double resasc = kWgk[7] * std::abs(fc - reskh);
    for (int j = 0; j < 7; ++j)
        resasc += kWgk[j] * (std::abs(fv1[j] - reskh) + std::abs(fv2[j] - reskh));
    const double ah = std::abs(half);
    const double result = resk * half;
    resasc *= ah;
    resabs *= ah;
    double err = std::abs((resk - resg) * half);
    if (resasc != 0.0 && err != 0.0) err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
    const double uflow = std::numeric_limits<double>::min();
    const double epmach = std::numeric_limits<double>::epsilon();
    if (resabs > uflow / (50.0 * epmach)) err = std::max(epmach * 50.0 * resabs, err);
    if (!std::isfinite(result)) err = kInf;
    return {a, b, result, err};
}

}  // namespace detail

// Globally adaptive Gauss-Kronrod (7/15) on a finite interval.
template <class F>
QuadResult integrate(F&& f, double a, double b, const QuadratureSpec& q = {}) {
    QuadResult out;
    if (a == b) return out;
    long evals = 0;
    auto counted = [&](double x) {
        ++evals;
        return f(x);
    };
    std::priority_queue<detail::Panel> heap;
    detail::Panel first = detail::gk15(counted, a, b);
    double total = first.value, total_err = first.error;
    heap.push(first);
    int splits = 0;
    while (total_err > std::max(q.abs_tol, q.rel_tol * std::abs(total))) {
        if (splits >= q.max_subdivisions) {
            out.converged = false;
            break;
        }
        detail::Panel worst = heap.top();
        const double mid = 0.5 * (worst.a + worst.b);
        if (!(mid > std::min(worst.a, worst.b) && mid < std::max(worst.a, worst.b))) {
            out.converged = false;
            break;
        }
        heap.pop();
        detail::Panel left = detail::gk15(counted, worst.a, mid);
        detail::Panel right = detail::gk15(counted, mid, worst.b);
        total += left.value + right.value - worst.value;
        total_err += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        ++splits;
    }
    // Re-sum to shed accumulated cancellation from the running updates.
    total = 0.0;
    total_err = 0.0;
    while (!heap.empty()) {
        total += heap.top().value;
        total_err += heap.top().error;
        heap.pop();
    }
    out.value = total;
    out.error = total_err;
    out.evaluations = evals;
    return out;
}

// A piece of a ray parameter range with endpoint treatment.
//   lo_grade / hi_grade > 1 : power map s = end +- len * t^grade clustering nodes at that end
//   hi = +inf               : tail map s = lo * u^{-1/tail_decay} for integrands ~ s^{-1-tail_decay}
struct RadialPiece {
    double lo = 0.0;
    double hi = 0.0;
    double lo_grade = 1.0;
    double hi_grade = 1.0;
    double tail_decay = 1.0;
    double tail_split = 0.0;  // where an unbounded piece switches to the tail map (0: automatic)
};

namespace detail {

template <class G>
double graded_finite(G& g, double lo, double hi, double lo_grade, double hi_grade, const QuadratureSpec& q) {
    if (!(hi > lo)) return 0.0;
    if (lo_grade > 1.0 && hi_grade > 1.0) {
        const double mid = 0.5 * (lo + hi);
        return graded_finite(g, lo, mid, lo_grade, 1.0, q) + graded_finite(g, mid, hi, 1.0, hi_grade, q);
    }
    const double len = hi - lo;
    if (lo_grade > 1.0 || (lo_grade > 0.0 && lo_grade < 1.0)) {
        const double p = lo_grade;
        auto h = [&](double t) {
            if (t <= 0.0) return 0.0;
            return g(lo + len * std::pow(t, p)) * len * p * std::pow(t, p - 1.0);
        };
        return integrate(h, 0.0, 1.0, q).value;
    }
    if (hi_grade > 1.0 || (hi_grade > 0.0 && hi_grade < 1.0)) {
        const double p = hi_grade;
        auto h = [&](double t) {
            if (t <= 0.0) return 0.0;
            return g(hi - len * std::pow(t, p)) * len * p * std::pow(t, p - 1.0);
        };
        return integrate(h, 0.0, 1.0, q).value;
    }
    return integrate(g, lo, hi, q).value;
}

}  // namespace detail

// Integrates g over one radial piece.
template <class G>
double integrate_piece(G&& g, const RadialPiece& piece, const QuadratureSpec& q) {
    if (!(piece.hi > piece.lo)) return 0.0;
    if (std::isinf(piece.hi)) {
        double split = piece.lo;
        double head = 0.0;
        if (piece.tail_split > piece.lo) {
            split = piece.tail_split;
            head = detail::graded_finite(g, piece.lo, split, piece.lo_grade, 1.0, q);
        } else if (piece.lo_grade != 1.0 || !(piece.lo > 0.0)) {
            split = piece.lo > 0.0 ? 2.0 * piece.lo : piece.lo + 1.0;
            head = detail::graded_finite(g, piece.lo, split, piece.lo_grade, 1.0, q);
        }
        const double tau = piece.tail_decay;
        auto tail = [&](double u) {
            if (u <= 0.0) return 0.0;
            const double s = split * std::pow(u, -1.0 / tau);
            return g(s) * (split / tau) * std::pow(u, -1.0 / tau - 1.0);
        };
        return head + integrate(tail, 0.0, 1.0, q).value;
    }
    return detail::graded_finite(g, piece.lo, piece.hi, piece.lo_grade, piece.hi_grade, q);
}

// Integral of f(theta) over S^{d-1} with respect to surface measure.
// With `axisymmetric`, f is assumed invariant under rotations fixing frame.e[0].
// In d = 2, `kinks` lists directions where f has a derivative singularity; panels end there
// with a graded map.
template <class F>
double integrate_sphere(const Frame& frame, F&& f, const QuadratureSpec& q, bool axisymmetric = false,
                        const std::vector<Vec>& kinks = {}) {
    const int d = frame.dim;
    if (d == 1) return f(frame.e[0]) + f(frame.e[0] * -1.0);
    if (d == 2) {
        auto ang = [&](double phi) { return f(frame.e[0] * std::cos(phi) + frame.e[1] * std::sin(phi)); };
        const double top = axisymmetric ? kPi : 2.0 * kPi;
        std::vector<double> cuts;
        for (const auto& k : kinks) {
            double phi = std::atan2(dot(k, frame.e[1]), dot(k, frame.e[0]));
            if (phi < 0.0) phi += 2.0 * kPi;
            if (phi > 1e-9 && phi < top - 1e-9 && std::abs(phi - kPi) > 1e-9) cuts.push_back(phi);
        }
        std::sort(cuts.begin(), cuts.end());
        std::vector<std::pair<double, double>> knots{{0.0, 1.0}, {kPi, 1.0}};
        if (!axisymmetric) knots.push_back({2.0 * kPi, 1.0});
        for (double c : cuts) knots.push_back({c, 2.0});
        std::sort(knots.begin(), knots.end());
        double total = 0.0;
        for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
            if (!(knots[i + 1].first - knots[i].first > 1e-12)) continue;
            total += detail::graded_finite(ang, knots[i].first, knots[i + 1].first, knots[i].second,
                                           knots[i + 1].second, q);
        }
        return axisymmetric ? 2.0 * total : total;
    }
    // d == 3: theta = mu e0 + sqrt(1 - mu^2) (cos psi e1 + sin psi e2), measure dmu dpsi.
    const QuadratureSpec qi = q.inner(0.3);
    auto ring = [&](double mu) {
        const double s = std::sqrt(std::max(0.0, 1.0 - mu * mu));
        if (axisymmetric) return 2.0 * kPi * f(frame.e[0] * mu + frame.e[1] * s);
        auto az = [&](double psi) {
            return f(frame.e[0] * mu + (frame.e[1] * std::cos(psi) + frame.e[2] * std::sin(psi)) * s);
        };
        return integrate(az, 0.0, kPi, qi).value + integrate(az, kPi, 2.0 * kPi, qi).value;
    };
    return integrate(ring, -1.0, 0.0, q).value + integrate(ring, 0.0, 1.0, q).value;
}

}  // namespace harnack_lab
