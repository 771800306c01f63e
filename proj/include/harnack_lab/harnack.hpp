#pragma once
// Harnack constant pipeline (theta, a, beta, j0, k0, K) in exact rational arithmetic, the radius
// chain, and empirical Harnack / Hoelder tests on harmonic extensions.

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/cpp_int.hpp>

#include "harnack_lab/capacity.hpp"
#include "harnack_lab/conditions.hpp"
#include "harnack_lab/exit_measures.hpp"
#include "harnack_lab/report.hpp"

namespace harnack_lab {

using Rational = boost::multiprecision::cpp_rational;

// The exact value of a finite double.
inline Rational exact_rational(double v) {
    if (!std::isfinite(v)) throw DomainError("exact_rational: value must be finite");
    int e = 0;
    const double m = std::frexp(v, &e);
    const auto mant = static_cast<long long>(std::ldexp(m, 53));
    using boost::multiprecision::cpp_int;
    const Rational r{cpp_int{mant}};
    e -= 53;
    const Rational two_e{cpp_int{1} << std::abs(e)};
    return e >= 0 ? Rational(r * two_e) : Rational(r / two_e);
}

// Nearest double (Boost's conversion); the only rounding in the pipeline.
inline double to_double(const Rational& r) { return r.convert_to<double>(); }

inline std::string to_string(const Rational& r) {
    std::string s = numerator(r).str();
    if (denominator(r) != 1) s += "/" + denominator(r).str();
    return s;
}

inline Rational rpow(Rational b, int n) {
    Rational out = 1;
    for (; n > 0; n >>= 1, b *= b)
        if (n & 1) out *= b;
    return out;
}

struct HarnackInputs {
    double theta1 = 0.25;  // from (SC)/(KS)
    double theta2 = 0.25;  // from (HJ)
    double a1 = 0.25;
    double eta = 0.25;
    double c = 1.0;
    double c0 = 1.0;
    double cJ = 1.0;

    void validate() const {
        auto open_third = [](double v, const char* name) {
            if (!(v > 0.0 && v < 1.0 / 3.0)) throw DomainError(std::string("harnack inputs: ") + name + " must lie in (0, 1/3)");
        };
        open_third(theta1, "theta1");
        open_third(theta2, "theta2");
        open_third(a1, "a1");
        open_third(eta, "eta");
        auto at_least_one = [](double v, const char* name) {
            if (!(v >= 1.0) || !std::isfinite(v)) throw DomainError(std::string("harnack inputs: ") + name + " must be >= 1");
        };
        at_least_one(c, "c");
        at_least_one(c0, "c0");
        at_least_one(cJ, "cJ");
    }
};

struct HarnackConstants {
    Rational theta, a, beta, beta_tilde, K;
    int l = 0;
    int j0 = 0;
    int k0 = 0;
};

namespace detail {

using Float100 = boost::multiprecision::cpp_bin_float_100;

inline Float100 to_float100(const Rational& r) {
    return Float100(numerator(r)) / Float100(denominator(r));
}

// Sign of a (1 + beta)^j - 1: logs in 100 digits, exact powers when that is too close to call.
inline int growth_sign(const Rational& a, const Rational& one_plus_beta, int j) {
    const Float100 v = j * log(to_float100(one_plus_beta)) + log(to_float100(a));
    if (abs(v) > Float100(1e-80)) return v > 0 ? 1 : -1;
    const Rational w = a * rpow(one_plus_beta, j);
    return w > 1 ? 1 : (w < 1 ? -1 : 0);
}

}  // namespace detail

inline HarnackConstants derive_constants(const HarnackInputs& in) {
    in.validate();
    const Rational th1 = exact_rational(in.theta1), th2 = exact_rational(in.theta2), a1 = exact_rational(in.a1);
    const Rational eta = exact_rational(in.eta), c = exact_rational(in.c), c0 = exact_rational(in.c0);
    const Rational cJ = exact_rational(in.cJ);
    HarnackConstants hc;
    hc.theta = (th1 < th2 ? th1 : th2) / 4;
    hc.l = 1;
    for (Rational t = th1; t > hc.theta; t *= th1) ++hc.l;
    hc.a = rpow(a1, hc.l);
    hc.beta = eta * hc.a / (4 * c * c0 * c0);
    hc.beta_tilde = hc.beta / cJ;
    const Rational opb = 1 + hc.beta;
    // Smallest j with a (1 + beta)^j > 1: start from the floating estimate and step to the edge.
    const detail::Float100 est = -log(detail::to_float100(hc.a)) / log(detail::to_float100(opb));
    int j = std::max(1, static_cast<int>(est.convert_to<double>()) - 1);
    while (j > 1 && detail::growth_sign(hc.a, opb, j - 1) > 0) --j;
    while (detail::growth_sign(hc.a, opb, j) <= 0) ++j;
    hc.j0 = j;
    const Rational rhs = (1 - hc.theta) / hc.j0;
    hc.k0 = 1;
    for (Rational t = 1; !(t < rhs); t *= hc.theta) ++hc.k0;
    hc.K = 2 * c * c0 * c0 * opb / (eta * hc.beta_tilde * rpow(hc.a, hc.k0 + 2));
    return hc;
}

struct RadiusChain {
    double r0 = 0.0;
    double q = 0.0;
    std::vector<double> radii;  // r_0 .. r_N
    double partial_sum = 0.0;   // r_1 + ... + r_N
    double tail = 0.0;          // sum over n > N, closed form
    double total = 0.0;
    double bound = 0.0;         // theta R
    double margin = 0.0;
    double m0_residual = 0.0;   // max |m0(r_n)(1 + beta)^n / m0(r_0) - 1|
};

inline RadiusChain radius_chain(const HarnackConstants& hc, double m0_exponent, double R, int n_terms = 100) {
    if (!(R > 0.0)) throw DomainError("radius_chain: R must be positive");
    if (!(m0_exponent > 0.0)) throw DomainError("radius_chain: m0 exponent must be positive");
    if (n_terms < 1) throw DomainError("radius_chain: need at least one term");
    const double theta = to_double(hc.theta), beta = to_double(hc.beta);
    RadiusChain ch;
    ch.r0 = std::pow(theta, hc.k0) * R;
    ch.q = std::pow(1.0 + beta, -1.0 / m0_exponent);
    for (int n = 0; n <= n_terms; ++n) {
        const double r = ch.r0 * std::pow(ch.q, n);
        ch.radii.push_back(r);
        if (n > 0) ch.partial_sum += r;
        const double inv = std::pow(r, m0_exponent) * std::pow(1.0 + beta, n) / std::pow(ch.r0, m0_exponent);
        ch.m0_residual = std::max(ch.m0_residual, std::abs(inv - 1.0));
    }
    // -expm1(log q) keeps 1 - q accurate when beta is tiny.
    ch.tail = ch.radii.back() * ch.q / -std::expm1(std::log(ch.q));
    ch.total = ch.partial_sum + ch.tail;
    ch.bound = theta * R;
    ch.margin = ch.bound - ch.total;
    if (!(ch.total < ch.bound)) throw ContractViolation("radius_chain: chain sum reaches theta R");
    return ch;
}

// ---- pipeline mode: inputs measured from the process ----

struct PipelineOptions {
    double c1 = 1.0;
    double theta2 = 0.25;
    double cap_h_fraction = 1.0 / 8.0;  // LP grid relative to the unit ball
};

// (SC)/(KS) from capacity of balls: c_D, c2 from the LP bracket, eta, theta1 = theta_M, a1 = c_D^{-k}
// with 2^{-k} <= theta1; (HJ) with theta2 and c_J from the jump kernel comparison.
inline std::pair<HarnackInputs, ConditionReport> pipeline_inputs(const StableParams& p, const PipelineOptions& opt = {}) {
    p.require_transient("pipeline_inputs");
    ConditionReport rep;
    rep.name = "pipeline_inputs";
    const double c_D = doubling_constant(p);
    const CapacityBracket cap = capacity_lp(p, CompactSet::ball(Ball(Vec::zero(p.d), 1.0)), opt.cap_h_fraction);
    const double c2 = c2_from_capacity(p, 1.0, cap.lower);
    const double c = 1.0;
    const double eta = eta_from_constants(c_D, c, opt.c1, c2);
    const double M = std::max(2.0 * c_D * c_D * c * c * opt.c1 * opt.c1, 3.0 * c * c2);
    const double theta1 = theta_for_factor(p, M);
    int k = 0;
    while (std::ldexp(1.0, -k) > theta1) ++k;
    HarnackInputs in;
    in.theta1 = theta1;
    in.theta2 = opt.theta2;
    in.a1 = std::pow(c_D, -k);
    in.eta = eta;
    in.c = c;
    // (T): cap U(x, r) = cap U(0, 1) r^{d - alpha}, bracketed by the LP.
    in.c0 = std::max({1.0, cap.upper, 1.0 / cap.lower});
    in.cJ = std::pow(1.0 + 2.0 * opt.theta2, p.d + p.alpha);
    for (auto [key, v] : std::vector<std::pair<std::string, double>>{
             {"c_D", c_D}, {"c2", c2}, {"c1", opt.c1}, {"M", M}, {"k", k}, {"cap_lower", cap.lower},
             {"cap_upper", cap.upper}, {"theta1", in.theta1}, {"theta2", in.theta2}, {"a1", in.a1},
             {"eta", in.eta}, {"c", in.c}, {"c0", in.c0}, {"cJ", in.cJ}})
        rep.set(key, v);
    rep.constant = eta;
    try {
        in.validate();
        rep.pass = true;
    } catch (const DomainError& e) {
        rep.flags.push_back(e.what());
    }
    return {in, rep};
}

// ---- empirical Harnack ratio ----

// Cartesian grid points strictly inside the ball, plus its center.
inline std::vector<Vec> ball_grid(const Ball& b, int res) {
    if (res < 2) throw DomainError("ball_grid: resolution must be >= 2");
    const int d = b.dim();
    std::vector<Vec> out{b.center};
    const double shrink = 1.0 - 1e-9;
    int idx[kMaxDim] = {0, 0, 0};
    const int total = static_cast<int>(std::pow(res, d));
    for (int n = 0; n < total; ++n) {
        int m = n;
        Vec v(d);
        for (int i = 0; i < d; ++i) {
            idx[i] = m % res;
            m /= res;
            v[i] = -1.0 + 2.0 * idx[i] / (res - 1);
        }
        if (norm2(v) <= 1.0 && norm2(v) > 0.0) out.push_back(b.center + v * (b.radius * shrink));
    }
    return out;
}

struct NamedData {
    std::string label;
    ExteriorData f;
};

// Six nonnegative bounded data sets placed relative to U(x0, R); they scale with R.
inline std::vector<NamedData> harnack_family(int d, const Vec& x0, double R) {
    const Vec e = Vec::axis(d, 0, 1.0);
    std::vector<NamedData> fam;
    fam.push_back({"constant", ConstantData{1.0}});
    fam.push_back({"far_halfspace", IndicatorData{HalfSpaces::single(e, dot(e, x0) + 3.0 * R), 1.0}});
    fam.push_back({"annulus", IndicatorData{Annulus{x0, 1.5 * R, 2.5 * R}, 1.0}});
    Vec gc = x0 + e * (2.0 * R);
    if (d >= 2) gc = gc + Vec::axis(d, 1, R);
    fam.push_back({"gaussian", GaussianBump{gc, 0.5 * R, 1.0}});
    Vec lo = x0 - e * (3.0 * R), hi = x0 - e * (2.0 * R);
    for (int i = 1; i < d; ++i) {
        lo[i] -= 0.5 * R;
        hi[i] += 0.5 * R;
    }
    fam.push_back({"box", IndicatorData{BoxUnion{{Box(lo, hi)}}, 1.0}});
    fam.push_back({"radial_decay", RadialPower{x0, R, -1.0}});
    return fam;
}

struct HarnackReport {
    double theta = 0.0;
    double K = 0.0;
    double max_ratio = 0.0;
    bool pass = false;
    bool violation = false;
    std::vector<std::string> labels;
    std::vector<double> sup, inf, ratio;
    long evaluations = 0;
};

inline HarnackReport harnack_empirical(const StableParams& p, const Vec& x0, double R, double theta, double K,
                                       const std::vector<NamedData>& family, int grid_res = 7,
                                       const QuadratureSpec& q = {}) {
    require_dim(p, x0);
    if (!(R > 0.0) || !(theta > 0.0 && theta < 1.0)) throw DomainError("harnack_empirical: bad R or theta");
    const Ball U(x0, R);
    const auto grid = ball_grid(Ball(x0, theta * R), grid_res);
    HarnackReport rep;
    rep.theta = theta;
    rep.K = K;
    for (const auto& nd : family) {
        double hi = -kInf, lo = kInf;
        for (const auto& y : grid) {
            const double h = harmonic_extend(p, U, nd.f, y, q);
            hi = std::max(hi, h);
            lo = std::min(lo, h);
            ++rep.evaluations;
        }
        double r = hi / lo;
        if (!(lo > 0.0)) {
            r = kInf;
            rep.violation = true;
        }
        rep.labels.push_back(nd.label);
        rep.sup.push_back(hi);
        rep.inf.push_back(lo);
        rep.ratio.push_back(r);
        rep.max_ratio = std::max(rep.max_ratio, r);
    }
    rep.pass = !rep.violation && rep.max_ratio <= K;
    return rep;
}

// ---- Hoelder modulus ----

// Indicator data with 0 <= f <= 1 for the modulus fit.
inline std::vector<NamedData> holder_family(int d, const Vec& x0, double R) {
    const Vec e = Vec::axis(d, 0, 1.0);
    std::vector<NamedData> fam;
    fam.push_back({"near_halfspace", IndicatorData{HalfSpaces::single(e, dot(e, x0) + 1.2 * R), 1.0}});
    fam.push_back({"far_halfspace", IndicatorData{HalfSpaces::single(e * -1.0, -dot(e, x0) + 3.0 * R), 1.0}});
    Vec lo = x0 + e * (1.5 * R), hi = x0 + e * (2.0 * R);
    for (int i = 1; i < d; ++i) {
        lo[i] = x0[i] + 0.2 * R;
        hi[i] = x0[i] + 1.2 * R;
    }
    fam.push_back({"box", IndicatorData{BoxUnion{{Box(lo, hi)}}, 1.0}});
    return fam;
}

struct HolderReport {
    std::vector<double> delta;   // delta / R
    std::vector<double> M;       // max |h(y) - h(x0)| at |y - x0| = delta
    double beta_hat = std::numeric_limits<double>::quiet_NaN();
    double C_hat = std::numeric_limits<double>::quiet_NaN();
    double worst_bound_ratio = 0.0;  // max M / (C_hat (delta/R)^beta_hat)
    bool constant_data = false;
    bool pass = false;
};

inline HolderReport holder_fit(const StableParams& p, const Vec& x0, double R, const std::vector<NamedData>& family,
                               std::vector<double> delta_fracs = {}, const QuadratureSpec& q = {}) {
    require_dim(p, x0);
    if (!(R > 0.0)) throw DomainError("holder_fit: R must be positive");
    if (delta_fracs.empty())
        for (int i = 0; i < 8; ++i) delta_fracs.push_back(0.25 * std::pow(100.0, -i / 7.0));
    for (double f : delta_fracs)
        if (!(f > 0.0 && f <= 0.25)) throw DomainError("holder_fit: delta must lie in (0, R/4]");
    for (const auto& nd : family) {
        const auto b = data_bounds(nd.f, Ball(x0, R));
        if (b.first < 0.0 || b.second > 1.0) throw DomainError("holder_fit: data must satisfy 0 <= f <= 1");
    }
    std::sort(delta_fracs.begin(), delta_fracs.end());
    const Ball U(x0, R);
    const auto dirs = grid_directions(p.d);
    HolderReport rep;
    std::vector<double> h0;
    for (const auto& nd : family) h0.push_back(harmonic_extend(p, U, nd.f, x0, q));
    for (double f : delta_fracs) {
        double m = 0.0;
        for (std::size_t k = 0; k < family.size(); ++k)
            for (const auto& e : dirs) m = std::max(m, std::abs(harmonic_extend(p, U, family[k].f, x0 + e * (f * R), q) - h0[k]));
        rep.delta.push_back(f);
        rep.M.push_back(m);
    }
    // Differences below the quadrature tolerance mean the data family is constant.
    double scale = 0.0;
    for (double v : h0) scale = std::max(scale, std::abs(v));
    if (std::all_of(rep.M.begin(), rep.M.end(), [&](double m) { return m <= q.rel_tol * scale; })) {
        rep.constant_data = true;
        rep.pass = true;
        return rep;
    }
    // Least squares of log M against log(delta / R) over the positive entries.
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (std::size_t i = 0; i < rep.M.size(); ++i) {
        if (!(rep.M[i] > 0.0)) continue;
        const double x = std::log(rep.delta[i]), y = std::log(rep.M[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++n;
    }
    if (n < 2) return rep;
    rep.beta_hat = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    rep.C_hat = std::exp((sy - rep.beta_hat * sx) / n);
    for (std::size_t i = 0; i < rep.M.size(); ++i)
        rep.worst_bound_ratio = std::max(rep.worst_bound_ratio, rep.M[i] / (rep.C_hat * std::pow(rep.delta[i], rep.beta_hat)));
    rep.pass = rep.beta_hat > 0.0 && rep.worst_bound_ratio <= 1.05;
    return rep;
}

// ---- truncation of unbounded harmonic functions ----

// For f = |y - x0|^e (0 < e < alpha) and f_n = min(f, n): sup over U(x0, theta R) of h - h_n
// against K (h - h_n)(x0), for each level n.
struct TruncationReport {
    std::vector<double> levels, sup_diff, center_diff;
    double worst_ratio = 0.0;  // max sup_diff / center_diff
    bool pass = false;
};

inline TruncationReport truncation_check(const StableParams& p, const Vec& x0, double R, double theta, double K,
                                         double exponent, const std::vector<double>& levels, int grid_res = 5,
                                         const QuadratureSpec& q = {}) {
    if (!(exponent > 0.0 && exponent < p.alpha)) throw DomainError("truncation_check: exponent must lie in (0, alpha)");
    const Ball U(x0, R);
    const auto grid = ball_grid(Ball(x0, theta * R), grid_res);
    TruncationReport rep;
    for (double n : levels) {
        // h - h_n is the extension of (f - n)_+.
        CustomData excess;
        excess.f = [&, n](const Vec& y) { return std::max(0.0, std::pow(dist(y, x0) / R, exponent) - n); };
        excess.lower = 0.0;
        excess.decay = -exponent;
        excess.label = "excess";
        const ExteriorData g = excess;
        double sup = 0.0;
        for (const auto& y : grid) sup = std::max(sup, harmonic_extend(p, U, g, y, q));
        const double c = harmonic_extend(p, U, g, x0, q);
        rep.levels.push_back(n);
        rep.sup_diff.push_back(sup);
        rep.center_diff.push_back(c);
        rep.worst_ratio = std::max(rep.worst_ratio, c > 0.0 ? sup / c : kInf);
    }
    rep.pass = rep.worst_ratio <= K;
    return rep;
}

}  // namespace harnack_lab
