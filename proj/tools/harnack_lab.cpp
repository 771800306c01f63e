// harnack-lab: runs the checks of the library from the command line and writes one report per check.
//
// Configuration is a JSON document (see README); every flag maps to one dotted key in it and wins
// over the file. Reports carry the resolved configuration, its hash, the seed and the tool version,
// and nothing else that varies between runs.

#include <unistd.h>

#include <atomic>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "harnack_lab/harnack_lab.hpp"

using namespace harnack_lab;
using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

constexpr const char* kTool = "harnack-lab";
constexpr const char* kVersion = "1.0.0";

struct ConfigError : std::runtime_error {
    ConfigError(const std::string& field, const std::string& msg) : std::runtime_error(field + ": " + msg) {}
};

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

// splitmix64 finalizer over (seed, check name): a check's stream does not depend on what else runs.
std::uint64_t check_seed(std::uint64_t seed, const std::string& name) {
    std::uint64_t z = seed ^ fnv1a(name);
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

json num(double v) { return std::isfinite(v) ? json(v) : json(fmt(v)); }

struct Range {
    double lo = -kInf, hi = kInf;
    bool lo_closed = false, hi_closed = false;

    static Range open(double a, double b) { return {a, b, false, false}; }
    static Range closed(double a, double b) { return {a, b, true, true}; }
    static Range positive() { return {0.0, kInf, false, false}; }
    static Range at_least(double a) { return {a, kInf, true, false}; }

    bool ok(double v) const {
        return (lo_closed ? v >= lo : v > lo) && (hi_closed ? v <= hi : v < hi) && !std::isnan(v);
    }
    std::string text() const {
        return std::string("must lie in ") + (lo_closed ? "[" : "(") + fmt(lo) + ", " + fmt(hi) + (hi_closed ? "]" : ")");
    }
};

// Every key a configuration file may contain. Arrays are leaves.
const std::set<std::string> kKnownKeys = {
    "process.d", "process.alpha", "seed", "jobs",
    "tolerances.quad_tol", "tolerances.paths", "tolerances.level", "tolerances.max_steps",
    "geometry.center", "geometry.radius", "geometry.theta",
    "output.dir", "output.format", "output.plain",
    "axioms.configs", "axioms.tolerance",
    "iw.nx", "iw.nz", "iw.sensitivity",
    "kkz.trials",
    "ks.obstacles", "ks.y", "ks.c1",
    "g3.far_points", "g3.truncation",
    "j0.radii",
    "lambda_g.radii", "lambda_g.grid",
    "profile.kind", "profile.exponent", "profile.log_power", "profile.cutoff", "profile.value", "profile.theta",
    "profile.s_min", "profile.s_max",
    "capacity.shape", "capacity.h",
    "constants.mode", "constants.theta1", "constants.theta2", "constants.a1", "constants.eta", "constants.c",
    "constants.c0", "constants.cJ", "constants.c1",
    "chain.m0_exponent", "chain.terms",
    "harnack.radii", "harnack.grid", "harnack.scale_tol",
    "holder.fractions",
    "metrize.points", "metrize.half_width", "metrize.normalize", "metrize.epsilon", "metrize.centers",
    "pipeline.checks",
};

class Config {
public:
    json doc = json::object();        // file merged with flags
    json effective = json::object();  // every value actually used, defaults included
    json* scope = nullptr;            // the current check's slice of `effective`

    static std::vector<std::string> split(const std::string& key) {
        std::vector<std::string> parts;
        std::stringstream ss(key);
        for (std::string s; std::getline(ss, s, '.');) parts.push_back(s);
        return parts;
    }
    static void put(json& root, const std::string& key, const json& v) {
        json* cur = &root;
        for (const auto& part : split(key)) {
            if (!cur->is_object()) *cur = json::object();
            cur = &(*cur)[part];
        }
        *cur = v;
    }
    const json* find(const std::string& key) const {
        const json* cur = &doc;
        for (const auto& part : split(key)) {
            if (!cur->is_object() || !cur->contains(part)) return nullptr;
            cur = &(*cur)[part];
        }
        return cur;
    }

    void validate_keys() const { walk(doc, ""); }

    double number(const std::string& key, double def, Range range = {}) {
        double v = def;
        if (const json* j = find(key)) {
            if (!j->is_number()) throw ConfigError(key, "expected a number");
            v = j->get<double>();
        }
        if (!range.ok(v)) throw ConfigError(key, range.text());
        record(key, v);
        return v;
    }
    long integer(const std::string& key, long def, long lo, long hi) {
        long v = def;
        if (const json* j = find(key)) {
            if (!j->is_number_integer()) throw ConfigError(key, "expected an integer");
            v = j->get<long>();
        }
        if (v < lo || v > hi) throw ConfigError(key, "must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
        record(key, v);
        return v;
    }
    std::uint64_t seed(const std::string& key, std::uint64_t def) {
        std::uint64_t v = def;
        if (const json* j = find(key)) {
            if (j->is_number_unsigned()) v = j->get<std::uint64_t>();
            else if (j->is_number_integer() && j->get<long long>() >= 0) v = static_cast<std::uint64_t>(j->get<long long>());
            else throw ConfigError(key, "expected a nonnegative 64-bit integer");
        }
        record(key, v);
        return v;
    }
    bool boolean(const std::string& key, bool def) {
        bool v = def;
        if (const json* j = find(key)) {
            if (!j->is_boolean()) throw ConfigError(key, "expected true or false");
            v = j->get<bool>();
        }
        record(key, v);
        return v;
    }
    std::string choice(const std::string& key, const std::string& def, const std::vector<std::string>& options) {
        std::string v = def;
        if (const json* j = find(key)) {
            if (!j->is_string()) throw ConfigError(key, "expected a string");
            v = j->get<std::string>();
        }
        if (std::find(options.begin(), options.end(), v) == options.end()) {
            std::string all;
            for (const auto& o : options) all += (all.empty() ? "" : ", ") + o;
            throw ConfigError(key, "must be one of " + all);
        }
        record(key, v);
        return v;
    }
    std::string text(const std::string& key, const std::string& def) {
        std::string v = def;
        if (const json* j = find(key)) {
            if (!j->is_string()) throw ConfigError(key, "expected a string");
            v = j->get<std::string>();
        }
        record(key, v);
        return v;
    }
    std::vector<double> numbers(const std::string& key, const std::vector<double>& def, Range range,
                                std::size_t min_count = 1, std::size_t max_count = 1000) {
        std::vector<double> v = def;
        if (const json* j = find(key)) v = parse_numbers(key, *j);
        if (v.size() < min_count || v.size() > max_count)
            throw ConfigError(key, "expected " + std::to_string(min_count) + " to " + std::to_string(max_count) + " values");
        for (double x : v)
            if (!range.ok(x)) throw ConfigError(key, "every entry " + range.text());
        json arr = json::array();
        for (double x : v) arr.push_back(x);
        record(key, arr);
        return v;
    }
    Vec point(const std::string& key, const Vec& def, int d) {
        std::vector<double> v;
        for (int i = 0; i < def.dim; ++i) v.push_back(def[i]);
        if (const json* j = find(key)) v = parse_numbers(key, *j);
        if (static_cast<int>(v.size()) != d) throw ConfigError(key, "expected " + std::to_string(d) + " coordinates");
        for (double x : v)
            if (!std::isfinite(x)) throw ConfigError(key, "coordinates must be finite");
        json arr = json::array();
        for (double x : v) arr.push_back(x);
        record(key, arr);
        return Vec::from(v);
    }
    std::vector<Vec> points(const std::string& key, const std::vector<Vec>& def, int d) {
        std::vector<Vec> out = def;
        if (const json* j = find(key)) {
            if (!j->is_array() || j->empty()) throw ConfigError(key, "expected a nonempty list of points");
            out.clear();
            for (const auto& e : *j) {
                auto v = parse_numbers(key, e);
                if (static_cast<int>(v.size()) != d) throw ConfigError(key, "every point needs " + std::to_string(d) + " coordinates");
                out.push_back(Vec::from(v));
            }
        }
        json arr = json::array();
        for (const auto& v : out) arr.push_back(vec_json(v));
        record(key, arr);
        return out;
    }
    std::vector<Ball> balls(const std::string& key, const std::vector<Ball>& def, int d) {
        std::vector<Ball> out = def;
        if (const json* j = find(key)) {
            if (!j->is_array()) throw ConfigError(key, "expected a list of {center, radius} objects");
            out.clear();
            for (const auto& e : *j) {
                if (!e.is_object() || !e.contains("center") || !e.contains("radius") || !e["radius"].is_number())
                    throw ConfigError(key, "expected a list of {center, radius} objects");
                auto c = parse_numbers(key, e["center"]);
                if (static_cast<int>(c.size()) != d) throw ConfigError(key, "every center needs " + std::to_string(d) + " coordinates");
                const double r = e["radius"].get<double>();
                if (!(r > 0.0) || !std::isfinite(r)) throw ConfigError(key, "radii must be positive");
                out.emplace_back(Vec::from(c), r);
            }
        }
        json arr = json::array();
        for (const auto& b : out) arr.push_back(json{{"center", vec_json(b.center)}, {"radius", b.radius}});
        record(key, arr);
        return out;
    }

    static json vec_json(const Vec& v) {
        json a = json::array();
        for (int i = 0; i < v.dim; ++i) a.push_back(v[i]);
        return a;
    }

private:
    void record(const std::string& key, const json& v) {
        put(effective, key, v);
        if (scope) put(*scope, key, v);
    }
    static std::vector<double> parse_numbers(const std::string& key, const json& j) {
        std::vector<double> v;
        if (j.is_number()) return {j.get<double>()};
        if (!j.is_array()) throw ConfigError(key, "expected a list of numbers");
        for (const auto& e : j) {
            if (!e.is_number()) throw ConfigError(key, "expected a list of numbers");
            v.push_back(e.get<double>());
        }
        return v;
    }
    static void walk(const json& j, const std::string& prefix) {
        if (j.is_object() && (prefix.empty() || !kKnownKeys.count(prefix))) {
            for (auto it = j.begin(); it != j.end(); ++it) walk(it.value(), prefix.empty() ? it.key() : prefix + "." + it.key());
            return;
        }
        if (!kKnownKeys.count(prefix)) throw ConfigError(prefix, "unknown field");
    }
};

// ---- checks ----

struct Outcome {
    ConditionReport rep;
    json extra = json::object();
    std::vector<std::string> lines;  // printed above the status line
};

struct Job {
    std::string name;
    json config;
    std::uint64_t seed = 0;
    std::function<Outcome(std::uint64_t)> run;
};

struct Common {
    StableParams p;
    QuadratureSpec q;
    int jobs = 1;
};

Common common(Config& cfg, double default_tol, int jobs) {
    Common c;
    const int d = static_cast<int>(cfg.integer("process.d", 2, 1, kMaxDim));
    const double alpha = cfg.number("process.alpha", 1.0, Range::open(0.0, 2.0));
    c.p = StableParams::make(d, alpha);
    c.q.rel_tol = cfg.number("tolerances.quad_tol", default_tol, Range::open(0.0, 0.1));
    c.jobs = jobs;
    return c;
}

void require_transient(const StableParams& p, const std::string& check) {
    if (!p.transient()) throw ConfigError("process.alpha", check + " needs d > alpha");
}

// Quick settings used by `pipeline`; single commands default to the full budgets.
struct Budget {
    bool light = false;
    long pick(long full, long quick) const { return light ? quick : full; }
};

using Resolver = std::function<std::function<Outcome(std::uint64_t)>(Config&)>;

Job make_job(Config& cfg, const std::string& name, const Resolver& resolve, std::uint64_t seed) {
    Job job;
    job.name = name;
    job.config = json::object();
    cfg.scope = &job.config;
    cfg.seed("seed", seed);
    job.run = resolve(cfg);
    cfg.scope = nullptr;
    job.seed = seed;
    return job;
}

Resolver axioms_resolver(int jobs, Budget b) {
    return [=](Config& cfg) {
        const Common c = common(cfg, 1e-3, jobs);
        const int configs = static_cast<int>(cfg.integer("axioms.configs", b.pick(20, 2), 1, 1000));
        const double tol = cfg.number("axioms.tolerance", 1e-4, Range::positive());
        return [=](std::uint64_t seed) {
            Outcome o;
            o.rep = verify_axioms(c.p, configs, seed, tol, c.q);
            o.lines.push_back("max residuals: mass " + fmt(o.rep.get("mass_max_residual")) + ", composition " +
                              fmt(o.rep.get("composition_max_residual")) + ", mean value " +
                              fmt(o.rep.get("mean_value_max_residual")));
            return o;
        };
    };
}

Resolver iw_resolver(int jobs) {
    return [=](Config& cfg) {
        const Common c = common(cfg, 1e-6, jobs);
        const int d = c.p.d;
        const Vec center = cfg.point("geometry.center", Vec::zero(d), d);
        const double r = cfg.number("geometry.radius", 1.0, Range::positive());
        const int nx = static_cast<int>(cfg.integer("iw.nx", 10, 1, 100));
        const int nz = static_cast<int>(cfg.integer("iw.nz", 10, 1, 10));
        const bool sens = cfg.boolean("iw.sensitivity", false);
        return [=](std::uint64_t) {
            Outcome o;
            const Ball b(center, r);
            o.rep = iw_crosscheck(c.p, b, nx, nz, c.q);
            o.rep.set("max_rel_err", o.rep.constant);
            if (sens) {
                // Each normalization constant off by 5% must show up as a visibly larger error.
                const std::pair<const char*, IwFactors> cases[] = {
                    {"sensitivity_green", {1.05, 1.0, 1.0}},
                    {"sensitivity_levy", {1.0, 1.05, 1.0}},
                    {"sensitivity_poisson", {1.0, 1.0, 1.0 / 1.05}}};
                for (const auto& [key, fac] : cases) {
                    const double e = iw_crosscheck(c.p, b, nx, nz, c.q, fac).constant;
                    o.rep.set(key, e);
                    if (!(e > 0.04)) {
                        o.rep.pass = false;
                        o.rep.witnesses.push_back(std::string(key) + " error " + fmt(e) + " not above 0.04");
                    }
                }
            }
            o.lines.push_back("max_rel_err = " + fmt(o.rep.constant));
            return o;
        };
    };
}

Resolver kkz_resolver(Budget b) {
    return [=](Config& cfg) {
        const Common c = common(cfg, 1e-6, 1);
        const double theta = cfg.number("geometry.theta", 0.25, Range::open(0.0, 0.5));
        const long trials = cfg.integer("kkz.trials", b.pick(100000, 20000), 1, 100000000);
        return [=](std::uint64_t seed) {
            Outcome o;
            o.rep = check_kkz(c.p, theta, trials, seed);
            o.lines.push_back("max ratio " + fmt(o.rep.constant) + " vs bound " + fmt(o.rep.threshold));
            return o;
        };
    };
}

Resolver hj_resolver() {
    return [=](Config& cfg) {
        const Common c = common(cfg, 1e-6, 1);
        const int d = c.p.d;
        const Vec x = cfg.point("geometry.center", Vec::zero(d), d);
        const double r = cfg.number("geometry.radius", 1.0, Range::positive());
        const double theta = cfg.number("geometry.theta", 0.25, Range::open(0.0, 1.0 / 3.0));
        return [=](std::uint64_t) {
            Outcome o;
            o.rep = check_hj(c.p, x, r, theta);
            o.lines.push_back("c_J = " + fmt(o.rep.constant) + " (raw max ratio " + fmt(o.rep.get("raw_max_ratio")) + ")");
            return o;
        };
    };
}

Resolver ks_resolver(int jobs, Budget b) {
    return [=](Config& cfg) {
        const Common c = common(cfg, 1e-6, jobs);
        require_transient(c.p, "ks");
        const int d = c.p.d;
        const Vec x = cfg.point("geometry.center", Vec::zero(d), d);
        const double r = cfg.number("geometry.radius", 1.0, Range::positive());
        const double theta = cfg.number("geometry.theta", 0.25, Range::open(0.0, 1.0));
        const double tr = theta * r;
        const auto F = cfg.balls("ks.obstacles", {Ball(x + Vec::axis(d, 0, 0.5 * tr), 0.2 * tr)}, d);
        const Vec y = cfg.point("ks.y", x, d);
        KsOptions opt;
        opt.paths = cfg.integer("tolerances.paths", b.pick(1000000, 200000), 1, 1000000000);
        opt.level = cfg.number("tolerances.level", 0.99, Range::open(0.0, 1.0));
        opt.max_steps = cfg.integer("tolerances.max_steps", 100000, 1, 100000000);
        opt.c1 = cfg.number("ks.c1", 1.0, Range::at_least(1.0));
        opt.jobs = jobs;
        if (!(dist(y, x) < tr)) throw ConfigError("ks.y", "must lie in U(center, theta radius)");
        for (const auto& f : F)
            if (!(dist(f.center, x) + f.radius < tr)) throw ConfigError("ks.obstacles", "must lie inside U(center, theta radius)");
        return [=](std::uint64_t seed) mutable {
            Outcome o;
            opt.seed = seed;
            o.rep = check_ks(c.p, Ball(x, r), F, theta, y, opt);
            o.lines.push_back("hit probability CI lower " + fmt(o.rep.get("ci_lo")) + " vs bound " + fmt(o.rep.threshold));
            return o;
        };
    };
}

Resolver g3_resolver(int jobs, Budget b) {
    return [=](Config& cfg) {
        const Common c = common(cfg, 1e-6, jobs);
        require_transient(c.p, "g3");
        const int d = c.p.d;
        const Vec x = cfg.point("geometry.center", Vec::zero(d), d);
        const double r = cfg.number("geometry.radius", 1.0, Range::positive());
        const auto far = cfg.points("g3.far_points", {x + Vec::axis(d, 0, 2.0 * r), x + Vec::axis(d, 0, 4.0 * r)}, d);
        for (const auto& y : far)
            if (!(dist(y, x) > r)) throw ConfigError("g3.far_points", "points must lie outside the closed ball");
        G3Options opt;
        opt.truncation = cfg.numbers("g3.truncation", {4.0, 8.0, 16.0}, Range::open(1.0, kInf), 2, 5);
        opt.paths = cfg.integer("tolerances.paths", b.pick(200000, 50000), 1, 1000000000);
        opt.level = cfg.number("tolerances.level", 0.99, Range::open(0.0, 1.0));
        opt.max_steps = cfg.integer("tolerances.max_steps", 100000, 1, 100000000);
        opt.jobs = jobs;
        return [=](std::uint64_t seed) mutable {
            Outcome o;
            opt.seed = seed;
            o.rep = check_g3_rv(c.p, Ball(x, r), far, opt);
            o.lines.push_back("c2 capacity " + fmt(o.rep.get("c2_capacity")) + ", c2 hitting " + fmt(o.rep.get("c2_rv")));
            return o;
        };
    };
}

Resolver j0_resolver() {
    return [=](Config& cfg) {
        const Common c = common(cfg, 1e-6, 1);
        const double theta = cfg.number("geometry.theta", 0.25, Range::open(0.0, 1.0 / 3.0));
        const auto radii = cfg.numbers("j0.radii", {0.1, 1.0, 10.0}, Range::positive());
        return [=](std::uint64_t) {
            Outcome o;
            o.rep = check_j0(c.p, theta, radii, c.q);
            o.lines.push_back("delta0 = " + fmt(o.rep.constant) + " (closed form " + fmt(o.rep.get("delta0_closed_form")) + ")");
            return o;
        };
    };
}

Resolver lambda_g_resolver(Budget b) {
    return [=](Config& cfg) {
        const Common c = common(cfg, 1e-6, 1);
        require_transient(c.p, "lambda-g");
        const auto radii = cfg.numbers("lambda_g.radii", {0.1, 1.0, 10.0}, Range::positive());
        const int grid = static_cast<int>(cfg.integer("lambda_g.grid", b.pick(40, 10), 1, 10000));
        return [=](std::uint64_t) {
            Outcome o;
            o.rep = check_lambda_g(c.p, radii, grid, c.q);
            o.lines.push_back("c2 = " + fmt(o.rep.constant) + " (center closed form " + fmt(o.rep.get("center_closed_form")) + ")");
            return o;
        };
    };
}

Resolver profile_resolver() {
    return [=](Config& cfg) {
        const Common c = common(cfg, 1e-6, 1);
        RadialProfile n0;
        const std::string kind = cfg.choice("profile.kind", "power", {"power", "power_log", "truncated_power", "constant"});
        n0.kind = kind == "power" ? RadialProfile::Kind::power
                  : kind == "power_log" ? RadialProfile::Kind::power_log
                  : kind == "truncated_power" ? RadialProfile::Kind::truncated_power
                                              : RadialProfile::Kind::constant;
        n0.exponent = cfg.number("profile.exponent", c.p.d + c.p.alpha, Range::positive());
        n0.log_power = cfg.number("profile.log_power", 0.0, {});
        n0.cutoff = cfg.number("profile.cutoff", 1.0, Range::positive());
        n0.value = cfg.number("profile.value", 1.0, Range::positive());
        const double theta = cfg.number("profile.theta", 1.0, Range::positive());
        const double s_min = cfg.number("profile.s_min", 1e-3, Range::positive());
        const double s_max = cfg.number("profile.s_max", 1e3, Range::positive());
        if (!(s_max > s_min)) throw ConfigError("profile.s_max", "must exceed profile.s_min");
        return [=](std::uint64_t) {
            Outcome o;
            o.rep = check_radial_profile(n0, theta, s_min, s_max);
            o.lines.push_back(n0.label() + ": C0 = " + fmt(o.rep.constant));
            return o;
        };
    };
}

std::vector<double> default_capacity_grid(int d, double r) {
    const std::vector<double> f = d == 1 ? std::vector<double>{0.02, 0.01, 0.005}
                                  : d == 2 ? std::vector<double>{0.2, 0.1, 0.05}
                                           : std::vector<double>{0.4, 0.3, 0.2};
    std::vector<double> h;
    for (double x : f) h.push_back(x * r);
    return h;
}

Resolver capacity_resolver() {
    return [=](Config& cfg) {
        const Common c = common(cfg, 1e-6, 1);
        require_transient(c.p, "capacity");
        const int d = c.p.d;
        const Vec x = cfg.point("geometry.center", Vec::zero(d), d);
        const double r = cfg.number("geometry.radius", 1.0, Range::positive());
        const std::string shape = cfg.choice("capacity.shape", "ball", {"ball", "box"});
        const auto hs = cfg.numbers("capacity.h", default_capacity_grid(d, r), Range::open(0.0, r), 1, 10);
        return [=](std::uint64_t) {
            Outcome o;
            ConditionReport& rep = o.rep;
            rep.name = "capacity";
            rep.columns = {"h", "lower", "upper", "width", "support_points"};
            CompactSet A;
            if (shape == "ball") {
                A = CompactSet::ball(Ball(x, r));
            } else {
                Vec lo = x, hi = x;
                for (int i = 0; i < d; ++i) {
                    lo[i] -= r;
                    hi[i] += r;
                }
                A = CompactSet::box(Box(lo, hi));
            }
            const double closed = shape == "ball" ? ball_capacity(c.p, r) : std::nan("");
            bool ordered = true, monotone = true, contains = true;
            double prev_width = kInf;
            for (double h : hs) {
                const CapacityBracket br = capacity_lp(c.p, A, h);
                const double width = br.upper - br.lower;
                rep.rows.push_back({h, br.lower, br.upper, width, static_cast<double>(br.equilibrium.points.size())});
                if (!(br.lower <= br.upper)) ordered = false;
                if (!(width <= prev_width)) monotone = false;
                if (shape == "ball" && !(br.lower <= closed && closed <= br.upper)) {
                    contains = false;
                    rep.witnesses.push_back("h = " + fmt(h) + ": [" + fmt(br.lower) + ", " + fmt(br.upper) +
                                            "] misses " + fmt(closed));
                }
                prev_width = width;
                rep.constant = br.lower;
                rep.set("lower", br.lower);
                rep.set("upper", br.upper);
            }
            if (shape == "ball") rep.set("closed_form", closed);
            rep.set("width_monotone", monotone ? 1.0 : 0.0);
            if (!monotone) rep.flags.push_back("bracket width not monotone under refinement");
            rep.sample_count = static_cast<long>(hs.size());
            rep.pass = ordered && contains;
            o.lines.push_back("cap in [" + fmt(rep.get("lower")) + ", " + fmt(rep.get("upper")) + "]" +
                              (shape == "ball" ? " (closed form " + fmt(closed) + ")" : ""));
            return o;
        };
    };
}

// Constants come either from explicit inputs or from measurements on the process; chain and harnack
// share one evaluation inside a pipeline run.
struct ConstantsSource {
    StableParams p;
    bool manual = true;
    HarnackInputs inputs;
    PipelineOptions popt;

    struct Result {
        HarnackInputs inputs;
        ConditionReport inputs_report;
        HarnackConstants hc;
    };
    std::shared_ptr<std::once_flag> once = std::make_shared<std::once_flag>();
    std::shared_ptr<Result> result = std::make_shared<Result>();

    const Result& get() const {
        std::call_once(*once, [&] {
            if (manual) {
                result->inputs = inputs;
                result->inputs_report.name = "manual_inputs";
                result->inputs_report.pass = true;
            } else {
                auto [in, rep] = pipeline_inputs(p, popt);
                if (!rep.pass) throw ContractViolation("pipeline inputs are not admissible: " + rep.flags.front());
                result->inputs = in;
                result->inputs_report = rep;
            }
            result->hc = derive_constants(result->inputs);
        });
        return *result;
    }
};

ConstantsSource read_constants(Config& cfg, const StableParams& p, const std::string& default_mode) {
    ConstantsSource s;
    s.p = p;
    s.manual = cfg.choice("constants.mode", default_mode, {"manual", "pipeline"}) == "manual";
    if (s.manual) {
        const Range third = Range::open(0.0, 1.0 / 3.0), one = Range::at_least(1.0);
        s.inputs.theta1 = cfg.number("constants.theta1", 0.25, third);
        s.inputs.theta2 = cfg.number("constants.theta2", 0.25, third);
        s.inputs.a1 = cfg.number("constants.a1", 0.25, third);
        s.inputs.eta = cfg.number("constants.eta", 0.25, third);
        s.inputs.c = cfg.number("constants.c", 1.0, one);
        s.inputs.c0 = cfg.number("constants.c0", 1.0, one);
        s.inputs.cJ = cfg.number("constants.cJ", 1.0, one);
        for (double v : {s.inputs.c, s.inputs.c0, s.inputs.cJ})
            if (!std::isfinite(v)) throw ConfigError("constants", "constants must be finite");
    } else {
        require_transient(p, "constants.mode = pipeline");
        s.popt.c1 = cfg.number("constants.c1", 1.0, Range::at_least(1.0));
        s.popt.theta2 = cfg.number("constants.theta2", 0.25, Range::open(0.0, 1.0 / 3.0));
    }
    return s;
}

std::string default_constants_mode(const StableParams& p) { return p.transient() ? "pipeline" : "manual"; }

Resolver constants_resolver(std::shared_ptr<ConstantsSource>* shared, bool command_default_manual) {
    return [=](Config& cfg) {
        const Common c = common(cfg, 1e-6, 1);
        auto src = std::make_shared<ConstantsSource>(
            read_constants(cfg, c.p, command_default_manual ? "manual" : default_constants_mode(c.p)));
        if (shared) *shared = src;
        return [=](std::uint64_t) {
            Outcome o;
            const auto& res = src->get();
            const HarnackConstants& hc = res.hc;
            ConditionReport& rep = o.rep;
            rep.name = "constants";
            for (const auto& [k, v] : res.inputs_report.values) rep.set("input_" + k, v);
            const HarnackInputs& in = res.inputs;
            for (auto [k, v] : std::vector<std::pair<const char*, double>>{
                     {"theta1", in.theta1}, {"theta2", in.theta2}, {"a1", in.a1}, {"eta", in.eta},
                     {"c", in.c}, {"c0", in.c0}, {"cJ", in.cJ}})
                rep.set(std::string("input_") + k, v);
            rep.set("l", hc.l);
            rep.set("j0", hc.j0);
            rep.set("k0", hc.k0);
            rep.set("theta", to_double(hc.theta));
            rep.set("a", to_double(hc.a));
            rep.set("beta", to_double(hc.beta));
            rep.set("beta_tilde", to_double(hc.beta_tilde));
            rep.set("K", to_double(hc.K));
            rep.constant = to_double(hc.K);
            rep.pass = true;
            o.extra["mode"] = src->manual ? "manual" : "pipeline";
            o.extra["exact"] = json{{"theta", to_string(hc.theta)}, {"a", to_string(hc.a)},
                                    {"beta", to_string(hc.beta)}, {"beta_tilde", to_string(hc.beta_tilde)},
                                    {"K", to_string(hc.K)}};
            o.lines = {"theta = " + to_string(hc.theta), "l = " + std::to_string(hc.l), "a = " + to_string(hc.a),
                       "beta = " + to_string(hc.beta), "beta_tilde = " + to_string(hc.beta_tilde),
                       "j0 = " + std::to_string(hc.j0), "k0 = " + std::to_string(hc.k0),
                       "K = " + to_string(hc.K) + " (" + fmt(to_double(hc.K)) + ")"};
            return o;
        };
    };
}

std::shared_ptr<ConstantsSource> constants_for(Config& cfg, const StableParams& p,
                                               const std::shared_ptr<ConstantsSource>& shared) {
    // Read the keys so they land in this check's configuration slice.
    auto own = std::make_shared<ConstantsSource>(read_constants(cfg, p, default_constants_mode(p)));
    return shared ? shared : own;
}

Resolver chain_resolver(const std::shared_ptr<ConstantsSource>* shared) {
    return [=](Config& cfg) {
        const Common c = common(cfg, 1e-6, 1);
        auto src = constants_for(cfg, c.p, shared ? *shared : nullptr);
        const double m0 = cfg.number("chain.m0_exponent", c.p.transient() ? c.p.d - c.p.alpha : 1.0, Range::positive());
        const double R = cfg.number("geometry.radius", 1.0, Range::positive());
        const int terms = static_cast<int>(cfg.integer("chain.terms", 100, 1, 100000));
        return [=](std::uint64_t) {
            Outcome o;
            ConditionReport& rep = o.rep;
            rep.name = "chain";
            rep.columns = {"n", "r_n"};
            const auto& hc = src->get().hc;
            try {
                const RadiusChain ch = radius_chain(hc, m0, R, terms);
                for (std::size_t n = 0; n < ch.radii.size(); ++n) rep.rows.push_back({static_cast<double>(n), ch.radii[n]});
                for (auto [k, v] : std::vector<std::pair<const char*, double>>{
                         {"r0", ch.r0}, {"q", ch.q}, {"partial_sum", ch.partial_sum}, {"tail", ch.tail},
                         {"total", ch.total}, {"bound", ch.bound}, {"margin", ch.margin}, {"m0_residual", ch.m0_residual}})
                    rep.set(k, v);
                rep.constant = ch.total;
                rep.threshold = ch.bound;
                rep.pass = true;
                o.lines.push_back("chain sum " + fmt(ch.total) + " < theta R = " + fmt(ch.bound) + ", margin " + fmt(ch.margin));
            } catch (const ContractViolation& e) {
                rep.pass = false;
                rep.witnesses.push_back(e.what());
                o.lines.push_back(e.what());
            }
            return o;
        };
    };
}

Resolver harnack_resolver(const std::shared_ptr<ConstantsSource>* shared, Budget b) {
    return [=](Config& cfg) {
        const Common c = common(cfg, 1e-6, 1);
        auto src = constants_for(cfg, c.p, shared ? *shared : nullptr);
        const int d = c.p.d;
        const Vec x0 = cfg.point("geometry.center", Vec::zero(d), d);
        const auto radii = cfg.numbers("harnack.radii", {0.5, 1.0, 10.0}, Range::positive(), 1, 20);
        const int grid = static_cast<int>(cfg.integer("harnack.grid", b.pick(5, 3), 1, 50));
        const double scale_tol = cfg.number("harnack.scale_tol", 1e-6, Range::positive());
        return [=](std::uint64_t) {
            Outcome o;
            ConditionReport& rep = o.rep;
            rep.name = "harnack";
            rep.columns = {"R", "member", "sup", "inf", "ratio"};
            const auto& hc = src->get().hc;
            const double K = to_double(hc.K), theta = to_double(hc.theta);
            bool all = true;
            double worst = 0.0, spread = 0.0;
            std::vector<double> base;
            for (double R : radii) {
                const auto hr = harnack_empirical(c.p, x0, R, theta, K, harnack_family(d, x0, R), grid, c.q);
                all = all && hr.pass;
                worst = std::max(worst, hr.max_ratio);
                for (std::size_t m = 0; m < hr.ratio.size(); ++m) {
                    rep.rows.push_back({R, static_cast<double>(m), hr.sup[m], hr.inf[m], hr.ratio[m]});
                    if (base.size() < hr.ratio.size()) base.push_back(hr.ratio[m]);
                    else spread = std::max(spread, std::abs(hr.ratio[m] - base[m]) / base[m]);
                    if (!(hr.ratio[m] <= K)) rep.witnesses.push_back(hr.labels[m] + " at R = " + fmt(R) + ": ratio " + fmt(hr.ratio[m]));
                }
                rep.sample_count += hr.evaluations;
                if (!o.extra.contains("members")) {
                    json labels = json::array();
                    for (const auto& l : hr.labels) labels.push_back(l);
                    o.extra["members"] = labels;
                }
            }
            rep.constant = worst;
            rep.threshold = K;
            rep.set("K", K);
            rep.set("theta", theta);
            rep.set("max_ratio", worst);
            rep.set("scale_spread", spread);
            if (spread > scale_tol) rep.witnesses.push_back("ratios change with R by " + fmt(spread));
            rep.pass = all && spread <= scale_tol;
            o.lines.push_back("max sup/inf " + fmt(worst) + " vs K = " + fmt(K) + ", scale spread " + fmt(spread));
            return o;
        };
    };
}

Resolver holder_resolver() {
    return [=](Config& cfg) {
        const Common c = common(cfg, 1e-6, 1);
        const int d = c.p.d;
        const Vec x0 = cfg.point("geometry.center", Vec::zero(d), d);
        const double R = cfg.number("geometry.radius", 1.0, Range::positive());
        std::vector<double> def;
        for (int i = 0; i < 8; ++i) def.push_back(0.25 * std::pow(0.01, i / 7.0));
        const auto fr = cfg.numbers("holder.fractions", def, Range::open(0.0, 1.0), 2, 100);
        return [=](std::uint64_t) {
            Outcome o;
            ConditionReport& rep = o.rep;
            rep.name = "holder";
            rep.columns = {"delta_over_R", "M"};
            const HolderReport hr = holder_fit(c.p, x0, R, holder_family(d, x0, R), fr, c.q);
            for (std::size_t i = 0; i < hr.delta.size(); ++i) rep.rows.push_back({hr.delta[i], hr.M[i]});
            rep.constant = hr.beta_hat;
            rep.threshold = 1.05;
            rep.set("beta_hat", hr.beta_hat);
            rep.set("C_hat", hr.C_hat);
            rep.set("worst_bound_ratio", hr.worst_bound_ratio);
            rep.set("constant_data", hr.constant_data ? 1.0 : 0.0);
            rep.pass = hr.pass;
            o.lines.push_back("beta_hat = " + fmt(hr.beta_hat) + ", worst M / (C delta^beta) = " + fmt(hr.worst_bound_ratio));
            return o;
        };
    };
}

Resolver metrize_resolver(Budget b) {
    return [=](Config& cfg) {
        const Common c = common(cfg, 1e-6, 1);
        require_transient(c.p, "metrize");
        const int d = c.p.d;
        const Vec y0 = cfg.point("geometry.center", Vec::zero(d), d);
        const int n = static_cast<int>(cfg.integer("metrize.points", b.pick(200, 100), 3, 2000));
        const double hw = cfg.number("metrize.half_width", 2.0, Range::positive());
        const bool identity = cfg.choice("metrize.normalize", "w", {"w", "identity"}) == "identity";
        const double eps = cfg.number("metrize.epsilon", 0.0, Range::closed(0.0, 1.0));
        std::vector<double> def_centers;
        for (int k = 0; k < 4; ++k) def_centers.push_back(k * n / 4);
        const auto centers_d = cfg.numbers("metrize.centers", def_centers, Range::closed(0.0, n - 1), 1, 100);
        std::vector<int> centers;
        for (double v : centers_d) {
            if (v != std::floor(v)) throw ConfigError("metrize.centers", "expected point indices");
            centers.push_back(static_cast<int>(v));
        }
        Vec lo = y0, hi = y0;
        for (int i = 0; i < d; ++i) {
            lo[i] -= hw;
            hi[i] += hw;
        }
        const Box region(lo, hi);
        return [=](std::uint64_t seed) {
            Outcome o;
            const auto nk = make_kernel(c.p, y0, region, identity);
            const auto pts = random_cloud(region, n, seed);
            const auto Gt = kernel_matrix(nk, pts);
            const auto cloud = make_cloud(nk, pts);
            MetrizationResult mr = metrize(cloud, eps);
            mr.C_achieved = comparability_constant(Gt, mr);
            const TriangleResult tc = triangle_constant(Gt);
            ConditionReport inc = verify_inclusions(nk, mr, cloud, centers);
            ConditionReport& rep = o.rep;
            rep.name = "metrize";
            rep.columns = inc.columns;
            rep.rows = inc.rows;
            rep.witnesses = inc.witnesses;
            rep.flags = mr.flags;
            rep.flags.insert(rep.flags.end(), inc.flags.begin(), inc.flags.end());
            rep.flags.push_back("triangle constant measured on this cloud only");
            rep.sample_count = n;
            rep.constant = mr.C_achieved;
            for (auto [k, v] : std::vector<std::pair<const char*, double>>{
                     {"kappa", cloud.kappa}, {"epsilon", mr.epsilon}, {"gamma", mr.gamma},
                     {"C_achieved", mr.C_achieved}, {"c_tilde", tc.c_tilde}, {"lambda_inf", nk.lambda_inf},
                     {"worst_triangle_excess", mr.worst_triangle_excess},
                     {"upper_bound_holds", mr.upper_bound_holds ? 1.0 : 0.0},
                     {"lower_bound_checked", mr.lower_bound_checked ? 1.0 : 0.0},
                     {"lower_bound_holds", mr.lower_bound_holds ? 1.0 : 0.0},
                     {"inclusions_pass", inc.pass ? 1.0 : 0.0}})
                rep.set(k, v);
            rep.pass = mr.worst_triangle_excess == 0.0 && mr.upper_bound_holds &&
                       (!mr.lower_bound_checked || mr.lower_bound_holds) && std::isfinite(mr.C_achieved) && inc.pass;
            o.lines.push_back("kappa " + fmt(cloud.kappa) + ", epsilon " + fmt(mr.epsilon) + ", C " + fmt(mr.C_achieved) +
                              ", c~ " + fmt(tc.c_tilde));
            return o;
        };
    };
}

// ---- output ----

struct Output {
    fs::path dir = ".";
    bool json_out = true, csv_out = true, color = false;
};

json report_json(const Job& job, const Outcome& o) {
    const ConditionReport& r = o.rep;
    json j;
    j["tool"] = kTool;
    j["version"] = kVersion;
    j["check"] = job.name;
    j["seed"] = job.seed;
    j["check_seed"] = check_seed(job.seed, job.name);
    j["config_hash"] = hex64(fnv1a(job.config.dump()));
    j["config"] = job.config;
    j["pass"] = r.pass;
    j["constant"] = num(r.constant);
    j["threshold"] = num(r.threshold);
    j["sample_count"] = r.sample_count;
    json values = json::object();
    for (const auto& [k, v] : r.values) values[k] = num(v);
    j["values"] = values;
    j["witnesses"] = r.witnesses;
    j["flags"] = r.flags;
    for (auto it = o.extra.begin(); it != o.extra.end(); ++it) j[it.key()] = it.value();
    j["table"] = json{{"columns", r.columns}, {"rows", r.rows.size()}};
    return j;
}

std::string csv_text(const ConditionReport& r) {
    std::string s;
    if (r.columns.empty()) {
        s = "name,value\n";
        for (const auto& [k, v] : r.values) s += k + "," + fmt(v) + "\n";
        return s;
    }
    for (std::size_t i = 0; i < r.columns.size(); ++i) s += (i ? "," : "") + r.columns[i];
    s += "\n";
    for (const auto& row : r.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) s += (i ? "," : "") + fmt(row[i]);
        s += "\n";
    }
    return s;
}

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + path.string());
    f << text;
}

void emit(const Output& out, const Job& job, const Outcome& o) {
    if (out.json_out) write_file(out.dir / (job.name + ".report.json"), report_json(job, o).dump(2) + "\n");
    if (out.csv_out) write_file(out.dir / (job.name + ".data.csv"), csv_text(o.rep));
}

void print(const Output& out, const Job& job, const Outcome& o) {
    for (const auto& l : o.lines) std::cout << "  " << l << "\n";
    if (!o.rep.pass)
        for (const auto& w : o.rep.witnesses) std::cout << "  witness: " << w << "\n";
    for (const auto& f : o.rep.flags) std::cout << "  flag: " << f << "\n";
    const char* tag = o.rep.pass ? "PASS" : "FAIL";
    if (out.color) std::cout << (o.rep.pass ? "\033[32m" : "\033[31m") << tag << "\033[0m";
    else std::cout << tag;
    std::cout << " " << job.name << "\n";
}

struct RunResult {
    std::vector<std::pair<const Job*, Outcome>> done;
    bool all_pass = true;
};

// Jobs inside a stage are independent and run on up to `jobs` threads; output order is fixed.
RunResult run_stages(const std::vector<std::vector<Job>>& stages, int jobs, const Output& out) {
    RunResult res;
    for (const auto& stage : stages) {
        std::vector<Outcome> outcomes(stage.size());
        std::vector<std::exception_ptr> errors(stage.size());
        std::atomic<std::size_t> next{0};
        auto worker = [&] {
            for (std::size_t i; (i = next++) < stage.size();) {
                try {
                    outcomes[i] = stage[i].run(check_seed(stage[i].seed, stage[i].name));
                    outcomes[i].rep.name = stage[i].name;
                    emit(out, stage[i], outcomes[i]);
                } catch (...) {
                    errors[i] = std::current_exception();
                }
            }
        };
        const int nthreads = std::max(1, std::min<int>(jobs, static_cast<int>(stage.size())));
        std::vector<std::thread> pool;
        for (int t = 1; t < nthreads; ++t) pool.emplace_back(worker);
        worker();
        for (auto& t : pool) t.join();
        for (std::size_t i = 0; i < stage.size(); ++i) {
            if (errors[i]) {
                try {
                    std::rethrow_exception(errors[i]);
                } catch (const DomainError& e) {
                    throw ConfigError(stage[i].name, e.what());
                } catch (const ContractViolation& e) {
                    throw ConfigError(stage[i].name, e.what());
                }
            }
            print(out, stage[i], outcomes[i]);
            res.all_pass = res.all_pass && outcomes[i].rep.pass;
            res.done.emplace_back(&stage[i], std::move(outcomes[i]));
        }
    }
    return res;
}

json hashed_config(const json& effective) {
    json c = effective;
    c.erase("output");
    c.erase("jobs");
    return c;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Numerical checks of Harnack-type estimates for isotropic stable processes"};
    app.set_version_flag("--version", std::string(kTool) + " " + kVersion);
    app.require_subcommand(1);
    app.fallthrough();

    // Flag values are parsed as JSON when possible ("[0,1]", "1e-6", "true"), else as a comma list of
    // numbers, else kept as a string.
    std::vector<std::pair<CLI::Option*, std::string>> mapped;
    std::set<CLI::Option*> bool_flags;
    std::map<std::string, std::string> raw;
    auto add = [&](CLI::App* where, const std::string& flag, const std::string& key, const std::string& help) {
        CLI::Option* o = where->add_option(flag, raw[flag + "@" + key], help + " [" + key + "]");
        mapped.emplace_back(o, key);
        return o;
    };
    auto add_flag = [&](CLI::App* where, const std::string& flag, const std::string& key, const std::string& help) {
        const std::string desc = help + " [" + key + "]";
        CLI::Option* o = where->add_flag(flag, desc);
        mapped.emplace_back(o, key);
        bool_flags.insert(o);
        return o;
    };

    std::string config_path;
    app.add_option("--config", config_path, "JSON configuration file (flags win)")->check(CLI::ExistingFile);
    add(&app, "--seed", "seed", "64-bit seed");
    add(&app, "--jobs", "jobs", "worker threads");
    add(&app, "--out", "output.dir", "output directory");
    add(&app, "--format", "output.format", "json, csv or both");
    add_flag(&app, "--plain", "output.plain", "no color");
    add(&app, "--d", "process.d", "dimension");
    add(&app, "--alpha", "process.alpha", "stability index");
    add(&app, "--tol", "tolerances.quad_tol", "quadrature relative tolerance");
    add(&app, "--paths", "tolerances.paths", "Monte Carlo paths");
    add(&app, "--level", "tolerances.level", "confidence level");
    add(&app, "--center", "geometry.center", "center point");
    add(&app, "--radius", "geometry.radius", "radius");
    add(&app, "--theta", "geometry.theta", "shrinking factor");

    auto* axioms = app.add_subcommand("verify-axioms", "unit mass, composition and mean-value residuals");
    add(axioms, "--configs", "axioms.configs", "random configurations per identity");

    auto* iw = app.add_subcommand("verify-iw", "exit density from the Levy system against the Poisson kernel");
    add(iw, "--nx", "iw.nx", "start points");
    add(iw, "--nz", "iw.nz", "exit points");
    add_flag(iw, "--sensitivity", "iw.sensitivity", "also perturb each normalization by 5%");

    auto* check = app.add_subcommand("check", "single condition check");
    check->require_subcommand(1);
    auto* c_kkz = check->add_subcommand("kkz", "jump kernel comparability");
    add(c_kkz, "--trials", "kkz.trials", "random pairs");
    auto* c_hj = check->add_subcommand("hj", "exit density comparability of concentric balls");
    auto* c_ks = check->add_subcommand("ks", "hitting probability lower bound");
    add(c_ks, "--obstacles", "ks.obstacles", "JSON list of {center, radius}");
    add(c_ks, "--y", "ks.y", "start point");
    add(c_ks, "--c1", "ks.c1", "constant c1");
    auto* c_g3 = check->add_subcommand("g3", "hitting probability of a ball from outside");
    add(c_g3, "--far", "g3.far_points", "JSON list of points");
    add(c_g3, "--truncation", "g3.truncation", "truncation factors");
    auto* c_j0 = check->add_subcommand("j0", "exit mass back into the big ball");
    add(c_j0, "--radii", "j0.radii", "radii");
    auto* c_lg = check->add_subcommand("lambda-g", "ball potential against the scale function");
    add(c_lg, "--radii", "lambda_g.radii", "radii");
    add(c_lg, "--grid", "lambda_g.grid", "offsets per radius");
    auto* c_prof = check->add_subcommand("profile", "radial profile comparability");
    add(c_prof, "--kind", "profile.kind", "power, power_log, truncated_power or constant");
    add(c_prof, "--exponent", "profile.exponent", "decay exponent");
    add(c_prof, "--log-power", "profile.log_power", "power of the log factor");
    add(c_prof, "--cutoff", "profile.cutoff", "truncation radius");
    add(c_prof, "--value", "profile.value", "constant value");
    add(c_prof, "--profile-theta", "profile.theta", "window factor");

    auto* cap = app.add_subcommand("capacity", "capacity bracket by linear programming");
    add(cap, "--shape", "capacity.shape", "ball or box");
    add(cap, "--spacing", "capacity.h", "grid spacings");

    auto add_constants = [&](CLI::App* s) {
        add(s, "--mode", "constants.mode", "manual or pipeline");
        for (const char* k : {"theta1", "theta2", "a1", "eta", "c", "c0", "cJ", "c1"})
            add(s, std::string("--") + k, std::string("constants.") + k, k);
    };
    auto* consts = app.add_subcommand("constants", "derived Harnack constants in exact arithmetic");
    add_constants(consts);
    auto* chain = app.add_subcommand("chain", "radius chain certificate");
    add_constants(chain);
    add(chain, "--m0-exponent", "chain.m0_exponent", "exponent of m0(r) = r^e");
    add(chain, "--R", "geometry.radius", "outer radius");
    add(chain, "--terms", "chain.terms", "explicit terms");
    auto* harn = app.add_subcommand("harnack", "empirical sup/inf ratio against K");
    add_constants(harn);
    add(harn, "--radii", "harnack.radii", "outer radii");
    add(harn, "--grid", "harnack.grid", "grid resolution");
    auto* hold = app.add_subcommand("holder", "Hoelder modulus fit");
    add(hold, "--fractions", "holder.fractions", "delta / R values");
    auto* metr = app.add_subcommand("metrize", "intrinsic quasi-metric and its metrization");
    add(metr, "--points", "metrize.points", "cloud size");
    add(metr, "--half-width", "metrize.half_width", "cloud region half width");
    add(metr, "--normalize", "metrize.normalize", "w or identity");
    add(metr, "--epsilon", "metrize.epsilon", "snowflake exponent (0: chaining rule)");
    auto* pipe = app.add_subcommand("pipeline", "every applicable check in dependency order");
    add(pipe, "--checks", "pipeline.checks", "JSON list of check names");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        std::cerr << "invalid config: " << e.what() << "\n";
        return 2;
    }

    try {
        Config cfg;
        if (!config_path.empty()) {
            std::ifstream f(config_path);
            try {
                cfg.doc = json::parse(f);
            } catch (const json::parse_error& e) {
                throw ConfigError("--config", std::string("not valid JSON: ") + e.what());
            }
            if (!cfg.doc.is_object()) throw ConfigError("--config", "top level must be an object");
        }
        for (const auto& [opt, key] : mapped) {
            if (opt->count() == 0) continue;
            json v;
            if (bool_flags.count(opt)) {
                v = true;
            } else {
                const std::string& s = opt->results().back();
                try {
                    v = json::parse(s);
                } catch (const json::parse_error&) {
                    v = s;
                    if (s.find(',') != std::string::npos) {
                        try {
                            v = json::parse("[" + s + "]");
                        } catch (const json::parse_error&) {
                        }
                    }
                }
            }
            Config::put(cfg.doc, key, v);
        }
        cfg.validate_keys();

        const std::uint64_t seed = cfg.seed("seed", 1);
        const int jobs = static_cast<int>(cfg.integer("jobs", 1, 1, 256));
        Output out;
        out.dir = cfg.text("output.dir", ".");
        const std::string format = cfg.choice("output.format", "both", {"json", "csv", "both"});
        out.json_out = format != "csv";
        out.csv_out = format != "json";
        const bool plain = cfg.boolean("output.plain", false);
        out.color = !plain && std::getenv("NO_COLOR") == nullptr && isatty(STDOUT_FILENO);

        std::vector<std::vector<Job>> stages;
        const Budget full{false}, quick{true};
        auto single = [&](const std::string& name, const Resolver& r) { stages.push_back({make_job(cfg, name, r, seed)}); };
        bool is_pipeline = false;

        if (axioms->parsed()) single("axioms", axioms_resolver(jobs, full));
        else if (iw->parsed()) single("iw", iw_resolver(jobs));
        else if (c_kkz->parsed()) single("kkz", kkz_resolver(full));
        else if (c_hj->parsed()) single("hj", hj_resolver());
        else if (c_ks->parsed()) single("ks", ks_resolver(jobs, full));
        else if (c_g3->parsed()) single("g3", g3_resolver(jobs, full));
        else if (c_j0->parsed()) single("j0", j0_resolver());
        else if (c_lg->parsed()) single("lambda-g", lambda_g_resolver(full));
        else if (c_prof->parsed()) single("profile", profile_resolver());
        else if (cap->parsed()) single("capacity", capacity_resolver());
        else if (consts->parsed()) single("constants", constants_resolver(nullptr, true));
        else if (chain->parsed()) single("chain", chain_resolver(nullptr));
        else if (harn->parsed()) single("harnack", harnack_resolver(nullptr, full));
        else if (hold->parsed()) single("holder", holder_resolver());
        else if (metr->parsed()) single("metrize", metrize_resolver(full));
        else if (pipe->parsed()) is_pipeline = true;

        std::shared_ptr<ConstantsSource> shared;
        if (is_pipeline) {
            // The process decides which checks apply; the recurrent case skips whole-space potentials.
            const int d = static_cast<int>(cfg.integer("process.d", 2, 1, kMaxDim));
            const double alpha = cfg.number("process.alpha", 1.0, Range::open(0.0, 2.0));
            const bool transient = d > alpha;
            std::vector<std::string> all = {"axioms", "iw", "kkz", "hj", "j0", "profile"};
            if (transient) all.insert(all.end(), {"lambda-g", "g3", "ks", "capacity"});
            all.insert(all.end(), {"constants", "chain", "harnack", "holder"});
            if (transient) all.push_back("metrize");
            std::vector<std::string> wanted = all;
            if (const json* j = cfg.find("pipeline.checks")) {
                if (!j->is_array()) throw ConfigError("pipeline.checks", "expected a list of check names");
                wanted.clear();
                for (const auto& e : *j) {
                    if (!e.is_string()) throw ConfigError("pipeline.checks", "expected a list of check names");
                    const std::string s = e.get<std::string>();
                    if (std::find(all.begin(), all.end(), s) == all.end())
                        throw ConfigError("pipeline.checks", "'" + s + "' is unknown or does not apply to this process");
                    wanted.push_back(s);
                }
            }
            json w = json::array();
            for (const auto& s : wanted) w.push_back(s);
            Config::put(cfg.effective, "pipeline.checks", w);
            auto on = [&](const std::string& s) { return std::find(wanted.begin(), wanted.end(), s) != wanted.end(); };
            const std::vector<std::vector<std::pair<std::string, Resolver>>> plan = {
                {{"axioms", axioms_resolver(jobs, quick)}},
                {{"iw", iw_resolver(jobs)}},
                {{"kkz", kkz_resolver(quick)}, {"hj", hj_resolver()}, {"j0", j0_resolver()},
                 {"profile", profile_resolver()}, {"lambda-g", lambda_g_resolver(quick)},
                 {"g3", g3_resolver(1, quick)}, {"ks", ks_resolver(1, quick)}, {"capacity", capacity_resolver()}},
                {{"constants", constants_resolver(&shared, false)}},
                {{"chain", chain_resolver(&shared)}, {"harnack", harnack_resolver(&shared, quick)},
                 {"holder", holder_resolver()}},
                {{"metrize", metrize_resolver(quick)}},
            };
            // Constants must resolve first so the later stages share one evaluation.
            for (const auto& stage : plan) {
                std::vector<Job> js;
                for (const auto& [name, r] : stage)
                    if (on(name)) js.push_back(make_job(cfg, name, r, seed));
                if (!js.empty()) stages.push_back(std::move(js));
            }
        }

        fs::create_directories(out.dir);
        const RunResult res = run_stages(stages, jobs, out);

        if (is_pipeline) {
            json s;
            s["tool"] = kTool;
            s["version"] = kVersion;
            s["seed"] = seed;
            const json hc = hashed_config(cfg.effective);
            s["config_hash"] = hex64(fnv1a(hc.dump()));
            s["config"] = hc;
            json checks = json::array();
            for (const auto& [job, o] : res.done)
                checks.push_back(json{{"check", job->name}, {"pass", o.rep.pass}, {"constant", num(o.rep.constant)},
                                      {"threshold", num(o.rep.threshold)},
                                      {"config_hash", hex64(fnv1a(job->config.dump()))}});
            s["checks"] = checks;
            s["pass"] = res.all_pass;
            write_file(out.dir / "pipeline.summary.json", s.dump(2) + "\n");
            std::cout << (res.all_pass ? "pipeline: all checks pass" : "pipeline: some checks fail") << "\n";
        }
        return res.all_pass ? 0 : 1;
    } catch (const ConfigError& e) {
        std::cerr << "invalid config: " << e.what() << "\n";
        return 2;
    } catch (const DomainError& e) {
        std::cerr << "invalid config: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
