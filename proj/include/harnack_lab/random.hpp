#pragma once
// Seeded random streams, Wilson intervals and a deterministic chunked Monte Carlo driver.

#include <algorithm>
#include <boost/math/distributions/normal.hpp>
#include <boost/random/gamma_distribution.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_01.hpp>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <thread>
#include <vector>

#include "harnack_lab/geometry.hpp"

namespace harnack_lab {

// (seed, stream_id) fully determines the sequence.
struct RngStream {
    std::uint64_t seed = 0;
    std::uint64_t stream_id = 0;
};

class Rng {
public:
    explicit Rng(RngStream s) {
        std::seed_seq seq{static_cast<std::uint32_t>(s.seed), static_cast<std::uint32_t>(s.seed >> 32),
                          static_cast<std::uint32_t>(s.stream_id), static_cast<std::uint32_t>(s.stream_id >> 32),
                          0x9e3779b9u};
        eng_.seed(seq);
    }

    double uniform() { return boost::random::uniform_01<double>()(eng_); }
    double normal() { return boost::random::normal_distribution<double>()(eng_); }
    double gamma(double shape) { return boost::random::gamma_distribution<double>(shape)(eng_); }
    double beta(double a, double b) {
        const double x = gamma(a), y = gamma(b);
        return x / (x + y);
    }
    Vec direction(int d) {
        Vec v(d);
        if (d == 1) {
            v[0] = uniform() < 0.5 ? -1.0 : 1.0;
            return v;
        }
        double n2 = 0.0;
        do {
            for (int i = 0; i < d; ++i) v[i] = normal();
            n2 = norm2(v);
        } while (n2 == 0.0);
        return v * (1.0 / std::sqrt(n2));
    }
    std::mt19937_64& engine() { return eng_; }

private:
    std::mt19937_64 eng_;
};

struct ProportionCI {
    double estimate = 0.0, lo = 0.0, hi = 1.0;
};

inline double normal_quantile_two_sided(double level) {
    boost::math::normal_distribution<double> n;
    return boost::math::quantile(n, 0.5 + 0.5 * level);
}

// Wilson score interval for k successes out of n.
inline ProportionCI wilson_interval(long k, long n, double level = 0.99) {
    if (n <= 0) return {};
    const double z = normal_quantile_two_sided(level);
    const double ph = static_cast<double>(k) / static_cast<double>(n);
    const double z2n = z * z / static_cast<double>(n);
    const double center = (ph + 0.5 * z2n) / (1.0 + z2n);
    const double half = z * std::sqrt(ph * (1.0 - ph) / static_cast<double>(n) + 0.25 * z2n / n) / (1.0 + z2n);
    return {ph, std::max(0.0, center - half), std::min(1.0, center + half)};
}

// Splits `total` draws into fixed chunks; chunk i always uses stream_id i, and chunk results
// are merged in index order, so the outcome does not depend on `jobs`.
template <class Acc, class Body, class Merge>
Acc run_chunked(long total, long chunk, std::uint64_t seed, int jobs, Body body, Merge merge, Acc init = Acc{}) {
    if (chunk <= 0) chunk = 1;
    const long nchunks = (total + chunk - 1) / chunk;
    std::vector<Acc> parts(static_cast<std::size_t>(nchunks));
    auto work = [&](long i) {
        const long count = std::min(chunk, total - i * chunk);
        Rng rng(RngStream{seed, static_cast<std::uint64_t>(i)});
        parts[static_cast<std::size_t>(i)] = body(count, rng);
    };
    jobs = std::max(1, jobs);
    if (jobs == 1 || nchunks <= 1) {
        for (long i = 0; i < nchunks; ++i) work(i);
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < jobs; ++t)
            pool.emplace_back([&, t] {
                for (long i = t; i < nchunks; i += jobs) work(i);
            });
        for (auto& th : pool) th.join();
    }
    Acc acc = init;
    for (auto& part : parts) acc = merge(acc, part);
    return acc;
}

// Two-sample Kolmogorov-Smirnov distance (inputs are copied and sorted).
inline double ks_distance(std::vector<double> a, std::vector<double> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    std::size_t i = 0, j = 0;
    double best = 0.0;
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    while (i < a.size() && j < b.size()) {
        const double v = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= v) ++i;
        while (j < b.size() && b[j] <= v) ++j;
        best = std::max(best, std::abs(i / na - j / nb));
    }
    return best;
}

// One-sample Kolmogorov-Smirnov distance against a continuous CDF.
template <class Cdf>
double ks_distance_cdf(std::vector<double> a, Cdf cdf) {
    std::sort(a.begin(), a.end());
    const double n = static_cast<double>(a.size());
    double best = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double f = cdf(a[i]);
        best = std::max({best, std::abs(f - i / n), std::abs((i + 1) / n - f)});
    }
    return best;
}

}  // namespace harnack_lab
