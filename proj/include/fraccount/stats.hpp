#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

#include "fraccount/rng.hpp"
#include "fraccount/specfun.hpp"

namespace fraccount {

struct MomentAccumulator {
    std::size_t n = 0;
    double mean = 0.0;
    double m2 = 0.0;

    void add(double x) {
        ++n;
        double d = x - mean;
        mean += d / static_cast<double>(n);
        m2 += d * (x - mean);
    }
    void merge(const MomentAccumulator& o) {
        if (o.n == 0) return;
        if (n == 0) {
            *this = o;
            return;
        }
        double d = o.mean - mean;
        std::size_t tot = n + o.n;
        mean += d * static_cast<double>(o.n) / static_cast<double>(tot);
        m2 += o.m2 + d * d * static_cast<double>(n) * static_cast<double>(o.n) /
                         static_cast<double>(tot);
        n = tot;
    }
    double variance() const { return n > 1 ? m2 / static_cast<double>(n - 1) : 0.0; }
    double std_error() const {
        return n > 0 ? std::sqrt(variance() / static_cast<double>(n)) : 0.0;
    }
};

struct CovAccumulator {
    std::size_t n = 0;
    double mean_x = 0.0, mean_y = 0.0;
    double m2x = 0.0, m2y = 0.0, cxy = 0.0;

    void add(double x, double y) {
        ++n;
        double dx = x - mean_x;
        mean_x += dx / static_cast<double>(n);
        double dy = y - mean_y;
        mean_y += dy / static_cast<double>(n);
        m2x += dx * (x - mean_x);
        m2y += dy * (y - mean_y);
        cxy += dx * (y - mean_y);
    }
    void merge(const CovAccumulator& o) {
        if (o.n == 0) return;
        if (n == 0) {
            *this = o;
            return;
        }
        std::size_t tot = n + o.n;
        double dx = o.mean_x - mean_x;
        double dy = o.mean_y - mean_y;
        double w = static_cast<double>(n) * static_cast<double>(o.n) / static_cast<double>(tot);
        m2x += o.m2x + dx * dx * w;
        m2y += o.m2y + dy * dy * w;
        cxy += o.cxy + dx * dy * w;
        mean_x += dx * static_cast<double>(o.n) / static_cast<double>(tot);
        mean_y += dy * static_cast<double>(o.n) / static_cast<double>(tot);
        n = tot;
    }
    double covariance() const { return n > 1 ? cxy / static_cast<double>(n - 1) : 0.0; }
    double var_x() const { return n > 1 ? m2x / static_cast<double>(n - 1) : 0.0; }
    double var_y() const { return n > 1 ? m2y / static_cast<double>(n - 1) : 0.0; }
    double correlation() const {
        double d = std::sqrt(var_x() * var_y());
        return d > 0.0 ? covariance() / d : 0.0;
    }
};

// Runs `fn(rng)` n times, split into fixed chunks that each own a substream of
// `base`; chunk results are merged in index order, so the outcome is identical
// for every thread count. Chunk indices occupy the high bits of the stream id,
// so runs whose base stream ids differ by less than 2^32 never share a chunk
// stream; keep caller-chosen ids below 2^32.
template <typename Acc, typename Fn>
Acc run_mc(RngStream base, std::size_t n, Fn&& fn, unsigned threads = 0,
           std::size_t chunks = 256) {
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    chunks = std::max<std::size_t>(1, std::min(chunks, n == 0 ? 1 : n));
    std::vector<Acc> partial(chunks);
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            std::size_t c = next.fetch_add(1);
            if (c >= chunks) return;
            std::size_t lo = n * c / chunks;
            std::size_t hi = n * (c + 1) / chunks;
            Rng rng(base.substream(static_cast<std::uint64_t>(c) << 32));
            Acc acc;
            for (std::size_t i = lo; i < hi; ++i) fn(rng, acc);
            partial[c] = acc;
        }
    };
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    Acc total;
    for (auto& p : partial) total.merge(p);
    return total;
}

inline double chi2_sf(double x, double df) { return igamma_q(df / 2.0, x / 2.0); }

struct Chi2Result {
    double statistic = 0.0;
    double df = 0.0;
    double p_value = 1.0;
};

// Two-sample chi-square over a shared binning; bins empty in both samples are
// dropped from the degrees of freedom.
inline Chi2Result chi2_two_sample(const std::vector<double>& c1,
                                  const std::vector<double>& c2) {
    double n1 = 0.0, n2 = 0.0;
    for (double v : c1) n1 += v;
    for (double v : c2) n2 += v;
    if (n1 <= 0.0 || n2 <= 0.0) throw domain_error("chi2_two_sample: empty sample");
    double k1 = std::sqrt(n2 / n1);
    double k2 = std::sqrt(n1 / n2);
    Chi2Result r;
    std::size_t used = 0;
    for (std::size_t i = 0; i < c1.size(); ++i) {
        double tot = c1[i] + c2[i];
        if (tot <= 0.0) continue;
        double d = k1 * c1[i] - k2 * c2[i];
        r.statistic += d * d / tot;
        ++used;
    }
    if (used < 2) throw domain_error("chi2_two_sample: fewer than two occupied bins");
    r.df = static_cast<double>(used - 1);
    r.p_value = chi2_sf(r.statistic, r.df);
    return r;
}

namespace detail {
inline double ks_p_value(double d, double ne) {
    double lambda = (std::sqrt(ne) + 0.12 + 0.11 / std::sqrt(ne)) * d;
    double sum = 0.0;
    for (int j = 1; j <= 100; ++j) {
        double t = 2.0 * std::exp(-2.0 * j * j * lambda * lambda);
        sum += (j & 1) ? t : -t;
        if (t < 1e-12) break;
    }
    return std::clamp(sum, 0.0, 1.0);
}
}  // namespace detail

struct KsResult {
    double statistic = 0.0;
    double p_value = 1.0;
};

inline KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x) ++i;
        while (j < b.size() && b[j] <= x) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return {d, detail::ks_p_value(d, na * nb / (na + nb))};
}

inline KsResult ks_one_sample(std::vector<double> a, const std::function<double(double)>& cdf) {
    std::sort(a.begin(), a.end());
    double n = static_cast<double>(a.size());
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double f = cdf(a[i]);
        d = std::max(d, std::abs(static_cast<double>(i + 1) / n - f));
        d = std::max(d, std::abs(f - static_cast<double>(i) / n));
    }
    return {d, detail::ks_p_value(d, n)};
}

// Least-squares slope of y against x.
inline double ols_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw domain_error("ols_slope: need >= 2 points");
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(x.size());
    my /= static_cast<double>(x.size());
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        num += (x[i] - mx) * (y[i] - my);
        den += (x[i] - mx) * (x[i] - mx);
    }
    return num / den;
}

}  // namespace fraccount
