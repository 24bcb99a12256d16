#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "fraccount/series.hpp"

namespace fraccount {

// Identifies one reproducible stream of draws. Distinct stream_ids under the
// same seed are decorrelated through a splitmix64 chain.
struct RngStream {
    std::uint64_t seed = 0;
    std::uint64_t stream_id = 0;

    RngStream substream(std::uint64_t offset) const {
        return {seed, stream_id + offset};
    }
};

namespace detail {
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}
}  // namespace detail

// All distributions are implemented explicitly on top of mt19937_64 so that a
// given (seed, stream_id) reproduces the same draws on every platform; the
// standard library's distribution classes make no such guarantee.
class Rng {
  public:
    explicit Rng(RngStream s) : engine_(derive_seed(s)) {}

    double uniform() {  // [0, 1)
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }
    double uniform_pos() {  // (0, 1]
        return 1.0 - uniform();
    }
    double exponential(double rate = 1.0) {
        return -std::log(uniform_pos()) / rate;
    }

    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform() - 1.0;
            v = 2.0 * uniform() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        double m = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * m;
        have_spare_ = true;
        return u * m;
    }

    // Marsaglia-Tsang; unit rate.
    double gamma(double shape) {
        if (!(shape > 0.0)) throw domain_error("Rng::gamma: requires shape > 0");
        if (shape < 1.0)
            return gamma(shape + 1.0) * std::pow(uniform_pos(), 1.0 / shape);
        double d = shape - 1.0 / 3.0;
        double c = 1.0 / (3.0 * std::sqrt(d));
        for (;;) {
            double x = normal();
            double v = 1.0 + c * x;
            if (v <= 0.0) continue;
            v = v * v * v;
            double u = uniform_pos();
            if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
            if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
        }
    }
    double gamma(double shape, double rate) { return gamma(shape) / rate; }

    std::uint64_t poisson(double mean) {
        if (mean < 0.0 || !std::isfinite(mean))
            throw domain_error("Rng::poisson: requires finite mean >= 0");
        if (mean == 0.0) return 0;
        if (mean < 10.0) return poisson_inversion(mean);
        return poisson_ptrs(mean);
    }

    std::uint64_t binomial(std::uint64_t n, double p) {
        std::uint64_t k = 0;
        for (std::uint64_t i = 0; i < n; ++i)
            if (uniform() < p) ++k;
        return k;
    }

    // Splits n trials over the probability vector; probabilities must sum to 1.
    std::vector<std::uint64_t> multinomial(std::uint64_t n, const std::vector<double>& probs) {
        std::vector<std::uint64_t> counts(probs.size(), 0);
        for (std::uint64_t i = 0; i < n; ++i) {
            double u = uniform();
            double acc = 0.0;
            std::size_t j = 0;
            for (; j + 1 < probs.size(); ++j) {
                acc += probs[j];
                if (u < acc) break;
            }
            ++counts[j];
        }
        return counts;
    }

  private:
    static std::uint64_t derive_seed(RngStream s) {
        std::uint64_t state = s.seed;
        std::uint64_t a = detail::splitmix64(state);
        state ^= 0x6a09e667f3bcc909ULL + s.stream_id;
        std::uint64_t b = detail::splitmix64(state);
        return a ^ (b + 0x9e3779b97f4a7c15ULL + (s.stream_id << 1));
    }

    std::uint64_t poisson_inversion(double mean) {
        double l = std::exp(-mean);
        std::uint64_t k = 0;
        double p = 1.0;
        do {
            ++k;
            p *= uniform();
        } while (p > l);
        return k - 1;
    }

    // Hormann's PTRS transformed-rejection sampler, valid for mean >= 10.
    std::uint64_t poisson_ptrs(double mean) {
        double b = 0.931 + 2.53 * std::sqrt(mean);
        double a = -0.059 + 0.02483 * b;
        double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
        double v_r = 0.9277 - 3.6224 / (b - 2.0);
        double log_mean = std::log(mean);
        for (;;) {
            double u = uniform() - 0.5;
            double v = uniform();
            double us = 0.5 - std::abs(u);
            double kf = std::floor((2.0 * a / us + b) * u + mean + 0.43);
            if (us >= 0.07 && v <= v_r) return static_cast<std::uint64_t>(kf);
            if (kf < 0.0 || (us < 0.013 && v > us)) continue;
            if (std::log(v * inv_alpha / (a / (us * us) + b)) <=
                kf * log_mean - mean - std::lgamma(kf + 1.0))
                return static_cast<std::uint64_t>(kf);
        }
    }

    std::mt19937_64 engine_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace fraccount
