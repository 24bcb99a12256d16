#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <utility>
#include <vector>

#include "fraccount/series.hpp"

namespace fraccount {

// log |Gamma(x)| with the sign of Gamma(x); sign 0 marks a pole.
struct LogGamma {
    double log_abs;
    int sign;
};

namespace detail {
// Arguments this close to a nonpositive integer are treated as on the pole.
// The parameter grids exercised keep legitimate off-pole arguments at least
// ~0.1 away from integers, so the snap cannot misclassify them.
inline constexpr double kPoleSnap = 1e-9;

inline bool near_nonpositive_integer(double x, double* nearest = nullptr) {
    double n = std::round(x);
    if (nearest) *nearest = n;
    return n <= 0.0 && std::abs(x - n) <= kPoleSnap;
}

// sin(pi*x) with exact argument reduction (x = n + r, r in [-1/2, 1/2]).
inline double sin_pi(double x) {
    double n = std::round(x);
    double r = x - n;
    double s = std::sin(M_PI * r);
    return (std::fmod(std::abs(n), 2.0) == 1.0) ? -s : s;
}
}  // namespace detail

inline LogGamma lgamma_signed(double x) {
    if (x > 0.0) return {std::lgamma(x), 1};
    if (detail::near_nonpositive_integer(x)) return {INFINITY, 0};
    // Reflection: Gamma(x) = pi / (sin(pi x) * Gamma(1 - x)).
    double s = detail::sin_pi(x);
    double log_abs = std::log(M_PI) - std::log(std::abs(s)) - std::lgamma(1.0 - x);
    return {log_abs, s > 0.0 ? 1 : -1};
}

// psi(x) for x > 0: argument shift into the asymptotic regime, then the
// Stirling tail with Bernoulli coefficients through B14.
inline double digamma(double x) {
    if (!(x > 0.0)) throw domain_error("digamma: requires x > 0");
    double result = 0.0;
    while (x < 10.0) {
        result -= 1.0 / x;
        x += 1.0;
    }
    static const double coef[7] = {
        1.0 / 12.0, -1.0 / 120.0, 1.0 / 252.0, -1.0 / 240.0,
        1.0 / 132.0, -691.0 / 32760.0, 1.0 / 12.0,
    };
    double inv2 = 1.0 / (x * x);
    double tail = 0.0;
    double p = inv2;
    for (double c : coef) {
        tail += c * p;
        p *= inv2;
    }
    return result + std::log(x) - 0.5 / x - tail;
}

// Binomial coefficient with real upper argument, computed as the product
// prod_{i<j} (a - i)/(i + 1); exact at j = 0.
inline double gen_binomial(double a, std::uint32_t j) {
    double c = 1.0;
    for (std::uint32_t i = 0; i < j; ++i) c *= (a - i) / (i + 1.0);
    return c;
}

// Three-parameter (Prabhakar) Mittag-Leffler function:
//   E_{a,b}^g(z) = sum_k Gamma(g + k) z^k / (Gamma(g) k! Gamma(a k + b)).
inline EvalResult mittag_leffler_3p(double a, double b, double g, double z,
                                    const SeriesControl& ctrl = {}) {
    if (!(a > 0.0) || !(b > 0.0) || !(g > 0.0))
        throw domain_error("mittag_leffler_3p: requires a, b, g > 0");
    double lgg = std::lgamma(g);
    double log_abs_z = (z == 0.0) ? 0.0 : std::log(std::abs(z));
    auto term = [&](std::size_t k) -> double {
        if (z == 0.0 && k > 0) return 0.0;
        double kk = static_cast<double>(k);
        double lt = std::lgamma(g + kk) - lgg - std::lgamma(kk + 1.0) -
                    std::lgamma(a * kk + b) + kk * log_abs_z;
        double sign = (z < 0.0 && (k & 1)) ? -1.0 : 1.0;
        return sign * std::exp(lt);
    };
    return sum_series(term, ctrl, "mittag_leffler_3p");
}

// Fox-Wright generalized hypergeometric series
//   sum_k z^k / k! * prod_i Gamma(a_i + A_i k) / prod_j Gamma(b_j + B_j k).
// Lower-parameter poles zero the term (reciprocal-gamma convention); an upper
// pole is a caller error unless the offending index is skipped via
// `first_term`.
struct WrightSpec {
    std::vector<std::pair<double, double>> upper;  // (a_i, A_i)
    std::vector<std::pair<double, double>> lower;  // (b_j, B_j)

    // sum B_j - sum A_i; the series is entire when this exceeds -1 and has
    // radius prod B_j^{B_j} / prod A_i^{A_i} on the boundary case -1.
    double convergence_index() const {
        double d = 0.0;
        for (auto& [b, B] : lower) d += B;
        for (auto& [a, A] : upper) d -= A;
        return d;
    }
    double boundary_radius() const {
        double r = 1.0;
        for (auto& [b, B] : lower)
            if (B > 0.0) r *= std::pow(B, B);
        for (auto& [a, A] : upper)
            if (A > 0.0) r *= std::pow(A, -A);
        return r;
    }
    void check_domain(double abs_z) const {
        double d = convergence_index();
        if (d > -1.0 + 1e-12) return;
        if (d < -1.0 - 1e-12)
            throw domain_error("wright_pq: divergent parameter combination");
        if (!(abs_z < boundary_radius()))
            throw convergence_error("wright_pq: |z| outside convergence radius", 0, abs_z);
    }
};

namespace detail {
struct WrightTerm {
    double log_abs;
    int sign;  // 0 means the term vanishes via a lower-parameter pole
};

inline WrightTerm wright_log_term(const WrightSpec& spec, std::size_t k) {
    double kk = static_cast<double>(k);
    double log_abs = -std::lgamma(kk + 1.0);
    int sign = 1;
    for (auto& [a, A] : spec.upper) {
        LogGamma g = lgamma_signed(a + A * kk);
        if (g.sign == 0)
            throw domain_error("wright_pq: upper parameter pole at term " + std::to_string(k));
        log_abs += g.log_abs;
        sign *= g.sign;
    }
    for (auto& [b, B] : spec.lower) {
        LogGamma g = lgamma_signed(b + B * kk);
        if (g.sign == 0) return {0.0, 0};
        log_abs -= g.log_abs;
        sign *= g.sign;
    }
    return {log_abs, sign};
}
}  // namespace detail

inline EvalResult wright_pq(const WrightSpec& spec, double z,
                            const SeriesControl& ctrl = {}, std::size_t first_term = 0) {
    spec.check_domain(std::abs(z));
    double log_abs_z = (z == 0.0) ? 0.0 : std::log(std::abs(z));
    auto term = [&](std::size_t k) -> double {
        if (z == 0.0 && k > 0) return 0.0;
        auto t = detail::wright_log_term(spec, k);
        if (t.sign == 0) return 0.0;
        double sign = (z < 0.0 && (k & 1)) ? -t.sign : t.sign;
        return sign * std::exp(t.log_abs + static_cast<double>(k) * log_abs_z);
    };
    return sum_series(term, ctrl, "wright_pq", first_term);
}

// Complex-argument variant; same term recurrence with the phase carried by z^k.
struct ComplexEvalResult {
    std::complex<double> value;
    double abs_error_bound = 0.0;
    std::size_t terms_used = 0;
    bool converged = false;
};

inline ComplexEvalResult wright_pq(const WrightSpec& spec, std::complex<double> z,
                                   const SeriesControl& ctrl = {},
                                   std::size_t first_term = 0) {
    spec.check_domain(std::abs(z));
    ctrl.validate();
    std::complex<double> sum = 0.0;
    std::complex<double> zk = 1.0;
    for (std::size_t p = 0; p < first_term; ++p) zk *= z;
    std::size_t small_run = 0;
    bool seen_nonzero = false;
    double prev_mag = INFINITY;
    ComplexEvalResult r;
    for (std::size_t k = first_term; k < first_term + ctrl.max_terms; ++k) {
        auto t = detail::wright_log_term(spec, k);
        std::complex<double> tk = 0.0;
        if (t.sign != 0) tk = static_cast<double>(t.sign) * std::exp(t.log_abs) * zk;
        zk *= z;
        sum += tk;
        double mag = std::abs(tk);
        if (mag > 0.0) seen_nonzero = true;
        double thr = std::max(ctrl.abs_tol, ctrl.rel_tol * std::abs(sum));
        if (seen_nonzero && mag <= thr && mag <= prev_mag)
            ++small_run;
        else
            small_run = 0;
        prev_mag = mag;
        r.terms_used = k - first_term + 1;
        r.abs_error_bound = mag;
        if (small_run >= 4) {
            r.value = sum;
            r.converged = true;
            return r;
        }
    }
    r.value = sum;
    r.converged = false;
    return r;
}

// Regularized incomplete gamma functions P(a, x) and Q(a, x) = 1 - P(a, x);
// series expansion below a + 1, Lentz continued fraction above.
inline double igamma_p(double a, double x);

inline double igamma_q(double a, double x) {
    if (!(a > 0.0) || x < 0.0) throw domain_error("igamma_q: requires a > 0, x >= 0");
    if (x < a + 1.0) return 1.0 - igamma_p(a, x);
    const double kFpMin = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / kFpMin;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= 400; ++i) {
        double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < kFpMin) d = kFpMin;
        c = b + an / c;
        if (std::abs(c) < kFpMin) c = kFpMin;
        d = 1.0 / d;
        double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < 1e-15)
            return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
    }
    throw convergence_error("igamma_q continued fraction", 400, h);
}

inline double igamma_p(double a, double x) {
    if (!(a > 0.0) || x < 0.0) throw domain_error("igamma_p: requires a > 0, x >= 0");
    if (x == 0.0) return 0.0;
    if (x >= a + 1.0) return 1.0 - igamma_q(a, x);
    double ap = a;
    double sum = 1.0 / a;
    double del = sum;
    for (int i = 0; i < 800; ++i) {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if (std::abs(del) < std::abs(sum) * 1e-16)
            return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
    }
    throw convergence_error("igamma_p series", 800, del);
}

inline double gamma_cdf(double x, double shape, double rate) {
    if (x <= 0.0) return 0.0;
    return igamma_p(shape, rate * x);
}

}  // namespace fraccount
