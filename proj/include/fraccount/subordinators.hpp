#pragma once

// Laplace exponents and exact-in-law samplers for the subordinators that
// drive every time change in this library: gamma, stable, tempered stable
// (TSS), mixtures of TSS, and the inverse (first passage) of a mixture.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "fraccount/rng.hpp"
#include "fraccount/series.hpp"
#include "fraccount/specfun.hpp"

namespace fraccount {

// Thrown when a first-passage simulation fails to cross its target level
// within the auto-sized safety horizon.
struct horizon_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Tempered stable subordinator S^{alpha,theta}, Laplace exponent
// (u+theta)^alpha - theta^alpha. alpha = 1 is admitted as the degenerate
// unit-drift limit (the exponent collapses to u for every theta); several
// closed-form reductions need it.
struct TssParams {
    double alpha = 0.5;
    double theta = 0.0;

    void validate() const {
        if (!(alpha > 0.0) || !(alpha <= 1.0))
            throw domain_error("TssParams: alpha must lie in (0, 1]");
        if (!(theta >= 0.0)) throw domain_error("TssParams: theta must be >= 0");
    }
};

// Gamma subordinator G(mu, rho*t): rate mu, shape growing at rho per unit time.
struct GammaParams {
    double mu = 1.0;
    double rho = 1.0;

    void validate() const {
        if (!(mu > 0.0)) throw domain_error("GammaParams: mu must be > 0");
        if (!(rho > 0.0)) throw domain_error("GammaParams: rho must be > 0");
    }
};

// Weighted mixture of two TSS components; the weights act as operational-time
// multipliers, so the exponent is eta1*psi1(u) + eta2*psi2(u).
struct MixtureParams {
    double eta1 = 1.0;
    double eta2 = 0.0;
    TssParams tss1;
    TssParams tss2;

    void validate() const {
        tss1.validate();
        tss2.validate();
        if (!(eta1 >= 0.0) || !(eta2 >= 0.0))
            throw domain_error("MixtureParams: weights must be >= 0");
        if (!(eta1 + eta2 > 0.0))
            throw domain_error("MixtureParams: at least one weight must be positive");
    }
};

inline double laplace_exponent_tss(double u, const TssParams& p) {
    p.validate();
    if (!(u >= 0.0)) throw domain_error("laplace_exponent_tss: u must be >= 0");
    return std::pow(u + p.theta, p.alpha) - std::pow(p.theta, p.alpha);
}

inline std::complex<double> laplace_exponent_tss(std::complex<double> u, const TssParams& p) {
    p.validate();
    return std::pow(u + p.theta, p.alpha) - std::pow(p.theta, p.alpha);
}

inline double laplace_exponent_gamma(double u, const GammaParams& g) {
    g.validate();
    if (!(u >= 0.0)) throw domain_error("laplace_exponent_gamma: u must be >= 0");
    return g.rho * std::log1p(u / g.mu);
}

inline std::complex<double> laplace_exponent_gamma(std::complex<double> u, const GammaParams& g) {
    g.validate();
    return g.rho * std::log(1.0 + u / g.mu);
}

// Exponent of the composed subordinator S^{alpha,theta}(Gamma(t)):
// rho*[log(mu - theta^alpha + (theta+u)^alpha) - log(mu)].
inline double laplace_exponent_composed(double u, const TssParams& p, const GammaParams& g) {
    return g.rho * std::log1p(laplace_exponent_tss(u, p) / g.mu);
}

inline std::complex<double> laplace_exponent_composed(std::complex<double> u, const TssParams& p,
                                                      const GammaParams& g) {
    return g.rho * std::log(1.0 + laplace_exponent_tss(u, p) / g.mu);
}

inline double laplace_exponent_mixture(double u, const MixtureParams& m) {
    m.validate();
    if (!(u >= 0.0)) throw domain_error("laplace_exponent_mixture: u must be >= 0");
    double s = 0.0;
    if (m.eta1 > 0.0) s += m.eta1 * laplace_exponent_tss(u, m.tss1);
    if (m.eta2 > 0.0) s += m.eta2 * laplace_exponent_tss(u, m.tss2);
    return s;
}

inline std::complex<double> laplace_exponent_mixture(std::complex<double> u,
                                                     const MixtureParams& m) {
    m.validate();
    std::complex<double> s = 0.0;
    if (m.eta1 > 0.0) s += m.eta1 * laplace_exponent_tss(u, m.tss1);
    if (m.eta2 > 0.0) s += m.eta2 * laplace_exponent_tss(u, m.tss2);
    return s;
}

inline constexpr int kMaxPsiOrder = 30;

// Derivatives psi', ..., psi^(J) of the composed exponent at u, by truncated
// Taylor (jet) arithmetic: the inner power has closed-form jet coefficients
// binom(alpha,j)*(theta+u)^(alpha-j), and log is propagated through the
// standard quotient recurrence for series composition.
inline std::vector<double> psi_derivatives(double u, int order, const TssParams& p,
                                           const GammaParams& g) {
    p.validate();
    g.validate();
    if (!(u > 0.0)) throw domain_error("psi_derivatives: u must be > 0");
    if (order < 1) throw domain_error("psi_derivatives: order must be >= 1");
    if (order > kMaxPsiOrder)
        throw domain_error("psi_derivatives: unsupported order, maximum is 30");

    const int n_max = order;
    const double base = p.theta + u;
    std::vector<double> gj(n_max + 1), hj(n_max + 1);
    gj[0] = g.mu - std::pow(p.theta, p.alpha) + std::pow(base, p.alpha);
    for (int j = 1; j <= n_max; ++j)
        gj[j] = gen_binomial(p.alpha, j) * std::pow(base, p.alpha - j);

    hj[0] = std::log(gj[0]);
    for (int n = 1; n <= n_max; ++n) {
        double acc = gj[n];
        for (int k = 1; k < n; ++k)
            acc -= (static_cast<double>(k) / n) * hj[k] * gj[n - k];
        hj[n] = acc / gj[0];
    }

    std::vector<double> out(n_max);
    double factorial = 1.0;
    for (int j = 1; j <= n_max; ++j) {
        factorial *= j;
        out[j - 1] = g.rho * factorial * hj[j];
    }
    return out;
}

// One increment of the stable subordinator with transform e^{-dt*u^alpha},
// via Kanter's representation: with U ~ Unif(0,pi) and E ~ Exp(1),
//   X = sin(alpha*U)/sin(U)^{1/alpha} * (sin((1-alpha)*U)/E)^{(1-alpha)/alpha}
// has transform e^{-u^alpha}; scaling by dt^{1/alpha} gives the increment.
inline double sample_stable_increment(double alpha, double dt, Rng& rng) {
    if (!(alpha > 0.0) || !(alpha <= 1.0))
        throw domain_error("sample_stable_increment: alpha must lie in (0, 1]");
    if (!(dt > 0.0)) throw domain_error("sample_stable_increment: dt must be > 0");
    if (alpha == 1.0) return dt;

    constexpr double kPi = 3.14159265358979323846;
    double v;
    do {
        v = rng.uniform();
    } while (v == 0.0);
    double u = kPi * v;
    double e;
    do {
        e = rng.exponential();
    } while (!(e > 0.0));

    double x = std::sin(alpha * u) / std::pow(std::sin(u), 1.0 / alpha) *
               std::pow(std::sin((1.0 - alpha) * u) / e, (1.0 - alpha) / alpha);
    return std::pow(dt, 1.0 / alpha) * x;
}

// One increment of the tempered stable subordinator, by exponential-tilting
// rejection. The interval is split into n = ceil(dt*theta^alpha) pieces so
// the per-piece acceptance probability e^{-h*theta^alpha} stays >= 1/e;
// each piece proposes a stable draw X and accepts it with probability
// e^{-theta*X}.
inline double sample_tss_increment(const TssParams& p, double dt, Rng& rng) {
    p.validate();
    if (!(dt > 0.0)) throw domain_error("sample_tss_increment: dt must be > 0");
    if (p.alpha == 1.0) return dt;
    if (p.theta == 0.0) return sample_stable_increment(p.alpha, dt, rng);

    double ta = std::pow(p.theta, p.alpha);
    auto pieces = static_cast<std::uint64_t>(std::max(1.0, std::ceil(dt * ta)));
    double h = dt / static_cast<double>(pieces);
    double total = 0.0;
    for (std::uint64_t i = 0; i < pieces; ++i) {
        for (;;) {
            double x = sample_stable_increment(p.alpha, h, rng);
            if (rng.uniform() < std::exp(-p.theta * x)) {
                total += x;
                break;
            }
        }
    }
    return total;
}

// One increment of the gamma subordinator G(mu, rho*dt).
inline double sample_gamma_increment(const GammaParams& g, double dt, Rng& rng) {
    g.validate();
    if (!(dt > 0.0)) throw domain_error("sample_gamma_increment: dt must be > 0");
    return rng.gamma(g.rho * dt, g.mu);
}

// One increment of the composed subordinator S^{alpha,theta}(Gamma(dt)).
inline double sample_composed_increment(const TssParams& p, const GammaParams& g, double dt,
                                        Rng& rng) {
    double op = sample_gamma_increment(g, dt, rng);
    if (!(op > 0.0)) return 0.0;
    return sample_tss_increment(p, op, rng);
}

// One increment of the TSS mixture over dt, realized as independent TSS
// increments over the weighted operational times eta_i*dt.
inline double sample_mixture_tss_increment(const MixtureParams& m, double dt, Rng& rng) {
    m.validate();
    if (!(dt > 0.0)) throw domain_error("sample_mixture_tss_increment: dt must be > 0");
    double total = 0.0;
    if (m.eta1 > 0.0) total += sample_tss_increment(m.tss1, m.eta1 * dt, rng);
    if (m.eta2 > 0.0) total += sample_tss_increment(m.tss2, m.eta2 * dt, rng);
    return total;
}

namespace detail {

struct InverseCrossing {
    double passage_time = 0.0;  // interpolated first-passage estimate
    double op_lo = 0.0;         // grid times bracketing the crossing
    double op_hi = 0.0;
    double level_lo = 0.0;  // path values at the bracket: level_lo <= t < level_hi
    double level_hi = 0.0;
};

// Walks the mixture path on the operational-time grid until it exceeds t and
// linearly interpolates the crossing. The safety horizon is sized from the
// mean growth rate when every active component is tempered (finite mean);
// untempered components only make the crossing faster, so the hard cap on
// steps covers them.
inline InverseCrossing inverse_mixture_crossing(const MixtureParams& m, double t, double grid_dt,
                                                Rng& rng) {
    m.validate();
    if (!(t > 0.0)) throw domain_error("sample_inverse_mixture_tss: t must be > 0");
    if (!(grid_dt > 0.0)) throw domain_error("sample_inverse_mixture_tss: grid_dt must be > 0");

    double mean_rate = 0.0;
    bool rate_finite = true;
    for (auto [eta, tss] : {std::pair{m.eta1, m.tss1}, std::pair{m.eta2, m.tss2}}) {
        if (eta <= 0.0) continue;
        if (tss.alpha == 1.0)
            mean_rate += eta;
        else if (tss.theta > 0.0)
            mean_rate += eta * tss.alpha * std::pow(tss.theta, tss.alpha - 1.0);
        else
            rate_finite = false;
    }

    std::uint64_t max_steps = 100000000ULL;
    if (rate_finite && mean_rate > 0.0) {
        double horizon = 200.0 * t / mean_rate + 1000.0 * grid_dt;
        auto steps = static_cast<std::uint64_t>(std::ceil(horizon / grid_dt));
        max_steps = std::min(max_steps, std::max<std::uint64_t>(steps, 100000ULL));
    }

    double level_prev = 0.0;
    for (std::uint64_t step = 1; step <= max_steps; ++step) {
        double level = level_prev + sample_mixture_tss_increment(m, grid_dt, rng);
        if (level > t) {
            double op_hi = static_cast<double>(step) * grid_dt;
            double op_lo = op_hi - grid_dt;
            double frac = (t - level_prev) / (level - level_prev);
            return {op_lo + grid_dt * frac, op_lo, op_hi, level_prev, level};
        }
        level_prev = level;
    }
    throw horizon_error("sample_inverse_mixture_tss: path failed to cross the target level "
                        "within the safety horizon");
}

}  // namespace detail

// Approximate first-passage time E(t) = inf{s : S(s) > t} of the TSS mixture,
// simulated on an operational-time grid of spacing grid_dt with linear
// interpolation at the crossing. The discretization bias is O(grid_dt).
inline double sample_inverse_mixture_tss(const MixtureParams& m, double t, double grid_dt,
                                         Rng& rng) {
    return detail::inverse_mixture_crossing(m, t, grid_dt, rng).passage_time;
}

}  // namespace fraccount
