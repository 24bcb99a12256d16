#pragma once

// Deterministic self-check matrix. Every check pins a closed form, a frozen
// oracle value, or a seeded Monte Carlo gate; given the same suite and seed
// the report text is byte-identical across runs and thread counts.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "fraccount/counting.hpp"
#include "fraccount/risk.hpp"
#include "fraccount/rng.hpp"
#include "fraccount/series.hpp"
#include "fraccount/specfun.hpp"
#include "fraccount/stats.hpp"
#include "fraccount/subordinators.hpp"

namespace fraccount {

struct VerifyCheck {
    std::string name;
    bool pass = false;
    double error = 0.0;  // |measured - target|
    double tol = 0.0;
};

struct VerifyResult {
    bool ok = true;
    std::vector<VerifyCheck> checks;
    std::string report;
    std::string first_failure;
};

namespace detail {

class VerifyCollector {
public:
    void add(const std::string& name, double measured, double target, double tol) {
        VerifyCheck c;
        c.name = name;
        c.error = std::abs(measured - target);
        c.tol = tol;
        c.pass = std::isfinite(c.error) && c.error <= tol;
        checks_.push_back(std::move(c));
    }

    void add_flag(const std::string& name, bool pass) {
        VerifyCheck c;
        c.name = name;
        c.error = pass ? 0.0 : 1.0;
        c.tol = 0.0;
        c.pass = pass;
        checks_.push_back(std::move(c));
    }

    VerifyResult finish(const std::string& suite, std::uint64_t seed) const {
        VerifyResult r;
        r.checks = checks_;
        char buf[192];
        std::snprintf(buf, sizeof buf, "frac-count verify  suite=%s  seed=%llu\n",
                      suite.c_str(), static_cast<unsigned long long>(seed));
        r.report = buf;
        std::snprintf(buf, sizeof buf, "%-40s %-6s %-13s %s\n", "check", "result", "error",
                      "tol");
        r.report += buf;
        std::size_t passed = 0;
        for (const auto& c : checks_) {
            std::snprintf(buf, sizeof buf, "%-40s %-6s %-13.4g %.4g\n", c.name.c_str(),
                          c.pass ? "PASS" : "FAIL", c.error, c.tol);
            r.report += buf;
            if (c.pass) {
                ++passed;
            } else if (r.first_failure.empty()) {
                r.first_failure = c.name;
            }
        }
        r.ok = passed == checks_.size();
        std::snprintf(buf, sizeof buf, "verify: %zu/%zu checks passed\n", passed,
                      checks_.size());
        r.report += buf;
        return r;
    }

private:
    std::vector<VerifyCheck> checks_;
};

inline void verify_specfun(VerifyCollector& out) {
    double worst = 0.0;
    for (double z : {-3.0, -1.0, 0.5, 2.0}) {
        worst = std::max(worst,
                         std::abs(mittag_leffler_3p(1.0, 1.0, 1.0, z).value_or_throw() -
                                  std::exp(z)));
    }
    out.add("specfun/ml-exp-grid", worst, 0.0, 1e-12);
    out.add("specfun/ml-frozen-half-order",
            mittag_leffler_3p(0.5, 1.0, 1.0, -0.3).value_or_throw(), 0.73459933456765514,
            1e-13);

    WrightSpec cancel;
    cancel.upper = {{2.0, 1.0}};
    cancel.lower = {{2.0, 1.0}};
    out.add("specfun/wright-cancelling-pair", wright_pq(cancel, 1.1).value_or_throw(),
            std::exp(1.1), 1e-12);
    WrightSpec bessel;
    bessel.lower = {{1.0, 1.0}};
    out.add("specfun/wright-bessel-i0", wright_pq(bessel, 1.0).value_or_throw(),
            2.2795853023360673, 1e-12);
    out.add("specfun/igamma-frozen", igamma_q(2.5, 1.7), 0.63856992310379508, 1e-12);
    out.add("specfun/digamma-half", digamma(0.5), -1.9635100260214235, 1e-12);
}

inline void verify_subordinators(VerifyCollector& out, std::uint64_t seed, unsigned threads) {
    out.add("sub/tss-exponent-closed-form", laplace_exponent_tss(1.0, TssParams{0.5, 1.0}),
            std::sqrt(2.0) - 1.0, 1e-14);
    out.add("sub/composed-exponent-closed-form",
            laplace_exponent_composed(2.0, TssParams{0.5, 1.0}, GammaParams{2.0, 1.0}),
            std::log((1.0 + std::sqrt(3.0)) / 2.0), 1e-14);
    out.add("sub/exponent-derivative-frozen",
            psi_derivatives(2.0, 1, TssParams{0.5, 1.0}, GammaParams{2.0, 1.0})[0],
            0.10566243270259356, 1e-13);

    {
        const TssParams p{0.7, 0.5};
        const double u = 1.0;
        const auto acc = run_mc<MomentAccumulator>(
            RngStream{seed, 101}, 200000,
            [&](Rng& rng, MomentAccumulator& a) {
                a.add(std::exp(-u * sample_tss_increment(p, 1.0, rng)));
            },
            threads);
        out.add("sub/tss-transform-mc", acc.mean, std::exp(-laplace_exponent_tss(u, p)),
                4.0 * acc.std_error() + 1e-6);
    }
    {
        const TssParams p{0.5, 1.0};
        const GammaParams g{2.0, 1.0};
        const auto acc = run_mc<MomentAccumulator>(
            RngStream{seed, 102}, 200000,
            [&](Rng& rng, MomentAccumulator& a) {
                a.add(sample_composed_increment(p, g, 1.0, rng));
            },
            threads);
        out.add("sub/composed-mean-mc", acc.mean, 0.25, 4.0 * acc.std_error() + 1e-6);
    }
}

inline void verify_counting(VerifyCollector& out, std::uint64_t seed, unsigned threads) {
    const ProcessParams poisson{{1.0, 1.0}, TssParams{0.5, 1.0}, std::nullopt};
    const ProcessParams nb4{{1.0, 1.0}, TssParams{0.5, 1.0}, GammaParams{4.0, 1.0}};
    const ProcessParams nb2{{1.0, 1.0}, TssParams{0.5, 1.0}, GammaParams{2.0, 1.0}};

    out.add("count/pgf-at-zero-closed-form", pgf_mtsfnbp({0.0, 0.0}, 1.0, nb2),
            2.0 / (1.0 + std::sqrt(3.0)), 1e-13);
    const auto series = pmf_mtsfpp({0, 0}, 1.0, poisson);
    out.add_flag("count/pmf-series-route", series.method == "series");
    out.add("count/pmf-frozen-tempered", series.value_or_throw(), 0.480921700202632068,
            1e-12);
    const auto fallback = pmf_mtsfnbp({0, 0}, 1.0, nb2);
    out.add_flag("count/pmf-fallback-route", fallback.method == "inversion_fallback");
    out.add("count/pmf-frozen-mixed", fallback.value_or_throw(), 0.732050807568877294,
            1e-11);
    out.add("count/pmf-route-agreement",
            pmf_by_inversion({1, 1}, 1.0, make_pgf_mtsfnbp(nb4), 256),
            pmf_mtsfnbp({1, 1}, 1.0, nb4).value_or_throw(), 1e-10);
    out.add("count/levy-mass-frozen", levy_mass({1, 1}, nb4).value_or_throw(), 1.0 / 72.0,
            1e-13);

    const ProcessParams nb4one{{2.0}, TssParams{0.5, 1.0}, GammaParams{4.0, 1.0}};
    const auto acc = run_mc<MomentAccumulator>(
        RngStream{seed, 103}, 50000,
        [&](Rng& rng, MomentAccumulator& a) {
            a.add(static_cast<double>(sample_mtsfnbp_terminal(1.0, nb4one, rng)[0]));
        },
        threads);
    out.add("count/terminal-mean-mc", acc.mean, 0.25, 4.0 * acc.std_error() + 1e-6);
}

inline void verify_risk(VerifyCollector& out, std::uint64_t seed, unsigned threads) {
    ShockModelConfig cfg;
    cfg.lambda0 = cfg.lambda1 = cfg.lambda2 = 1.0;
    cfg.tss = TssParams{0.5, 1.0};
    cfg.gamma = GammaParams{2.0, 1.0};
    cfg.omega = 1.2;

    out.add("risk/joint-pgf-closed-form", pgf_bcp(0.0, 0.0, 1.0, cfg), 2.0 / 3.0, 1e-13);
    out.add("risk/premium-loading", premium_loading(cfg, 1.0).loading, 0.2, 1e-12);
    out.add("risk/covariance-closed-form", risk_covariance(1.0, 2.0, cfg), 13.0 / 18.0,
            1e-12);
    out.add("risk/correlation-closed-form", risk_correlation(1.0, 4.0, cfg), 0.5, 1e-14);
    out.add("risk/lrd-slope", lrd_check(cfg, 1.0, {1, 2, 4, 8, 16, 32, 64, 128}).slope,
            -0.5, 1e-12);
    out.add("risk/jump-event-rate", make_jump_size_table(cfg).event_rate,
            std::log(1.5), 1e-13);

    ShockModelConfig ruin = cfg;
    ruin.lambda0 = 0.0;
    const double psi = laplace_exponent_composed(2.0, ruin.tss, ruin.gamma);
    const RuinGrid grid = solve_ruin_ode(ruin, 8.0, 0.02);
    out.add("risk/ruin-zero-capital", grid.value[0], psi / ruin.omega, 1e-10);
    const double load = ruin.omega / psi - 1.0;
    double worst = 0.0;
    for (std::size_t i = 0; i < grid.u.size(); ++i) {
        worst = std::max(worst, std::abs(grid.value[i] -
                                         std::exp(-load * grid.u[i] / (1.0 + load)) /
                                             (1.0 + load)));
    }
    out.add("risk/ruin-classical-closed-form", worst, 0.0, 1e-4);

    ShockModelConfig deficit = ruin;
    deficit.omega = 1.0;
    out.add("risk/deficit-function", solve_joint_ruin_ode(deficit, 1.0, 6.0, 0.02).value[0],
            psi * -std::expm1(-1.0), 1e-4);

    const RuinEstimate mc =
        estimate_ruin_mc(ruin, default_ruin_horizon(ruin), 20000, 0.01,
                         RngStream{seed, 104}, RuinSimMode::single_claim, threads);
    out.add("risk/ruin-mc-vs-volterra", mc.ruin_prob, grid.value[0],
            mc.ci_halfwidth + 0.01);
}

}  // namespace detail

// suite: one of specfun | subordinators | counting | risk | all
inline VerifyResult run_verify_suite(const std::string& suite, std::uint64_t seed,
                                     unsigned threads = 0) {
    const bool all = suite == "all";
    if (!all && suite != "specfun" && suite != "subordinators" && suite != "counting" &&
        suite != "risk") {
        throw domain_error("run_verify_suite: unknown suite '" + suite +
                           "' (expected specfun, subordinators, counting, risk, or all)");
    }
    detail::VerifyCollector out;
    if (all || suite == "specfun") detail::verify_specfun(out);
    if (all || suite == "subordinators") detail::verify_subordinators(out, seed, threads);
    if (all || suite == "counting") detail::verify_counting(out, seed, threads);
    if (all || suite == "risk") detail::verify_risk(out, seed, threads);
    return out.finish(suite, seed);
}

}  // namespace fraccount
