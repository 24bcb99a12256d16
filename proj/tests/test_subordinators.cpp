#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>

#include "fraccount/stats.hpp"
#include "fraccount/subordinators.hpp"

using namespace fraccount;

namespace {

// empirical Laplace transform of sampled increments vs the closed form
template <typename Sampler>
void check_lt(Sampler&& draw, double u, double psi, double t, std::uint64_t stream,
              std::size_t n = 200000) {
    const auto acc = run_mc<MomentAccumulator>(
        RngStream{20260817, stream}, n,
        [&](Rng& rng, MomentAccumulator& a) { a.add(std::exp(-u * draw(rng))); });
    const double target = std::exp(-t * psi);
    INFO("u=" << u << " psi=" << psi << " emp=" << acc.mean << " closed=" << target);
    CHECK_THAT(acc.mean, Catch::Matchers::WithinAbs(target, 3.5 * acc.std_error()));
}

}  // namespace

TEST_CASE("tempered stable exponent closed forms", "[subordinators]") {
    const TssParams ref{0.5, 1.0};
    CHECK(laplace_exponent_tss(0.0, ref) == 0.0);
    CHECK_THAT(laplace_exponent_tss(1.0, ref),
               Catch::Matchers::WithinRel(std::sqrt(2.0) - 1.0, 1e-15));
    const TssParams stable{0.3, 0.0};
    CHECK_THAT(laplace_exponent_tss(2.0, stable),
               Catch::Matchers::WithinRel(std::pow(2.0, 0.3), 1e-15));
    const TssParams drift{1.0, 0.7};  // degenerate unit drift: psi(u) = u
    CHECK_THAT(laplace_exponent_tss(1.3, drift), Catch::Matchers::WithinRel(1.3, 1e-15));

    const auto c = laplace_exponent_tss(std::complex<double>(1.0, 0.0), ref);
    CHECK_THAT(c.real(), Catch::Matchers::WithinRel(std::sqrt(2.0) - 1.0, 1e-14));
    CHECK_THAT(c.imag(), Catch::Matchers::WithinAbs(0.0, 1e-15));
}

TEST_CASE("gamma and composed exponents", "[subordinators]") {
    const GammaParams g{2.0, 1.0};
    CHECK(laplace_exponent_gamma(0.0, g) == 0.0);
    CHECK_THAT(laplace_exponent_gamma(2.0, g), Catch::Matchers::WithinRel(std::log(2.0), 1e-15));

    const TssParams tss{0.5, 1.0};
    // log((mu - theta^a + (theta+u)^a)/mu) at the reference set
    CHECK_THAT(laplace_exponent_composed(2.0, tss, g),
               Catch::Matchers::WithinRel(std::log(0.5 * (1.0 + std::sqrt(3.0))), 1e-14));
    CHECK_THAT(laplace_exponent_composed(2.0, tss, g),
               Catch::Matchers::WithinAbs(0.311905358182, 1e-11));
    CHECK(laplace_exponent_composed(0.0, tss, g) == 0.0);

    // alpha = 1 collapses to the plain gamma exponent regardless of theta
    const TssParams unit{1.0, 5.0};
    CHECK_THAT(laplace_exponent_composed(2.0, unit, g),
               Catch::Matchers::WithinRel(std::log(2.0), 1e-14));
}

TEST_CASE("mixture exponent is the weighted sum", "[subordinators]") {
    const MixtureParams m{0.6, 0.4, TssParams{0.5, 1.0}, TssParams{0.8, 2.0}};
    const double u = 1.7;
    CHECK_THAT(laplace_exponent_mixture(u, m),
               Catch::Matchers::WithinRel(0.6 * laplace_exponent_tss(u, m.tss1) +
                                              0.4 * laplace_exponent_tss(u, m.tss2),
                                          1e-15));
}

TEST_CASE("composed exponent derivatives match high-precision values", "[subordinators]") {
    const TssParams tss{0.5, 1.0};
    const GammaParams g{2.0, 1.0};
    const auto d = psi_derivatives(2.0, 5, tss, g);
    REQUIRE(d.size() == 5);
    CHECK_THAT(d[0], Catch::Matchers::WithinRel(0.10566243270259356, 1e-12));
    CHECK_THAT(d[1], Catch::Matchers::WithinRel(-0.028774955135062373, 1e-12));
    CHECK_THAT(d[2], Catch::Matchers::WithinRel(0.016746824526945169, 1e-12));
    CHECK_THAT(d[3], Catch::Matchers::WithinRel(-0.015096794616986751, 1e-12));
    CHECK_THAT(d[4], Catch::Matchers::WithinRel(0.018499573364970665, 1e-11));

    // Bernstein alternation up to the maximum supported order
    const auto full = psi_derivatives(2.0, kMaxPsiOrder, tss, g);
    for (int j = 1; j <= kMaxPsiOrder; ++j) {
        INFO("order " << j);
        CHECK(((j % 2 == 1) ? full[j - 1] : -full[j - 1]) > 0.0);
    }

    // alpha = 1: psi'(u) = rho/(mu+u)
    const auto unit = psi_derivatives(2.0, 2, TssParams{1.0, 3.0}, g);
    CHECK_THAT(unit[0], Catch::Matchers::WithinRel(0.25, 1e-13));
    CHECK_THAT(unit[1], Catch::Matchers::WithinRel(-0.0625, 1e-13));
}

TEST_CASE("derivatives agree with finite differences", "[subordinators]") {
    const TssParams tss{0.7, 0.4};
    const GammaParams g{3.0, 1.5};
    const auto d = psi_derivatives(1.5, 2, tss, g);
    const double h = 1e-5;
    const double fd1 = (laplace_exponent_composed(1.5 + h, tss, g) -
                        laplace_exponent_composed(1.5 - h, tss, g)) /
                       (2.0 * h);
    const double fd2 = (laplace_exponent_composed(1.5 + h, tss, g) -
                        2.0 * laplace_exponent_composed(1.5, tss, g) +
                        laplace_exponent_composed(1.5 - h, tss, g)) /
                       (h * h);
    CHECK_THAT(d[0], Catch::Matchers::WithinRel(fd1, 1e-8));
    CHECK_THAT(d[1], Catch::Matchers::WithinRel(fd2, 1e-5));
}

TEST_CASE("sampled increments reproduce the Laplace transforms", "[subordinators][mc]") {
    const double t = 1.0;

    const GammaParams g{2.0, 1.0};
    for (double u : {0.5, 2.0}) {
        check_lt([&](Rng& rng) { return sample_gamma_increment(g, t, rng); }, u,
                 laplace_exponent_gamma(u, g), t, 100 + static_cast<std::uint64_t>(u * 10));
    }

    const TssParams tss{0.7, 0.5};
    for (double u : {0.5, 2.0}) {
        check_lt([&](Rng& rng) { return sample_tss_increment(tss, t, rng); }, u,
                 laplace_exponent_tss(u, tss), t, 200 + static_cast<std::uint64_t>(u * 10));
    }

    const TssParams stable{0.5, 0.0};  // untempered: Kanter sampler directly
    for (double u : {0.5, 2.0}) {
        check_lt([&](Rng& rng) { return sample_stable_increment(0.5, t, rng); }, u,
                 laplace_exponent_tss(u, stable), t, 300 + static_cast<std::uint64_t>(u * 10));
    }

    const TssParams ref{0.5, 1.0};
    for (double u : {1.0, 2.0}) {
        check_lt([&](Rng& rng) { return sample_composed_increment(ref, g, t, rng); }, u,
                 laplace_exponent_composed(u, ref, g), t,
                 400 + static_cast<std::uint64_t>(u * 10));
    }

    const MixtureParams mix{0.6, 0.4, TssParams{0.5, 1.0}, TssParams{0.8, 2.0}};
    for (double u : {0.5, 2.0}) {
        check_lt([&](Rng& rng) { return sample_mixture_tss_increment(mix, t, rng); }, u,
                 laplace_exponent_mixture(u, mix), t, 500 + static_cast<std::uint64_t>(u * 10));
    }
}

TEST_CASE("tempered increments have the closed-form mean", "[subordinators][mc]") {
    const TssParams tss{0.7, 0.5};
    const double mean = 0.7 * std::pow(0.5, -0.3);  // psi'(0) per unit time
    const auto acc = run_mc<MomentAccumulator>(
        RngStream{20260817, 600}, 200000,
        [&](Rng& rng, MomentAccumulator& a) { a.add(sample_tss_increment(tss, 1.0, rng)); });
    CHECK_THAT(acc.mean, Catch::Matchers::WithinAbs(mean, 3.5 * acc.std_error()));
}

TEST_CASE("unit-alpha samplers degenerate to drift", "[subordinators]") {
    Rng rng(RngStream{1, 1});
    CHECK(sample_stable_increment(1.0, 0.37, rng) == 0.37);
    CHECK(sample_tss_increment(TssParams{1.0, 2.0}, 0.37, rng) == 0.37);
}

TEST_CASE("increments split additively over subintervals", "[subordinators][mc]") {
    // one draw over dt and the sum of two draws over dt/2 share a law
    const TssParams tss{0.5, 1.0};
    const double u = 1.0, psi = laplace_exponent_tss(1.0, tss);
    check_lt(
        [&](Rng& rng) {
            return sample_tss_increment(tss, 0.5, rng) + sample_tss_increment(tss, 0.5, rng);
        },
        u, psi, 1.0, 700);
}

TEST_CASE("inverse subordinator crossing law", "[subordinators][mc]") {
    // P(E(t) <= s) = P(S(s) >= t): compare both sides by simulation
    const MixtureParams mix{0.5, 0.5, TssParams{0.5, 1.0}, TssParams{1.0, 0.0}};
    const double t = 1.0, s = 1.5;
    const std::size_t n = 20000;

    const auto lhs = run_mc<MomentAccumulator>(
        RngStream{20260817, 800}, n, [&](Rng& rng, MomentAccumulator& a) {
            a.add(sample_inverse_mixture_tss(mix, t, 0.01, rng) <= s ? 1.0 : 0.0);
        });
    const auto rhs = run_mc<MomentAccumulator>(
        RngStream{20260817, 801}, n, [&](Rng& rng, MomentAccumulator& a) {
            double level = 0.0;
            for (int step = 0; step < 150; ++step)
                level += sample_mixture_tss_increment(mix, s / 150.0, rng);
            a.add(level >= t ? 1.0 : 0.0);
        });
    const double se = std::sqrt(lhs.std_error() * lhs.std_error() +
                                rhs.std_error() * rhs.std_error());
    INFO("lhs=" << lhs.mean << " rhs=" << rhs.mean);
    // O(grid_dt) interpolation bias plus MC noise
    CHECK_THAT(lhs.mean, Catch::Matchers::WithinAbs(rhs.mean, 4.0 * se + 0.01));

    Rng rng(RngStream{1, 9});
    const auto crossing = detail::inverse_mixture_crossing(mix, t, 0.01, rng);
    CHECK(crossing.level_lo <= t);
    CHECK(crossing.level_hi > t);
    CHECK(crossing.op_lo <= crossing.passage_time);
    CHECK(crossing.passage_time <= crossing.op_hi);
}

TEST_CASE("parameter validation", "[subordinators]") {
    CHECK_THROWS_AS(TssParams(1.2, 1.0).validate(), domain_error);
    CHECK_THROWS_AS(TssParams(0.0, 1.0).validate(), domain_error);
    CHECK_THROWS_AS(TssParams(0.5, -1.0).validate(), domain_error);
    CHECK_THROWS_AS(GammaParams(0.0, 1.0).validate(), domain_error);
    CHECK_THROWS_AS(GammaParams(2.0, -1.0).validate(), domain_error);
    CHECK_THROWS_AS(laplace_exponent_tss(-0.5, TssParams{0.5, 1.0}), domain_error);
    CHECK_THROWS_AS(psi_derivatives(2.0, 0, TssParams{0.5, 1.0}, GammaParams{2.0, 1.0}),
                    domain_error);
    CHECK_THROWS_AS(psi_derivatives(2.0, kMaxPsiOrder + 1, TssParams{0.5, 1.0},
                                    GammaParams{2.0, 1.0}),
                    domain_error);
}
