#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "fraccount/rng.hpp"
#include "fraccount/stats.hpp"

using namespace fraccount;

TEST_CASE("streams are reproducible and distinct", "[rng]") {
    Rng a(RngStream{42, 7});
    Rng b(RngStream{42, 7});
    Rng c(RngStream{42, 8});
    bool all_equal = true, any_equal_c = false;
    for (int i = 0; i < 1000; ++i) {
        const double x = a.uniform();
        all_equal = all_equal && (x == b.uniform());
        any_equal_c = any_equal_c || (x == c.uniform());
    }
    CHECK(all_equal);
    CHECK_FALSE(any_equal_c);

    const RngStream base{42, 7};
    CHECK(base.substream(3).stream_id == 10);
    CHECK(base.substream(0).seed == 42);
}

TEST_CASE("uniform moments", "[rng]") {
    Rng rng(RngStream{1, 1});
    MomentAccumulator acc;
    const std::size_t n = 200000;
    for (std::size_t i = 0; i < n; ++i) {
        const double u = rng.uniform();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
        acc.add(u);
    }
    CHECK_THAT(acc.mean, Catch::Matchers::WithinAbs(0.5, 3.0 * acc.std_error()));
    CHECK_THAT(acc.variance(), Catch::Matchers::WithinAbs(1.0 / 12.0, 2e-3));
    Rng pos(RngStream{1, 2});
    for (int i = 0; i < 10000; ++i) REQUIRE(pos.uniform_pos() > 0.0);
}

TEST_CASE("exponential moments", "[rng]") {
    Rng rng(RngStream{2, 1});
    MomentAccumulator acc;
    for (int i = 0; i < 200000; ++i) acc.add(rng.exponential(2.0));
    CHECK_THAT(acc.mean, Catch::Matchers::WithinAbs(0.5, 3.0 * acc.std_error()));
    CHECK_THAT(acc.variance(), Catch::Matchers::WithinRel(0.25, 0.03));
}

TEST_CASE("normal law", "[rng]") {
    Rng rng(RngStream{3, 1});
    std::vector<double> xs(50000);
    MomentAccumulator acc;
    for (auto& x : xs) {
        x = rng.normal();
        acc.add(x);
    }
    CHECK_THAT(acc.mean, Catch::Matchers::WithinAbs(0.0, 3.0 * acc.std_error()));
    CHECK_THAT(acc.variance(), Catch::Matchers::WithinAbs(1.0, 0.03));
    const auto ks = ks_one_sample(xs, [](double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); });
    CHECK(ks.p_value > 1e-3);
}

TEST_CASE("gamma moments across the shape split", "[rng]") {
    for (double shape : {0.3, 0.9, 1.0, 3.5, 40.0}) {
        Rng rng(RngStream{4, static_cast<std::uint64_t>(shape * 10)});
        MomentAccumulator acc;
        for (int i = 0; i < 200000; ++i) acc.add(rng.gamma(shape));
        INFO("shape " << shape);
        CHECK_THAT(acc.mean, Catch::Matchers::WithinAbs(shape, 3.5 * acc.std_error()));
        CHECK_THAT(acc.variance(), Catch::Matchers::WithinRel(shape, 0.05));
    }
    Rng rng(RngStream{4, 99});
    MomentAccumulator acc;
    for (int i = 0; i < 100000; ++i) acc.add(rng.gamma(3.0, 2.0));
    CHECK_THAT(acc.mean, Catch::Matchers::WithinAbs(1.5, 3.5 * acc.std_error()));
}

TEST_CASE("poisson moments across the mean split", "[rng]") {
    for (double mean : {0.4, 3.2, 9.5, 11.0, 40.0}) {
        Rng rng(RngStream{5, static_cast<std::uint64_t>(mean * 10)});
        MomentAccumulator acc;
        for (int i = 0; i < 200000; ++i) acc.add(static_cast<double>(rng.poisson(mean)));
        INFO("mean " << mean);
        CHECK_THAT(acc.mean, Catch::Matchers::WithinAbs(mean, 3.5 * acc.std_error()));
        CHECK_THAT(acc.variance(), Catch::Matchers::WithinRel(mean, 0.05));
    }
    Rng rng(RngStream{5, 1});
    CHECK(rng.poisson(0.0) == 0);
}

TEST_CASE("poisson law against exact pmf", "[rng]") {
    // chi-square against exact probabilities, both regimes of the sampler
    for (double mean : {3.2, 25.0}) {
        Rng rng(RngStream{6, static_cast<std::uint64_t>(mean)});
        const std::size_t n = 200000;
        const std::size_t kmax = static_cast<std::size_t>(mean + 8.0 * std::sqrt(mean));
        std::vector<double> observed(kmax + 2, 0.0);
        for (std::size_t i = 0; i < n; ++i)
            observed[std::min<std::uint64_t>(rng.poisson(mean), kmax + 1)] += 1.0;
        std::vector<double> expected(kmax + 2, 0.0);
        double cum = 0.0;
        for (std::size_t k = 0; k <= kmax; ++k) {
            expected[k] = std::exp(-mean + static_cast<double>(k) * std::log(mean) -
                                   std::lgamma(static_cast<double>(k) + 1.0)) *
                          static_cast<double>(n);
            cum += expected[k];
        }
        expected[kmax + 1] = static_cast<double>(n) - cum;
        // merge sparse cells into a tail bucket for chi-square validity
        std::vector<double> obs_m, exp_m;
        double otail = 0.0, etail = 0.0;
        for (std::size_t k = 0; k < expected.size(); ++k) {
            if (expected[k] >= 10.0) {
                obs_m.push_back(observed[k]);
                exp_m.push_back(expected[k]);
            } else {
                otail += observed[k];
                etail += expected[k];
            }
        }
        if (etail > 0.0) {
            obs_m.push_back(otail);
            exp_m.push_back(etail);
        }
        double stat = 0.0;
        for (std::size_t k = 0; k < obs_m.size(); ++k) {
            const double d = obs_m[k] - exp_m[k];
            stat += d * d / exp_m[k];
        }
        const double p = chi2_sf(stat, static_cast<double>(obs_m.size() - 1));
        INFO("mean " << mean << " stat " << stat);
        CHECK(p > 1e-3);
    }
}

TEST_CASE("binomial and multinomial", "[rng]") {
    Rng rng(RngStream{7, 1});
    MomentAccumulator acc;
    for (int i = 0; i < 100000; ++i) acc.add(static_cast<double>(rng.binomial(20, 0.3)));
    CHECK_THAT(acc.mean, Catch::Matchers::WithinAbs(6.0, 3.5 * acc.std_error()));
    CHECK_THAT(acc.variance(), Catch::Matchers::WithinRel(4.2, 0.05));
    CHECK(rng.binomial(0, 0.3) == 0);
    CHECK(rng.binomial(10, 0.0) == 0);
    CHECK(rng.binomial(10, 1.0) == 10);

    const std::vector<double> probs{0.5, 0.3, 0.2};
    MomentAccumulator cell1;
    for (int i = 0; i < 50000; ++i) {
        const auto cells = rng.multinomial(12, probs);
        REQUIRE(cells.size() == 3);
        REQUIRE(cells[0] + cells[1] + cells[2] == 12);
        cell1.add(static_cast<double>(cells[1]));
    }
    CHECK_THAT(cell1.mean, Catch::Matchers::WithinAbs(3.6, 3.5 * cell1.std_error()));
    const auto all = rng.multinomial(9, {1.0});
    CHECK(all[0] == 9);
}

TEST_CASE("moment accumulator merge equals sequential", "[rng][stats]") {
    Rng rng(RngStream{8, 1});
    MomentAccumulator whole, left, right;
    for (int i = 0; i < 2000; ++i) {
        const double x = rng.normal();
        whole.add(x);
        (i < 1000 ? left : right).add(x);
    }
    left.merge(right);
    CHECK_THAT(left.mean, Catch::Matchers::WithinAbs(whole.mean, 1e-12));
    CHECK_THAT(left.variance(), Catch::Matchers::WithinRel(whole.variance(), 1e-12));
}

TEST_CASE("parallel mc is independent of thread count", "[rng][stats]") {
    auto job = [](Rng& rng, MomentAccumulator& acc) { acc.add(rng.exponential()); };
    const auto r1 = run_mc<MomentAccumulator>(RngStream{11, 0}, 40000, job, 1);
    const auto r4 = run_mc<MomentAccumulator>(RngStream{11, 0}, 40000, job, 4);
    CHECK(r1.n == r4.n);
    CHECK(r1.mean == r4.mean);
    CHECK(r1.m2 == r4.m2);
    CHECK_THAT(r1.mean, Catch::Matchers::WithinAbs(1.0, 3.5 * r1.std_error()));
}

TEST_CASE("two-sample tests accept identical laws and reject different ones", "[stats]") {
    Rng rng(RngStream{12, 1});
    std::vector<double> a(20000), b(20000), c(20000);
    for (auto& x : a) x = rng.exponential();
    for (auto& x : b) x = rng.exponential();
    for (auto& x : c) x = rng.exponential(0.8);
    const auto same = ks_two_sample(a, b);
    const auto diff = ks_two_sample(a, c);
    CHECK(same.p_value > 1e-3);
    CHECK(diff.p_value < 1e-6);

    // chi-square on count histograms
    std::vector<double> h1(8, 0.0), h2(8, 0.0), h3(8, 0.0);
    for (int i = 0; i < 30000; ++i) {
        h1[std::min<std::uint64_t>(rng.poisson(2.0), 7)] += 1.0;
        h2[std::min<std::uint64_t>(rng.poisson(2.0), 7)] += 1.0;
        h3[std::min<std::uint64_t>(rng.poisson(2.6), 7)] += 1.0;
    }
    CHECK(chi2_two_sample(h1, h2).p_value > 1e-3);
    CHECK(chi2_two_sample(h1, h3).p_value < 1e-6);
}

TEST_CASE("ols slope recovers an exact line", "[stats]") {
    std::vector<double> x{1.0, 2.0, 3.0, 4.0, 5.0};
    std::vector<double> y;
    for (double v : x) y.push_back(3.0 - 0.5 * v);
    CHECK_THAT(ols_slope(x, y), Catch::Matchers::WithinAbs(-0.5, 1e-14));
}
