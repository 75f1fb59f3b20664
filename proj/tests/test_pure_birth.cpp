#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "cmj/pure_birth.hpp"
#include "cmj/random.hpp"
#include "cmj/stats.hpp"
#include "oracles.hpp"

using namespace cmj;
using Catch::Approx;

namespace {
/// P(NegBin(r, p) > m) with pmf C(k + r - 1, k) p^r (1 - p)^k, by direct summation.
double negbin_sf(double r, double p, std::uint64_t m) {
    double cdf = 0.0;
    double log_pmf = r * std::log(p);
    for (std::uint64_t k = 0; k <= m; ++k) {
        cdf += std::exp(log_pmf);
        log_pmf += std::log((static_cast<double>(k) + r) / static_cast<double>(k + 1)) + std::log1p(-p);
    }
    return std::max(0.0, 1.0 - cdf);
}
}  // namespace

TEST_CASE("birth rates validate their domain", "[birth]") {
    CHECK_THROWS_AS(BirthRates(-1.0, 1.0), ModelError);
    CHECK_THROWS_AS(BirthRates(1.0, 0.0), ModelError);
    CHECK_NOTHROW(BirthRates(0.0, 1.0));
}

TEST_CASE("mean closed form", "[birth]") {
    CHECK(mean(BirthRates(1.0, 1.0), std::numbers::ln2) == Approx(1.0).epsilon(1e-14));
    CHECK(mean(BirthRates(0.0, 2.0), 1.5) == 3.0);
    CHECK(mean(BirthRates(2.0, 0.5), 0.0) == 0.0);
    CHECK(mean(BirthRates(0.0, 0.5), 0.0) == 0.0);
}

TEST_CASE("mean is continuous as c1 goes to 0", "[birth]") {
    for (double c2 : {0.5, 1.0, 2.0})
        for (double t : {0.25, 0.7, 1.5}) {
            const double limit = c2 * t;
            CHECK(std::abs(mean(BirthRates(1e-8, c2), t) - limit) < 1e-6 * limit);
            CHECK(std::abs(mean(BirthRates(1e-14, c2), t) - limit) < 1e-12 * limit);
        }
}

TEST_CASE("second moment closed form", "[birth]") {
    CHECK(second_moment(BirthRates(0.0, 2.0), 1.5) == Approx(12.0));
    // Geometric law with p = 1/2: variance 2, mean 1.
    CHECK(second_moment(BirthRates(1.0, 1.0), std::numbers::ln2) == Approx(3.0));
    CHECK(second_moment(BirthRates(1.0, 1.0), std::numbers::ln2) != Approx(1.5));
    CHECK(second_moment(BirthRates(1.0, 1.0), 0.0) == 0.0);
}

TEST_CASE("pgf closed form", "[birth]") {
    const BirthRates yule(1.0, 1.0);
    CHECK(pgf(yule, std::numbers::ln2, 0.5) == Approx(2.0 / 3.0));
    CHECK(pgf(yule, std::numbers::ln2, 1.0) == 1.0);
    CHECK(pgf(BirthRates(0.5, 2.0), 1.5, 1.0) == 1.0);
    for (double c1 : {0.5, 1.0, 2.0})
        for (double c2 : {0.5, 1.0, 2.0})
            CHECK(pgf(BirthRates(c1, c2), 0.7, 0.0) == Approx(std::exp(-c2 * 0.7)).epsilon(1e-13));
    CHECK_THROWS_WITH(pgf(BirthRates(0.0, 1.0), 1.0, 0.5), Catch::Matchers::ContainsSubstring("Poisson"));
    CHECK(pgf_poisson(BirthRates(0.0, 2.0), 1.5, 0.3) == Approx(std::exp(3.0 * (0.3 - 1.0))));
    CHECK(pgf_any(BirthRates(0.0, 2.0), 1.5, 1.0) == 1.0);
}

TEST_CASE("simulate_count basics", "[birth]") {
    Rng rng(1);
    const OffspringModel m = OffspringModel::fixed(BirthRates(1.0, 1.0));
    CHECK(simulate_count(m, 0.0, rng).count == 0);
    CHECK_THROWS_AS(simulate_count(m, -1.0, rng), ModelError);
    CHECK_THROWS_AS(simulate_count(m, 1.0, rng, 0), ModelError);
    const BirthCount c = simulate_count(m, 50.0, rng, 100);
    CHECK(c.count == 100);
    CHECK(c.saturated);
}

TEST_CASE("zero tail rate caps the count", "[birth]") {
    Rng rng(2);
    const OffspringModel m = OffspringModel::mixed(PairSpec(Coupling::u_zero, PointMass(1.0)),
                                                   FitnessSpec::tabulated({5.0, 5.0, 0.0, 7.0}, TailRule::zero_after_end));
    for (int i = 0; i < 1000; ++i) CHECK(simulate_count(m, 100.0, rng).count <= 2);
}

TEST_CASE("simulate_count is nondecreasing in t for a fixed stream", "[birth]") {
    const OffspringModel m = OffspringModel::fixed(BirthRates(0.5, 1.0));
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        std::uint64_t prev = 0;
        for (double t : {0.1, 0.5, 1.0, 2.0, 4.0}) {
            Rng rng(seed);
            const auto c = simulate_count(m, t, rng).count;
            CHECK(c >= prev);
            prev = c;
        }
    }
}

TEST_CASE("Poisson mean example within 4 SE", "[birth]") {
    Rng rng(3);
    const OffspringModel m = OffspringModel::fixed(BirthRates(0.0, 2.0));
    RunningMoments r;
    for (int i = 0; i < 100000; ++i) r.add(static_cast<double>(simulate_count(m, 1.5, rng).count));
    CHECK(std::abs(r.mean() - 3.0) < 4.0 * r.standard_error());
}

TEST_CASE("moments and PGF match closed forms on a reduced grid", "[birth]") {
    Rng rng(4);
    for (double c1 : {0.0, 1.0, 2.0})
        for (double t : {0.25, 1.5}) {
            const BirthRates rates(c1, 1.0);
            const OffspringModel m = OffspringModel::fixed(rates);
            RunningMoments first, second, g;
            for (int i = 0; i < 50000; ++i) {
                const double x = static_cast<double>(simulate_count(m, t, rng).count);
                first.add(x);
                second.add(x * x);
                g.add(std::pow(0.3, x));
            }
            INFO("c1=" << c1 << " t=" << t);
            CHECK(std::abs(first.mean() - mean(rates, t)) < 4.0 * first.standard_error());
            CHECK(std::abs(second.mean() - second_moment(rates, t)) < 4.0 * second.standard_error());
            CHECK(std::abs(g.mean() - pgf_any(rates, t, 0.3)) < 4.0 * g.standard_error());
        }
}

TEST_CASE("tail_prob_mc examples", "[birth]") {
    Rng rng(5);
    const auto zero = tail_prob_mc(OffspringModel::fixed(BirthRates(1.0, 1.0)), 0.0, 0.0, 10000, rng);
    CHECK(zero.estimate == 0.0);
    CHECK(zero.ci.lo == 0.0);
    const auto pois = tail_prob_mc(OffspringModel::fixed(BirthRates(0.0, 1.0)), 1.0, 0.0, 100000, rng);
    CHECK(pois.ci.contains(1.0 - std::exp(-1.0)));
    const auto yule = tail_prob_mc(OffspringModel::fixed(BirthRates(1.0, 1.0)), std::numbers::ln2, 0.0, 100000, rng);
    CHECK(yule.ci.contains(0.5));
    CHECK_THROWS_AS(tail_prob_mc(OffspringModel::fixed(BirthRates(1.0, 1.0)), 1.0, 0.0, 999, rng), ModelError);
    CHECK_THROWS_AS(tail_prob_mc(OffspringModel::fixed(BirthRates(1.0, 1.0)), 1.0, -1.0, 1000, rng), ModelError);
}

TEST_CASE("exact tails agree with direct pmf sums", "[birth]") {
    for (double t : {0.05, 0.5, 2.0})
        for (std::uint64_t m : {0u, 3u, 20u, 100u}) {
            const double x = static_cast<double>(m);
            INFO("t=" << t << " m=" << m);
            const double pois = *exact_tail_probability(OffspringModel::fixed(BirthRates(0.0, 1.5)), t, x);
            const double ref_p = oracle::poisson_sf(1.5 * t, m);
            CHECK(pois == Approx(ref_p).epsilon(1e-9).margin(1e-300));
            const double nb = *exact_tail_probability(OffspringModel::fixed(BirthRates(1.0, 2.0)), t, x);
            const double ref_nb = negbin_sf(2.0, std::exp(-t), m);
            if (ref_nb > 1e-12) CHECK(nb == Approx(ref_nb).epsilon(1e-8));
            else CHECK(nb < 1e-10);
        }
}

TEST_CASE("exact mixture tail for WRRT matches Monte Carlo", "[birth]") {
    Rng rng(6);
    const OffspringModel m = OffspringModel::mixed(PairSpec(Coupling::u_zero, Exponential(1.0)),
                                                   FitnessSpec::linear());
    // xi(t) | V ~ Poisson(V t) with V ~ Exp(1) is geometric: P(xi > x) = (t / (1 + t))^(x + 1).
    for (double t : {0.5, 2.0}) {
        const double exact = *exact_tail_probability(m, t, 3.0);
        CHECK(exact == Approx(std::pow(t / (1.0 + t), 4.0)).epsilon(1e-7));
        const auto mc = tail_prob_mc(m, t, 3.0, 100000, rng);
        CHECK(mc.ci.contains(exact));
    }
    const OffspringModel tab = OffspringModel::mixed(PairSpec(Coupling::u_zero, Exponential(1.0)),
                                                     FitnessSpec::tabulated({1.0}, TailRule::constant_last));
    CHECK_FALSE(exact_tail_probability(tab, 1.0, 3.0).has_value());
}

TEST_CASE("poisson tail threshold example fails by a wide margin", "[birth]") {
    const double q = *exact_tail_probability(OffspringModel::fixed(BirthRates(0.0, 1.0)), 0.1, 100.0);
    CHECK(q < 1e-100);
    CHECK(0.1 * std::pow(std::log(100.0), 1.5) / 100.0 == Approx(0.0099).epsilon(0.01));
}
