#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <vector>

#include "cmj/random.hpp"
#include "cmj/stats.hpp"
#include "cmj/weights.hpp"
#include "oracles.hpp"

using namespace cmj;
using Catch::Approx;

TEST_CASE("point mass always returns its value", "[weights]") {
    Rng rng(1);
    const WeightSpec spec = ScalarLaw(PointMass(3.5));
    for (int i = 0; i < 100; ++i) CHECK(sample_weight(spec, rng).v == 3.5);
}

TEST_CASE("u_equals_v coupling on a point mass gives (2, 2)", "[weights]") {
    Rng rng(2);
    const WeightSpec spec = PairSpec(Coupling::u_equals_v, PointMass(2.0));
    const Weight w = sample_weight(spec, rng);
    CHECK(w.u == 2.0);
    CHECK(w.v == 2.0);
}

TEST_CASE("constructors reject invalid parameters", "[weights]") {
    CHECK_THROWS_AS(PointMass(-1.0), ModelError);
    CHECK_THROWS_AS(PointMass(INFINITY), ModelError);
    CHECK_THROWS_AS(Exponential(0.0), ModelError);
    CHECK_THROWS_AS(Uniform(2.0, 1.0), ModelError);
    CHECK_THROWS_AS(Uniform(-1.0, 1.0), ModelError);
    CHECK_THROWS_AS(Pareto(0.0, 1.0), ModelError);
    CHECK_THROWS_AS(Pareto(1.0, 0.0), ModelError);
    CHECK_THROWS_AS(LogParetoTail(0.0, 3.0), ModelError);
    CHECK_THROWS_AS(LogParetoTail(1.0, 2.0), ModelError);
    CHECK_THROWS_AS(PairSpec(Coupling::independent, Exponential(1.0)), ModelError);
    CHECK_NOTHROW(LogParetoTail(1.0, std::numbers::e));
}

TEST_CASE("log-Pareto survival is clamped at its crossover", "[weights][logpareto]") {
    const LogParetoTail law(1.0, std::numbers::e);
    // Unclamped values quoted for x = e^2 and e^3 exceed 1.
    CHECK(std::exp(law.raw_log_survival(2.0)) == Approx(4.0 / std::numbers::e));
    CHECK(std::exp(law.raw_log_survival(3.0)) == Approx(9.0 / std::exp(2.0)));
    CHECK(law.survival(std::exp(2.0)) == 1.0);
    CHECK(law.survival(std::exp(3.0)) == 1.0);

    const double y_star = std::log(law.crossover());
    CHECK(y_star > 3.0);
    CHECK(y_star < 4.0);
    CHECK(std::exp(law.raw_log_survival(y_star)) == Approx(1.0).epsilon(1e-12));
    CHECK(law.survival(law.x0()) == 1.0);

    double prev = 1.0;
    for (double y = 0.5; y < 700.0; y *= 1.1) {
        const double s = law.survival(std::exp(y));
        CHECK(s <= prev);
        CHECK(s >= 0.0);
        prev = s;
    }
    CHECK(law.survival(1e300) < 1e-290);
}

TEST_CASE("log-Pareto samples pass KS against the clamped survival", "[weights][logpareto]") {
    const LogParetoTail law(1.0, std::numbers::e);
    Rng rng(3);
    std::vector<double> xs(200000);
    for (auto& x : xs) {
        x = sample(ScalarLaw(law), rng);
        REQUIRE(x >= law.crossover() * (1 - 1e-12));
    }
    const double p = oracle::ks_pvalue(xs, [&](double x) { return 1.0 - law.survival(x); });
    CHECK(p > 0.001);
}

TEST_CASE("quantiles invert survival for every law", "[weights]") {
    const std::vector<ScalarLaw> laws = {Exponential(2.0), Uniform(1.0, 3.0), Pareto(1.5, 2.0),
                                         LogParetoTail(1.0, std::numbers::e), LogParetoTail(2.0, 10.0)};
    for (const auto& law : laws) {
        for (double s : {0.9, 0.5, 0.1, 1e-3, 1e-8}) {
            INFO(law_name(law) << " s=" << s);
            CHECK(survival(law, quantile_upper(law, s)) == Approx(s).epsilon(1e-9).margin(1e-15));
        }
    }
}

TEST_CASE("exponential empirical mean within 5 SE", "[weights]") {
    Rng rng(4);
    const ScalarLaw law = Exponential(2.5);
    RunningMoments m;
    for (int i = 0; i < 1000000; ++i) m.add(sample(law, rng));
    CHECK(std::abs(m.mean() - 0.4) < 5.0 * m.standard_error());
}

TEST_CASE("pareto and uniform KS checks", "[weights]") {
    Rng rng(5);
    {
        const Pareto law(1.5, 2.0);
        std::vector<double> xs(100000);
        for (auto& x : xs) x = sample(ScalarLaw(law), rng);
        CHECK(oracle::ks_pvalue(xs, [&](double x) { return 1.0 - law.survival(x); }) > 0.001);
    }
    {
        const Uniform law(1.0, 2.0);
        std::vector<double> xs(100000);
        for (auto& x : xs) x = sample(ScalarLaw(law), rng);
        CHECK(oracle::ks_pvalue(xs, [](double x) { return x - 1.0; }) > 0.001);
    }
}

TEST_CASE("coupling invariants hold for every sample", "[weights]") {
    Rng rng(6);
    const PairSpec zero(Coupling::u_zero, Exponential(1.0));
    const PairSpec one(Coupling::u_one, Exponential(1.0));
    const PairSpec equal(Coupling::u_equals_v, Uniform(1.0, 2.0));
    const PairSpec indep(Coupling::independent, Exponential(1.0), Uniform(3.0, 4.0));
    for (int i = 0; i < 10000; ++i) {
        CHECK(zero.sample(rng).u == 0.0);
        CHECK(one.sample(rng).u == 1.0);
        const Weight e = equal.sample(rng);
        CHECK(e.u == e.v);
        const Weight w = indep.sample(rng);
        CHECK((w.u >= 3.0 && w.u <= 4.0));
        CHECK(w.v > 0.0);
    }
}

TEST_CASE("atoms at zero are detected", "[weights]") {
    CHECK(PairSpec(Coupling::u_zero, PointMass(0.0)).zero_pair_has_mass());
    CHECK_FALSE(PairSpec(Coupling::u_one, PointMass(0.0)).zero_pair_has_mass());
    CHECK_FALSE(PairSpec(Coupling::u_zero, Exponential(1.0)).zero_pair_has_mass());
    CHECK(PairSpec(Coupling::independent, PointMass(0.0), PointMass(0.0)).zero_pair_has_mass());
    CHECK_FALSE(PairSpec(Coupling::independent, PointMass(0.0), PointMass(1.0)).zero_pair_has_mass());
}

TEST_CASE("scalar specs read as (0, W)", "[weights]") {
    Rng rng(7);
    const WeightSpec spec = ScalarLaw(Uniform(1.0, 2.0));
    CHECK_FALSE(spec.is_pair());
    CHECK(spec.as_pair().coupling() == Coupling::u_zero);
    const Weight w = spec.sample(rng);
    CHECK(w.u == 0.0);
}

TEST_CASE("closed-form moments", "[weights]") {
    CHECK(mean(ScalarLaw(Uniform(1.0, 2.0))) == 1.5);
    CHECK(mgf(ScalarLaw(Exponential(2.0)), 1.0) == Approx(2.0));
    CHECK(std::isinf(mgf(ScalarLaw(Exponential(2.0)), 2.0)));
    CHECK(mgf(ScalarLaw(Uniform(1.0, 2.0)), 1.0) == Approx(std::exp(2.0) - std::exp(1.0)));
    CHECK(std::isinf(mean(ScalarLaw(Pareto(1.0, 1.0)))));
    CHECK(mean(ScalarLaw(Pareto(2.0, 1.0))) == Approx(2.0));
}
