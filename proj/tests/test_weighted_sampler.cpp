#include <catch_amalgamated.hpp>

#include <vector>

#include "cmj/random.hpp"
#include "cmj/weighted_sampler.hpp"
#include "oracles.hpp"

using namespace cmj;

TEST_CASE("find maps cumulative targets to indices", "[sampler]") {
    FenwickSampler s;
    for (double w : {1.0, 0.0, 3.0, 2.0}) s.push_back(w);
    CHECK(s.total() == 6.0);
    CHECK(s.find(0.5) == 0);
    CHECK(s.find(1.0) == 2);  // zero-weight entry is skipped
    CHECK(s.find(3.9) == 2);
    CHECK(s.find(4.0) == 3);
    CHECK(s.find(5.99) == 3);
}

TEST_CASE("updates keep totals and prefix structure", "[sampler]") {
    FenwickSampler s;
    Rng rng(1);
    std::vector<double> ref;
    for (int i = 0; i < 1000; ++i) {
        const double w = rng.uniform_open();
        s.push_back(w);
        ref.push_back(w);
    }
    for (int i = 0; i < 5000; ++i) {
        const auto j = static_cast<std::size_t>(rng() % ref.size());
        const double w = (i % 7 == 0) ? 0.0 : 3.0 * rng.uniform_open();
        s.update(j, w);
        ref[j] = w;
    }
    double total = 0.0;
    for (double w : ref) total += w;
    CHECK(s.total() == Catch::Approx(total).epsilon(1e-12));
    CHECK(s.exact_sum() == Catch::Approx(total).epsilon(1e-14));
    s.rebuild();
    CHECK(s.total() == Catch::Approx(total).epsilon(1e-14));
    for (std::size_t j = 0; j < ref.size(); ++j) CHECK(s.value(j) == ref[j]);
}

TEST_CASE("sampling frequencies follow the weights", "[sampler]") {
    FenwickSampler s;
    const std::vector<double> w = {1.0, 2.0, 0.0, 4.0, 3.0};
    for (double x : w) s.push_back(x);
    Rng rng(2);
    std::vector<double> counts(w.size(), 0.0);
    const int n = 100000;
    for (int i = 0; i < n; ++i) counts[s.sample(rng)] += 1.0;
    CHECK(counts[2] == 0.0);
    std::vector<double> expected;
    for (double x : w) expected.push_back(n * x / 10.0);
    CHECK(oracle::chi_square_pvalue(counts, expected) > 0.001);
}

TEST_CASE("single entry is always drawn", "[sampler]") {
    FenwickSampler s;
    s.push_back(0.3);
    Rng rng(3);
    for (int i = 0; i < 100; ++i) CHECK(s.sample(rng) == 0);
}
