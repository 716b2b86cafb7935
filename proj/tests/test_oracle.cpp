#include <cmath>
#include <random>

#include "doctest.h"
#include "lbq/oracle.hpp"
#include "lbq/productform.hpp"

using namespace lbq;

namespace {

double rate_between(const GeneratorMatrix& gen, const std::vector<int>& from,
                    const std::vector<int>& to) {
    std::uint64_t f = gen.lattice.index(StateVector{from});
    std::uint64_t t = gen.lattice.index(StateVector{to});
    double total = 0.0;
    for (const auto& e : gen.rates)
        if (e.from == f && e.to == t) total += e.rate;
    return total;
}

}  // namespace

TEST_CASE("generator rates on a hand-checked instance") {
    ClusterParams params(1.0, {0.6, 0.4});
    GeneratorMatrix gen = build_generator(params, Allocation{{2, 1}});
    CHECK(gen.dim == 6);

    // state (2,1): both arrivals routes open, no service possible
    CHECK(rate_between(gen, {2, 1}, {1, 1}) == doctest::Approx(2.0 / 3.0));
    CHECK(rate_between(gen, {2, 1}, {2, 0}) == doctest::Approx(1.0 / 3.0));
    CHECK(rate_between(gen, {2, 1}, {2, 1}) == 0.0);

    // state (0,0): only service completions
    CHECK(rate_between(gen, {0, 0}, {1, 0}) == doctest::Approx(0.6));
    CHECK(rate_between(gen, {0, 0}, {0, 1}) == doctest::Approx(0.4));

    // state (1,0): one arrival route, both services open on server 1 only
    CHECK(rate_between(gen, {1, 0}, {0, 0}) == doctest::Approx(1.0));
    CHECK(rate_between(gen, {1, 0}, {1, 1}) == doctest::Approx(0.4));
    CHECK(rate_between(gen, {1, 0}, {2, 0}) == doctest::Approx(0.6));
}

TEST_CASE("outflow equals the sum of off-diagonal rates") {
    ClusterParams params(0.8, {0.5, 0.3, 0.2});
    GeneratorMatrix gen = build_generator(params, Allocation{{2, 2, 1}});
    std::vector<double> sums(gen.dim, 0.0);
    for (const auto& e : gen.rates) sums[e.from] += e.rate;
    for (std::uint64_t s = 0; s < gen.dim; ++s)
        CHECK(sums[s] == doctest::Approx(gen.outflow[s]).epsilon(1e-14));
}

TEST_CASE("generator refuses oversized lattices") {
    CHECK_THROWS_AS(build_generator(ClusterParams(1.0, {0.6, 0.4}), Allocation{{200, 200}}),
                    Error);
}

TEST_CASE("single slot chain has the Erlang-B stationary vector") {
    // lambda = mu: pi = (1/2, 1/2) over {0 free, 1 free}
    ClusterParams params(0.6, {0.6});
    GeneratorMatrix gen = build_generator(params, Allocation{{1}});
    auto pi = solve_stationary(gen);
    CHECK(pi[gen.lattice.index(StateVector{{0}})] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(pi[gen.lattice.index(StateVector{{1}})] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(stationary_residual(gen, pi) <= 1e-12);
}

TEST_CASE("dense and power solvers agree") {
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 8; ++trial) {
        std::size_t n = 2 + rng() % 2;
        std::vector<double> mu(n);
        double s = 0.0;
        for (auto& m : mu) {
            m = 0.1 + 0.9 * (rng() % 1000) / 1000.0;
            s += m;
        }
        for (auto& m : mu) m /= s;
        ClusterParams params(0.5 + (rng() % 100) / 50.0, mu);
        std::vector<int> ell(n);
        for (auto& l : ell) l = 1 + static_cast<int>(rng() % 4);
        GeneratorMatrix gen = build_generator(params, Allocation{ell});
        auto dense = solve_stationary_dense(gen);
        auto power = solve_stationary_power(gen);
        for (std::uint64_t i = 0; i < gen.dim; ++i)
            CHECK(std::abs(dense[i] - power[i]) <= 1e-9);
    }
}

TEST_CASE("oracle metrics match the product-form metrics") {
    std::mt19937_64 rng(37);
    for (int trial = 0; trial < 12; ++trial) {
        std::size_t n = 2 + rng() % 3;
        std::vector<double> mu(n);
        double s = 0.0;
        for (auto& m : mu) {
            m = 0.05 + (rng() % 1000) / 1000.0;
            s += m;
        }
        for (auto& m : mu) m /= s;
        ClusterParams params(std::exp(((rng() % 1000) / 250.0) - 2.0), mu);
        std::vector<int> ell(n);
        for (auto& l : ell) l = static_cast<int>(rng() % 4);
        Allocation alloc{ell};

        MetricsReport slow = oracle_metrics(params, alloc);
        MetricsReport fast = metrics(params, alloc);

        CHECK(slow.loss == doctest::Approx(fast.loss).epsilon(1e-9));
        for (std::size_t i = 0; i < n; ++i) {
            CHECK(slow.occupation[i] == doctest::Approx(fast.occupation[i]).epsilon(1e-9));
            CHECK(std::abs(slow.mean_jobs[i] - fast.mean_jobs[i]) <= 1e-9);
        }
        CHECK(slow.mean_response_time.has_value() == fast.mean_response_time.has_value());
        if (fast.mean_response_time)
            CHECK(*slow.mean_response_time ==
                  doctest::Approx(*fast.mean_response_time).epsilon(1e-9));
    }
}

TEST_CASE("oracle matches the product form on a larger box forced to power iteration") {
    ClusterParams params(1.3, {0.55, 0.45});
    Allocation alloc{{50, 49}};  // 2550 states, above the dense limit
    MetricsReport slow = oracle_metrics(params, alloc);
    MetricsReport fast = metrics(params, alloc);
    CHECK(slow.loss == doctest::Approx(fast.loss).epsilon(1e-8));
    CHECK(*slow.mean_response_time == doctest::Approx(*fast.mean_response_time).epsilon(1e-8));
}
