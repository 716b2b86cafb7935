#include <cmath>
#include <random>

#include "doctest.h"
#include "lbq/optimizer.hpp"
#include "lbq/productform.hpp"

using namespace lbq;

TEST_CASE("exhaustive search recovers the low-traffic optimum") {
    OptimizationQuery q{ClusterParams(1e-4, {0.9, 0.1}), 20, Metric::LossProbability};
    auto result = optimal_allocation(q);
    CHECK(result.canonical.ell == std::vector<int>{18, 2});
    CHECK(result.best_value == doctest::Approx(loss_probability(q.params, result.canonical)));
}

TEST_CASE("exhaustive search recovers the heavy-traffic optimum") {
    // lambda large enough to be in the balanced regime, small enough that
    // log G still separates the candidates beyond the tie tolerance
    OptimizationQuery homog{ClusterParams(6.0, {0.5, 0.5}), 20, Metric::LossProbability};
    CHECK(optimal_allocation(homog).canonical.ell == std::vector<int>{10, 10});

    OptimizationQuery odd{ClusterParams(6.0, {0.6, 0.4}), 21, Metric::LossProbability};
    CHECK(optimal_allocation(odd).canonical.ell == std::vector<int>{11, 10});

    OptimizationQuery deep{ClusterParams(100.0, {0.9, 0.1}), 20, Metric::LossProbability};
    CHECK(optimal_allocation(deep).canonical.ell == std::vector<int>{10, 10});
}

TEST_CASE("search rejects bad queries") {
    CHECK_THROWS_AS(
        optimal_allocation({ClusterParams(1.0, {0.6, 0.4}), 0, Metric::LossProbability}),
        Error);
    OptimizationQuery capped{ClusterParams(1.0, {0.5, 0.3, 0.2}), 2000,
                             Metric::LossProbability};
    capped.search_cap = 100;
    CHECK_THROWS_AS(optimal_allocation(capped), Error);
}

TEST_CASE("two-server optima have at most two minimizers, one slot apart") {
    std::mt19937_64 rng(41);
    for (int trial = 0; trial < 20; ++trial) {
        // lambda kept below saturation so the metric still separates
        // adjacent allocations beyond the tie tolerance
        double mu1 = 0.5 + 0.45 * (rng() % 1000) / 1000.0;
        double lambda = std::exp(((rng() % 1000) / 286.0) - 2.5);
        int total = 2 + static_cast<int>(rng() % 12);
        OptimizationQuery q{ClusterParams(lambda, {mu1, 1.0 - mu1}), total,
                            Metric::LossProbability};
        auto result = optimal_allocation(q);
        CHECK(result.minimizers.size() <= 2);
        if (result.minimizers.size() == 2) {
            int a = result.minimizers[0].ell[0];
            int b = result.minimizers[1].ell[0];
            CHECK(b - a == 1);
        }
    }
}

TEST_CASE("moving a slot away from the optimum never improves the loss") {
    std::mt19937_64 rng(43);
    for (int trial = 0; trial < 15; ++trial) {
        std::size_t n = 2 + rng() % 3;
        std::vector<double> mu(n);
        double s = 0.0;
        for (auto& m : mu) {
            m = 0.05 + (rng() % 1000) / 1000.0;
            s += m;
        }
        for (auto& m : mu) m /= s;
        std::sort(mu.begin(), mu.end(), std::greater<>());
        ClusterParams params(std::exp(((rng() % 1000) / 250.0) - 2.0), mu);
        int total = 3 + static_cast<int>(rng() % 8);
        auto result = optimal_allocation({params, total, Metric::LossProbability});
        double best = result.best_value;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                if (i == j || result.canonical.ell[j] == 0) continue;
                Allocation moved = result.canonical;
                ++moved.ell[i];
                --moved.ell[j];
                CHECK(loss_probability(params, moved) >= best * (1.0 - 1e-9));
            }
    }
}

TEST_CASE("low-traffic predictor on two servers") {
    auto p = low_traffic_predictor({0.9, 0.1}, 20);
    CHECK(p.primary.ell == std::vector<int>{18, 2});
    CHECK_FALSE(p.alternative.has_value());

    // tie case: both interval endpoints are integral
    auto tie = low_traffic_predictor({0.75, 0.25}, 3);
    CHECK(tie.primary.ell == std::vector<int>{2, 1});
    REQUIRE(tie.alternative.has_value());
    CHECK(tie.alternative->ell == std::vector<int>{3, 0});

    CHECK_THROWS_AS(low_traffic_predictor({0.6, 0.4}, 0), Error);
}

TEST_CASE("tie-case predictions are both exact optima in the limit") {
    auto tie = low_traffic_predictor({0.75, 0.25}, 3);
    ClusterParams params(1e-7, {0.75, 0.25});
    double a = loss_probability(params, tie.primary);
    double b = loss_probability(params, *tie.alternative);
    CHECK(a == doctest::Approx(b).epsilon(1e-5));
    auto result = optimal_allocation({params, 3, Metric::LossProbability, 1e-4});
    CHECK(result.minimizers.size() == 2);
}

TEST_CASE("low-traffic predictor on three servers is the multinomial mode") {
    auto p = low_traffic_predictor({0.5, 0.3, 0.2}, 10);
    CHECK(p.primary.ell == std::vector<int>{5, 3, 2});
    // cross-check against the exact optimum deep in the low-traffic regime
    auto exact = optimal_allocation(
        {ClusterParams(1e-5, {0.5, 0.3, 0.2}), 10, Metric::LossProbability});
    CHECK(exact.canonical.ell == p.primary.ell);
}

TEST_CASE("heavy-traffic predictor balances with the remainder going fast") {
    CHECK(heavy_traffic_predictor({0.6, 0.4}, 21).ell == std::vector<int>{11, 10});
    CHECK(heavy_traffic_predictor({0.5, 0.3, 0.2}, 10).ell == std::vector<int>{4, 3, 3});
    CHECK(heavy_traffic_predictor({0.5, 0.5}, 8).ell == std::vector<int>{4, 4});
    // matches the exact optimum at large lambda
    auto exact = optimal_allocation(
        {ClusterParams(40.0, {0.5, 0.3, 0.2}), 10, Metric::LossProbability});
    CHECK(exact.canonical.ell == std::vector<int>{4, 3, 3});
}

TEST_CASE("optimal fast-server buffer shrinks as lambda grows") {
    std::vector<double> grid;
    for (double l = 0.01; l <= 6.0; l *= 1.6) grid.push_back(l);
    auto scan = monotonicity_scan({0.9, 0.1}, 20, grid, Metric::LossProbability);
    CHECK(scan.asserted);
    CHECK(scan.violations.empty());
    CHECK(scan.canonical.front().ell[0] == 18);
    CHECK(scan.canonical.back().ell[0] == 11);
}

TEST_CASE("monotonicity scan with three servers tracks both extremes") {
    std::vector<double> grid = {0.01, 0.1, 0.5, 1.0, 2.0, 5.0, 20.0};
    auto scan = monotonicity_scan({0.5, 0.3, 0.2}, 9, grid, Metric::LossProbability);
    CHECK(scan.violations.empty());
    for (std::size_t t = 1; t < scan.canonical.size(); ++t) {
        CHECK(scan.canonical[t].ell[0] <= scan.canonical[t - 1].ell[0]);
        CHECK(scan.canonical[t].ell[2] >= scan.canonical[t - 1].ell[2]);
    }
}

TEST_CASE("response-time scans are observational, not asserted") {
    std::vector<double> grid = {0.2, 1.0, 5.0};
    auto scan = monotonicity_scan({0.7, 0.3}, 8, grid, Metric::MeanResponseTime);
    CHECK_FALSE(scan.asserted);
}

TEST_CASE("scan preconditions") {
    CHECK_THROWS_AS(monotonicity_scan({0.6, 0.4}, 8, {1.0}, Metric::LossProbability), Error);
    CHECK_THROWS_AS(monotonicity_scan({0.6, 0.4}, 8, {2.0, 1.0}, Metric::LossProbability),
                    Error);
    CHECK_THROWS_AS(conjecture_scan({0.6, 0.4}, 8, {0.5, 1.0}), Error);
}

TEST_CASE("prefix sums of the fastest servers shrink with lambda") {
    std::vector<double> grid = {0.02, 0.1, 0.4, 1.0, 2.5, 6.0, 15.0};
    auto report = conjecture_scan({0.45, 0.3, 0.15, 0.1}, 12, grid);
    CHECK(report.all_pass);
    CHECK(report.prefixes.size() == 4);
    for (const auto& p : report.prefixes) CHECK(p.pass);
    // the full prefix is the fixed total, trivially monotone
    CHECK(report.prefixes.back().failures.empty());
}

TEST_CASE("two-server monotonicity propositions hold on a dense grid") {
    std::vector<double> grid = {0.1, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0};
    auto report = proposition_checks({0.75, 0.25}, 12, grid);
    CHECK(report.pass());
    CHECK(report.prop1_checked > 0);
    CHECK(report.prop2_checked > 0);

    auto uneven = proposition_checks({0.95, 0.05}, 10, grid);
    CHECK(uneven.pass());

    CHECK_THROWS_AS(proposition_checks({0.5, 0.3, 0.2}, 8, grid), Error);
}
