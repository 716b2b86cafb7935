#include <random>

#include "doctest.h"
#include "lbq/model.hpp"

using namespace lbq;

TEST_CASE("validate accepts a well-formed instance") {
    ClusterParams params(1.0, {0.6, 0.4});
    CHECK(validate(params, Allocation{{1, 1}}).ok);
}

TEST_CASE("ClusterParams rejects non-positive rates") {
    CHECK_THROWS_AS(ClusterParams(0.0, {0.6, 0.4}), Error);
    CHECK_THROWS_AS(ClusterParams(1.0, {0.6, -0.4}), Error);
    try {
        ClusterParams(0.0, {0.6, 0.4});
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::NonPositiveRate);
    }
}

TEST_CASE("validate flags dimension mismatch and negative lengths") {
    ClusterParams params(1.0, {0.6, 0.4});
    auto r = validate(params, Allocation{{1, 1, 1}});
    CHECK_FALSE(r.ok);
    CHECK(r.code == ErrorCode::DimensionMismatch);

    r = validate(params, Allocation{{1, -1}});
    CHECK_FALSE(r.ok);
    CHECK(r.code == ErrorCode::NegativeBufferLength);
}

TEST_CASE("service rates are sorted non-increasing with a stable permutation") {
    ClusterParams params(1.0, {0.2, 0.5, 0.3});
    CHECK(params.mu() == std::vector<double>{0.5, 0.3, 0.2});
    CHECK(params.user_index(0) == 1);
    CHECK(params.user_index(1) == 2);
    CHECK(params.user_index(2) == 0);

    std::vector<int> user = {7, 8, 9};
    auto internal = params.to_internal(user);
    CHECK(internal == std::vector<int>{8, 9, 7});
    CHECK(params.to_user(internal) == user);
}

TEST_CASE("tied rates keep user order") {
    ClusterParams params(1.0, {0.5, 0.5});
    CHECK(params.user_index(0) == 0);
    CHECK(params.user_index(1) == 1);
}

TEST_CASE("state lattice size and degenerate coordinates") {
    CHECK(StateLattice(Allocation{{1, 1}}).size() == 4);
    CHECK(StateLattice(Allocation{{2, 0}}).size() == 3);
    CHECK(StateLattice(Allocation{{3, 3, 3}}).size() == 64);
}

TEST_CASE("state lattice enumerates the 2x2 box") {
    StateLattice lattice(Allocation{{1, 1}});
    std::vector<std::vector<int>> seen;
    std::vector<int> x(2, 0);
    do {
        seen.push_back(x);
    } while (lattice.next(x));
    CHECK(seen == std::vector<std::vector<int>>{{0, 0}, {0, 1}, {1, 0}, {1, 1}});
}

TEST_CASE("lattice index and state round-trip on random boxes") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        std::size_t n = 1 + rng() % 4;
        std::vector<int> ell(n);
        for (auto& l : ell) l = static_cast<int>(rng() % 5);
        StateLattice lattice{Allocation{ell}};
        for (std::uint64_t i = 0; i < lattice.size(); ++i)
            CHECK(lattice.index(lattice.state(i)) == i);
    }
}

TEST_CASE("lattice cap raises CapacityExceeded") {
    CHECK_THROWS_AS(StateLattice(Allocation{{100, 100, 100}}), Error);
    CHECK_THROWS_AS(StateLattice(Allocation{{3, 3}}, /*cap=*/10), Error);
}
