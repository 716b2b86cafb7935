#pragma once

#include <cstdint>
#include <vector>

#include "lbq/model.hpp"

namespace lbq {

/// CTMC generator of the token network, indexed by the state lattice.
/// Off-diagonal rates only; the diagonal is the negated row outflow.
struct GeneratorMatrix {
    struct Entry {
        std::uint32_t from;
        std::uint32_t to;
        double rate;
    };

    std::uint64_t dim = 0;
    std::vector<Entry> rates;
    std::vector<double> outflow;  // per-state total off-diagonal rate

    StateLattice lattice;
    Allocation alloc;
};

constexpr std::uint64_t kOracleStateCap = 5000;
constexpr std::uint64_t kDenseSolveLimit = 2000;

/// Transitions: from state x, arrivals move x -> x - e_i at rate
/// lambda * x_i / sum_j x_j whenever sum_j x_j >= 1; service completions
/// move x -> x + e_i at rate mu_i whenever x_i < ell_i.
GeneratorMatrix build_generator(const ClusterParams& params, const Allocation& alloc,
                                std::uint64_t cap = kOracleStateCap);

/// Stationary vector with pi Q = 0 and sum pi = 1; dense LU on the
/// replaced-row system up to kDenseSolveLimit states, power iteration on
/// the uniformized chain beyond.
std::vector<double> solve_stationary(const GeneratorMatrix& gen);

std::vector<double> solve_stationary_dense(const GeneratorMatrix& gen);
std::vector<double> solve_stationary_power(const GeneratorMatrix& gen,
                                           double residual_tol = 1e-12,
                                           std::uint64_t max_iters = 50'000'000);

/// max_j |(pi Q)_j|, the balance-equation residual of a candidate vector.
double stationary_residual(const GeneratorMatrix& gen, const std::vector<double>& pi);

/// Performance metrics recomputed from the solved chain; used to certify
/// the product-form module.
MetricsReport oracle_metrics(const ClusterParams& params, const Allocation& alloc,
                             std::uint64_t cap = kOracleStateCap);

}  // namespace lbq
