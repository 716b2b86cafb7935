#pragma once

#include <cmath>
#include <cstdint>
#include <unordered_map>
#include <vector>

#include "lbq/model.hpp"

namespace lbq {

/// Log-domain table of the normalization constant G over the box of
/// sub-allocations {k : 0 <= k <= ell}, built by the Erlang-B-style
/// recursion G(k) = 1 + sum_{i: k_i >= 1} (mu_i / lambda) G(k - e_i) with
/// G(0) = 1. The whole table is retained because the metric formulas read
/// interior values. Accumulation is log-sum-exp in extended precision, so
/// lambda as small as 1e-6 with L = 60 neither overflows nor underflows.
class NormTable {
public:
    NormTable(const ClusterParams& params, const Allocation& alloc,
              std::uint64_t cap = StateLattice::kDefaultCap);

    /// log G(ell) for the allocation the table was built for.
    double log_g() const { return static_cast<double>(logg_.back()); }

    /// log G(k) for any sub-allocation k <= ell.
    double log_g_at(const std::vector<int>& k) const;

    const Allocation& dims() const noexcept { return dims_; }
    const StateLattice& lattice() const noexcept { return lattice_; }

private:
    friend class DeltaGEvaluator;
    Allocation dims_;
    StateLattice lattice_;
    std::vector<long double> logg_;
};

/// log G(ell) via the recursive table.
double norm_const_log(const ClusterParams& params, const Allocation& alloc,
                      std::uint64_t cap = StateLattice::kDefaultCap);

/// log G(ell) by direct evaluation of the explicit multinomial sum over all
/// states x <= ell. Numerically independent of the recursion; exists as a
/// cross-check oracle and is restricted to small instances.
double norm_const_direct_log(const ClusterParams& params, const Allocation& alloc,
                             int max_total = 30);

/// pi(x) = multinomial(x) prod (mu_i/lambda)^{x_i} / G(ell).
double stationary_log_prob(const ClusterParams& params, const NormTable& table,
                           const StateVector& state);
double stationary_prob(const ClusterParams& params, const Allocation& alloc,
                       const StateVector& state);

/// beta(ell) = 1 / G(ell): by PASTA, the stationary probability of the
/// all-buffers-full state.
double loss_probability(const ClusterParams& params, const Allocation& alloc);

/// rho_i(ell) = G(ell - e_i) / G(ell); zero by convention when ell_i = 0.
double occupation_rate(const ClusterParams& params, const Allocation& alloc, std::size_t i);

/// alpha_i(ell) = sum_{m=1}^{ell_i} G(ell - m e_i) / G(ell).
std::vector<double> mean_queue_lengths(const ClusterParams& params, const Allocation& alloc);

/// Delta(ell) = (sum_i alpha_i) / (lambda (1 - beta)); throws NoAdmittedJobs
/// when L = 0.
double mean_response_time(const ClusterParams& params, const Allocation& alloc);

/// Full report from a single table build.
MetricsReport metrics(const ClusterParams& params, const Allocation& alloc,
                      std::uint64_t cap = StateLattice::kDefaultCap);
MetricsReport metrics_from_table(const ClusterParams& params, const NormTable& table);

/// Signed difference G(ell + e_i - e_j) - G(ell). When the two log values
/// are separated, the subtraction is carried in the linear domain at
/// extended precision; near-ties are reported as 0 with the flag set rather
/// than as subtraction noise; in the remaining narrow band the two-server
/// coefficient expansion takes over.
struct DeltaG {
    double value = 0.0;    // may be +/-inf when G itself exceeds double range
    int sign = 0;          // -1, 0, +1
    double log_abs = 0.0;  // meaningful when sign != 0
    bool near_tie = false;
};

DeltaG delta_g(const ClusterParams& params, const Allocation& alloc, std::size_t i,
               std::size_t j, std::uint64_t cap = StateLattice::kDefaultCap);

constexpr double kNearTieLogTolerance = 1e-12;

/// Sign structure of the coefficient sequence of delta G as a polynomial in
/// 1/lambda (two servers only).
enum class SignPattern { AllPositive, AllNegative, NegThenPos, Unclassified };

struct DeltaCoefficients {
    int n_min = 0;
    int n_max = 0;
    std::vector<double> c;  // c[n - n_min] multiplies lambda^{-n}
    SignPattern pattern = SignPattern::Unclassified;
    int n_star = -1;  // set when pattern == NegThenPos

    /// sum_n c_n lambda^{-n}, compensated summation.
    double evaluate(double lambda) const;
    /// sum_n |c_n| lambda^{-n}; the scale against which cancellation in
    /// evaluate() should be judged.
    double unsigned_mass(double lambda) const;
};

/// Exact coefficient expansion of delta G for a two-server allocation, with
/// the sign pattern classified at relative tolerance 1e-14.
DeltaCoefficients delta_g_coefficients(const ClusterParams& params, const Allocation& alloc);

/// log G over the simplex {k : sum_i k_i <= total_slots}, double precision.
/// One build serves every composition of the total, which is what the
/// allocation search iterates over.
class SimplexNormTable {
public:
    SimplexNormTable(const ClusterParams& params, int total_slots,
                     std::uint64_t cap = 4'000'000);

    double log_g(const std::vector<int>& k) const;
    double loss(const Allocation& alloc) const { return std::exp(-log_g(alloc.ell)); }
    double mean_response_time(const Allocation& alloc) const;
    int total_slots() const noexcept { return total_; }

private:
    std::uint64_t pack(const std::vector<int>& k) const;

    const ClusterParams* params_;
    int total_;
    std::vector<double> logg_;
    std::vector<std::uint64_t> radix_;
    std::unordered_map<std::uint64_t, std::uint32_t> index_;
};

}  // namespace lbq
