#pragma once

#include <optional>
#include <string>
#include <vector>

#include "lbq/model.hpp"

namespace lbq {

enum class Metric { LossProbability, MeanResponseTime };

struct OptimizationQuery {
    ClusterParams params;
    int total_slots = 1;
    Metric metric = Metric::LossProbability;
    // Relative tolerance on metric values below which allocations are
    // reported as tied. In deep saturation adjacent allocations differ by
    // less than this, so the tolerance also sets where the search stops
    // pretending to resolve them and defers to the tie-break instead.
    double tie_tolerance = 1e-8;
    std::uint64_t search_cap = 200'000;  // max compositions to enumerate
};

struct OptimizationResult {
    std::vector<Allocation> minimizers;  // all within tie tolerance of the best
    // Minimizer closest (L1) to the balanced allocation, ties broken
    // lexicographically. For genuine low-traffic two-member ties this is the
    // smaller fast-server buffer, i.e. the usual "smallest" convention; in
    // saturation it selects the balanced member of the tie band.
    Allocation canonical;
    double best_value = 0.0;
};

/// Exhaustive search over every composition of L into N parts, metric
/// evaluated exactly from one normalization table per call.
OptimizationResult optimal_allocation(const OptimizationQuery& query);

/// Prediction of the loss-optimal allocation as lambda -> 0. For two
/// servers this is the ceil endpoint of the theorem interval, with the
/// floor endpoint reported separately in the tie case; for N > 2 it is a
/// mode of Multinomial(L; mu), found greedily.
struct LowTrafficPrediction {
    Allocation primary;
    std::optional<Allocation> alternative;
};

/// mu must be sorted non-increasing (ClusterParams order).
LowTrafficPrediction low_traffic_predictor(const std::vector<double>& mu, int total_slots);

/// Balanced allocation for lambda -> infinity: every ell_i in
/// {floor(L/N), ceil(L/N)}, the larger values going to the faster servers.
Allocation heavy_traffic_predictor(const std::vector<double>& mu, int total_slots);

struct MonotonicityViolation {
    std::size_t server;
    double lambda_before;
    double lambda_after;
};

struct MonotonicityScan {
    std::vector<double> lambdas;
    std::vector<Allocation> canonical;
    std::vector<MonotonicityViolation> violations;
    bool asserted = true;  // false for the response-time metric (observed only)
};

/// Per-lambda canonical optima across a strictly increasing grid. For the
/// loss metric the expected monotonicity (fastest server non-increasing,
/// slowest non-decreasing when N > 2) is checked and violations reported;
/// for the response-time metric violations are recorded as observations.
MonotonicityScan monotonicity_scan(const std::vector<double>& mu, int total_slots,
                                   const std::vector<double>& lambda_grid, Metric metric);

struct PrefixMonotonicityResult {
    int prefix;  // number of fastest servers summed
    bool pass;
    std::vector<MonotonicityViolation> failures;
};

struct ConjectureReport {
    std::vector<double> lambdas;
    std::vector<Allocation> canonical;
    std::vector<PrefixMonotonicityResult> prefixes;
    bool all_pass = true;
};

/// Evidence scan for the prefix-sum conjecture: for each n, the total
/// optimal buffer of the n fastest servers should be non-increasing in
/// lambda. Loss metric, N >= 3.
ConjectureReport conjecture_scan(const std::vector<double>& mu, int total_slots,
                                 const std::vector<double>& lambda_grid);

struct PropositionReport {
    std::uint64_t prop1_checked = 0;
    std::uint64_t prop1_violations = 0;
    std::uint64_t prop2_checked = 0;
    std::uint64_t prop2_violations = 0;
    std::vector<std::string> details;  // first few violations, human readable

    bool pass() const { return prop1_violations == 0 && prop2_violations == 0; }
};

/// Exhaustive grid verification of the two monotonicity propositions behind
/// the lambda-monotonicity theorem, for all two-server allocations with
/// ell_1 + ell_2 <= max_total.
PropositionReport proposition_checks(const std::vector<double>& mu, int max_total,
                                     const std::vector<double>& lambda_grid);

}  // namespace lbq
