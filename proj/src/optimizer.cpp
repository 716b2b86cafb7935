#include "lbq/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>

#include "lbq/productform.hpp"

namespace lbq {

namespace {

constexpr double kTieLogTol = 1e-12;

std::uint64_t composition_count(int total, std::size_t parts) {
    // C(total + parts - 1, parts - 1), saturating
    std::uint64_t out = 1;
    for (std::size_t k = 1; k < parts; ++k) {
        out = out * (static_cast<std::uint64_t>(total) + k) / k;
        if (out > (std::uint64_t{1} << 62)) return out;
    }
    return out;
}

// Visits every composition of `total` into `parts` non-negative parts.
template <typename F>
void for_each_composition(int total, std::size_t parts, F&& visit) {
    std::vector<int> k(parts, 0);
    k[0] = total;
    while (true) {
        visit(k);
        if (parts == 1) return;
        if (k[0] > 0) {
            --k[0];
            ++k[1];
        } else {
            std::size_t i = 1;
            while (i < parts && k[i] == 0) ++i;
            if (i + 1 >= parts) return;
            int v = k[i];
            k[i] = 0;
            k[0] = v - 1;
            ++k[i + 1];
        }
    }
}

void check_grid(const std::vector<double>& lambda_grid) {
    if (lambda_grid.size() < 2)
        throw Error(ErrorCode::InvalidArgument, "lambda grid needs at least 2 points");
    for (std::size_t i = 1; i < lambda_grid.size(); ++i) {
        if (!(lambda_grid[i] > lambda_grid[i - 1]))
            throw Error(ErrorCode::InvalidArgument, "lambda grid must be strictly increasing");
    }
}

}  // namespace

OptimizationResult optimal_allocation(const OptimizationQuery& query) {
    const std::size_t n = query.params.size();
    if (query.total_slots < 1)
        throw Error(ErrorCode::InvalidArgument, "total slot count must be >= 1");
    if (composition_count(query.total_slots, n) > query.search_cap)
        throw Error(ErrorCode::CapacityExceeded, "composition count exceeds search cap");

    SimplexNormTable table(query.params, query.total_slots);

    // Value to minimize, in a transform where ties can be compared with an
    // absolute tolerance: -log G for the loss (relative ties in beta are
    // absolute ties in log), log Delta for the response time.
    std::vector<std::vector<int>> allocs;
    std::vector<double> scores;
    for_each_composition(query.total_slots, n, [&](const std::vector<int>& k) {
        double score;
        if (query.metric == Metric::LossProbability) {
            score = -table.log_g(k);
        } else {
            score = std::log(table.mean_response_time(Allocation{k}));
        }
        allocs.push_back(k);
        scores.push_back(score);
    });

    const std::size_t best_idx =
        std::min_element(scores.begin(), scores.end()) - scores.begin();
    const double best_score = scores[best_idx];

    OptimizationResult result;
    for (std::size_t i = 0; i < allocs.size(); ++i) {
        if (scores[i] - best_score <= query.tie_tolerance)
            result.minimizers.emplace_back(allocs[i]);
    }
    std::sort(result.minimizers.begin(), result.minimizers.end(),
              [](const Allocation& a, const Allocation& b) { return a.ell < b.ell; });

    const Allocation balanced = heavy_traffic_predictor(query.params.mu(), query.total_slots);
    auto distance = [&](const Allocation& a) {
        int d = 0;
        for (std::size_t i = 0; i < a.ell.size(); ++i) d += std::abs(a.ell[i] - balanced.ell[i]);
        return d;
    };
    result.canonical = result.minimizers.front();
    int best_dist = distance(result.canonical);
    for (const Allocation& a : result.minimizers) {
        int d = distance(a);
        if (d < best_dist) {
            best_dist = d;
            result.canonical = a;
        }
    }
    result.best_value = query.metric == Metric::LossProbability
                            ? table.loss(result.canonical)
                            : table.mean_response_time(result.canonical);
    return result;
}

LowTrafficPrediction low_traffic_predictor(const std::vector<double>& mu, int total_slots) {
    if (total_slots < 1)
        throw Error(ErrorCode::InvalidArgument, "total slot count must be >= 1");
    const std::size_t n = mu.size();
    LowTrafficPrediction out;

    if (n == 1) {
        out.primary = Allocation{{total_slots}};
        return out;
    }
    if (n == 2) {
        // Snap to integers before rounding: the theorem endpoints sit exactly
        // on integers in the tie case and rounding noise must not move them.
        const double snap = 1e-9;
        int lo = static_cast<int>(std::ceil(mu[0] * total_slots - mu[1] - snap));
        int hi = static_cast<int>(std::floor(mu[0] * total_slots + mu[0] + snap));
        lo = std::clamp(lo, 0, total_slots);
        hi = std::clamp(hi, 0, total_slots);
        out.primary = Allocation{{lo, total_slots - lo}};
        if (hi != lo) out.alternative = Allocation{{hi, total_slots - hi}};
        return out;
    }

    // Greedy mode of Multinomial(L; mu / sum mu): adding a slot to server i
    // multiplies the pmf by a factor proportional to mu_i / (ell_i + 1).
    std::vector<int> ell(n, 0);
    for (int s = 0; s < total_slots; ++s) {
        std::size_t best = 0;
        double best_ratio = -1.0;
        for (std::size_t i = 0; i < n; ++i) {
            double ratio = mu[i] / (ell[i] + 1);
            if (ratio > best_ratio) {
                best_ratio = ratio;
                best = i;
            }
        }
        ++ell[best];
    }
    out.primary = Allocation{std::move(ell)};
    return out;
}

Allocation heavy_traffic_predictor(const std::vector<double>& mu, int total_slots) {
    if (total_slots < 1)
        throw Error(ErrorCode::InvalidArgument, "total slot count must be >= 1");
    const std::size_t n = mu.size();
    std::vector<int> ell(n, total_slots / static_cast<int>(n));
    int remainder = total_slots % static_cast<int>(n);
    for (int i = 0; i < remainder; ++i) ++ell[i];  // faster servers first
    return Allocation{std::move(ell)};
}

MonotonicityScan monotonicity_scan(const std::vector<double>& mu, int total_slots,
                                   const std::vector<double>& lambda_grid, Metric metric) {
    check_grid(lambda_grid);
    MonotonicityScan scan;
    scan.lambdas = lambda_grid;
    scan.asserted = (metric == Metric::LossProbability);

    for (double lambda : lambda_grid) {
        OptimizationQuery q{ClusterParams(lambda, mu), total_slots, metric};
        scan.canonical.push_back(optimal_allocation(q).canonical);
    }

    const std::size_t n = mu.size();
    const std::size_t slowest = n - 1;
    for (std::size_t t = 1; t < scan.canonical.size(); ++t) {
        const auto& prev = scan.canonical[t - 1].ell;
        const auto& cur = scan.canonical[t].ell;
        if (cur[0] > prev[0])
            scan.violations.push_back({0, lambda_grid[t - 1], lambda_grid[t]});
        if (n > 2 && cur[slowest] < prev[slowest])
            scan.violations.push_back({slowest, lambda_grid[t - 1], lambda_grid[t]});
    }
    return scan;
}

ConjectureReport conjecture_scan(const std::vector<double>& mu, int total_slots,
                                 const std::vector<double>& lambda_grid) {
    if (mu.size() < 3)
        throw Error(ErrorCode::InvalidArgument, "prefix-sum scan needs at least 3 servers");
    check_grid(lambda_grid);

    ConjectureReport report;
    report.lambdas = lambda_grid;
    for (double lambda : lambda_grid) {
        OptimizationQuery q{ClusterParams(lambda, mu), total_slots, Metric::LossProbability};
        report.canonical.push_back(optimal_allocation(q).canonical);
    }

    const std::size_t n = mu.size();
    for (std::size_t prefix = 1; prefix <= n; ++prefix) {
        PrefixMonotonicityResult r{static_cast<int>(prefix), true, {}};
        for (std::size_t t = 1; t < report.canonical.size(); ++t) {
            int prev = 0, cur = 0;
            for (std::size_t i = 0; i < prefix; ++i) {
                prev += report.canonical[t - 1].ell[i];
                cur += report.canonical[t].ell[i];
            }
            if (cur > prev) {
                r.pass = false;
                r.failures.push_back({prefix - 1, lambda_grid[t - 1], lambda_grid[t]});
            }
        }
        report.all_pass = report.all_pass && r.pass;
        report.prefixes.push_back(std::move(r));
    }
    return report;
}

PropositionReport proposition_checks(const std::vector<double>& mu, int max_total,
                                     const std::vector<double>& lambda_grid) {
    if (mu.size() != 2)
        throw Error(ErrorCode::NotTwoServers, "proposition checks are two-server only");
    check_grid(lambda_grid);

    PropositionReport report;
    auto note = [&](const std::string& s) {
        if (report.details.size() < 32) report.details.push_back(s);
    };

    // log G(l1, l2) for every allocation with l1 + l2 <= max_total, per lambda
    std::vector<std::vector<double>> logg(lambda_grid.size());
    for (std::size_t t = 0; t < lambda_grid.size(); ++t) {
        ClusterParams params(lambda_grid[t], mu);
        SimplexNormTable table(params, max_total);
        auto& row = logg[t];
        row.resize(static_cast<std::size_t>(max_total + 1) * (max_total + 1),
                   std::numeric_limits<double>::quiet_NaN());
        for (int l1 = 0; l1 <= max_total; ++l1)
            for (int l2 = 0; l1 + l2 <= max_total; ++l2)
                row[l1 * (max_total + 1) + l2] = table.log_g({l1, l2});
    }
    auto g = [&](std::size_t t, int l1, int l2) { return logg[t][l1 * (max_total + 1) + l2]; };

    // Proposition 1: if moving a slot from server 2 to server 1 does not
    // hurt, then moving slots the other way is strictly worse at every step.
    for (std::size_t t = 0; t < lambda_grid.size(); ++t) {
        for (int l1 = 1; l1 <= max_total - 1; ++l1) {
            for (int l2 = 1; l1 + l2 <= max_total; ++l2) {
                if (g(t, l1 + 1, l2 - 1) < g(t, l1, l2) - kTieLogTol) continue;  // hypothesis fails
                for (int x = 0; x < l1; ++x) {
                    ++report.prop1_checked;
                    double d = g(t, l1 - x, l2 + x) - g(t, l1 - x - 1, l2 + x + 1);
                    if (d <= -kTieLogTol) {
                        ++report.prop1_violations;
                        note("prop1: lambda=" + std::to_string(lambda_grid[t]) + " ell=(" +
                             std::to_string(l1) + "," + std::to_string(l2) +
                             ") x=" + std::to_string(x));
                    }
                }
            }
        }
    }

    // Proposition 2: once delta G is positive at some lambda*, it is positive
    // at every smaller lambda.
    for (int l1 = 0; l1 <= max_total - 1; ++l1) {
        for (int l2 = 1; l1 + l2 <= max_total; ++l2) {
            std::ptrdiff_t hi = -1;
            std::vector<double> sign(lambda_grid.size());
            for (std::size_t t = 0; t < lambda_grid.size(); ++t) {
                sign[t] = g(t, l1 + 1, l2 - 1) - g(t, l1, l2);
                if (sign[t] > kTieLogTol) hi = static_cast<std::ptrdiff_t>(t);
            }
            for (std::ptrdiff_t t = 0; t < hi; ++t) {
                ++report.prop2_checked;
                if (sign[t] <= -kTieLogTol) {
                    ++report.prop2_violations;
                    note("prop2: lambda=" + std::to_string(lambda_grid[t]) + " ell=(" +
                         std::to_string(l1) + "," + std::to_string(l2) + ")");
                }
            }
        }
    }
    return report;
}

}  // namespace lbq
