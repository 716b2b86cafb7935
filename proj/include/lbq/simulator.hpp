#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lbq/model.hpp"

namespace lbq {

enum class Scheduler { ProcessorSharing, Fcfs };

/// Unit-mean job-size distribution; sizes are scaled by 1/mu_i at the
/// server, so the mean service time at server i is 1/mu_i regardless of
/// shape.
struct ServiceDistribution {
    enum class Kind { Exponential, Deterministic, HyperExponential };

    Kind kind = Kind::Exponential;
    // hyperexponential branch: rate r1 with probability p, else rate r2;
    // p/r1 + (1-p)/r2 = 1 is enforced at construction
    double p = 0.5;
    double r1 = 1.0;
    double r2 = 1.0;

    static ServiceDistribution exponential() { return {}; }
    static ServiceDistribution deterministic() { return {Kind::Deterministic, 0, 0, 0}; }
    /// Balanced-means hyperexponential with the given squared coefficient of
    /// variation (> 1), unit mean.
    static ServiceDistribution hyperexponential_scv(double scv);

    double sample(std::uint64_t& rng_state) const;
    std::string name() const;
};

struct SimConfig {
    ClusterParams params;
    Allocation alloc;
    Scheduler scheduler = Scheduler::ProcessorSharing;
    ServiceDistribution service = ServiceDistribution::exponential();
    std::uint64_t arrivals = 1'000'000;   // measured (post-warmup) arrivals
    double warmup_fraction = 0.2;         // extra arrivals discarded up front
    int replications = 20;
    std::uint64_t seed = 1;
    double confidence = 0.95;
};

/// Raw tallies of one replication, measured over the post-warmup window.
struct ReplicationTallies {
    std::uint64_t arrivals = 0;
    std::uint64_t admitted = 0;
    std::uint64_t rejected = 0;
    std::uint64_t departures_in_window = 0;
    double window_duration = 0.0;
    double loss_fraction = 0.0;
    double mean_response_time = 0.0;  // jobs admitted in the window, run to completion
    double throughput = 0.0;          // departures per unit time in the window
    std::vector<double> busy_fraction;
    double time_average_jobs = 0.0;
    double fraction_time_all_full = 0.0;  // time with x = 0, for the PASTA check
};

ReplicationTallies run_replication(const SimConfig& cfg, int rep_index);

struct Estimate {
    double mean = 0.0;
    double half_width = 0.0;

    bool covers(double value) const {
        return value >= mean - half_width && value <= mean + half_width;
    }
};

struct SimEstimate {
    Estimate loss;
    Estimate mean_response_time;
    Estimate throughput;
    std::vector<Estimate> occupation;
    Estimate time_average_jobs;
    Estimate fraction_time_all_full;
    int replications = 0;
    double confidence = 0.95;
};

/// Replicated estimates with t-distribution confidence intervals; the
/// replications use independent substreams derived from the root seed, so
/// the result is a deterministic function of the config.
SimEstimate estimate_metrics(const SimConfig& cfg);

struct InsensitivityCheck {
    std::string metric;
    double analytic = 0.0;
    bool covered_by_all = true;    // every distribution's CI covers the analytic value
    bool pairwise_consistent = true;  // means differ by less than combined CI widths
    bool pass() const { return covered_by_all && pairwise_consistent; }
};

struct InsensitivityReport {
    std::vector<SimEstimate> estimates;          // exponential, deterministic, hyperexponential
    std::vector<std::string> distribution_names;
    std::vector<InsensitivityCheck> checks;      // loss, response time, occupation per server
    bool all_pass = true;
};

/// Runs the base config under exponential, deterministic, and
/// hyperexponential (SCV ~ 4) unit-mean sizes; requires processor sharing.
InsensitivityReport insensitivity_test(const SimConfig& base);

}  // namespace lbq
