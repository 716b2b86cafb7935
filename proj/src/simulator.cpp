#include "lbq/simulator.hpp"

#include <algorithm>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <limits>

#include "lbq/productform.hpp"

namespace lbq {

namespace {

// splitmix64: one 64-bit state per stream, full-period, good enough for
// simulation and trivially seedable into disjoint substreams.
std::uint64_t next_u64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

double uniform_open(std::uint64_t& state) {
    return (static_cast<double>(next_u64(state) >> 11) + 0.5) * 0x1.0p-53;
}

double exponential(std::uint64_t& state, double rate) {
    return -std::log(uniform_open(state)) / rate;
}

std::uint64_t stream_seed(std::uint64_t root, std::uint64_t rep, std::uint64_t stream) {
    std::uint64_t s = root;
    s = next_u64(s) ^ (rep * 0xd1342543de82ef95ULL + 1);
    s = next_u64(s) ^ (stream * 0x2545f4914f6cdd1dULL + 1);
    next_u64(s);
    return s;
}

struct Job {
    double remaining;      // in unit-mean size units
    double arrival_time;
    bool measured;
};

}  // namespace

ServiceDistribution ServiceDistribution::hyperexponential_scv(double scv) {
    if (!(scv > 1.0))
        throw Error(ErrorCode::InvalidArgument, "hyperexponential needs SCV > 1");
    double p = 0.5 * (1.0 + std::sqrt((scv - 1.0) / (scv + 1.0)));
    return {Kind::HyperExponential, p, 2.0 * p, 2.0 * (1.0 - p)};
}

double ServiceDistribution::sample(std::uint64_t& rng_state) const {
    switch (kind) {
        case Kind::Exponential: return -std::log(uniform_open(rng_state));
        case Kind::Deterministic: return 1.0;
        case Kind::HyperExponential: {
            double branch = uniform_open(rng_state);
            double rate = branch < p ? r1 : r2;
            return -std::log(uniform_open(rng_state)) / rate;
        }
    }
    return 1.0;
}

std::string ServiceDistribution::name() const {
    switch (kind) {
        case Kind::Exponential: return "exponential";
        case Kind::Deterministic: return "deterministic";
        case Kind::HyperExponential: return "hyperexponential";
    }
    return "?";
}

ReplicationTallies run_replication(const SimConfig& cfg, int rep_index) {
    require_valid(cfg.params, cfg.alloc);
    if (!(cfg.warmup_fraction >= 0.0 && cfg.warmup_fraction < 1.0))
        throw Error(ErrorCode::InvalidArgument, "warmup fraction must be in [0, 1)");

    const std::size_t n = cfg.params.size();
    const double lambda = cfg.params.lambda();
    const std::vector<double>& mu = cfg.params.mu();
    const std::vector<int>& ell = cfg.alloc.ell;

    const auto rep = static_cast<std::uint64_t>(rep_index);
    std::uint64_t arrival_rng = stream_seed(cfg.seed, rep, 0);
    std::uint64_t dispatch_rng = stream_seed(cfg.seed, rep, 1);
    std::vector<std::uint64_t> size_rng(n);
    for (std::size_t i = 0; i < n; ++i) size_rng[i] = stream_seed(cfg.seed, rep, 2 + i);

    const std::uint64_t warmup_count = static_cast<std::uint64_t>(
        std::llround(cfg.arrivals * cfg.warmup_fraction / (1.0 - cfg.warmup_fraction)));
    const std::uint64_t total_count = warmup_count + cfg.arrivals;

    std::vector<std::vector<Job>> queue(n);
    double t = 0.0;
    double next_arrival = exponential(arrival_rng, lambda);
    std::uint64_t arrival_counter = 0;

    double window_start = warmup_count == 0 ? 0.0 : -1.0;
    double window_end = -1.0;

    ReplicationTallies tally;
    tally.busy_fraction.assign(n, 0.0);
    std::vector<double> busy_time(n, 0.0);
    double jobs_time_integral = 0.0;
    double all_full_time = 0.0;
    double response_sum = 0.0;
    std::uint64_t measured_in_flight = 0;

    auto total_free = [&]() {
        int f = 0;
        for (std::size_t i = 0; i < n; ++i) f += ell[i] - static_cast<int>(queue[i].size());
        return f;
    };

    while (true) {
        // next completion across servers
        double next_completion = std::numeric_limits<double>::infinity();
        std::size_t comp_server = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (queue[i].empty()) continue;
            double dt;
            if (cfg.scheduler == Scheduler::ProcessorSharing) {
                double min_rem = queue[i][0].remaining;
                for (const Job& j : queue[i]) min_rem = std::min(min_rem, j.remaining);
                dt = min_rem * static_cast<double>(queue[i].size()) / mu[i];
            } else {
                dt = queue[i].front().remaining / mu[i];
            }
            if (t + dt < next_completion) {
                next_completion = t + dt;
                comp_server = i;
            }
        }

        if (arrival_counter >= total_count && measured_in_flight == 0) break;
        double event_time = std::min(next_arrival, next_completion);

        // accumulate time integrals over the part of [t, event_time] that
        // lies inside the measurement window
        if (window_start >= 0.0) {
            double lo = std::max(t, window_start);
            double hi = window_end >= 0.0 ? std::min(event_time, window_end) : event_time;
            if (hi > lo) {
                double span = hi - lo;
                int jobs = 0;
                for (std::size_t i = 0; i < n; ++i) {
                    if (!queue[i].empty()) busy_time[i] += span;
                    jobs += static_cast<int>(queue[i].size());
                }
                jobs_time_integral += span * jobs;
                if (total_free() == 0) all_full_time += span;
            }
        }

        // deplete work over [t, event_time]
        double dt = event_time - t;
        for (std::size_t i = 0; i < n; ++i) {
            if (queue[i].empty()) continue;
            if (cfg.scheduler == Scheduler::ProcessorSharing) {
                double dec = dt * mu[i] / static_cast<double>(queue[i].size());
                for (Job& j : queue[i]) j.remaining -= dec;
            } else {
                queue[i].front().remaining -= dt * mu[i];
            }
        }
        t = event_time;

        if (next_completion <= next_arrival) {
            auto& q = queue[comp_server];
            std::size_t pos = 0;
            if (cfg.scheduler == Scheduler::ProcessorSharing) {
                for (std::size_t j = 1; j < q.size(); ++j)
                    if (q[j].remaining < q[pos].remaining) pos = j;
            }
            Job done = q[pos];
            q.erase(q.begin() + static_cast<std::ptrdiff_t>(pos));
            if (window_start >= 0.0 && t > window_start &&
                (window_end < 0.0 || t <= window_end))
                ++tally.departures_in_window;
            if (done.measured) {
                response_sum += t - done.arrival_time;
                --measured_in_flight;
            }
        } else {
            ++arrival_counter;
            bool measured = arrival_counter > warmup_count && arrival_counter <= total_count;
            if (arrival_counter == warmup_count) window_start = t;
            if (measured) ++tally.arrivals;

            int free = total_free();
            if (free == 0) {
                if (measured) ++tally.rejected;
            } else {
                // pick server i with probability x_i / sum x
                double u = uniform_open(dispatch_rng) * free;
                std::size_t target = 0;
                int acc = 0;
                for (std::size_t i = 0; i < n; ++i) {
                    acc += ell[i] - static_cast<int>(queue[i].size());
                    if (u < acc) {
                        target = i;
                        break;
                    }
                }
                double size = cfg.service.sample(size_rng[target]);
                queue[target].push_back({size, t, measured});
                if (measured) {
                    ++tally.admitted;
                    ++measured_in_flight;
                }
            }
            if (arrival_counter == total_count) window_end = t;
            next_arrival = t + exponential(arrival_rng, lambda);
        }
    }

    if (window_start < 0.0) window_start = 0.0;
    if (window_end < 0.0) window_end = t;
    tally.window_duration = window_end - window_start;
    tally.loss_fraction =
        tally.arrivals > 0 ? static_cast<double>(tally.rejected) / tally.arrivals : 1.0;
    tally.mean_response_time = tally.admitted > 0 ? response_sum / tally.admitted : 0.0;
    if (tally.window_duration > 0.0) {
        for (std::size_t i = 0; i < n; ++i)
            tally.busy_fraction[i] = busy_time[i] / tally.window_duration;
        tally.time_average_jobs = jobs_time_integral / tally.window_duration;
        tally.fraction_time_all_full = all_full_time / tally.window_duration;
        tally.throughput = tally.departures_in_window / tally.window_duration;
    }
    return tally;
}

namespace {

Estimate aggregate(const std::vector<double>& samples, double t_quantile) {
    const auto r = static_cast<double>(samples.size());
    double mean = 0.0;
    for (double v : samples) mean += v;
    mean /= r;
    double var = 0.0;
    for (double v : samples) var += (v - mean) * (v - mean);
    var /= (r - 1.0);
    return {mean, t_quantile * std::sqrt(var / r)};
}

}  // namespace

SimEstimate estimate_metrics(const SimConfig& cfg) {
    if (cfg.replications < 2)
        throw Error(ErrorCode::InvalidArgument, "need at least 2 replications");

    std::vector<ReplicationTallies> reps;
    reps.reserve(cfg.replications);
    for (int r = 0; r < cfg.replications; ++r) reps.push_back(run_replication(cfg, r));

    boost::math::students_t_distribution<double> tdist(cfg.replications - 1);
    const double tq = boost::math::quantile(tdist, 1.0 - (1.0 - cfg.confidence) / 2.0);

    auto collect = [&](auto&& get) {
        std::vector<double> v;
        v.reserve(reps.size());
        for (const auto& rep : reps) v.push_back(get(rep));
        return aggregate(v, tq);
    };

    SimEstimate est;
    est.replications = cfg.replications;
    est.confidence = cfg.confidence;
    est.loss = collect([](const auto& r) { return r.loss_fraction; });
    est.mean_response_time = collect([](const auto& r) { return r.mean_response_time; });
    est.throughput = collect([](const auto& r) { return r.throughput; });
    est.time_average_jobs = collect([](const auto& r) { return r.time_average_jobs; });
    est.fraction_time_all_full = collect([](const auto& r) { return r.fraction_time_all_full; });
    for (std::size_t i = 0; i < cfg.params.size(); ++i)
        est.occupation.push_back(collect([i](const auto& r) { return r.busy_fraction[i]; }));
    return est;
}

InsensitivityReport insensitivity_test(const SimConfig& base) {
    if (base.scheduler != Scheduler::ProcessorSharing)
        throw Error(ErrorCode::SchedulerNotPS, "insensitivity holds under processor sharing");

    InsensitivityReport report;
    std::vector<ServiceDistribution> dists = {ServiceDistribution::exponential(),
                                              ServiceDistribution::deterministic(),
                                              ServiceDistribution::hyperexponential_scv(4.0)};
    for (const auto& d : dists) {
        SimConfig cfg = base;
        cfg.service = d;
        report.distribution_names.push_back(d.name());
        report.estimates.push_back(estimate_metrics(cfg));
    }

    MetricsReport analytic = metrics(base.params, base.alloc);

    auto check = [&](const std::string& name, double value, auto&& field) {
        InsensitivityCheck c;
        c.metric = name;
        c.analytic = value;
        std::vector<Estimate> ests;
        for (const auto& e : report.estimates) ests.push_back(field(e));
        for (const auto& e : ests) c.covered_by_all = c.covered_by_all && e.covers(value);
        for (std::size_t a = 0; a < ests.size(); ++a)
            for (std::size_t b = a + 1; b < ests.size(); ++b)
                if (std::abs(ests[a].mean - ests[b].mean) >=
                    ests[a].half_width + ests[b].half_width)
                    c.pairwise_consistent = false;
        report.all_pass = report.all_pass && c.pass();
        report.checks.push_back(std::move(c));
    };

    check("loss", analytic.loss, [](const SimEstimate& e) { return e.loss; });
    if (analytic.mean_response_time)
        check("mean_response_time", *analytic.mean_response_time,
              [](const SimEstimate& e) { return e.mean_response_time; });
    for (std::size_t i = 0; i < base.params.size(); ++i)
        check("occupation[" + std::to_string(i) + "]", analytic.occupation[i],
              [i](const SimEstimate& e) { return e.occupation[i]; });
    return report;
}

}  // namespace lbq
