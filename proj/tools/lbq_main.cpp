#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "lbq/optimizer.hpp"
#include "lbq/oracle.hpp"
#include "lbq/productform.hpp"
#include "lbq/simulator.hpp"

using json = nlohmann::json;

namespace {

std::string fmt12(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

std::vector<double> parse_rates(const std::string& csv) {
    std::vector<double> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(std::stod(item));
    if (out.empty()) throw CLI::ValidationError("--mu", "empty rate list");
    return out;
}

std::vector<int> parse_lengths(const std::string& csv) {
    std::vector<int> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(std::stoi(item));
    if (out.empty()) throw CLI::ValidationError("--ell", "empty length list");
    return out;
}

struct OutputTarget {
    std::string path;  // empty = stdout

    void write(const std::string& content) const {
        if (path.empty()) {
            std::cout << content;
            return;
        }
        std::ofstream f(path, std::ios::binary);
        if (!f) throw std::runtime_error("cannot open output file: " + path);
        f << content;
    }
};

// Evaluates `work(i)` for i in [0, count) on up to `threads` workers and
// concatenates the results in index order, so the output does not depend on
// the thread count.
std::string ordered_parallel(std::size_t count, int threads,
                             const std::function<std::string(std::size_t)>& work) {
    if (threads < 2 || count < 2) {
        std::string out;
        for (std::size_t i = 0; i < count; ++i) out += work(i);
        return out;
    }
    std::vector<std::future<std::string>> futures;
    futures.reserve(count);
    for (std::size_t i = 0; i < count; ++i)
        futures.push_back(std::async(std::launch::deferred | std::launch::async,
                                     [&work, i] { return work(i); }));
    std::string out;
    for (auto& f : futures) out += f.get();
    return out;
}

std::vector<double> lambda_grid(double lo, double hi, int points, bool log_spaced) {
    if (points < 1) throw CLI::ValidationError("--points", "need at least one grid point");
    if (!(lo > 0.0) || !(hi > lo) || points < 2) {
        if (points == 1 && lo > 0.0) return {lo};
        throw CLI::ValidationError("--lambda-min/--lambda-max", "need 0 < min < max");
    }
    std::vector<double> grid(points);
    for (int i = 0; i < points; ++i) {
        double t = static_cast<double>(i) / (points - 1);
        grid[i] = log_spaced ? lo * std::pow(hi / lo, t) : lo + (hi - lo) * t;
    }
    return grid;
}

std::string scheduler_csv(const lbq::SimEstimate& est, const lbq::MetricsReport& exact,
                          const lbq::ClusterParams& params) {
    std::string out = "quantity,server,mean,half_width,analytic\n";
    auto row = [&](const std::string& q, int server, const lbq::Estimate& e, double a) {
        out += q + "," + (server ? std::to_string(server) : "") + "," + fmt12(e.mean) + "," +
               fmt12(e.half_width) + "," + fmt12(a) + "\n";
    };
    row("loss", 0, est.loss, exact.loss);
    row("mean_response_time", 0, est.mean_response_time,
        exact.mean_response_time.value_or(0.0));
    row("throughput", 0, est.throughput, params.lambda() * (1.0 - exact.loss));
    auto occ_user = params.to_user(exact.occupation);
    std::vector<lbq::Estimate> est_occ_user(est.occupation.size());
    for (std::size_t i = 0; i < est.occupation.size(); ++i)
        est_occ_user[params.user_index(i)] = est.occupation[i];
    for (std::size_t i = 0; i < est_occ_user.size(); ++i)
        row("occupation", static_cast<int>(i) + 1, est_occ_user[i], occ_user[i]);
    row("time_average_jobs", 0, est.time_average_jobs, 0.0);
    row("fraction_time_all_full", 0, est.fraction_time_all_full, exact.loss);
    return out;
}

int run_analyze(double lambda, const std::vector<double>& mu_user,
                const std::vector<int>& ell_user, const std::string& format,
                const OutputTarget& out) {
    lbq::ClusterParams params(lambda, mu_user);
    lbq::Allocation alloc{params.to_internal(ell_user)};
    lbq::require_valid(params, alloc);
    lbq::MetricsReport report = lbq::metrics(params, alloc);

    auto occ = params.to_user(report.occupation);
    auto jobs = params.to_user(report.mean_jobs);

    if (format == "json") {
        json j;
        j["lambda"] = lambda;
        j["mu"] = mu_user;
        j["ell"] = ell_user;
        j["loss"] = report.loss;
        j["norm_const_log"] = report.norm_const_log;
        if (report.mean_response_time)
            j["mean_response_time"] = *report.mean_response_time;
        else
            j["mean_response_time"] = nullptr;
        j["occupation"] = occ;
        j["mean_jobs"] = jobs;
        out.write(j.dump(2) + "\n");
        return 0;
    }
    std::string csv = "quantity,server,value\n";
    csv += "loss,," + fmt12(report.loss) + "\n";
    csv += "norm_const_log,," + fmt12(report.norm_const_log) + "\n";
    if (report.mean_response_time)
        csv += "mean_response_time,," + fmt12(*report.mean_response_time) + "\n";
    for (std::size_t i = 0; i < occ.size(); ++i)
        csv += "occupation," + std::to_string(i + 1) + "," + fmt12(occ[i]) + "\n";
    for (std::size_t i = 0; i < jobs.size(); ++i)
        csv += "mean_jobs," + std::to_string(i + 1) + "," + fmt12(jobs[i]) + "\n";
    out.write(csv);
    return 0;
}

std::string optimize_row(const lbq::OptimizationResult& r, const lbq::ClusterParams& params,
                         double lambda) {
    std::string row = fmt12(lambda);
    for (int l : params.to_user(r.canonical.ell)) row += "," + std::to_string(l);
    row += "," + fmt12(r.best_value) + "," + std::to_string(r.minimizers.size()) + "\n";
    return row;
}

std::string optimize_header(std::size_t n) {
    std::string h = "lambda";
    for (std::size_t i = 1; i <= n; ++i) h += ",ell_" + std::to_string(i);
    return h + ",best_value,ties\n";
}

int run_optimize(double lambda, const std::vector<double>& mu_user, int total_slots,
                 lbq::Metric metric, const std::string& format, const OutputTarget& out) {
    lbq::ClusterParams params(lambda, mu_user);
    auto result = lbq::optimal_allocation({params, total_slots, metric});
    if (format == "json") {
        json j;
        j["lambda"] = lambda;
        j["total_slots"] = total_slots;
        j["metric"] = metric == lbq::Metric::LossProbability ? "loss" : "mean_response_time";
        j["canonical"] = params.to_user(result.canonical.ell);
        j["best_value"] = result.best_value;
        json mins = json::array();
        for (const auto& m : result.minimizers) mins.push_back(params.to_user(m.ell));
        j["minimizers"] = mins;
        out.write(j.dump(2) + "\n");
        return 0;
    }
    out.write(optimize_header(mu_user.size()) + optimize_row(result, params, lambda));
    return 0;
}

int run_sweep(const std::vector<double>& mu_user, int total_slots, lbq::Metric metric,
              const std::vector<double>& grid, int threads, const std::string& format,
              const OutputTarget& out) {
    auto row_for = [&](std::size_t i) {
        lbq::ClusterParams params(grid[i], mu_user);
        auto result = lbq::optimal_allocation({params, total_slots, metric});
        return optimize_row(result, params, grid[i]);
    };
    if (format == "json") {
        json rows = json::array();
        for (std::size_t i = 0; i < grid.size(); ++i) {
            lbq::ClusterParams params(grid[i], mu_user);
            auto result = lbq::optimal_allocation({params, total_slots, metric});
            json j;
            j["lambda"] = grid[i];
            j["canonical"] = params.to_user(result.canonical.ell);
            j["best_value"] = result.best_value;
            j["ties"] = result.minimizers.size();
            rows.push_back(j);
        }
        out.write(rows.dump(2) + "\n");
        return 0;
    }
    out.write(optimize_header(mu_user.size()) +
              ordered_parallel(grid.size(), threads, row_for));
    return 0;
}

int run_simulate(const lbq::SimConfig& cfg, const std::vector<double>& mu_user,
                 const std::string& format, const OutputTarget& out) {
    lbq::SimEstimate est = lbq::estimate_metrics(cfg);
    lbq::MetricsReport exact = lbq::metrics(cfg.params, cfg.alloc);
    if (format == "json") {
        json j;
        j["lambda"] = cfg.params.lambda();
        j["mu"] = mu_user;
        j["replications"] = est.replications;
        j["confidence"] = est.confidence;
        auto put = [&](const std::string& k, const lbq::Estimate& e) {
            j[k] = {{"mean", e.mean}, {"half_width", e.half_width}};
        };
        put("loss", est.loss);
        put("mean_response_time", est.mean_response_time);
        put("throughput", est.throughput);
        put("time_average_jobs", est.time_average_jobs);
        put("fraction_time_all_full", est.fraction_time_all_full);
        json occ = json::array();
        std::vector<lbq::Estimate> occ_user(est.occupation.size());
        for (std::size_t i = 0; i < est.occupation.size(); ++i)
            occ_user[cfg.params.user_index(i)] = est.occupation[i];
        for (const auto& e : occ_user)
            occ.push_back({{"mean", e.mean}, {"half_width", e.half_width}});
        j["occupation"] = occ;
        j["analytic_loss"] = exact.loss;
        out.write(j.dump(2) + "\n");
        return 0;
    }
    out.write(scheduler_csv(est, exact, cfg.params));
    return 0;
}

// ---- verify suites ----

int verify_productform(int instances, std::uint64_t max_states, std::uint64_t seed,
                       const OutputTarget& out) {
    std::mt19937_64 rng(seed);
    double max_err = 0.0;
    int checked = 0;
    const double lambdas[] = {0.1, 1.0, 10.0};
    while (checked < instances) {
        std::size_t n = 2 + rng() % 3;
        std::vector<double> mu(n);
        double s = 0.0;
        for (auto& m : mu) {
            m = 0.05 + 0.95 * (rng() % 10000) / 10000.0;
            s += m;
        }
        for (auto& m : mu) m /= s;
        std::vector<int> ell(n);
        std::uint64_t states = 1;
        for (auto& l : ell) {
            l = static_cast<int>(rng() % 8);
            states *= static_cast<std::uint64_t>(l) + 1;
        }
        if (states > max_states) continue;
        lbq::ClusterParams params(lambdas[checked % 3], mu);
        lbq::Allocation alloc{ell};

        lbq::GeneratorMatrix gen = lbq::build_generator(params, alloc, max_states);
        std::vector<double> pi = lbq::solve_stationary(gen);
        lbq::NormTable table(params, alloc);
        for (std::uint64_t i = 0; i < gen.dim; ++i) {
            double exact = std::exp(lbq::stationary_log_prob(params, table,
                                                             gen.lattice.state(i)));
            max_err = std::max(max_err, std::abs(pi[i] - exact));
        }
        ++checked;
    }
    bool pass = max_err <= 1e-9;
    out.write("suite=productform instances=" + std::to_string(checked) +
              " max_state_error=" + fmt12(max_err) +
              " result=" + (pass ? "pass" : "fail") + "\n");
    return pass ? 0 : 1;
}

int verify_propositions(const std::vector<double>& mu_user, int total_slots,
                        const std::vector<double>& grid, const OutputTarget& out) {
    std::vector<double> mu = mu_user;
    std::sort(mu.begin(), mu.end(), std::greater<>());
    auto report = lbq::proposition_checks(mu, total_slots, grid);
    std::string msg = "suite=propositions prop1_checked=" +
                      std::to_string(report.prop1_checked) +
                      " prop1_violations=" + std::to_string(report.prop1_violations) +
                      " prop2_checked=" + std::to_string(report.prop2_checked) +
                      " prop2_violations=" + std::to_string(report.prop2_violations) +
                      " result=" + (report.pass() ? "pass" : "fail") + "\n";
    for (const auto& d : report.details) msg += "  " + d + "\n";
    out.write(msg);
    return report.pass() ? 0 : 1;
}

int verify_conjecture(const std::vector<double>& mu_user, int total_slots,
                      const std::vector<double>& grid, const OutputTarget& out) {
    std::vector<double> mu = mu_user;
    std::sort(mu.begin(), mu.end(), std::greater<>());
    auto report = lbq::conjecture_scan(mu, total_slots, grid);
    std::string msg = "suite=conjecture prefixes=" + std::to_string(report.prefixes.size()) +
                      " result=" + (report.all_pass ? "pass" : "fail") + "\n";
    for (const auto& p : report.prefixes)
        msg += "  prefix=" + std::to_string(p.prefix) + " " + (p.pass ? "pass" : "fail") +
               " failures=" + std::to_string(p.failures.size()) + "\n";
    out.write(msg);
    return report.all_pass ? 0 : 1;
}

int verify_insensitivity(const lbq::SimConfig& cfg, const OutputTarget& out) {
    auto report = lbq::insensitivity_test(cfg);
    std::string msg = "suite=insensitivity distributions=3 result=";
    msg += report.all_pass ? "pass" : "fail";
    msg += "\n";
    for (const auto& c : report.checks)
        msg += "  metric=" + c.metric + " analytic=" + fmt12(c.analytic) +
               " covered=" + (c.covered_by_all ? "yes" : "no") +
               " pairwise=" + (c.pairwise_consistent ? "yes" : "no") + "\n";
    out.write(msg);
    return report.all_pass ? 0 : 1;
}

// ---- figures ----

std::string figure_loss_vs_l1() {
    // two-server loss as a function of ell_1, one column per arrival rate
    const int L = 20;
    std::vector<double> lambdas;
    for (int i = 1; i <= 8; ++i) lambdas.push_back(0.25 * i);
    std::string csv = "l1";
    for (double l : lambdas) csv += ",lambda=" + fmt12(l);
    csv += "\n";
    for (int l1 = 0; l1 <= L; ++l1) {
        csv += std::to_string(l1);
        for (double lam : lambdas) {
            lbq::ClusterParams params(lam, {0.9, 0.1});
            csv += "," + fmt12(lbq::loss_probability(params, lbq::Allocation{{l1, L - l1}}));
        }
        csv += "\n";
    }
    return csv;
}

std::string figure_optimal_l1(lbq::Metric metric, int threads) {
    // optimal fast-server buffer vs lambda, one column per mu_1
    const int L = 20;
    const std::vector<double> mu1s = {0.5, 0.6, 0.7, 0.8, 0.9, 0.95};
    std::vector<double> grid = lambda_grid(0.05, 5.0, 100, false);
    std::string csv = "lambda";
    for (double m : mu1s) csv += ",mu1=" + fmt12(m);
    csv += "\n";
    csv += ordered_parallel(grid.size(), threads, [&](std::size_t i) {
        std::string row = fmt12(grid[i]);
        for (double m : mu1s) {
            auto r = lbq::optimal_allocation(
                {lbq::ClusterParams(grid[i], {m, 1.0 - m}), L, metric});
            row += "," + std::to_string(r.canonical.ell[0]);
        }
        return row + "\n";
    });
    return csv;
}

std::string figure_mst_vs_lambda() {
    // mean response time vs lambda, one column per ell_1
    const int L = 20;
    const std::vector<int> l1s = {0, 4, 8, 12, 16, 20};
    std::vector<double> grid = lambda_grid(0.02, 4.0, 200, false);
    std::string csv = "lambda";
    for (int l : l1s) csv += ",l1=" + std::to_string(l);
    csv += "\n";
    for (double lam : grid) {
        csv += fmt12(lam);
        lbq::ClusterParams params(lam, {0.75, 0.25});
        for (int l1 : l1s)
            csv += "," +
                   fmt12(lbq::mean_response_time(params, lbq::Allocation{{l1, L - l1}}));
        csv += "\n";
    }
    return csv;
}

std::string figure_four_server(lbq::Metric metric, int threads) {
    // optimal allocation per server vs lambda in the four-server cluster
    const int L = 40;
    const std::vector<double> mu = {0.45, 0.3, 0.2, 0.05};
    std::vector<double> grid = lambda_grid(0.14, 7.0, 50, false);
    std::string csv = "lambda,l1,l2,l3,l4\n";
    csv += ordered_parallel(grid.size(), threads, [&](std::size_t i) {
        auto r = lbq::optimal_allocation({lbq::ClusterParams(grid[i], mu), L, metric});
        std::string row = fmt12(grid[i]);
        for (int l : r.canonical.ell) row += "," + std::to_string(l);
        return row + "\n";
    });
    return csv;
}

}  // namespace

int main(int argc, char** argv) {
    // config pre-pass: --config FILE provides defaults in JSON form; flags
    // given on the command line win because they come later in the arg list
    std::vector<std::string> args;
    std::string config_path;
    for (int i = 1; i < argc; ++i) {
        std::string a = argv[i];
        if (a == "--config" && i + 1 < argc) {
            config_path = argv[++i];
            continue;
        }
        args.push_back(a);
    }
    if (!config_path.empty()) {
        std::ifstream f(config_path);
        if (!f) {
            std::cerr << "cannot open config file: " << config_path << "\n";
            return 2;
        }
        json cfg;
        try {
            f >> cfg;
        } catch (const std::exception& e) {
            std::cerr << "bad config file: " << e.what() << "\n";
            return 2;
        }
        std::vector<std::string> injected;
        for (auto it = cfg.begin(); it != cfg.end(); ++it) {
            injected.push_back("--" + it.key());
            if (it.value().is_boolean()) {
                if (!it.value().get<bool>()) injected.pop_back();
            } else if (it.value().is_string()) {
                injected.push_back(it.value().get<std::string>());
            } else {
                injected.push_back(it.value().dump());
            }
        }
        // insert after the subcommand name so they parse as its options
        std::size_t pos = args.empty() ? 0 : 1;
        args.insert(args.begin() + static_cast<std::ptrdiff_t>(pos), injected.begin(),
                    injected.end());
    }

    CLI::App app{"Exact analysis, buffer optimization, and stochastic validation of "
                 "slot-proportional load balancing on finite-buffer clusters"};
    app.require_subcommand(1);
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

    std::string format = "csv";
    std::string out_path;
    std::string mu_csv;
    std::string ell_csv;
    double lambda = 1.0;
    int total_slots = 1;
    std::string metric_name = "loss";
    double lambda_min = 0.05, lambda_max = 5.0;
    int points = 100;
    bool log_grid = false;
    int threads = 1;
    std::uint64_t seed = 1;
    std::string scheduler_name = "ps";
    std::string service_name = "exponential";
    double scv = 4.0;
    std::uint64_t arrivals = 100000;
    int replications = 20;
    double warmup = 0.2;
    double confidence = 0.95;
    std::string suite;
    int instances = 50;
    std::uint64_t max_states = 5000;
    int figure_id = 0;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--format", format)->check(CLI::IsMember({"csv", "json"}));
        cmd->add_option("--out", out_path);
        cmd->add_option("--threads", threads)->check(CLI::Range(1, 256));
    };

    CLI::App* analyze = app.add_subcommand("analyze", "exact metrics of one instance");
    analyze->add_option("--lambda", lambda)->required();
    analyze->add_option("--mu", mu_csv)->required();
    analyze->add_option("--ell", ell_csv)->required();
    add_common(analyze);

    CLI::App* optimize = app.add_subcommand("optimize", "best allocation at one arrival rate");
    optimize->add_option("--lambda", lambda)->required();
    optimize->add_option("--mu", mu_csv)->required();
    optimize->add_option("--total-slots", total_slots)->required();
    optimize->add_option("--metric", metric_name)->check(CLI::IsMember({"loss", "mrt"}));
    add_common(optimize);

    CLI::App* sweep = app.add_subcommand("sweep", "optimal allocation across a lambda grid");
    sweep->add_option("--mu", mu_csv)->required();
    sweep->add_option("--total-slots", total_slots)->required();
    sweep->add_option("--metric", metric_name)->check(CLI::IsMember({"loss", "mrt"}));
    sweep->add_option("--lambda-min", lambda_min);
    sweep->add_option("--lambda-max", lambda_max);
    sweep->add_option("--points", points);
    sweep->add_flag("--log-grid", log_grid);
    add_common(sweep);

    CLI::App* simulate = app.add_subcommand("simulate", "discrete-event estimate with CIs");
    simulate->add_option("--lambda", lambda)->required();
    simulate->add_option("--mu", mu_csv)->required();
    simulate->add_option("--ell", ell_csv)->required();
    simulate->add_option("--scheduler", scheduler_name)->check(CLI::IsMember({"ps", "fcfs"}));
    simulate->add_option("--service", service_name)
        ->check(CLI::IsMember({"exponential", "deterministic", "hyperexponential"}));
    simulate->add_option("--scv", scv);
    simulate->add_option("--arrivals", arrivals);
    simulate->add_option("--replications", replications);
    simulate->add_option("--warmup-fraction", warmup);
    simulate->add_option("--confidence", confidence);
    simulate->add_option("--seed", seed);
    add_common(simulate);

    CLI::App* verify = app.add_subcommand("verify", "internal consistency suites");
    verify->add_option("suite", suite)
        ->required()
        ->check(CLI::IsMember({"productform", "propositions", "conjecture", "insensitivity"}));
    verify->add_option("--instances", instances);
    verify->add_option("--max-states", max_states);
    verify->add_option("--seed", seed);
    verify->add_option("--mu", mu_csv);
    verify->add_option("--ell", ell_csv);
    verify->add_option("--lambda", lambda);
    verify->add_option("--total-slots", total_slots);
    verify->add_option("--lambda-min", lambda_min);
    verify->add_option("--lambda-max", lambda_max);
    verify->add_option("--points", points);
    verify->add_option("--arrivals", arrivals);
    verify->add_option("--replications", replications);
    add_common(verify);

    CLI::App* figures = app.add_subcommand("figures", "CSV data behind the study figures");
    figures->add_option("id", figure_id)->required()->check(CLI::Range(3, 8));
    add_common(figures);

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    OutputTarget out{out_path};
    lbq::Metric metric =
        metric_name == "mrt" ? lbq::Metric::MeanResponseTime : lbq::Metric::LossProbability;

    try {
        if (*analyze)
            return run_analyze(lambda, parse_rates(mu_csv), parse_lengths(ell_csv), format,
                               out);
        if (*optimize)
            return run_optimize(lambda, parse_rates(mu_csv), total_slots, metric, format, out);
        if (*sweep)
            return run_sweep(parse_rates(mu_csv), total_slots, metric,
                             lambda_grid(lambda_min, lambda_max, points, log_grid), threads,
                             format, out);
        if (*simulate) {
            lbq::ClusterParams params(lambda, parse_rates(mu_csv));
            lbq::SimConfig cfg{params, lbq::Allocation{params.to_internal(
                                           parse_lengths(ell_csv))}};
            cfg.scheduler = scheduler_name == "fcfs" ? lbq::Scheduler::Fcfs
                                                     : lbq::Scheduler::ProcessorSharing;
            if (service_name == "deterministic")
                cfg.service = lbq::ServiceDistribution::deterministic();
            else if (service_name == "hyperexponential")
                cfg.service = lbq::ServiceDistribution::hyperexponential_scv(scv);
            cfg.arrivals = arrivals;
            cfg.replications = replications;
            cfg.warmup_fraction = warmup;
            cfg.confidence = confidence;
            cfg.seed = seed;
            return run_simulate(cfg, parse_rates(mu_csv), format, out);
        }
        if (*verify) {
            if (suite == "productform")
                return verify_productform(instances, max_states, seed, out);
            if (suite == "propositions") {
                if (mu_csv.empty()) mu_csv = "0.75,0.25";
                if (total_slots == 1) total_slots = 12;
                return verify_propositions(
                    parse_rates(mu_csv), total_slots,
                    lambda_grid(lambda_min > 0 ? lambda_min : 0.1, lambda_max, points, true),
                    out);
            }
            if (suite == "conjecture") {
                if (mu_csv.empty()) mu_csv = "0.45,0.3,0.2,0.05";
                if (total_slots == 1) total_slots = 40;
                return verify_conjecture(parse_rates(mu_csv), total_slots,
                                         lambda_grid(lambda_min, lambda_max, points, false),
                                         out);
            }
            if (mu_csv.empty()) mu_csv = "0.7,0.3";
            if (ell_csv.empty()) ell_csv = "2,1";
            if (verify->count("--lambda") == 0) lambda = 0.9;
            if (verify->count("--arrivals") == 0) arrivals = 30000;
            if (verify->count("--replications") == 0) replications = 10;
            lbq::ClusterParams params(lambda, parse_rates(mu_csv));
            lbq::SimConfig cfg{params,
                               lbq::Allocation{params.to_internal(parse_lengths(ell_csv))}};
            cfg.arrivals = arrivals;
            cfg.replications = replications;
            cfg.seed = seed;
            return verify_insensitivity(cfg, out);
        }
        if (*figures) {
            switch (figure_id) {
                case 3: out.write(figure_loss_vs_l1()); return 0;
                case 4: out.write(figure_optimal_l1(lbq::Metric::LossProbability, threads));
                    return 0;
                case 5: out.write(figure_mst_vs_lambda()); return 0;
                case 6: out.write(figure_optimal_l1(lbq::Metric::MeanResponseTime, threads));
                    return 0;
                case 7: out.write(figure_four_server(lbq::Metric::LossProbability, threads));
                    return 0;
                case 8: out.write(figure_four_server(lbq::Metric::MeanResponseTime, threads));
                    return 0;
                default: std::cerr << "unknown figure id\n"; return 2;
            }
        }
    } catch (const lbq::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
