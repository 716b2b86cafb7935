#include "lbq/oracle.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

namespace lbq {

GeneratorMatrix build_generator(const ClusterParams& params, const Allocation& alloc,
                                std::uint64_t cap) {
    require_valid(params, alloc);
    GeneratorMatrix gen{.dim = 0,
                        .rates = {},
                        .outflow = {},
                        .lattice = StateLattice(alloc, cap),
                        .alloc = alloc};
    gen.dim = gen.lattice.size();
    gen.outflow.assign(gen.dim, 0.0);

    const std::size_t n = params.size();
    const double lambda = params.lambda();
    std::vector<int> x(n, 0);
    std::uint64_t idx = 0;
    do {
        int free_total = 0;
        for (int xi : x) free_total += xi;
        for (std::size_t i = 0; i < n; ++i) {
            if (x[i] >= 1) {
                double rate = lambda * x[i] / free_total;
                std::uint64_t to = idx - gen.lattice.stride(i);
                gen.rates.push_back({static_cast<std::uint32_t>(idx),
                                     static_cast<std::uint32_t>(to), rate});
                gen.outflow[idx] += rate;
            }
            if (x[i] < alloc.ell[i]) {
                std::uint64_t to = idx + gen.lattice.stride(i);
                gen.rates.push_back({static_cast<std::uint32_t>(idx),
                                     static_cast<std::uint32_t>(to), params.mu()[i]});
                gen.outflow[idx] += params.mu()[i];
            }
        }
        ++idx;
    } while (gen.lattice.next(x));
    return gen;
}

double stationary_residual(const GeneratorMatrix& gen, const std::vector<double>& pi) {
    std::vector<double> r(gen.dim, 0.0);
    for (std::uint64_t s = 0; s < gen.dim; ++s) r[s] = -pi[s] * gen.outflow[s];
    for (const auto& e : gen.rates) r[e.to] += pi[e.from] * e.rate;
    double out = 0.0;
    for (double v : r) out = std::max(out, std::abs(v));
    return out;
}

std::vector<double> solve_stationary_dense(const GeneratorMatrix& gen) {
    const auto dim = static_cast<Eigen::Index>(gen.dim);
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(dim, dim);
    for (std::uint64_t s = 0; s < gen.dim; ++s) a(s, s) = -gen.outflow[s];
    for (const auto& e : gen.rates) a(e.to, e.from) += e.rate;  // Q^T
    // Replace one balance equation with the normalization sum pi = 1.
    a.row(dim - 1).setOnes();
    Eigen::VectorXd b = Eigen::VectorXd::Zero(dim);
    b(dim - 1) = 1.0;
    Eigen::VectorXd pi = a.partialPivLu().solve(b);
    std::vector<double> out(pi.data(), pi.data() + dim);
    for (double& v : out) {
        if (!std::isfinite(v))
            throw Error(ErrorCode::SingularSystem, "dense stationary solve produced non-finite values");
    }
    return out;
}

std::vector<double> solve_stationary_power(const GeneratorMatrix& gen, double residual_tol,
                                           std::uint64_t max_iters) {
    double max_outflow = 0.0;
    for (double v : gen.outflow) max_outflow = std::max(max_outflow, v);
    const double uniformization = 1.01 * max_outflow;  // strict self-loop -> aperiodic
    const double tol = residual_tol * uniformization;

    std::vector<double> pi(gen.dim, 1.0 / static_cast<double>(gen.dim));
    std::vector<double> next(gen.dim, 0.0);
    for (std::uint64_t it = 0; it < max_iters; ++it) {
        for (std::uint64_t s = 0; s < gen.dim; ++s)
            next[s] = pi[s] * (1.0 - gen.outflow[s] / uniformization);
        for (const auto& e : gen.rates) next[e.to] += pi[e.from] * e.rate / uniformization;
        double total = 0.0;
        for (double v : next) total += v;
        for (double& v : next) v /= total;
        pi.swap(next);
        if (it % 64 == 63 && stationary_residual(gen, pi) <= tol) return pi;
    }
    if (stationary_residual(gen, pi) <= tol) return pi;
    throw Error(ErrorCode::SingularSystem, "power iteration did not reach the residual target");
}

std::vector<double> solve_stationary(const GeneratorMatrix& gen) {
    if (gen.dim <= kDenseSolveLimit) return solve_stationary_dense(gen);
    return solve_stationary_power(gen);
}

MetricsReport oracle_metrics(const ClusterParams& params, const Allocation& alloc,
                             std::uint64_t cap) {
    GeneratorMatrix gen = build_generator(params, alloc, cap);
    std::vector<double> pi = solve_stationary(gen);

    const std::size_t n = params.size();
    MetricsReport report;
    report.occupation.assign(n, 0.0);
    report.mean_jobs.assign(n, 0.0);

    std::vector<int> zero(n, 0);
    report.loss = pi[gen.lattice.index(StateVector{zero})];
    report.norm_const_log = -std::log(report.loss);

    std::vector<int> x(n, 0);
    std::uint64_t idx = 0;
    do {
        for (std::size_t i = 0; i < n; ++i) {
            if (x[i] < alloc.ell[i]) report.occupation[i] += pi[idx];
            report.mean_jobs[i] += (alloc.ell[i] - x[i]) * pi[idx];
        }
        ++idx;
    } while (gen.lattice.next(x));

    if (alloc.total() >= 1) {
        double total_jobs = 0.0;
        for (double a : report.mean_jobs) total_jobs += a;
        report.mean_response_time = total_jobs / (params.lambda() * (1.0 - report.loss));
    }
    return report;
}

}  // namespace lbq
