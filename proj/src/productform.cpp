#include "lbq/productform.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace lbq {

namespace {

// log(sum exp(v)) over a small candidate set, extended precision.
long double log_sum_exp(const long double* v, std::size_t n) {
    long double m = v[0];
    for (std::size_t i = 1; i < n; ++i) m = std::max(m, v[i]);
    long double s = 0.0L;
    for (std::size_t i = 0; i < n; ++i) s += std::exp(v[i] - m);
    return m + std::log(s);
}

long double log_multinomial(const std::vector<int>& x) {
    long double total = 0.0L;
    long double out = 0.0L;
    for (int xi : x) {
        total += xi;
        out -= std::lgamma(static_cast<long double>(xi) + 1.0L);
    }
    return out + std::lgamma(total + 1.0L);
}

}  // namespace

NormTable::NormTable(const ClusterParams& params, const Allocation& alloc, std::uint64_t cap)
    : dims_(alloc), lattice_(alloc, cap) {
    require_valid(params, alloc);
    const std::size_t n = params.size();
    std::vector<long double> log_ratio(n);
    for (std::size_t i = 0; i < n; ++i)
        log_ratio[i] = std::log(static_cast<long double>(params.mu()[i])) -
                       std::log(static_cast<long double>(params.lambda()));

    logg_.resize(lattice_.size());
    std::vector<int> k(n, 0);
    std::vector<long double> terms(n + 1);
    std::uint64_t idx = 0;
    // Row-major order visits k - e_i before k, so the recursion is a single
    // forward pass.
    do {
        terms[0] = 0.0L;  // the constant 1
        std::size_t m = 1;
        for (std::size_t i = 0; i < n; ++i) {
            if (k[i] >= 1) terms[m++] = log_ratio[i] + logg_[idx - lattice_.stride(i)];
        }
        logg_[idx] = log_sum_exp(terms.data(), m);
        ++idx;
    } while (lattice_.next(k));
}

double NormTable::log_g_at(const std::vector<int>& k) const {
    return static_cast<double>(logg_[lattice_.index(StateVector{k})]);
}

double norm_const_log(const ClusterParams& params, const Allocation& alloc, std::uint64_t cap) {
    return NormTable(params, alloc, cap).log_g();
}

double norm_const_direct_log(const ClusterParams& params, const Allocation& alloc,
                             int max_total) {
    require_valid(params, alloc);
    if (alloc.total() > max_total)
        throw Error(ErrorCode::CapacityExceeded,
                    "direct sum restricted to total <= " + std::to_string(max_total));
    const std::size_t n = params.size();
    std::vector<long double> log_ratio(n);
    for (std::size_t i = 0; i < n; ++i)
        log_ratio[i] = std::log(static_cast<long double>(params.mu()[i])) -
                       std::log(static_cast<long double>(params.lambda()));

    StateLattice lattice(alloc);
    std::vector<long double> log_terms;
    log_terms.reserve(lattice.size());
    std::vector<int> x(n, 0);
    do {
        long double t = log_multinomial(x);
        for (std::size_t i = 0; i < n; ++i) t += x[i] * log_ratio[i];
        log_terms.push_back(t);
    } while (lattice.next(x));
    return static_cast<double>(log_sum_exp(log_terms.data(), log_terms.size()));
}

double stationary_log_prob(const ClusterParams& params, const NormTable& table,
                           const StateVector& state) {
    if (state.x.size() != params.size())
        throw Error(ErrorCode::DimensionMismatch, "state dimension mismatch");
    for (std::size_t i = 0; i < state.x.size(); ++i) {
        if (state.x[i] < 0 || state.x[i] > table.dims().ell[i])
            throw Error(ErrorCode::StateOutOfRange, "state outside [0, ell]");
    }
    long double lp = log_multinomial(state.x);
    for (std::size_t i = 0; i < state.x.size(); ++i)
        lp += state.x[i] * (std::log(static_cast<long double>(params.mu()[i])) -
                            std::log(static_cast<long double>(params.lambda())));
    return static_cast<double>(lp - static_cast<long double>(table.log_g()));
}

double stationary_prob(const ClusterParams& params, const Allocation& alloc,
                       const StateVector& state) {
    NormTable table(params, alloc);
    return std::exp(stationary_log_prob(params, table, state));
}

double loss_probability(const ClusterParams& params, const Allocation& alloc) {
    return std::exp(-norm_const_log(params, alloc));
}

double occupation_rate(const ClusterParams& params, const Allocation& alloc, std::size_t i) {
    require_valid(params, alloc);
    if (i >= alloc.size()) throw Error(ErrorCode::DimensionMismatch, "server index out of range");
    if (alloc.ell[i] == 0)
        throw Error(ErrorCode::EmptyBuffer, "occupation rate of a zero-length buffer");
    NormTable table(params, alloc);
    std::vector<int> k = alloc.ell;
    --k[i];
    return std::exp(table.log_g_at(k) - table.log_g());
}

namespace {

std::vector<double> mean_queue_lengths_from_table(const NormTable& table) {
    const std::vector<int>& ell = table.dims().ell;
    const double log_g = table.log_g();
    std::vector<double> alpha(ell.size(), 0.0);
    std::vector<int> k = ell;
    for (std::size_t i = 0; i < ell.size(); ++i) {
        double a = 0.0;
        for (int m = 1; m <= ell[i]; ++m) {
            k[i] = ell[i] - m;
            a += std::exp(table.log_g_at(k) - log_g);
        }
        k[i] = ell[i];
        alpha[i] = a;
    }
    return alpha;
}

}  // namespace

std::vector<double> mean_queue_lengths(const ClusterParams& params, const Allocation& alloc) {
    NormTable table(params, alloc);
    return mean_queue_lengths_from_table(table);
}

double mean_response_time(const ClusterParams& params, const Allocation& alloc) {
    if (alloc.total() < 1)
        throw Error(ErrorCode::NoAdmittedJobs, "response time undefined when L = 0");
    MetricsReport r = metrics(params, alloc);
    return *r.mean_response_time;
}

MetricsReport metrics_from_table(const ClusterParams& params, const NormTable& table) {
    const Allocation& alloc = table.dims();
    MetricsReport report;
    report.norm_const_log = table.log_g();
    report.loss = std::exp(-report.norm_const_log);
    report.mean_jobs = mean_queue_lengths_from_table(table);
    report.occupation.assign(alloc.size(), 0.0);
    std::vector<int> k = alloc.ell;
    for (std::size_t i = 0; i < alloc.size(); ++i) {
        if (alloc.ell[i] == 0) continue;  // rho_i = 0 by convention
        k[i] = alloc.ell[i] - 1;
        report.occupation[i] = std::exp(table.log_g_at(k) - report.norm_const_log);
        k[i] = alloc.ell[i];
    }
    if (alloc.total() >= 1) {
        double total_jobs = 0.0;
        for (double a : report.mean_jobs) total_jobs += a;
        report.mean_response_time = total_jobs / (params.lambda() * (1.0 - report.loss));
    }
    return report;
}

MetricsReport metrics(const ClusterParams& params, const Allocation& alloc, std::uint64_t cap) {
    NormTable table(params, alloc, cap);
    return metrics_from_table(params, table);
}

DeltaG delta_g(const ClusterParams& params, const Allocation& alloc, std::size_t i,
               std::size_t j, std::uint64_t cap) {
    require_valid(params, alloc);
    if (i >= alloc.size() || j >= alloc.size())
        throw Error(ErrorCode::DimensionMismatch, "server index out of range");
    if (alloc.ell[j] < 1)
        throw Error(ErrorCode::EmptyBuffer, "cannot take a slot from an empty buffer");

    DeltaG out;
    if (i == j) return out;

    Allocation upper = alloc;
    ++upper.ell[i];
    NormTable table(params, upper, cap);
    std::vector<int> moved = alloc.ell;
    ++moved[i];
    --moved[j];
    const long double la = table.log_g_at(moved);
    const long double lb = table.log_g_at(alloc.ell);
    const long double d = la - lb;

    if (std::abs(static_cast<double>(d)) < kNearTieLogTolerance) {
        out.near_tie = true;
        return out;
    }

    // In the narrow band where direct subtraction would lose most digits,
    // the two-server coefficient expansion is exact in the coefficients and
    // avoids the cancellation of two large table values.
    if (params.size() == 2 && std::abs(static_cast<double>(d)) < 1e-4) {
        Allocation base = alloc;
        DeltaCoefficients coeff =
            (i == 0 && j == 1) ? delta_g_coefficients(params, base) : DeltaCoefficients{};
        if (i == 1 && j == 0) {
            // delta_{0->1} G(ell) = -delta_{1->0} G(ell + e_1 - e_0)
            Allocation swapped = alloc;
            ++swapped.ell[1];
            --swapped.ell[0];
            coeff = delta_g_coefficients(params, swapped);
            double v = -coeff.evaluate(params.lambda());
            out.value = v;
            out.sign = (v > 0) - (v < 0);
            out.log_abs = std::log(std::abs(v));
            return out;
        }
        double v = coeff.evaluate(params.lambda());
        out.value = v;
        out.sign = (v > 0) - (v < 0);
        out.log_abs = std::log(std::abs(v));
        return out;
    }

    const long double hi = std::max(la, lb);
    const long double gap = std::abs(d);
    out.sign = d > 0 ? 1 : -1;
    out.log_abs = static_cast<double>(hi + std::log1p(-std::exp(-gap)));
    out.value = out.sign * std::exp(out.log_abs);
    return out;
}

namespace {

long double binomial(int n, int k) {
    if (k < 0 || k > n) return 0.0L;
    k = std::min(k, n - k);
    long double out = 1.0L;
    for (int t = 1; t <= k; ++t) out = out * (n - k + t) / t;
    return out;
}

long double pow_ld(double base, int e) { return std::pow(static_cast<long double>(base), e); }

}  // namespace

double DeltaCoefficients::evaluate(double lambda) const {
    // Neumaier summation; the terms span many orders of magnitude.
    long double sum = 0.0L, comp = 0.0L;
    const long double log_lambda = std::log(static_cast<long double>(lambda));
    for (std::size_t k = 0; k < c.size(); ++k) {
        int n = n_min + static_cast<int>(k);
        long double term = static_cast<long double>(c[k]) * std::exp(-n * log_lambda);
        long double t = sum + term;
        if (std::abs(sum) >= std::abs(term))
            comp += (sum - t) + term;
        else
            comp += (term - t) + sum;
        sum = t;
    }
    return static_cast<double>(sum + comp);
}

double DeltaCoefficients::unsigned_mass(double lambda) const {
    long double sum = 0.0L;
    const long double log_lambda = std::log(static_cast<long double>(lambda));
    for (std::size_t k = 0; k < c.size(); ++k) {
        int n = n_min + static_cast<int>(k);
        sum += std::abs(static_cast<long double>(c[k])) * std::exp(-n * log_lambda);
    }
    return static_cast<double>(sum);
}

DeltaCoefficients delta_g_coefficients(const ClusterParams& params, const Allocation& alloc) {
    require_valid(params, alloc);
    if (params.size() != 2)
        throw Error(ErrorCode::NotTwoServers, "coefficient expansion is two-server only");
    const int l1 = alloc.ell[0];
    const int l2 = alloc.ell[1];
    if (l2 < 1) throw Error(ErrorCode::EmptyBuffer, "requires ell_2 >= 1");
    const double mu1 = params.mu()[0];
    const double mu2 = params.mu()[1];

    DeltaCoefficients out;
    out.n_min = std::min(l1 + 1, l2);
    out.n_max = l1 + l2;
    out.c.resize(out.n_max - out.n_min + 1);

    auto plus_term = [&](int n) {  // weight of paths ending at column l1+1
        return binomial(n, l1 + 1) * pow_ld(mu1, l1 + 1) * pow_ld(mu2, n - l1 - 1);
    };
    auto minus_term = [&](int n) {  // weight of paths ending at row l2
        return binomial(n, l2) * pow_ld(mu1, n - l2) * pow_ld(mu2, l2);
    };

    for (int n = out.n_min; n <= out.n_max; ++n) {
        long double v = 0.0L;
        if (l1 + 1 <= l2) {
            v = (n <= l2 - 1) ? plus_term(n) : plus_term(n) - minus_term(n);
        } else {  // l1 >= l2
            v = (n <= l1) ? -minus_term(n) : plus_term(n) - minus_term(n);
        }
        out.c[n - out.n_min] = static_cast<double>(v);
    }

    double scale = 0.0;
    for (double v : out.c) scale = std::max(scale, std::abs(v));
    const double tol = 1e-14 * scale;
    auto sgn = [&](double v) { return std::abs(v) <= tol ? 0 : (v > 0 ? 1 : -1); };

    bool any_neg = false, any_nonpos = false, any_pos = false;
    for (double v : out.c) {
        int s = sgn(v);
        any_neg |= (s < 0);
        any_pos |= (s > 0);
        any_nonpos |= (s <= 0);
    }
    if (!any_nonpos) {
        out.pattern = SignPattern::AllPositive;
    } else if (!any_pos && any_neg &&
               std::all_of(out.c.begin(), out.c.end(), [&](double v) { return sgn(v) < 0; })) {
        out.pattern = SignPattern::AllNegative;
    } else {
        // candidate pivot: first non-negative coefficient
        std::size_t p = 0;
        while (p < out.c.size() && sgn(out.c[p]) < 0) ++p;
        bool ok = p < out.c.size() && sgn(out.c[p]) >= 0;
        for (std::size_t k = p + 1; ok && k < out.c.size(); ++k) ok = sgn(out.c[k]) > 0;
        if (ok) {
            out.pattern = SignPattern::NegThenPos;
            out.n_star = out.n_min + static_cast<int>(p);
        }
    }
    return out;
}

SimplexNormTable::SimplexNormTable(const ClusterParams& params, int total_slots,
                                   std::uint64_t cap)
    : params_(&params), total_(total_slots) {
    if (total_slots < 0)
        throw Error(ErrorCode::NegativeBufferLength, "total slot count must be >= 0");
    const std::size_t n = params.size();
    radix_.resize(n);
    std::uint64_t r = 1;
    const std::uint64_t base = static_cast<std::uint64_t>(total_slots) + 1;
    for (std::size_t i = 0; i < n; ++i) {
        radix_[i] = r;
        if (i + 1 < n) {
            if (r > std::numeric_limits<std::uint64_t>::max() / base)
                throw Error(ErrorCode::CapacityExceeded, "simplex key overflow");
            r *= base;
        }
    }

    std::vector<double> log_ratio(n);
    for (std::size_t i = 0; i < n; ++i)
        log_ratio[i] = std::log(params.mu()[i]) - std::log(params.lambda());

    // Enumerate states by ascending total so every predecessor k - e_i is
    // already filled in.
    std::vector<int> k(n, 0);
    std::vector<double> terms(n + 1);
    auto emit = [&](const std::vector<int>& state) {
        terms[0] = 0.0;
        std::size_t m = 1;
        std::uint64_t key = pack(state);
        for (std::size_t i = 0; i < n; ++i) {
            if (state[i] >= 1) {
                std::uint32_t prev = index_.at(key - radix_[i]);
                terms[m++] = log_ratio[i] + logg_[prev];
            }
        }
        double mx = *std::max_element(terms.begin(), terms.begin() + m);
        double s = 0.0;
        for (std::size_t t = 0; t < m; ++t) s += std::exp(terms[t] - mx);
        if (logg_.size() >= cap)
            throw Error(ErrorCode::CapacityExceeded, "simplex table exceeds cap");
        index_.emplace(key, static_cast<std::uint32_t>(logg_.size()));
        logg_.push_back(mx + std::log(s));
    };

    // compositions of s into n parts, for s = 0..total
    for (int s = 0; s <= total_slots; ++s) {
        std::fill(k.begin(), k.end(), 0);
        k[0] = s;
        while (true) {
            emit(k);
            if (n == 1) break;
            // next composition in colex-style order
            if (k[0] > 0) {
                --k[0];
                ++k[1];
            } else {
                std::size_t i = 1;
                while (i < n && k[i] == 0) ++i;
                if (i + 1 >= n) break;
                int v = k[i];
                k[i] = 0;
                k[0] = v - 1;
                ++k[i + 1];
            }
        }
    }
}

std::uint64_t SimplexNormTable::pack(const std::vector<int>& k) const {
    std::uint64_t key = 0;
    for (std::size_t i = 0; i < k.size(); ++i)
        key += radix_[i] * static_cast<std::uint64_t>(k[i]);
    return key;
}

double SimplexNormTable::log_g(const std::vector<int>& k) const {
    if (k.size() != radix_.size())
        throw Error(ErrorCode::DimensionMismatch, "state dimension mismatch");
    int total = 0;
    for (int v : k) {
        if (v < 0) throw Error(ErrorCode::StateOutOfRange, "negative component");
        total += v;
    }
    if (total > total_) throw Error(ErrorCode::StateOutOfRange, "outside simplex");
    return logg_[index_.at(pack(k))];
}

double SimplexNormTable::mean_response_time(const Allocation& alloc) const {
    if (alloc.total() < 1)
        throw Error(ErrorCode::NoAdmittedJobs, "response time undefined when L = 0");
    const double lg = log_g(alloc.ell);
    double total_jobs = 0.0;
    std::vector<int> k = alloc.ell;
    for (std::size_t i = 0; i < alloc.size(); ++i) {
        for (int m = 1; m <= alloc.ell[i]; ++m) {
            k[i] = alloc.ell[i] - m;
            total_jobs += std::exp(log_g(k) - lg);
        }
        k[i] = alloc.ell[i];
    }
    const double beta = std::exp(-lg);
    return total_jobs / (params_->lambda() * (1.0 - beta));
}

}  // namespace lbq
