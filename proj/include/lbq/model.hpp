#pragma once

#include <cstdint>
#include <numeric>
#include <optional>
#include <vector>

#include "lbq/errors.hpp"

namespace lbq {

/// Physical description of the cluster: arrival rate and per-server service
/// rates. Rates are stored sorted non-increasing (stable, so ties keep user
/// order); the permutation back to user order is retained for reporting.
class ClusterParams {
public:
    ClusterParams(double lambda, std::vector<double> mu_user_order);

    double lambda() const noexcept { return lambda_; }
    const std::vector<double>& mu() const noexcept { return mu_; }
    std::size_t size() const noexcept { return mu_.size(); }

    /// user_index(i) = position in the user-supplied vector of the server
    /// stored internally at slot i.
    std::size_t user_index(std::size_t i) const noexcept { return perm_[i]; }

    template <typename T>
    std::vector<T> to_internal(const std::vector<T>& user_order) const {
        std::vector<T> out(user_order.size());
        for (std::size_t i = 0; i < perm_.size(); ++i) out[i] = user_order[perm_[i]];
        return out;
    }

    template <typename T>
    std::vector<T> to_user(const std::vector<T>& internal_order) const {
        std::vector<T> out(internal_order.size());
        for (std::size_t i = 0; i < perm_.size(); ++i) out[perm_[i]] = internal_order[i];
        return out;
    }

private:
    double lambda_;
    std::vector<double> mu_;         // non-increasing
    std::vector<std::size_t> perm_;  // internal slot -> user index
};

/// Buffer lengths, one per server, in the same (internal) order as the
/// owning ClusterParams. The decision variable of the allocation problem.
struct Allocation {
    std::vector<int> ell;

    Allocation() = default;
    explicit Allocation(std::vector<int> lengths) : ell(std::move(lengths)) {}

    std::size_t size() const noexcept { return ell.size(); }
    int total() const { return std::accumulate(ell.begin(), ell.end(), 0); }

    bool operator==(const Allocation&) const = default;
};

/// Free-slot vector x with 0 <= x <= ell componentwise; the Markov state of
/// the token network.
struct StateVector {
    std::vector<int> x;

    StateVector() = default;
    explicit StateVector(std::vector<int> free_slots) : x(std::move(free_slots)) {}

    int total() const { return std::accumulate(x.begin(), x.end(), 0); }

    bool operator==(const StateVector&) const = default;
};

/// Exact performance metrics for one (params, allocation) pair. Vectors are
/// in internal (sorted-rate) server order.
struct MetricsReport {
    double loss = 1.0;
    std::vector<double> occupation;
    std::vector<double> mean_jobs;
    std::optional<double> mean_response_time;  // absent when no job is ever admitted
    double norm_const_log = 0.0;
};

struct ValidationResult {
    bool ok = true;
    ErrorCode code = ErrorCode::InvalidArgument;
    std::string message;
};

/// Total check of both types' invariants and dimension agreement. Never
/// throws; returns a typed error instead.
ValidationResult validate(const ClusterParams& params, const Allocation& alloc) noexcept;

/// Throwing variant for internal use on already-constructed inputs.
void require_valid(const ClusterParams& params, const Allocation& alloc);

/// Row-major enumeration of the box {x : 0 <= x <= ell} with a bijective
/// index, shared by the oracle's matrix builder and the direct-sum oracle.
class StateLattice {
public:
    static constexpr std::uint64_t kDefaultCap = 1'000'000;

    explicit StateLattice(const Allocation& alloc, std::uint64_t cap = kDefaultCap);

    std::uint64_t size() const noexcept { return size_; }
    std::size_t dimensions() const noexcept { return dims_.size(); }

    std::uint64_t index(const StateVector& state) const;
    StateVector state(std::uint64_t index) const;

    /// Row-major stride of coordinate i: index(x + e_i) - index(x).
    std::uint64_t stride(std::size_t i) const noexcept { return stride_[i]; }

    /// In-place row-major increment; returns false after the last state.
    bool next(std::vector<int>& x) const;

private:
    std::vector<int> dims_;  // ell[i] per coordinate
    std::vector<std::uint64_t> stride_;
    std::uint64_t size_;
};

}  // namespace lbq
