#include "lbq/model.hpp"

#include <algorithm>

namespace lbq {

ClusterParams::ClusterParams(double lambda, std::vector<double> mu_user_order)
    : lambda_(lambda), mu_(std::move(mu_user_order)) {
    if (!(lambda_ > 0.0)) throw Error(ErrorCode::NonPositiveRate, "lambda must be > 0");
    if (mu_.empty()) throw Error(ErrorCode::DimensionMismatch, "mu must have at least one entry");
    for (double m : mu_) {
        if (!(m > 0.0)) throw Error(ErrorCode::NonPositiveRate, "every mu[i] must be > 0");
    }
    perm_.resize(mu_.size());
    std::iota(perm_.begin(), perm_.end(), std::size_t{0});
    std::stable_sort(perm_.begin(), perm_.end(),
                     [this](std::size_t a, std::size_t b) { return mu_[a] > mu_[b]; });
    std::vector<double> sorted(mu_.size());
    for (std::size_t i = 0; i < perm_.size(); ++i) sorted[i] = mu_[perm_[i]];
    mu_ = std::move(sorted);
}

ValidationResult validate(const ClusterParams& params, const Allocation& alloc) noexcept {
    if (alloc.size() != params.size()) {
        return {false, ErrorCode::DimensionMismatch,
                "allocation has " + std::to_string(alloc.size()) + " entries, params has " +
                    std::to_string(params.size())};
    }
    for (int l : alloc.ell) {
        if (l < 0) return {false, ErrorCode::NegativeBufferLength, "buffer lengths must be >= 0"};
    }
    // ClusterParams invariants are enforced at construction, but re-check so
    // validate stays total on any input.
    if (!(params.lambda() > 0.0)) return {false, ErrorCode::NonPositiveRate, "lambda must be > 0"};
    for (double m : params.mu()) {
        if (!(m > 0.0)) return {false, ErrorCode::NonPositiveRate, "every mu[i] must be > 0"};
    }
    return {};
}

void require_valid(const ClusterParams& params, const Allocation& alloc) {
    ValidationResult r = validate(params, alloc);
    if (!r.ok) throw Error(r.code, r.message);
}

StateLattice::StateLattice(const Allocation& alloc, std::uint64_t cap) {
    dims_ = alloc.ell;
    for (int l : dims_) {
        if (l < 0) throw Error(ErrorCode::NegativeBufferLength, "buffer lengths must be >= 0");
    }
    stride_.resize(dims_.size());
    std::uint64_t n = 1;
    for (std::size_t i = dims_.size(); i-- > 0;) {
        stride_[i] = n;
        std::uint64_t d = static_cast<std::uint64_t>(dims_[i]) + 1;
        if (n > cap / d) {
            throw Error(ErrorCode::CapacityExceeded,
                        "state lattice exceeds cap of " + std::to_string(cap) + " states");
        }
        n *= d;
    }
    size_ = n;
    if (size_ > cap) {
        throw Error(ErrorCode::CapacityExceeded,
                    "state lattice exceeds cap of " + std::to_string(cap) + " states");
    }
}

std::uint64_t StateLattice::index(const StateVector& state) const {
    if (state.x.size() != dims_.size())
        throw Error(ErrorCode::DimensionMismatch, "state dimension mismatch");
    std::uint64_t idx = 0;
    for (std::size_t i = 0; i < dims_.size(); ++i) {
        if (state.x[i] < 0 || state.x[i] > dims_[i])
            throw Error(ErrorCode::StateOutOfRange, "state component outside [0, ell]");
        idx += stride_[i] * static_cast<std::uint64_t>(state.x[i]);
    }
    return idx;
}

StateVector StateLattice::state(std::uint64_t index) const {
    if (index >= size_) throw Error(ErrorCode::StateOutOfRange, "index outside lattice");
    std::vector<int> x(dims_.size());
    for (std::size_t i = 0; i < dims_.size(); ++i) {
        x[i] = static_cast<int>(index / stride_[i]);
        index %= stride_[i];
    }
    return StateVector(std::move(x));
}

bool StateLattice::next(std::vector<int>& x) const {
    for (std::size_t i = dims_.size(); i-- > 0;) {
        if (x[i] < dims_[i]) {
            ++x[i];
            return true;
        }
        x[i] = 0;
    }
    return false;
}

}  // namespace lbq
