#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "rslope/types.hpp"

namespace rslope {

/// Non-increasing, non-negative, finite penalty weights for a sorted-L1 norm.
///
/// Instances can only be obtained through `validate`, so every
/// WeightSequence in the program satisfies the invariants. Comparison is
/// exact: builders must emit monotone sequences themselves.
class WeightSequence {
public:
    /// Throws InvalidWeights naming the first index that breaks monotonicity,
    /// sign or finiteness. An empty list is rejected at index 0.
    static WeightSequence validate(std::vector<double> weights);

    std::size_t size() const noexcept { return w_.size(); }
    double operator[](std::size_t i) const { return w_[i]; }
    std::span<const double> weights() const noexcept { return w_; }
    Vector as_vector() const;

    /// First `k` weights (the sequence seen by a vector with at most k
    /// non-zeros once the zeros are sorted to the tail).
    WeightSequence head(std::size_t k) const;
    WeightSequence scaled(double factor) const;

    bool all_zero() const noexcept;
    double sum_of_squares(std::size_t k) const;

private:
    explicit WeightSequence(std::vector<double> w) : w_(std::move(w)) {}
    std::vector<double> w_;
};

/// sum_i gamma_i |v|_(i), |v|_(1) >= |v|_(2) >= ...
double norm_eval(VectorRef v, const WeightSequence& gamma);

/// Dual of norm_eval: max_k (sum_{j<=k} |u|_(j)) / (sum_{j<=k} gamma_j),
/// skipping prefixes whose weight sum is zero. Requires gamma_1 > 0.
double dual_norm_eval(VectorRef u, const WeightSequence& gamma);

/// Scratch space reused across prox calls in hot loops.
struct ProxWorkspace {
    std::vector<Eigen::Index> order;
    std::vector<double> excess;
    struct Block {
        std::size_t begin;
        std::size_t end;
        double sum;
    };
    std::vector<Block> blocks;
};

/// argmin_w 0.5 ||w - v||^2 + t * ||w||_gamma.
Vector prox(VectorRef v, const WeightSequence& gamma, double t);

/// Allocation-free variant. `weights` holds t*gamma already (length of v);
/// `out` may alias nothing in `v`.
void prox_scaled_into(VectorRef v, std::span<const double> weights, Eigen::Ref<Vector> out,
                      ProxWorkspace& ws);

/// Indices of v ordered by decreasing |v|, ties by increasing index.
std::vector<Eigen::Index> order_by_magnitude(VectorRef v);

} // namespace rslope
