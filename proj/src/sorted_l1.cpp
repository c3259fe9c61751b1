#include "rslope/sorted_l1.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "rslope/errors.hpp"

namespace rslope {

WeightSequence WeightSequence::validate(std::vector<double> weights)
{
    if (weights.empty())
        throw InvalidWeights("weight sequence is empty", 0);
    for (std::size_t i = 0; i < weights.size(); ++i) {
        const double w = weights[i];
        if (!std::isfinite(w))
            throw InvalidWeights("weight " + std::to_string(i) + " is not finite", i);
        if (w < 0.0)
            throw InvalidWeights("weight " + std::to_string(i) + " is negative", i);
        if (i > 0 && w > weights[i - 1])
            throw InvalidWeights("weight " + std::to_string(i) + " exceeds its predecessor", i);
    }
    return WeightSequence(std::move(weights));
}

Vector WeightSequence::as_vector() const
{
    return Eigen::Map<const Vector>(w_.data(), static_cast<Eigen::Index>(w_.size()));
}

WeightSequence WeightSequence::head(std::size_t k) const
{
    k = std::min(k, w_.size());
    if (k == 0)
        throw InvalidWeights("head of length 0", 0);
    return WeightSequence(std::vector<double>(w_.begin(), w_.begin() + static_cast<long>(k)));
}

WeightSequence WeightSequence::scaled(double factor) const
{
    if (!(factor >= 0.0) || !std::isfinite(factor))
        throw std::invalid_argument("weight scale must be finite and non-negative");
    std::vector<double> w(w_);
    for (double& x : w)
        x *= factor;
    return WeightSequence(std::move(w));
}

bool WeightSequence::all_zero() const noexcept
{
    return w_.front() == 0.0;
}

double WeightSequence::sum_of_squares(std::size_t k) const
{
    k = std::min(k, w_.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < k; ++i)
        acc += w_[i] * w_[i];
    return acc;
}

std::vector<Eigen::Index> order_by_magnitude(VectorRef v)
{
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(v.size()));
    std::iota(idx.begin(), idx.end(), Eigen::Index{0});
    std::stable_sort(idx.begin(), idx.end(), [&](Eigen::Index a, Eigen::Index b) {
        return std::abs(v[a]) > std::abs(v[b]);
    });
    return idx;
}

namespace {

std::vector<double> sorted_magnitudes(VectorRef v)
{
    std::vector<double> a(static_cast<std::size_t>(v.size()));
    for (Eigen::Index i = 0; i < v.size(); ++i)
        a[static_cast<std::size_t>(i)] = std::abs(v[i]);
    std::sort(a.begin(), a.end(), std::greater<>());
    return a;
}

} // namespace

double norm_eval(VectorRef v, const WeightSequence& gamma)
{
    require_same_size(static_cast<std::size_t>(v.size()), gamma.size(), "norm_eval");
    const auto a = sorted_magnitudes(v);
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        acc += gamma[i] * a[i];
    return acc;
}

double dual_norm_eval(VectorRef u, const WeightSequence& gamma)
{
    require_same_size(static_cast<std::size_t>(u.size()), gamma.size(), "dual_norm_eval");
    if (gamma.all_zero())
        throw std::invalid_argument("dual_norm_eval: all-zero weights have no dual norm");
    const auto a = sorted_magnitudes(u);
    double num = 0.0;
    double den = 0.0;
    double best = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        num += a[k];
        den += gamma[k];
        if (den > 0.0)
            best = std::max(best, num / den);
    }
    return best;
}

void prox_scaled_into(VectorRef v, std::span<const double> weights, Eigen::Ref<Vector> out,
                      ProxWorkspace& ws)
{
    const auto d = static_cast<std::size_t>(v.size());
    require_same_size(d, weights.size(), "prox");
    require_same_size(d, static_cast<std::size_t>(out.size()), "prox output");

    ws.order.resize(d);
    std::iota(ws.order.begin(), ws.order.end(), Eigen::Index{0});
    std::stable_sort(ws.order.begin(), ws.order.end(), [&](Eigen::Index a, Eigen::Index b) {
        return std::abs(v[a]) > std::abs(v[b]);
    });

    ws.excess.resize(d);
    for (std::size_t i = 0; i < d; ++i)
        ws.excess[i] = std::abs(v[ws.order[i]]) - weights[i];

    // Pool adjacent violators: the block values must be non-increasing.
    ws.blocks.clear();
    for (std::size_t i = 0; i < d; ++i) {
        ws.blocks.push_back({i, i + 1, ws.excess[i]});
        while (ws.blocks.size() > 1) {
            auto& last = ws.blocks.back();
            auto& prev = ws.blocks[ws.blocks.size() - 2];
            const double last_mean = last.sum / static_cast<double>(last.end - last.begin);
            const double prev_mean = prev.sum / static_cast<double>(prev.end - prev.begin);
            if (prev_mean > last_mean)
                break;
            prev.sum += last.sum;
            prev.end = last.end;
            ws.blocks.pop_back();
        }
    }

    for (const auto& b : ws.blocks) {
        const double value = std::max(0.0, b.sum / static_cast<double>(b.end - b.begin));
        for (std::size_t i = b.begin; i < b.end; ++i) {
            const Eigen::Index j = ws.order[i];
            out[j] = v[j] < 0.0 ? -value : value;
        }
    }
}

Vector prox(VectorRef v, const WeightSequence& gamma, double t)
{
    require_same_size(static_cast<std::size_t>(v.size()), gamma.size(), "prox");
    if (!(t > 0.0) || !std::isfinite(t))
        throw std::invalid_argument("prox: scale t must be positive and finite");
    std::vector<double> w(gamma.weights().begin(), gamma.weights().end());
    for (double& x : w)
        x *= t;
    Vector out(v.size());
    ProxWorkspace ws;
    prox_scaled_into(v, w, out, ws);
    return out;
}

} // namespace rslope
