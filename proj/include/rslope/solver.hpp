#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rslope/sorted_l1.hpp"
#include "rslope/types.hpp"

namespace rslope {

/// Design matrix and responses of Y = X beta + sqrt(n) theta + sigma xi.
class Dataset {
public:
    /// Throws on empty or non-finite input and on a row-count mismatch.
    Dataset(Matrix X, Vector Y);

    const Matrix& X() const noexcept { return X_; }
    const Vector& Y() const noexcept { return Y_; }
    Eigen::Index n() const noexcept { return X_.rows(); }
    Eigen::Index p() const noexcept { return X_.cols(); }

private:
    Matrix X_;
    Vector Y_;
};

struct FitConfig {
    double rel_tol = 1e-9;     ///< outer relative objective decrease
    int max_outer = 100;       ///< sigma updates
    int max_inner = 2000;      ///< proximal-gradient iterations per sigma
    double sigma_floor = 1e-10;  ///< relative to the initial scale ||Y|| / sqrt(n)
    double step_safety = 0.5;  ///< backtracking shrink factor
    double kkt_tol = 1e-4;
    double inner_tol = 1e-10;  ///< relative iterate change ending an inner solve
    /// Initial number of beta columns handled by the inner solver; the set
    /// grows until the full certificate holds. 0 means all columns.
    std::size_t working_set = 128;

    void check() const;
};

enum class FitStatus { converged, max_iter, degenerate_sigma };
std::string to_string(FitStatus status);

struct KKTReport {
    double beta_dual_gap = 0.0;   ///< dual norm of the beta-block multiplier minus 1
    double theta_dual_gap = 0.0;  ///< same for theta
    double alignment_residual = 0.0;
    /// ||beta||_lam + ||theta||_mu at the certified point; the alignment
    /// residual is judged relative to it (it scales with the data).
    double penalty_value = 0.0;

    double worst_gap() const;
    /// Both dual gaps <= tol and alignment_residual <= tol * max(1, penalty_value).
    bool within(double tol) const;
};

struct FitResult {
    Vector beta_hat;
    Vector theta_hat;
    double sigma_hat = 0.0;
    std::vector<double> objective_trace;
    FitStatus status = FitStatus::max_iter;
    KKTReport kkt;
    int outer_iterations = 0;
    int inner_iterations = 0;
    std::size_t working_set_size = 0;
};

/// sqrt(||Y - X beta - sqrt(n) theta||^2 / (2n)) + ||beta||_lam + ||theta||_mu.
double objective_eval(const Dataset& ds, VectorRef beta, VectorRef theta,
                      const WeightSequence& lam, const WeightSequence& mu);

/// Q(beta, theta) / sigma + sigma + ||beta||_lam + ||theta||_mu.
double scaled_objective_eval(const Dataset& ds, VectorRef beta, VectorRef theta, double sigma,
                             const WeightSequence& lam, const WeightSequence& mu);

/// Minimizer of `objective_eval` jointly over (beta, theta).
///
/// Alternates sigma <- sqrt(Q) with an accelerated proximal-gradient solve
/// of the fixed-sigma problem Q/sigma + sigma + 2||beta||_lam + 2||theta||_mu;
/// its minimum over sigma is exactly twice the pivotal objective, so both
/// share minimizers. The reported `sigma_hat` is sqrt(2 Q) = ||residual|| / sqrt(n),
/// the estimate of the noise level.
FitResult fit_pivotal(const Dataset& ds, const WeightSequence& lam, const WeightSequence& mu,
                      const FitConfig& cfg = {});

/// Square-root SLOPE without the outlier block (theta fixed at 0).
FitResult fit_nonrobust_baseline(const Dataset& ds, const WeightSequence& lam,
                                 const FitConfig& cfg = {});

/// Fixed-sigma problem min Q/sigma + ||beta||_lam + ||theta||_mu by monotone
/// FISTA with backtracking, starting from `warm` (zeros when absent).
std::pair<Vector, Vector> fit_weighted_slope(const Dataset& ds, const WeightSequence& lam,
                                             const WeightSequence& mu, double sigma,
                                             const FitConfig& cfg,
                                             const std::optional<std::pair<Vector, Vector>>& warm = {});

/// Stationarity certificate of the pivotal objective at `fr`.
///
/// The multiplier is g = [X'R/n; R/sqrt(n)] / rho with rho = 2 sqrt(Q). For a
/// degenerate fit the residual is treated as zero and rho = sqrt(2) * sigma_hat,
/// which is a valid subgradient of sqrt(Q) at zero residual because
/// sqrt(2 Q) <= sigma_hat there. Throws DegenerateCertificate when Q = 0 on a
/// fit not flagged degenerate.
KKTReport kkt_residual(const Dataset& ds, const FitResult& fr, const WeightSequence& lam,
                       const WeightSequence& mu);

/// min over theta of ||Y - X beta - sqrt(n) theta||^2 / (2n) + mu_const ||theta||_1,
/// in closed form: mu_const^2 * sum_j H(r_j / (mu_const sqrt(n))) with H the Huber
/// function of unit threshold.
double huber_profile_objective(const Dataset& ds, VectorRef beta, double mu_const);

} // namespace rslope
