#include "rslope/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "rslope/errors.hpp"

namespace rslope {

namespace {

// Minimizing Q/s + s + 2(||b||_lam + ||t||_mu) over s > 0 gives s = sqrt(Q) and
// twice the pivotal objective, so the fixed-s problems use doubled weights
// and the reported noise level is sqrt(2) * s = sqrt(2 Q).
constexpr double kPenaltyFactor = 2.0;
const double kSigmaScale = std::sqrt(2.0);

constexpr double kTiny = 1e-300;

double sorted_dot(VectorRef v, std::span<const double> w, std::vector<double>& scratch)
{
    scratch.resize(static_cast<std::size_t>(v.size()));
    for (Eigen::Index i = 0; i < v.size(); ++i)
        scratch[static_cast<std::size_t>(i)] = std::abs(v[i]);
    std::sort(scratch.begin(), scratch.end(), std::greater<>());
    double acc = 0.0;
    for (std::size_t i = 0; i < scratch.size(); ++i)
        acc += w[i] * scratch[i];
    return acc;
}

// Largest eigenvalue of A'A.
double top_eigenvalue(const Matrix& A)
{
    if (A.cols() == 0 || A.rows() == 0)
        return 0.0;
    Vector v = Vector::Constant(A.cols(), 1.0 / std::sqrt(static_cast<double>(A.cols())));
    double s = 0.0;
    for (int it = 0; it < 50; ++it) {
        Vector w = A.transpose() * (A * v);
        const double s_new = w.norm();
        if (s_new == 0.0)
            return 0.0;
        v = w / s_new;
        const bool done = std::abs(s_new - s) <= 1e-6 * s_new;
        s = s_new;
        if (done)
            break;
    }
    return s;
}

struct InnerControls {
    int max_iter;
    double tol;
    double safety;
};

// min ||Y - Xw b - sqrt(n) t||^2 / (2 n sigma) + ||b||_lam + ||t||_mu over the
// columns Xw; the theta block is dropped when `with_theta` is false.
class InnerProblem {
public:
    InnerProblem(Matrix Xw, const Vector& Y, std::vector<double> lam, std::vector<double> mu,
                 bool with_theta)
        : Xw_(std::move(Xw)), Y_(&Y), lam_(std::move(lam)), mu_(std::move(mu)),
          with_theta_(with_theta), n_(static_cast<double>(Y.size())), root_n_(std::sqrt(n_)),
          gram_norm_(top_eigenvalue(Xw_))
    {
    }

    const Matrix& columns() const { return Xw_; }

    double penalty(const Vector& b, const Vector& t)
    {
        double h = sorted_dot(b, lam_, scratch_);
        if (with_theta_)
            h += sorted_dot(t, mu_, scratch_);
        return h;
    }

    // Returns the number of iterations; b and t are updated in place.
    int solve(double sigma, Vector& b, Vector& t, const InnerControls& c)
    {
        const Eigen::Index n = Y_->size();
        const double inv_ns = 1.0 / (n_ * sigma);
        double lip = (gram_norm_ / n_ + (with_theta_ ? 1.0 : 0.0)) / sigma;
        double step = 1.0 / std::max(lip, kTiny);
        const double step0 = step;
        bool stalled = false;

        Vector x_b = b, x_t = t;
        Vector x_fit = Xw_ * x_b;
        if (with_theta_)
            x_fit += root_n_ * x_t;
        double Fx = (*Y_ - x_fit).squaredNorm() * 0.5 * inv_ns + penalty(x_b, x_t);

        Vector y_b = x_b, y_t = x_t, y_fit = x_fit;
        Vector R(n), g_b(x_b.size()), g_t(n), z_b(x_b.size()), z_t = Vector::Zero(n), z_fit(n);
        Vector prev_b, prev_t;
        std::vector<double> wl(lam_.size()), wm(mu_.size());
        auto set_weights = [&] {
            for (std::size_t i = 0; i < lam_.size(); ++i)
                wl[i] = step * lam_[i];
            for (std::size_t i = 0; i < mu_.size(); ++i)
                wm[i] = step * mu_[i];
        };
        set_weights();

        double tk = 1.0;
        bool momentum = false;
        int it = 0;
        while (it < c.max_iter) {
            ++it;
            R = *Y_ - y_fit;
            const double f_y = R.squaredNorm() * 0.5 * inv_ns;
            g_b.noalias() = -inv_ns * (Xw_.transpose() * R);
            if (with_theta_)
                g_t = (-root_n_ * inv_ns) * R;

            double f_z = 0.0;
            for (;;) {
                prox_scaled_into(y_b - step * g_b, wl, z_b, ws_);
                z_fit.noalias() = Xw_ * z_b;
                if (with_theta_) {
                    prox_scaled_into(y_t - step * g_t, wm, z_t, ws_);
                    z_fit += root_n_ * z_t;
                }
                f_z = (*Y_ - z_fit).squaredNorm() * 0.5 * inv_ns;
                double lin = g_b.dot(z_b - y_b);
                double dist = (z_b - y_b).squaredNorm();
                if (with_theta_) {
                    lin += g_t.dot(z_t - y_t);
                    dist += (z_t - y_t).squaredNorm();
                }
                const double bound = f_y + lin + dist / (2.0 * step);
                if (f_z <= bound + 1e-13 * std::abs(f_y) || c.safety >= 1.0)
                    break;
                step *= c.safety;
                if (step < 1e-12 * step0) {
                    stalled = true;
                    break;
                }
                set_weights();
            }

            if (stalled)
                break;
            const double Fz = f_z + penalty(z_b, z_t);
            if (!(Fz <= Fx)) {
                if (momentum) {
                    y_b = x_b;
                    y_t = x_t;
                    y_fit = x_fit;
                    tk = 1.0;
                    momentum = false;
                    continue;
                }
                break;
            }

            prev_b.swap(x_b);
            prev_t.swap(x_t);
            x_b = z_b;
            x_t = z_t;
            x_fit = z_fit;
            Fx = Fz;

            const double moved = std::sqrt((x_b - prev_b).squaredNorm() + (x_t - prev_t).squaredNorm());
            const double size = std::sqrt(x_b.squaredNorm() + x_t.squaredNorm());
            if (moved <= c.tol * size)
                break;

            const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * tk * tk));
            const double coef = (tk - 1.0) / t_next;
            tk = t_next;
            y_b = x_b + coef * (x_b - prev_b);
            y_t = x_t + coef * (x_t - prev_t);
            // Recomputed rather than extrapolated: near interpolation the
            // residual is tiny and extrapolation error would swamp it.
            y_fit.noalias() = Xw_ * y_b;
            if (with_theta_)
                y_fit += root_n_ * y_t;
            momentum = coef > 0.0;
        }
        b = x_b;
        t = x_t;
        return it;
    }

private:
    Matrix Xw_;
    const Vector* Y_;
    std::vector<double> lam_;
    std::vector<double> mu_;
    bool with_theta_;
    double n_;
    double root_n_;
    double gram_norm_;
    ProxWorkspace ws_;
    std::vector<double> scratch_;
};

std::vector<double> scaled_head(const WeightSequence& w, std::size_t k, double factor)
{
    std::vector<double> out(k);
    for (std::size_t i = 0; i < k; ++i)
        out[i] = factor * w[i];
    return out;
}

Vector residual(const Dataset& ds, VectorRef beta, VectorRef theta)
{
    Vector R = ds.Y() - ds.X() * beta;
    R -= std::sqrt(static_cast<double>(ds.n())) * theta;
    return R;
}

KKTReport certificate(const Dataset& ds, VectorRef beta, VectorRef theta, double rho,
                      const WeightSequence& lam, const WeightSequence* mu)
{
    const double n = static_cast<double>(ds.n());
    const Vector R = residual(ds, beta, theta);
    const Vector g_b = ds.X().transpose() * R / (n * rho);
    KKTReport rep;
    rep.beta_dual_gap = lam.all_zero() ? g_b.lpNorm<Eigen::Infinity>() : dual_norm_eval(g_b, lam) - 1.0;
    rep.penalty_value = norm_eval(beta, lam);
    rep.alignment_residual = std::abs(g_b.dot(beta) - rep.penalty_value);
    if (mu != nullptr) {
        const Vector g_t = R / (std::sqrt(n) * rho);
        rep.theta_dual_gap = mu->all_zero() ? g_t.lpNorm<Eigen::Infinity>() : dual_norm_eval(g_t, *mu) - 1.0;
        const double pen_t = norm_eval(theta, *mu);
        rep.penalty_value += pen_t;
        rep.alignment_residual += std::abs(g_t.dot(theta) - pen_t);
    } else {
        // theta is pinned at 0: an infinite penalty, whose dual ball is everything.
        rep.theta_dual_gap = -1.0;
    }
    return rep;
}

// Indices outside `in_set` that belong to the largest prefix of |g| (sorted)
// violating the dual-norm bound, plus `margin` further ones.
std::vector<Eigen::Index> violators(const Vector& g, const WeightSequence& lam,
                                    const std::vector<char>& in_set, double tol, std::size_t margin)
{
    const auto order = order_by_magnitude(g);
    double num = 0.0, den = 0.0;
    std::size_t last = 0;
    bool any = false;
    for (std::size_t k = 0; k < order.size(); ++k) {
        num += std::abs(g[order[k]]);
        den += lam[k];
        if (num > den * (1.0 + tol)) {
            last = k + 1;
            any = true;
        }
    }
    std::vector<Eigen::Index> out;
    if (!any)
        return out;
    const std::size_t upto = std::min(order.size(), last + margin);
    for (std::size_t k = 0; k < upto; ++k)
        if (!in_set[static_cast<std::size_t>(order[k])])
            out.push_back(order[k]);
    return out;
}

double objective_eval_impl(const Dataset& ds, VectorRef beta, VectorRef theta, const WeightSequence& lam,
                           const WeightSequence* mu)
{
    const double n = static_cast<double>(ds.n());
    double v = residual(ds, beta, theta).norm() / std::sqrt(2.0 * n) + norm_eval(beta, lam);
    if (mu != nullptr)
        v += norm_eval(theta, *mu);
    return v;
}

struct Cluster {
    std::vector<std::pair<Eigen::Index, double>> members;  // (index, sign)
    double weight = 0.0;
    bool theta = false;
};

void collect_clusters(const Vector& v, const WeightSequence& w, double delta, bool theta,
                      std::vector<Cluster>& out)
{
    const double top = v.lpNorm<Eigen::Infinity>();
    if (top == 0.0)
        return;
    const auto order = order_by_magnitude(v);
    std::size_t k = 0;
    while (k < order.size() && std::abs(v[order[k]]) > delta * top) {
        Cluster c;
        c.theta = theta;
        const double head = std::abs(v[order[k]]);
        while (k < order.size() && head - std::abs(v[order[k]]) <= delta * top &&
               std::abs(v[order[k]]) > delta * top) {
            c.members.emplace_back(order[k], v[order[k]] > 0.0 ? 1.0 : -1.0);
            c.weight += w[k];
            ++k;
        }
        out.push_back(std::move(c));
    }
}

// With the sign and cluster pattern of (beta, theta) held fixed the pivotal
// objective is |Y - B c| / sqrt(2n) + <w, c>, whose stationary point is
// c(t) = G^{-1}(B'Y - t sqrt(2n) w) with t = |R| solving a scalar equation.
bool polish(const Dataset& ds, const WeightSequence& lam, const WeightSequence* mu, double delta,
            Vector& beta, Vector& theta)
{
    const Eigen::Index n = ds.n();
    const double root_n = std::sqrt(static_cast<double>(n));
    std::vector<Cluster> clusters;
    collect_clusters(beta, lam, delta, false, clusters);
    const std::size_t n_beta = clusters.size();
    if (mu != nullptr)
        collect_clusters(theta, *mu, delta, true, clusters);
    const auto m = static_cast<Eigen::Index>(clusters.size());
    if (m == 0 || m >= n)
        return false;

    Matrix B = Matrix::Zero(n, m);
    Vector w(m);
    for (Eigen::Index j = 0; j < m; ++j) {
        const Cluster& c = clusters[static_cast<std::size_t>(j)];
        w[j] = c.weight;
        for (const auto& [i, sign] : c.members) {
            if (c.theta)
                B(i, j) += sign * root_n;
            else
                B.col(j) += sign * ds.X().col(i);
        }
    }
    const Eigen::LLT<Matrix> llt(B.transpose() * B);
    if (llt.info() != Eigen::Success || !(llt.rcond() > 1e-12))
        return false;
    const Vector a = llt.solve(B.transpose() * ds.Y());
    const Vector d = std::sqrt(2.0 * static_cast<double>(n)) * llt.solve(w);
    const Vector r0 = ds.Y() - B * a;
    const Vector v = B * d;
    const double vv = v.squaredNorm();
    if (!(vv < 1.0) || r0.norm() == 0.0)
        return false;
    const double t = r0.norm() / std::sqrt(1.0 - vv);
    const Vector c = a - t * d;

    for (Eigen::Index j = 0; j < m; ++j) {
        if (!(c[j] > 0.0))
            return false;
        const bool same_block = j > 0 && (static_cast<std::size_t>(j) < n_beta) ==
                                             (static_cast<std::size_t>(j - 1) < n_beta);
        if (same_block && !(c[j] < c[j - 1]))
            return false;
    }
    beta.setZero();
    theta.setZero();
    for (Eigen::Index j = 0; j < m; ++j) {
        const Cluster& cl = clusters[static_cast<std::size_t>(j)];
        for (const auto& [i, sign] : cl.members)
            (cl.theta ? theta : beta)[i] = sign * c[j];
    }
    return true;
}

FitResult fit_alternating(const Dataset& ds, const WeightSequence& lam, const WeightSequence* mu,
                          const FitConfig& cfg)
{
    cfg.check();
    const Eigen::Index n = ds.n();
    const Eigen::Index p = ds.p();
    require_same_size(static_cast<std::size_t>(p), lam.size(), "lambda length vs p");
    if (mu != nullptr)
        require_same_size(static_cast<std::size_t>(n), mu->size(), "mu length vs n");
    const bool with_theta = mu != nullptr;
    const double root_n = std::sqrt(static_cast<double>(n));

    FitResult fr;
    fr.beta_hat = Vector::Zero(p);
    fr.theta_hat = Vector::Zero(n);

    const double scale0 = ds.Y().norm() / root_n;
    if (scale0 == 0.0) {
        fr.sigma_hat = cfg.sigma_floor;
        fr.status = FitStatus::degenerate_sigma;
        fr.objective_trace.push_back(0.0);
        fr.kkt = certificate(ds, fr.beta_hat, fr.theta_hat, kSigmaScale * fr.sigma_hat, lam, mu);
        return fr;
    }
    // Solve on Y / scale0 so that rescaling Y only rescales the output.
    const Vector Y = ds.Y() / scale0;
    const double floor = cfg.sigma_floor;

    // Working set: columns most correlated with Y.
    std::vector<Eigen::Index> cols;
    if (cfg.working_set == 0 || cfg.working_set >= static_cast<std::size_t>(p)) {
        cols.resize(static_cast<std::size_t>(p));
        std::iota(cols.begin(), cols.end(), Eigen::Index{0});
    } else {
        const Vector c = ds.X().transpose() * Y;
        auto order = order_by_magnitude(c);
        cols.assign(order.begin(), order.begin() + static_cast<long>(cfg.working_set));
        std::sort(cols.begin(), cols.end());
    }
    std::vector<char> in_set(static_cast<std::size_t>(p), 0);

    std::vector<double> mu_w = with_theta ? scaled_head(*mu, static_cast<std::size_t>(n), kPenaltyFactor)
                                          : std::vector<double>{};
    auto make_problem = [&] {
        Matrix Xw(n, static_cast<Eigen::Index>(cols.size()));
        for (std::size_t j = 0; j < cols.size(); ++j) {
            Xw.col(static_cast<Eigen::Index>(j)) = ds.X().col(cols[j]);
            in_set[static_cast<std::size_t>(cols[j])] = 1;
        }
        return InnerProblem(std::move(Xw), Y, scaled_head(lam, cols.size(), kPenaltyFactor),
                            mu_w, with_theta);
    };
    InnerProblem problem = make_problem();
    Vector b = Vector::Zero(static_cast<Eigen::Index>(cols.size()));
    Vector t = Vector::Zero(n);

    auto scatter = [&] {
        fr.beta_hat.setZero();
        for (std::size_t j = 0; j < cols.size(); ++j)
            fr.beta_hat[cols[j]] = scale0 * b[static_cast<Eigen::Index>(j)];
        fr.theta_hat = scale0 * t;
    };
    auto pivotal_value = [&](double q) {
        return q / kSigmaScale + problem.penalty(b, t) / kPenaltyFactor;
    };

    // Outer search for the root of h(s) = phi(s) - s, phi(s) = sqrt(Q) at the
    // fixed-s minimizer. h > 0 below the root and h < 0 above it. The plain
    // update s <- phi(s) crawls when the outlier block inflates Q, so secant
    // steps are taken, kept inside the bracket known so far.
    double s = 1.0 / kSigmaScale;  // sqrt(Q(0, 0))
    fr.objective_trace.push_back(scale0 * s);
    double best_obj = s;
    Vector best_beta = fr.beta_hat, best_theta = fr.theta_hat;
    InnerControls ctl{cfg.max_inner, cfg.inner_tol, cfg.step_safety};
    fr.status = FitStatus::max_iter;
    double s_used = s;
    double lo = 0.0, hi = std::numeric_limits<double>::infinity();
    double s_prev = std::numeric_limits<double>::quiet_NaN(), h_prev = 0.0;
    int shrink_run = 0;

    for (int outer = 1; outer <= cfg.max_outer; ++outer) {
        fr.outer_iterations = outer;
        s_used = s;
        fr.inner_iterations += problem.solve(s, b, t, ctl);

        Vector fit = problem.columns() * b;
        if (with_theta)
            fit += root_n * t;
        const double q = (Y - fit).norm() / root_n;  // sqrt(2 Q)
        const double phi = q / kSigmaScale;
        const double h = phi - s;
        const double obj = pivotal_value(q);

        double decrease = std::numeric_limits<double>::infinity();
        const bool accepted = obj <= best_obj * (1.0 + 1e-12);
        if (accepted) {
            decrease = (best_obj - obj) / std::max(obj, kTiny);
            best_obj = std::min(best_obj, obj);
            fr.objective_trace.push_back(scale0 * obj);
            scatter();
            best_beta = fr.beta_hat;
            best_theta = fr.theta_hat;
        }
        if (q < floor) {
            fr.status = FitStatus::degenerate_sigma;
            break;
        }

        if (h > 0.0)
            lo = std::max(lo, s);
        else if (h < 0.0)
            hi = std::min(hi, s);
        double next = phi;
        if (std::isfinite(s_prev) && h != h_prev) {
            const double secant = s - h * (s - s_prev) / (h - h_prev);
            if (std::isfinite(secant) && secant > 0.0) {
                next = std::max(secant, 1e-2 * s);
                shrink_run = 0;
            } else if (h < 0.0) {
                // phi(s) / s stays below 1 all the way down: the residual is
                // heading to zero (interpolation), so shrink geometrically.
                shrink_run = std::min(shrink_run + 1, 6);
                next = s * std::max(std::pow(phi / s, static_cast<double>(1 << shrink_run)), 1e-2);
            }
        }
        if (!(next > lo && next < hi))
            next = (lo > 0.0 && std::isfinite(hi)) ? std::sqrt(lo * hi) : phi;
        s_prev = s;
        h_prev = h;

        const bool near_root = std::abs(h) <= cfg.rel_tol * s;
        // Residual negligible against the objective: the fixed-s solution
        // certifies a zero-residual optimum through rho = 2 s.
        const bool collapsing = h < 0.0 && phi <= cfg.kkt_tol * obj;
        if (!near_root && !collapsing && !(accepted && decrease <= cfg.rel_tol)) {
            s = next;
            continue;
        }

        // Candidate stop: check the full certificate, not just the working set.
        scatter();
        const Vector R = ds.Y() - ds.X() * fr.beta_hat - root_n * fr.theta_hat;
        const double rho = scale0 * (collapsing ? kPenaltyFactor * s : kSigmaScale * q);
        const Vector g_b = ds.X().transpose() * R / (static_cast<double>(n) * rho);
        if (cols.size() < static_cast<std::size_t>(p) && !lam.all_zero()) {
            auto add = violators(g_b, lam, in_set, cfg.kkt_tol * 0.5, 16);
            if (!add.empty()) {
                std::vector<double> old_b(static_cast<std::size_t>(p), 0.0);
                for (std::size_t j = 0; j < cols.size(); ++j)
                    old_b[static_cast<std::size_t>(cols[j])] = b[static_cast<Eigen::Index>(j)];
                cols.insert(cols.end(), add.begin(), add.end());
                std::sort(cols.begin(), cols.end());
                problem = make_problem();
                b.resize(static_cast<Eigen::Index>(cols.size()));
                for (std::size_t j = 0; j < cols.size(); ++j)
                    b[static_cast<Eigen::Index>(j)] = old_b[static_cast<std::size_t>(cols[j])];
                // The restricted problem changed, and with it phi.
                lo = 0.0;
                hi = std::numeric_limits<double>::infinity();
                s_prev = std::numeric_limits<double>::quiet_NaN();
                continue;
            }
        }
        const KKTReport rep = certificate(ds, fr.beta_hat, fr.theta_hat, rho, lam, mu);
        if (rep.within(cfg.kkt_tol)) {
            fr.status = collapsing ? FitStatus::degenerate_sigma : FitStatus::converged;
            break;
        }
        ctl.tol = std::max(ctl.tol * 1e-2, 1e-16);
        s = next;
    }

    if (fr.status == FitStatus::max_iter) {
        fr.beta_hat = best_beta;
        fr.theta_hat = best_theta;
    } else {
        scatter();
    }
    fr.working_set_size = cols.size();
    if (fr.status == FitStatus::degenerate_sigma) {
        fr.sigma_hat = kSigmaScale * scale0 * s_used;
        fr.kkt = certificate(ds, fr.beta_hat, fr.theta_hat, kSigmaScale * fr.sigma_hat, lam, mu);
    } else {
        if (fr.status == FitStatus::converged) {
            const double current = objective_eval_impl(ds, fr.beta_hat, fr.theta_hat, lam, mu);
            for (double delta : {1e-9, 1e-7, 1e-5, 1e-3}) {
                Vector b2 = fr.beta_hat, t2 = fr.theta_hat;
                if (!polish(ds, lam, mu, delta, b2, t2))
                    continue;
                const double sig = residual(ds, b2, t2).norm() / root_n;
                if (!(sig > 0.0) || objective_eval_impl(ds, b2, t2, lam, mu) > current * (1.0 + 1e-12))
                    continue;
                if (!certificate(ds, b2, t2, kSigmaScale * sig, lam, mu).within(1e-9))
                    continue;
                fr.beta_hat = b2;
                fr.theta_hat = t2;
                fr.objective_trace.push_back(std::min(objective_eval_impl(ds, b2, t2, lam, mu), current));
                break;
            }
        }
        const Vector R = residual(ds, fr.beta_hat, fr.theta_hat);
        fr.sigma_hat = R.norm() / root_n;
        fr.kkt = certificate(ds, fr.beta_hat, fr.theta_hat, kSigmaScale * fr.sigma_hat, lam, mu);
    }
    return fr;
}

} // namespace

Dataset::Dataset(Matrix X, Vector Y) : X_(std::move(X)), Y_(std::move(Y))
{
    if (X_.rows() < 1 || X_.cols() < 1)
        throw std::invalid_argument("Dataset: X must have at least one row and one column");
    require_same_size(static_cast<std::size_t>(X_.rows()), static_cast<std::size_t>(Y_.size()),
                      "Dataset rows of X vs length of Y");
    if (!X_.allFinite() || !Y_.allFinite())
        throw std::invalid_argument("Dataset: non-finite entry");
}

void FitConfig::check() const
{
    if (!(rel_tol > 0.0))
        throw std::invalid_argument("FitConfig: rel_tol must be positive");
    if (!(sigma_floor > 0.0))
        throw std::invalid_argument("FitConfig: sigma_floor must be positive");
    if (!(step_safety > 0.0 && step_safety <= 1.0))
        throw std::invalid_argument("FitConfig: step_safety must lie in (0, 1]");
    if (max_outer < 1 || max_inner < 1)
        throw std::invalid_argument("FitConfig: iteration limits must be positive");
    if (!(kkt_tol > 0.0) || !(inner_tol > 0.0))
        throw std::invalid_argument("FitConfig: tolerances must be positive");
}

std::string to_string(FitStatus status)
{
    switch (status) {
    case FitStatus::converged: return "converged";
    case FitStatus::max_iter: return "max_iter";
    case FitStatus::degenerate_sigma: return "degenerate_sigma";
    }
    return "unknown";
}

double KKTReport::worst_gap() const
{
    return std::max(beta_dual_gap, theta_dual_gap);
}

bool KKTReport::within(double tol) const
{
    return beta_dual_gap <= tol && theta_dual_gap <= tol &&
           alignment_residual <= tol * std::max(1.0, penalty_value);
}

double objective_eval(const Dataset& ds, VectorRef beta, VectorRef theta, const WeightSequence& lam,
                      const WeightSequence& mu)
{
    require_same_size(static_cast<std::size_t>(beta.size()), static_cast<std::size_t>(ds.p()), "beta");
    require_same_size(static_cast<std::size_t>(theta.size()), static_cast<std::size_t>(ds.n()), "theta");
    const double q = residual(ds, beta, theta).squaredNorm() / (2.0 * static_cast<double>(ds.n()));
    return std::sqrt(q) + norm_eval(beta, lam) + norm_eval(theta, mu);
}

double scaled_objective_eval(const Dataset& ds, VectorRef beta, VectorRef theta, double sigma,
                             const WeightSequence& lam, const WeightSequence& mu)
{
    if (!(sigma > 0.0))
        throw std::invalid_argument("scaled_objective_eval: sigma must be positive");
    require_same_size(static_cast<std::size_t>(beta.size()), static_cast<std::size_t>(ds.p()), "beta");
    require_same_size(static_cast<std::size_t>(theta.size()), static_cast<std::size_t>(ds.n()), "theta");
    const double q = residual(ds, beta, theta).squaredNorm() / (2.0 * static_cast<double>(ds.n()));
    return q / sigma + sigma + norm_eval(beta, lam) + norm_eval(theta, mu);
}

FitResult fit_pivotal(const Dataset& ds, const WeightSequence& lam, const WeightSequence& mu,
                      const FitConfig& cfg)
{
    return fit_alternating(ds, lam, &mu, cfg);
}

FitResult fit_nonrobust_baseline(const Dataset& ds, const WeightSequence& lam, const FitConfig& cfg)
{
    return fit_alternating(ds, lam, nullptr, cfg);
}

std::pair<Vector, Vector> fit_weighted_slope(const Dataset& ds, const WeightSequence& lam,
                                             const WeightSequence& mu, double sigma,
                                             const FitConfig& cfg,
                                             const std::optional<std::pair<Vector, Vector>>& warm)
{
    cfg.check();
    if (!(sigma > 0.0) || !std::isfinite(sigma))
        throw std::invalid_argument("fit_weighted_slope: sigma must be positive");
    const Eigen::Index n = ds.n();
    const Eigen::Index p = ds.p();
    require_same_size(static_cast<std::size_t>(p), lam.size(), "lambda length vs p");
    require_same_size(static_cast<std::size_t>(n), mu.size(), "mu length vs n");
    Vector b = Vector::Zero(p);
    Vector t = Vector::Zero(n);
    if (warm) {
        require_same_size(static_cast<std::size_t>(warm->first.size()), static_cast<std::size_t>(p), "warm beta");
        require_same_size(static_cast<std::size_t>(warm->second.size()), static_cast<std::size_t>(n), "warm theta");
        b = warm->first;
        t = warm->second;
    }
    InnerProblem problem(ds.X(), ds.Y(), scaled_head(lam, static_cast<std::size_t>(p), 1.0),
                         scaled_head(mu, static_cast<std::size_t>(n), 1.0), true);
    problem.solve(sigma, b, t, {cfg.max_inner, cfg.inner_tol, cfg.step_safety});
    return {std::move(b), std::move(t)};
}

KKTReport kkt_residual(const Dataset& ds, const FitResult& fr, const WeightSequence& lam,
                       const WeightSequence& mu)
{
    require_same_size(static_cast<std::size_t>(fr.beta_hat.size()), static_cast<std::size_t>(ds.p()), "beta");
    require_same_size(static_cast<std::size_t>(fr.theta_hat.size()), static_cast<std::size_t>(ds.n()), "theta");
    double rho = 0.0;
    if (fr.status == FitStatus::degenerate_sigma) {
        if (!(fr.sigma_hat > 0.0))
            throw DegenerateCertificate("kkt_residual: degenerate fit without a positive sigma");
        rho = kSigmaScale * fr.sigma_hat;
    } else {
        const double q = residual(ds, fr.beta_hat, fr.theta_hat).squaredNorm() /
                         (2.0 * static_cast<double>(ds.n()));
        if (!(q > 0.0))
            throw DegenerateCertificate("kkt_residual: zero residual, certificate undefined");
        rho = 2.0 * std::sqrt(q);
    }
    return certificate(ds, fr.beta_hat, fr.theta_hat, rho, lam, &mu);
}

double huber_profile_objective(const Dataset& ds, VectorRef beta, double mu_const)
{
    if (!(mu_const > 0.0))
        throw std::invalid_argument("huber_profile_objective: mu_const must be positive");
    require_same_size(static_cast<std::size_t>(beta.size()), static_cast<std::size_t>(ds.p()), "beta");
    const double root_n = std::sqrt(static_cast<double>(ds.n()));
    const Vector r = ds.Y() - ds.X() * beta;
    double acc = 0.0;
    for (Eigen::Index j = 0; j < r.size(); ++j) {
        const double x = std::abs(r[j]) / (mu_const * root_n);
        acc += x <= 1.0 ? 0.5 * x * x : x - 0.5;
    }
    return mu_const * mu_const * acc;
}

} // namespace rslope
