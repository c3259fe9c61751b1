#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace oracle {

double slope_norm(const Vec& v, const std::vector<double>& w)
{
    std::vector<double> a(static_cast<std::size_t>(v.size()));
    for (Eigen::Index i = 0; i < v.size(); ++i)
        a[static_cast<std::size_t>(i)] = std::fabs(v[i]);
    std::sort(a.rbegin(), a.rend());
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        s += w[i] * a[i];
    return s;
}

static double prox_objective(const Vec& x, const Vec& v, const std::vector<double>& w, double t)
{
    return 0.5 * (x - v).squaredNorm() + t * slope_norm(x, w);
}

Vec prox_enumerate(const Vec& v, const std::vector<double>& w, double t)
{
    const int d = static_cast<int>(v.size());
    std::vector<int> order(static_cast<std::size_t>(d));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) { return std::fabs(v[a]) > std::fabs(v[b]); });

    Vec best = Vec::Zero(d);
    double best_val = prox_objective(best, v, w, t);
    for (int k = 1; k <= d; ++k) {
        // bit i of mask set: a block boundary after sorted position i
        for (unsigned mask = 0; mask < (1u << (k - 1)); ++mask) {
            Vec cand = Vec::Zero(d);
            int begin = 0;
            for (int i = 0; i < k; ++i) {
                const bool end_here = i == k - 1 || (mask >> i) & 1u;
                if (!end_here)
                    continue;
                double sum = 0.0;
                for (int j = begin; j <= i; ++j)
                    sum += std::fabs(v[order[j]]) - t * w[static_cast<std::size_t>(j)];
                const double val = std::max(0.0, sum / (i - begin + 1));
                for (int j = begin; j <= i; ++j)
                    cand[order[j]] = v[order[j]] < 0 ? -val : val;
                begin = i + 1;
            }
            const double f = prox_objective(cand, v, w, t);
            if (f < best_val) {
                best_val = f;
                best = cand;
            }
        }
    }
    return best;
}

Vec prox_grid_2d(const Vec& v, const std::vector<double>& w, double t)
{
    Vec c = v;
    double half = std::max(1.0, v.cwiseAbs().maxCoeff()) * 2.0;
    Vec best = c;
    double best_val = prox_objective(c, v, w, t);
    for (int level = 0; level < 40; ++level) {
        const int m = 40;
        for (int i = -m; i <= m; ++i)
            for (int j = -m; j <= m; ++j) {
                Vec x(2);
                x << c[0] + half * i / m, c[1] + half * j / m;
                const double f = prox_objective(x, v, w, t);
                if (f < best_val) {
                    best_val = f;
                    best = x;
                }
            }
        c = best;
        half *= 0.25;
    }
    return best;
}

double subgradient_minimize(const SubgradientProblem& prob, const std::vector<Vec>& starts, int iters,
                            double step0, Vec* argmin)
{
    double best = std::numeric_limits<double>::infinity();
    for (const Vec& x0 : starts) {
        Vec x = x0;
        for (int k = 0; k < iters; ++k) {
            const double f = prob.value(x);
            if (f < best) {
                best = f;
                if (argmin)
                    *argmin = x;
            }
            const Vec g = prob.subgradient(x);
            const double gn = g.norm();
            if (gn == 0.0)
                break;
            x -= (step0 / std::sqrt(k + 1.0)) * g / gn;
        }
    }
    return best;
}

static Vec slope_subgradient(const Vec& v, const std::vector<double>& w)
{
    std::vector<int> order(static_cast<std::size_t>(v.size()));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return std::fabs(v[a]) > std::fabs(v[b]); });
    Vec g = Vec::Zero(v.size());
    for (std::size_t r = 0; r < order.size(); ++r) {
        const int j = order[r];
        if (v[j] > 0) g[j] = w[r];
        else if (v[j] < 0) g[j] = -w[r];
    }
    return g;
}

SubgradientProblem pivotal_problem(const Mat& X, const Vec& Y, const std::vector<double>& lam,
                                   const std::vector<double>& mu)
{
    const Eigen::Index n = X.rows();
    const Eigen::Index p = X.cols();
    const double rn = std::sqrt(static_cast<double>(n));
    SubgradientProblem prob;
    prob.dim = static_cast<int>(n + p);
    prob.value = [=](const Vec& z) {
        const Vec r = Y - X * z.head(p) - rn * z.tail(n);
        return std::sqrt(r.squaredNorm() / (2.0 * n)) + slope_norm(z.head(p), lam) + slope_norm(z.tail(n), mu);
    };
    prob.subgradient = [=](const Vec& z) {
        const Vec r = Y - X * z.head(p) - rn * z.tail(n);
        const double q = std::sqrt(r.squaredNorm() / (2.0 * n));
        Vec g(n + p);
        if (q > 0) {
            g.head(p) = -X.transpose() * r / (2.0 * n * q);
            g.tail(n) = -rn * r / (2.0 * n * q);
        } else {
            g.setZero();
        }
        g.head(p) += slope_subgradient(z.head(p), lam);
        g.tail(n) += slope_subgradient(z.tail(n), mu);
        return g;
    };
    return prob;
}

double golden_section(const std::function<double(double)>& f, double a, double b, double tol)
{
    const double r = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - r * (b - a), d = a + r * (b - a);
    double fc = f(c), fd = f(d);
    while (b - a > tol * (1.0 + std::fabs(a) + std::fabs(b))) {
        if (fc < fd) {
            b = d; d = c; fd = fc;
            c = b - r * (b - a); fc = f(c);
        } else {
            a = c; c = d; fc = fd;
            d = a + r * (b - a); fd = f(d);
        }
    }
    return f(0.5 * (a + b));
}

} // namespace oracle
