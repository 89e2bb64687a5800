#include "savi/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>

namespace savi {

double log_gamma(double x)
{
    int sign = 0;
    return ::lgamma_r(x, &sign);
}

double log_sum_exp(std::span<const double> xs)
{
    double m = -std::numeric_limits<double>::infinity();
    for (double x : xs)
        m = std::max(m, x);
    if (!std::isfinite(m))
        return m;
    double s = 0.0;
    for (double x : xs)
        s += std::exp(x - m);
    return m + std::log(s);
}

double log_add(double a, double b)
{
    if (a < b)
        std::swap(a, b);
    if (a == -std::numeric_limits<double>::infinity())
        return a;
    if (a == std::numeric_limits<double>::infinity())
        return a;
    return a + std::log1p(std::exp(b - a));
}

namespace {

struct SimpsonCtx {
    const std::function<double(double)>& f;
    int maxDepth;
    int evals = 0;
    bool converged = true;
    double err = 0.0;
};

double simpson_rec(SimpsonCtx& c, double a, double b, double fa, double fm, double fb,
    double whole, double tol, int depth)
{
    double m = 0.5 * (a + b);
    double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    double flm = c.f(lm), frm = c.f(rm);
    c.evals += 2;
    double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    double delta = left + right - whole;
    if (depth >= c.maxDepth) {
        c.converged = false;
        c.err += std::abs(delta) / 15.0;
        return left + right + delta / 15.0;
    }
    if (std::abs(delta) <= 15.0 * tol) {
        c.err += std::abs(delta) / 15.0;
        return left + right + delta / 15.0;
    }
    return simpson_rec(c, a, m, fa, flm, fm, left, 0.5 * tol, depth + 1)
        + simpson_rec(c, m, b, fm, frm, fb, right, 0.5 * tol, depth + 1);
}

} // namespace

QuadResult adaptive_simpson(const std::function<double(double)>& f, double a, double b,
    double tol, int maxDepth)
{
    SimpsonCtx c{f, maxDepth};
    // start from a fixed partition so narrow features are not skipped
    double v = 0.0;
    const int pieces = 16;
    double h = (b - a) / pieces;
    for (int i = 0; i < pieces; ++i) {
        double lo = a + i * h, hi = (i + 1 == pieces) ? b : lo + h;
        double flo = f(lo), fhi = f(hi), fmid = f(0.5 * (lo + hi));
        c.evals += 3;
        double w = (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi);
        v += simpson_rec(c, lo, hi, flo, fmid, fhi, w, tol / pieces, 0);
    }
    return QuadResult{v, c.err, c.converged, c.evals};
}

const GaussLegendre& gauss_legendre(int n)
{
    static std::mutex mu;
    static std::map<int, GaussLegendre> cache;
    std::lock_guard lock(mu);
    auto it = cache.find(n);
    if (it != cache.end())
        return it->second;

    GaussLegendre g;
    g.nodes.resize(n);
    g.weights.resize(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it2 = 0; it2 < 100; ++it2) {
            double p0 = 1.0, p1 = 0.0;
            for (int j = 1; j <= n; ++j) {
                double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j - 1.0) * z * p1 - (j - 1.0) * p2) / j;
            }
            dp = n * (z * p0 - p1) / (z * z - 1.0);
            double z1 = z;
            z = z1 - p0 / dp;
            if (std::abs(z - z1) < 1e-15)
                break;
        }
        // recompute derivative at the converged node
        double p0 = 1.0, p1 = 0.0;
        for (int j = 1; j <= n; ++j) {
            double p2 = p1;
            p1 = p0;
            p0 = ((2.0 * j - 1.0) * z * p1 - (j - 1.0) * p2) / j;
        }
        dp = n * (z * p0 - p1) / (z * z - 1.0);
        double w = 2.0 / ((1.0 - z * z) * dp * dp);
        g.nodes[i] = -z;
        g.nodes[n - 1 - i] = z;
        g.weights[i] = w;
        g.weights[n - 1 - i] = w;
    }
    return cache.emplace(n, std::move(g)).first->second;
}

} // namespace savi
