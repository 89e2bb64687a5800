#pragma once

#include <functional>
#include <span>
#include <vector>

namespace savi {

// Thread-safe log-gamma for positive arguments.
double log_gamma(double x);

double log_sum_exp(std::span<const double> xs);
// log(exp(a) + exp(b))
double log_add(double a, double b);

struct QuadResult {
    double value = 0.0;
    double errorEstimate = 0.0;
    bool converged = true;
    int evaluations = 0;
};

// Adaptive Simpson on [a, b] with a recursion depth cap.
QuadResult adaptive_simpson(const std::function<double(double)>& f, double a, double b,
    double tol, int maxDepth = 48);

struct GaussLegendre {
    std::vector<double> nodes;
    std::vector<double> weights;
};

// n-point rule on [-1, 1]; cached per n.
const GaussLegendre& gauss_legendre(int n);

} // namespace savi
