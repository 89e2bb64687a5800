#include <cmath>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "savi/numerics.hpp"

using namespace savi;

TEST(LogGamma, MatchesFactorials)
{
    long double f = 1.0L;
    for (int n = 1; n <= 30; ++n) {
        f *= n;
        EXPECT_NEAR(log_gamma(n + 1.0), std::log(f), 1e-13 * std::log(f) + 1e-15);
    }
    EXPECT_NEAR(log_gamma(0.5), 0.5 * std::log(std::numbers::pi), 1e-15);
}

TEST(LogGamma, StirlingAtLargeArgument)
{
    double x = 1e6;
    double stirling = (x - 0.5) * std::log(x) - x + 0.5 * std::log(2 * std::numbers::pi) + 1.0 / (12 * x);
    EXPECT_NEAR(log_gamma(x), stirling, 1e-13 * stirling);
}

TEST(LogSumExp, AgreesWithDirectSumAndSurvivesOverflow)
{
    std::vector<double> xs{-1.0, 0.5, 2.0, -30.0};
    double direct = 0.0;
    for (double x : xs)
        direct += std::exp(x);
    EXPECT_NEAR(log_sum_exp(xs), std::log(direct), 1e-14);

    std::vector<double> big{1000.0, 1000.0};
    EXPECT_NEAR(log_sum_exp(big), 1000.0 + std::log(2.0), 1e-12);

    double inf = std::numeric_limits<double>::infinity();
    std::vector<double> none{-inf, -inf};
    EXPECT_EQ(log_sum_exp(none), -inf);
    EXPECT_EQ(log_add(-inf, 3.0), 3.0);
    EXPECT_NEAR(log_add(std::log(2.0), std::log(3.0)), std::log(5.0), 1e-15);
}

TEST(AdaptiveSimpson, SmoothAndPeakedIntegrands)
{
    auto q = adaptive_simpson([](double x) { return std::sin(x); }, 0.0, std::numbers::pi, 1e-12);
    EXPECT_TRUE(q.converged);
    EXPECT_NEAR(q.value, 2.0, 1e-11);

    // narrow bump that a coarse start would miss
    auto bump = [](double x) { return std::exp(-1e4 * (x - 0.3) * (x - 0.3)); };
    auto r = adaptive_simpson(bump, 0.0, 1.0, 1e-12);
    EXPECT_NEAR(r.value, std::sqrt(std::numbers::pi / 1e4), 1e-10);
}

TEST(GaussLegendre, ExactForPolynomialsUpToDegree2nMinus1)
{
    const auto& g = gauss_legendre(10);
    double wsum = 0.0, x18 = 0.0, x19 = 0.0;
    for (size_t i = 0; i < g.nodes.size(); ++i) {
        wsum += g.weights[i];
        x18 += g.weights[i] * std::pow(g.nodes[i], 18);
        x19 += g.weights[i] * std::pow(g.nodes[i], 19);
    }
    EXPECT_NEAR(wsum, 2.0, 1e-14);
    EXPECT_NEAR(x18, 2.0 / 19.0, 1e-14);
    EXPECT_NEAR(x19, 0.0, 1e-14);

    const auto& big = gauss_legendre(400);
    double s = 0.0;
    for (size_t i = 0; i < big.nodes.size(); ++i)
        s += big.weights[i] * std::exp(big.nodes[i]);
    EXPECT_NEAR(s, std::exp(1.0) - std::exp(-1.0), 1e-13);
}
