#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "savi/lift.hpp"
#include "savi/pipeline.hpp"
#include "savi/rng.hpp"
#include "savi/sim.hpp"
#include "savi/streams.hpp"
#include "scripted.hpp"

using namespace savi;

namespace {

double mix_ref(double e)
{
    double l = std::log(e);
    return (e - 1 - l) / (l * l);
}

std::vector<Evidence> ev(std::initializer_list<double> xs)
{
    std::vector<Evidence> out;
    for (double x : xs)
        out.push_back(Evidence::fromLinear(x));
    return out;
}

} // namespace

TEST(Lift, RunningMaxWithFloor)
{
    LiftedStream s(std::make_unique<ScriptedStream>(), AdjusterSpec::mix());
    s.reset(0);
    EXPECT_EQ(s.current().value(), 1.0);
    EXPECT_NEAR(s.step(0.5).value(), 0.5, 1e-15);
    EXPECT_NEAR(s.step(2.0).value(), mix_ref(2.0), 1e-14);
    EXPECT_NEAR(s.step(1.0).value(), mix_ref(2.0), 1e-14);
    EXPECT_NEAR(mix_ref(2.0), 0.6387, 1e-4);
}

TEST(Lift, ConstantOneInner)
{
    LiftedStream s(std::make_unique<ScriptedStream>(), AdjusterSpec::mix());
    for (int i = 0; i < 5; ++i)
        EXPECT_EQ(s.step(1.0).value(), 0.5);
}

TEST(Lift, OutputNonDecreasing)
{
    auto s = e_lift(make_stream("conf:lambda=1"), AdjusterSpec::kv());
    s->reset(3);
    Rng r(3);
    double prev = -1e300;
    for (int i = 0; i < 1000; ++i) {
        double v = s->step(r.bernoulli(0.3)).logValue;
        ASSERT_GE(v, prev);
        prev = v;
    }
}

TEST(Lift, SpineRejectedWithReason)
{
    try {
        LiftedStream s(std::make_unique<ScriptedStream>(), AdjusterSpec::spine(0.5));
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("negative result"), std::string::npos);
    }
}

TEST(Combine, ArithmeticAndWeights)
{
    std::vector<Component> parts;
    for (int i = 1; i <= 3; ++i)
        parts.emplace_back(1.0 / 3, std::make_unique<ScriptedStream>(i));
    CombinedStream c(std::move(parts));
    for (int t = 0; t < 3; ++t)
        EXPECT_NEAR(c.step(1.0).value(), 2.0, 1e-14);

    std::vector<Component> one;
    one.emplace_back(1.0, std::make_unique<ScriptedStream>());
    CombinedStream id(std::move(one));
    EXPECT_NEAR(id.step(7.5).value(), 7.5, 1e-14);

    std::vector<Component> bad;
    bad.emplace_back(0.3, std::make_unique<ScriptedStream>());
    bad.emplace_back(0.3, std::make_unique<ScriptedStream>());
    EXPECT_THROW(CombinedStream{std::move(bad)}, ConfigError);
}

TEST(Combine, NullMeanAtFixedTime)
{
    for (double g : {0.0, 0.5, 1.0}) {
        std::string expr = "combine(" + std::to_string(g) + "*ui-exch, " + std::to_string(1 - g) +
                           "*lift(mix, conf:lambda=1))";
        McConfig cfg;
        cfg.runs = 10000;
        cfg.seed = 5;
        auto r = stopped_mean(parse_pipeline(expr), GeneratorSpec::bernoulli(0.3), StopSpec::fixed(50), cfg);
        EXPECT_LE(r.mean, 1.0 + 3 * r.se) << expr;
    }
}

TEST(PProcess, ReciprocalMaxDominatedAndLiftIsIdentity)
{
    auto s = make_stream("conf:lambda=1");
    s->reset(1);
    Rng r(1);
    for (int i = 0; i < 300; ++i) {
        s->step(r.bernoulli(0.2));
        PProcessView cur{s.get(), PMode::Reciprocal}, mx{s.get(), PMode::ReciprocalMax};
        ASSERT_LE(mx.value(), cur.value());
        ASSERT_GE(mx.value(), 0.0);
        ASSERT_LE(cur.value(), 1.0);
        ASSERT_EQ(p_lift(mx).value(), mx.value());
    }
}

TEST(Calibrate, MatchesLiftThroughCorrespondence)
{
    auto lifted = e_lift(make_stream("conf:lambda=1"), AdjusterSpec::mix());
    auto cal = calibrate_p_to_e(make_stream("conf:lambda=1"), CalibratorSpec::mix());
    lifted->reset(4);
    cal->reset(4);
    Rng r(4);
    for (int i = 0; i < 500; ++i) {
        int x = r.bernoulli(0.3);
        double a = lifted->step(x).value(), b = cal->step(x).value();
        ASSERT_NEAR(a / b, 1.0, 1e-12);
    }
    EXPECT_TRUE(cal->dataFiltrationValid());
    auto pointwise = calibrate_p_to_e(make_stream("conf:lambda=1"), CalibratorSpec::mix(), PMode::Reciprocal);
    EXPECT_FALSE(pointwise->dataFiltrationValid());
}

TEST(Calibrate, ConstantPValues)
{
    // inner never exceeds 1, so p* = 1 throughout
    CalibratedStream c(std::make_unique<ScriptedStream>(), CalibratorSpec::mix());
    for (double x : {0.2, 1.0, 0.7})
        EXPECT_EQ(c.step(x).value(), 0.5);
    // p = 1/20 from a single jump
    CalibratedStream d(std::make_unique<ScriptedStream>(), CalibratorSpec::mix());
    double p = 0.05, l = std::log(p);
    EXPECT_NEAR(d.step(20.0).value(), (1 - p + p * l) / (p * l * l), 1e-12);
}

TEST(ForecastCombiners, DocumentedValues)
{
    EXPECT_NEAR(forecast_combine_adjusted(ev({4, 1}), AdjusterSpec::sqrt()).value(), 0.5, 1e-15);
    EXPECT_NEAR(forecast_combine_adjusted(ev({4, 1, 1}), AdjusterSpec::sqrt()).value(), 1.0 / 3, 1e-15);
    EXPECT_NEAR(forecast_combine_adjusted(ev({3}), AdjusterSpec::mix()).value(), mix_ref(3.0), 1e-14);
    EXPECT_NEAR(forecast_harmonic_p(ev({20, 20})), std::numbers::e * std::log(2.0) / 20, 1e-15);
    EXPECT_NEAR(forecast_harmonic_p(ev({20, 20})), 0.0942, 1e-4);
    EXPECT_EQ(forecast_harmonic_p(ev({1, 1})), 1.0);
    EXPECT_NEAR(forecast_scaled_mean(ev({20, 20})), 20 / (std::numbers::e * std::log(2.0)), 1e-12);
    EXPECT_NEAR(forecast_scaled_mean(ev({20, 20})), 10.615, 1e-3);
    EXPECT_THROW(forecast_harmonic_p(ev({5})), DomainError);
    EXPECT_THROW(forecast_scaled_mean(ev({5})), DomainError);
    EXPECT_NEAR(forecast_lagged_mean(ev({5})), 5.0, 1e-15);
    EXPECT_NEAR(forecast_lagged_mean(ev({2, 4})), 3.0, 1e-15);
}

TEST(ForecastCombiners, HarmonicAndScaledDecisionsAgree)
{
    Rng r(77);
    for (int i = 0; i < 1000; ++i) {
        int K = 2 + int(r.uniform() * 6);
        std::vector<Evidence> m;
        for (int k = 0; k < K; ++k)
            m.push_back(Evidence::fromLog(r.uniform() * 8));
        double alpha = 0.01 + 0.2 * r.uniform();
        EXPECT_EQ(forecast_harmonic_p(m) <= alpha, forecast_scaled_mean(m) >= 1 / alpha);
    }
}
