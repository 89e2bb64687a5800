#include <cmath>
#include <numbers>
#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "savi/forecast.hpp"
#include "savi/lift.hpp"
#include "savi/rng.hpp"

using namespace savi;

TEST(Offsets, PartitionCoversEveryStepOnce)
{
    for (std::int64_t h : {1, 2, 3, 7}) {
        std::vector<std::set<std::int64_t>> parts(static_cast<size_t>(h));
        for (std::int64_t t = 1; t <= 100; ++t) {
            int k = offset_of(t, h);
            ASSERT_GE(k, 1);
            ASSERT_LE(k, h);
            parts[static_cast<size_t>(k - 1)].insert(t);
        }
        std::set<std::int64_t> all;
        size_t total = 0;
        for (auto& p : parts) {
            total += p.size();
            all.insert(p.begin(), p.end());
        }
        EXPECT_EQ(total, 100u);
        EXPECT_EQ(all.size(), 100u);
    }
}

TEST(Offsets, StepMismatchAndWealth)
{
    OffsetState st{2, 3, 0.5};
    EXPECT_THROW(offset_stream_step(st, ForecastRecord{1, 0.5, 0.5, 1}), DomainError);
    // p = 0.9, q = 0.6, y = 0: d = 0.81 - 0.36 = 0.45
    Evidence e = offset_stream_step(st, ForecastRecord{2, 0.9, 0.6, 0});
    EXPECT_NEAR(e.value(), 1 + 0.5 * 0.45, 1e-15);
    e = offset_stream_step(st, ForecastRecord{5, 0.2, 0.6, 0});
    EXPECT_NEAR(e.value(), (1 + 0.5 * 0.45) * (1 + 0.5 * (0.04 - 0.36)), 1e-15);
    EXPECT_NEAR(st.runningMax.value(), 1.225, 1e-15);
}

TEST(Offsets, EqualForecastsUnderNullKeepMeanOne)
{
    // y ~ Ber(p) with p = q: d = 0, wealth stays 1; also a strictly worse q
    Rng r(1);
    const int runs = 10000;
    double s = 0.0, s2 = 0.0;
    for (int i = 0; i < runs; ++i) {
        OffsetState st{1, 1, 0.5}, eq{1, 1, 0.5};
        Evidence e;
        for (int t = 1; t <= 30; ++t) {
            double p = 0.2 + 0.6 * r.uniform();
            int y = r.bernoulli(p);
            ASSERT_EQ(offset_stream_step(eq, ForecastRecord{t, p, p, y}).value(), 1.0);
            double q = std::clamp(p + (r.uniform() < 0.5 ? -0.1 : 0.1), 0.0, 1.0);
            e = offset_stream_step(st, ForecastRecord{t, p, q, y});
        }
        s += e.value();
        s2 += e.value() * e.value();
    }
    double m = s / runs, se = std::sqrt((s2 / runs - m * m) / (runs - 1));
    EXPECT_LE(m, 1 + 3 * se);
}

TEST(Compare, ConstantOffsetsWithSqrt)
{
    // make offset maxima (4, 1, 1) directly
    std::vector<Evidence> m{Evidence::fromLinear(4), Evidence::one(), Evidence::one()};
    EXPECT_NEAR(forecast_combine_adjusted(m, AdjusterSpec::sqrt()).value(), 1.0 / 3, 1e-15);
}

TEST(Compare, TableMatchesCombinersAndFlags)
{
    auto recs = synthetic_brier_drift(600, 0.3, 5);
    auto tab = compare_forecasters(recs, 3);
    ASSERT_EQ(tab.rows.size(), 600u);
    EXPECT_TRUE(combiner_is_eprocess(ForecastCombiner::Adjusted));
    EXPECT_TRUE(combiner_is_eprocess(ForecastCombiner::CalibratedE));
    EXPECT_FALSE(combiner_is_eprocess(ForecastCombiner::ScaledMean));
    EXPECT_FALSE(combiner_is_eprocess(ForecastCombiner::LaggedMean));
    EXPECT_FALSE(combiner_is_eprocess(ForecastCombiner::HarmonicP));

    // recompute the last row by hand
    OffsetState st[3] = {{1, 3, 0.5}, {2, 3, 0.5}, {3, 3, 0.5}};
    for (auto& r : recs)
        offset_stream_step(st[offset_of(r.t, 3) - 1], r);
    double meanMax = 0, meanCur = 0, adj = 0;
    for (auto& s : st) {
        meanMax += s.runningMax.value() / 3;
        meanCur += s.wealth.value() / 3;
        adj += adjuster_eval(AdjusterSpec::mix(), s.runningMax).value() / 3;
    }
    auto& last = tab.rows.back();
    EXPECT_NEAR(last.eBar / adj, 1.0, 1e-12);
    EXPECT_NEAR(last.mBar / meanCur, 1.0, 1e-12);
    EXPECT_NEAR(last.mTilde / (meanMax / (std::numbers::e * std::log(3.0))), 1.0, 1e-12);
    EXPECT_NEAR(last.pTilde, std::min(1.0, std::numbers::e * std::log(3.0) / meanMax), 1e-12);
    EXPECT_NEAR(last.eTilde, calibrator_eval(CalibratorSpec::mix(), last.pTilde).value(), 1e-9);
}

TEST(Compare, AdjustedMeanDominatesCalibratedHarmonic)
{
    for (std::uint64_t seed : {1, 2, 3}) {
        auto tab = compare_forecasters(synthetic_brier_drift(3000, 0.3, seed), 3);
        for (auto& r : tab.rows)
            if (r.minOffsetMax >= 1.0)
                ASSERT_GE(r.eBar, r.eTilde) << "t=" << r.t << " seed " << seed;
    }
}

TEST(Compare, HOneLeavesMergersUndefined)
{
    auto tab = compare_forecasters(synthetic_brier_drift(20, 0.3, 1), 1);
    EXPECT_TRUE(std::isnan(tab.rows.back().pTilde));
    EXPECT_TRUE(std::isnan(tab.rows.back().eTilde));
    EXPECT_FALSE(std::isnan(tab.rows.back().eBar));
}

TEST(Compare, NullValidityOfAdjustedMean)
{
    for (std::int64_t h : {1, 2, 3}) {
        const int runs = 10000;
        double s = 0.0, s2 = 0.0;
        for (int i = 0; i < runs; ++i) {
            // p is the truth; q is a perturbed forecaster, so Delta <= 0
            Rng r(split_seed(31, StreamId::Data, static_cast<std::uint64_t>(i)));
            std::vector<ForecastRecord> recs;
            for (int t = 1; t <= 60; ++t) {
                double p = 0.2 + 0.6 * r.uniform();
                double q = std::clamp(p + (r.uniform() < 0.5 ? -0.05 : 0.05), 0.0, 1.0);
                recs.push_back(ForecastRecord{t, p, q, r.bernoulli(p)});
            }
            double v = compare_forecasters(recs, h).rows.back().eBar;
            s += v;
            s2 += v * v;
        }
        double m = s / runs, se = std::sqrt((s2 / runs - m * m) / (runs - 1));
        EXPECT_LE(m, 1 + 3 * se) << h;
    }
}

TEST(Records, CsvRoundTripAndValidation)
{
    auto recs = synthetic_brier_drift(50, 0.2, 9);
    std::ostringstream os;
    write_records_csv(os, recs);
    std::istringstream in(os.str());
    auto back = read_records_csv(in);
    ASSERT_EQ(back.size(), recs.size());
    for (size_t i = 0; i < recs.size(); ++i) {
        EXPECT_EQ(back[i].p, recs[i].p);
        EXPECT_EQ(back[i].q, recs[i].q);
        EXPECT_EQ(back[i].y, recs[i].y);
    }
    std::istringstream bad("t,p,q,y\n1,0.5,1.2,1\n");
    EXPECT_THROW(read_records_csv(bad), ConfigError);
    std::vector<ForecastRecord> gap{{1, 0.5, 0.5, 1}, {3, 0.5, 0.5, 1}};
    EXPECT_THROW(compare_forecasters(gap, 2), ConfigError);
}

TEST(Synthetic, DriftShapeIsVersionedAndDeterministic)
{
    auto a = synthetic_brier_drift(1000, 0.3, 4);
    auto b = synthetic_brier_drift(1000, 0.3, 4);
    for (size_t i = 0; i < a.size(); ++i) {
        ASSERT_EQ(a[i].p, b[i].p);
        ASSERT_GE(a[i].q, 0.2);
        ASSERT_LE(a[i].q, 0.8);
        double shift = 0.3 * double(a[i].t) / 1000;
        double up = std::min(1.0, a[i].q + shift), down = std::max(0.0, a[i].q - shift);
        ASSERT_TRUE(std::abs(a[i].p - up) < 1e-12 || std::abs(a[i].p - down) < 1e-12) << i;
    }
}
