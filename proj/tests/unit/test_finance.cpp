#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "savi/finance.hpp"
#include "savi/rng.hpp"

using namespace savi;

namespace {

PriceSeries parse(const std::string& s)
{
    std::istringstream in(s);
    return parse_price_csv(in);
}

} // namespace

TEST(Ingest, SingleReturn)
{
    auto p = parse("date,close\n2020-01-02,100\n2020-01-03,110\n");
    auto v = build_vol_series(p);
    ASSERT_EQ(v.rows.size(), 1u);
    EXPECT_NEAR(v.rows[0].logReturn, std::log(1.1), 1e-15);
    EXPECT_NEAR(v.rows[0].logReturn, 0.09531, 1e-5);
    EXPECT_EQ(v.rows[0].date, "2020-01-03");
}

TEST(Ingest, UnsortedInputIsSortedWithWarning)
{
    auto p = parse("close,date\n110,2020-01-03\n100,2020-01-02\n");
    ASSERT_EQ(p.rows.size(), 2u);
    EXPECT_EQ(p.rows[0].date, "2020-01-02");
    EXPECT_EQ(p.warnings.size(), 1u);
}

TEST(Ingest, ValidationErrorsNameTheRow)
{
    auto expectRow = [](const std::string& csv, const std::string& needle) {
        try {
            parse(csv);
            ADD_FAILURE() << csv;
        } catch (const ConfigError& e) {
            EXPECT_NE(std::string(e.what()).find(needle), std::string::npos) << e.what();
        }
    };
    expectRow("date,close\n2020-01-02,100\n2020-01-03,0\n", "row 3");
    expectRow("date,close\n2020-01-02,-5\n", "row 2");
    expectRow("date,close\n2020-01-02,nan\n", "row 2");
    expectRow("date,close\n2020-01-02,abc\n", "row 2");
    expectRow("date,close\n2020-02-30,100\n", "row 2");
    expectRow("date,close\n2020-01-02,100\n2020-01-02,101\n", "duplicate");
    expectRow("day,close\n2020-01-02,100\n", "header");
}

TEST(Ingest, CustomColumnsAndBlankLines)
{
    std::istringstream in("Date,Open,Adj Close\n2020-01-02,1,100\n\n2020-01-03,1,90\n");
    auto p = parse_price_csv(in, "Date", "Adj Close");
    EXPECT_EQ(p.rows.size(), 2u);
    EXPECT_EQ(p.rows[1].close, 90.0);
}

TEST(Threshold, OrderStatisticConvention)
{
    EXPECT_EQ(calibrate_threshold({10, 9, 8, 7, 6, 5, 4, 3, 2, 1}, 0.8), 8.0);
    EXPECT_EQ(calibrate_threshold({0.3}, 0.8), 0.3);
    EXPECT_EQ(calibrate_threshold({0.2, 0.2, 0.2}, 0.8), 0.2);
    EXPECT_THROW(calibrate_threshold({}, 0.8), ConfigError);

    VolSeries v;
    for (double x : {0.2, 0.2, 0.2})
        v.rows.push_back(VolRow{"d", x, x, 0});
    apply_threshold(v, calibrate_threshold({0.2, 0.2, 0.2}));
    for (auto& r : v.rows)
        EXPECT_EQ(r.x, 1);
}

TEST(VolatilityPipeline, ColumnIdentitiesAndDeterminism)
{
    std::vector<int> xs;
    Rng r(4);
    for (int i = 0; i < 400; ++i)
        xs.push_back(r.bernoulli(i > 200 && i < 260 ? 0.7 : 0.2));
    auto a = run_volatility_pipeline(xs, {}, 7);
    auto b = run_volatility_pipeline(xs, {}, 7);
    ASSERT_EQ(a.size(), xs.size());
    double prevLift = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].eCombined, 0.5 * (a[i].eUi + a[i].eConfLifted));
        EXPECT_GE(a[i].eConfLifted, prevLift);
        prevLift = a[i].eConfLifted;
        EXPECT_EQ(a[i].logUi, b[i].logUi);
        EXPECT_EQ(a[i].logConfLifted, b[i].logConfLifted);
        EXPECT_NEAR(std::exp(a[i].logCombined) / a[i].eCombined, 1.0, 1e-12);
    }
    auto c = run_volatility_pipeline(xs, {}, 8);
    bool differs = false;
    for (size_t i = 0; i < a.size(); ++i)
        differs = differs || a[i].logConfLifted != c[i].logConfLifted;
    EXPECT_TRUE(differs);
}

TEST(VolatilityPipeline, AllZerosKeepsUiAtMostOne)
{
    std::vector<int> xs(300, 0);
    for (auto& row : run_volatility_pipeline(xs, {}, 1))
        EXPECT_LE(row.eUi, 1.0);
}

TEST(VolatilityPipeline, EndToEndFromFixture)
{
    auto prices = ingest_csv(SAVI_TEST_DATA "/prices.csv");
    FinanceConfig cfg;
    cfg.calibStart = "2017-01-01";
    cfg.calibEnd = "2018-12-31";
    cfg.seed = 7;
    auto res = run_finance(prices, cfg);
    EXPECT_GT(res.calibrationDays, 400);
    EXPECT_GT(res.threshold, 0.0);
    ASSERT_FALSE(res.rows.empty());
    EXPECT_GT(res.rows.front().date, cfg.calibEnd);

    // recomputing from the emitted indicator column is bit-identical
    std::vector<int> xs;
    std::vector<std::string> dates;
    for (auto& r : res.rows) {
        xs.push_back(r.x);
        dates.push_back(r.date);
    }
    auto again = run_volatility_pipeline(xs, dates, cfg.seed);
    for (size_t i = 0; i < xs.size(); ++i) {
        ASSERT_EQ(again[i].eUi, res.rows[i].eUi);
        ASSERT_EQ(again[i].eConfLifted, res.rows[i].eConfLifted);
        ASSERT_EQ(again[i].eCombined, res.rows[i].eCombined);
    }

    FinanceConfig bad = cfg;
    bad.calibEnd = "2016-01-01";
    EXPECT_THROW(run_finance(prices, bad), ConfigError);
}
