#pragma once

#include <cstdint>
#include <istream>
#include <string>
#include <vector>

#include "savi/adjust.hpp"

namespace savi {

struct PriceRow {
    std::string date; // YYYY-MM-DD
    double close = 0.0;
};

struct PriceSeries {
    std::vector<PriceRow> rows;
    std::vector<std::string> warnings;
};

PriceSeries parse_price_csv(std::istream& in, const std::string& dateColumn = "date",
    const std::string& closeColumn = "close");
PriceSeries ingest_csv(const std::string& path, const std::string& dateColumn = "date",
    const std::string& closeColumn = "close");

struct VolRow {
    std::string date;
    double logReturn = 0.0;
    double vol = 0.0;
    int x = 0;
};

struct VolSeries {
    std::vector<VolRow> rows;
    double threshold = 0.0;
};

VolSeries build_vol_series(const PriceSeries& prices);
// ceil(q n)-th smallest value
double calibrate_threshold(std::vector<double> vols, double q = 0.8);
void apply_threshold(VolSeries& s, double c);

struct FinanceRow {
    std::string date;
    int x = 0;
    double eUi = 1.0, eConfLifted = 1.0, eCombined = 1.0;
    double logUi = 0.0, logConfLifted = 0.0, logCombined = 0.0;
};

// UI, lifted simple jumper, and their equal-weight combination.
std::vector<FinanceRow> run_volatility_pipeline(const std::vector<int>& xs, const std::vector<std::string>& dates,
    std::uint64_t seed, const AdjusterSpec& a = AdjusterSpec::mix(), double eps = 0.01);

struct FinanceConfig {
    std::string calibStart, calibEnd;
    double q = 0.8;
    std::uint64_t seed = 0;
    AdjusterSpec adjuster = AdjusterSpec::mix();
};

struct FinanceResult {
    double threshold = 0.0;
    std::int64_t calibrationDays = 0;
    std::vector<FinanceRow> rows;
    std::vector<std::string> warnings;
};

FinanceResult run_finance(const PriceSeries& prices, const FinanceConfig& cfg);

} // namespace savi
