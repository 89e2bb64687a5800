#pragma once

#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "savi/adjust.hpp"
#include "savi/core.hpp"

namespace savi {

struct ForecastRecord {
    std::int64_t t = 0;
    double p = 0.5;
    double q = 0.5;
    int y = 0; // realized at t+h-1
};

inline double brier(double f, int y)
{
    return (f - y) * (f - y);
}

inline int offset_of(std::int64_t t, std::int64_t h)
{
    return static_cast<int>((t - 1) % h) + 1;
}

struct OffsetState {
    int k = 1;
    std::int64_t h = 1;
    double lambda = 0.5;
    std::int64_t n = 0;
    Evidence wealth = Evidence::one();
    Evidence runningMax = Evidence::one();
};

// Bets that q beats p in Brier score: wealth *= 1 + lambda * d, d = s(p) - s(q).
Evidence offset_stream_step(OffsetState& st, const ForecastRecord& r);

enum class ForecastCombiner { Adjusted, HarmonicP, ScaledMean, CalibratedE, LaggedMean };

ForecastCombiner parse_combiner(const std::string& s);
std::string to_string(ForecastCombiner c);

struct ForecastRow {
    std::int64_t t = 0;
    double d = 0.0;
    double eBar = 1.0;   // adjusted mean
    double pTilde = 1.0; // harmonic p; NaN when h = 1
    double mTilde = 0.0; // scaled mean; NaN when h = 1
    double eTilde = 1.0; // calibrated harmonic; NaN when h = 1
    double mBar = 1.0;   // lagged mean
    double minOffsetMax = 1.0;
};

struct ForecastTable {
    std::int64_t h = 1;
    std::vector<ForecastRow> rows;
};

bool combiner_is_eprocess(ForecastCombiner c);

ForecastTable compare_forecasters(const std::vector<ForecastRecord>& records, std::int64_t h,
    const AdjusterSpec& a = AdjusterSpec::mix(), const CalibratorSpec& c = CalibratorSpec::mix(),
    double lambda = 0.5);

double combiner_value(const ForecastRow& r, ForecastCombiner c);

std::vector<ForecastRecord> read_records_csv(std::istream& in);
std::vector<ForecastRecord> read_records_csv(const std::string& path);
void write_records_csv(std::ostream& out, const std::vector<ForecastRecord>& rs);

// "brier-drift-v1": y ~ Ber(pi), pi ~ U(0.2, 0.8), q = pi, p = clamp(pi +/- gap * t / T)
std::vector<ForecastRecord> synthetic_brier_drift(std::int64_t T, double gap, std::uint64_t seed);

} // namespace savi
