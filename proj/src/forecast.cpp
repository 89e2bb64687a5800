#include "savi/forecast.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "savi/lift.hpp"
#include "savi/rng.hpp"
#include "savi/text.hpp"

namespace savi {

Evidence offset_stream_step(OffsetState& st, const ForecastRecord& r)
{
    if (offset_of(r.t, st.h) != st.k)
        throw DomainError("record t=" + std::to_string(r.t) + " belongs to offset " +
                          std::to_string(offset_of(r.t, st.h)) + ", not " + std::to_string(st.k));
    double d = brier(r.p, r.y) - brier(r.q, r.y);
    st.wealth = Evidence::fromLog(st.wealth.logValue + std::log1p(st.lambda * d));
    st.runningMax = max(st.runningMax, st.wealth);
    ++st.n;
    return st.wealth;
}

ForecastCombiner parse_combiner(const std::string& s)
{
    if (s == "adjusted")
        return ForecastCombiner::Adjusted;
    if (s == "harmonic-p")
        return ForecastCombiner::HarmonicP;
    if (s == "scaled-mean")
        return ForecastCombiner::ScaledMean;
    if (s == "calibrated-e")
        return ForecastCombiner::CalibratedE;
    if (s == "lagged-mean")
        return ForecastCombiner::LaggedMean;
    throw ConfigError("unknown combiner '" + s + "' (adjusted|harmonic-p|scaled-mean|calibrated-e|lagged-mean)");
}

std::string to_string(ForecastCombiner c)
{
    switch (c) {
    case ForecastCombiner::Adjusted: return "adjusted";
    case ForecastCombiner::HarmonicP: return "harmonic-p";
    case ForecastCombiner::ScaledMean: return "scaled-mean";
    case ForecastCombiner::CalibratedE: return "calibrated-e";
    case ForecastCombiner::LaggedMean: return "lagged-mean";
    }
    return "?";
}

bool combiner_is_eprocess(ForecastCombiner c)
{
    return c == ForecastCombiner::Adjusted || c == ForecastCombiner::CalibratedE;
}

double combiner_value(const ForecastRow& r, ForecastCombiner c)
{
    switch (c) {
    case ForecastCombiner::Adjusted: return r.eBar;
    case ForecastCombiner::HarmonicP: return r.pTilde;
    case ForecastCombiner::ScaledMean: return r.mTilde;
    case ForecastCombiner::CalibratedE: return r.eTilde;
    case ForecastCombiner::LaggedMean: return r.mBar;
    }
    return 0.0;
}

ForecastTable compare_forecasters(const std::vector<ForecastRecord>& records, std::int64_t h, const AdjusterSpec& a,
    const CalibratorSpec& c, double lambda)
{
    if (h < 1)
        throw ConfigError("h must be >= 1");
    if (!(lambda >= 0.0 && lambda < 1.0))
        throw ConfigError("lambda must lie in [0,1)");
    validate(a);
    validate(c);
    ForecastTable tab;
    tab.h = h;
    std::vector<OffsetState> offs(static_cast<size_t>(h));
    for (std::int64_t k = 0; k < h; ++k)
        offs[static_cast<size_t>(k)] = OffsetState{static_cast<int>(k + 1), h, lambda};

    constexpr double nan = std::numeric_limits<double>::quiet_NaN();
    std::vector<Evidence> maxima(static_cast<size_t>(h)), currents(static_cast<size_t>(h));
    std::int64_t expect = 1;
    for (auto& r : records) {
        if (r.t != expect)
            throw ConfigError("records must have t = 1, 2, ...; got " + std::to_string(r.t) + " at position " +
                              std::to_string(expect));
        ++expect;
        auto& st = offs[static_cast<size_t>(offset_of(r.t, h) - 1)];
        offset_stream_step(st, r);

        ForecastRow row;
        row.t = r.t;
        row.d = brier(r.p, r.y) - brier(r.q, r.y);
        for (size_t k = 0; k < offs.size(); ++k) {
            maxima[k] = offs[k].runningMax;
            currents[k] = offs[k].wealth;
        }
        row.eBar = forecast_combine_adjusted(maxima, a).value();
        row.mBar = forecast_lagged_mean(currents);
        if (h >= 2) {
            row.pTilde = forecast_harmonic_p(maxima);
            row.mTilde = forecast_scaled_mean(maxima);
            row.eTilde = calibrator_eval(c, row.pTilde).value();
        } else {
            row.pTilde = row.mTilde = row.eTilde = nan;
        }
        row.minOffsetMax = std::min_element(maxima.begin(), maxima.end())->value();
        tab.rows.push_back(row);
    }
    return tab;
}

std::vector<ForecastRecord> read_records_csv(std::istream& in)
{
    std::string line;
    if (!std::getline(in, line))
        throw ConfigError("records csv is empty");
    auto header = split(line, ',');
    auto col = [&](const std::string& n) {
        auto it = std::find(header.begin(), header.end(), n);
        if (it == header.end())
            throw ConfigError("records csv lacks column '" + n + "'");
        return static_cast<size_t>(it - header.begin());
    };
    size_t ct = col("t"), cp = col("p"), cq = col("q"), cy = col("y");
    std::vector<ForecastRecord> out;
    long rowNo = 1;
    while (std::getline(in, line)) {
        ++rowNo;
        if (trim(line).empty())
            continue;
        auto f = split(line, ',');
        if (f.size() < header.size())
            throw ConfigError("row " + std::to_string(rowNo) + ": too few fields");
        ForecastRecord r;
        r.t = parse_int(f[ct], "t");
        r.p = parse_double(f[cp], "p");
        r.q = parse_double(f[cq], "q");
        auto y = parse_int(f[cy], "y");
        if (!(r.p >= 0.0 && r.p <= 1.0) || !(r.q >= 0.0 && r.q <= 1.0) || (y != 0 && y != 1))
            throw ConfigError("row " + std::to_string(rowNo) + ": need p, q in [0,1] and y in {0,1}");
        r.y = static_cast<int>(y);
        out.push_back(r);
    }
    return out;
}

std::vector<ForecastRecord> read_records_csv(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open " + path);
    return read_records_csv(in);
}

void write_records_csv(std::ostream& out, const std::vector<ForecastRecord>& rs)
{
    out << "t,p,q,y\n";
    for (auto& r : rs)
        out << r.t << ',' << fmt_double(r.p) << ',' << fmt_double(r.q) << ',' << r.y << '\n';
}

std::vector<ForecastRecord> synthetic_brier_drift(std::int64_t T, double gap, std::uint64_t seed)
{
    if (T < 1)
        throw ConfigError("T must be >= 1");
    if (!(gap >= 0.0 && gap <= 1.0))
        throw ConfigError("gap must lie in [0,1]");
    Rng rng(split_seed(seed, StreamId::Data, 0));
    std::vector<ForecastRecord> out;
    out.reserve(static_cast<size_t>(T));
    for (std::int64_t t = 1; t <= T; ++t) {
        ForecastRecord r;
        r.t = t;
        double pi = 0.2 + 0.6 * rng.uniform();
        double g = gap * static_cast<double>(t) / static_cast<double>(T);
        double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
        r.q = pi;
        r.p = std::clamp(pi + sign * g, 0.0, 1.0);
        r.y = rng.bernoulli(pi);
        out.push_back(r);
    }
    return out;
}

} // namespace savi
