#include "savi/finance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "savi/lift.hpp"
#include "savi/pipeline.hpp"
#include "savi/streams.hpp"
#include "savi/text.hpp"

namespace savi {

namespace {

bool valid_iso_date(const std::string& s)
{
    if (s.size() != 10 || s[4] != '-' || s[7] != '-')
        return false;
    for (size_t i : {0, 1, 2, 3, 5, 6, 8, 9})
        if (!std::isdigit(static_cast<unsigned char>(s[i])))
            return false;
    int y = std::stoi(s.substr(0, 4));
    unsigned m = static_cast<unsigned>(std::stoi(s.substr(5, 2)));
    unsigned d = static_cast<unsigned>(std::stoi(s.substr(8, 2)));
    return std::chrono::year_month_day{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}}.ok();
}

std::string unquote(std::string s)
{
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"')
        return s.substr(1, s.size() - 2);
    return s;
}

} // namespace

PriceSeries parse_price_csv(std::istream& in, const std::string& dateColumn, const std::string& closeColumn)
{
    PriceSeries out;
    std::string line;
    if (!std::getline(in, line))
        throw ConfigError("price csv is empty");
    if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF)
        line = line.substr(3); // BOM
    auto header = split(line, ',');
    int dc = -1, cc = -1;
    for (size_t i = 0; i < header.size(); ++i) {
        std::string h = unquote(header[i]);
        if (h == dateColumn)
            dc = static_cast<int>(i);
        if (h == closeColumn)
            cc = static_cast<int>(i);
    }
    if (dc < 0 || cc < 0)
        throw ConfigError("price csv header lacks '" + dateColumn + "' or '" + closeColumn + "'");

    long rowNo = 1;
    while (std::getline(in, line)) {
        ++rowNo;
        if (trim(line).empty())
            continue;
        auto f = split(line, ',');
        if (static_cast<int>(f.size()) <= std::max(dc, cc))
            throw ConfigError("row " + std::to_string(rowNo) + ": too few fields");
        PriceRow r;
        r.date = unquote(f[static_cast<size_t>(dc)]);
        if (!valid_iso_date(r.date))
            throw ConfigError("row " + std::to_string(rowNo) + ": bad date '" + r.date + "'");
        std::string c = unquote(f[static_cast<size_t>(cc)]);
        try {
            r.close = parse_double(c, "close");
        } catch (const ConfigError&) {
            throw ConfigError("row " + std::to_string(rowNo) + ": bad close '" + c + "'");
        }
        if (!std::isfinite(r.close))
            throw ConfigError("row " + std::to_string(rowNo) + ": close is not finite");
        if (!(r.close > 0.0))
            throw ConfigError("row " + std::to_string(rowNo) + ": close must be positive, got " + c);
        out.rows.push_back(std::move(r));
    }
    if (!std::is_sorted(out.rows.begin(), out.rows.end(), [](auto& a, auto& b) { return a.date < b.date; })) {
        std::stable_sort(out.rows.begin(), out.rows.end(), [](auto& a, auto& b) { return a.date < b.date; });
        out.warnings.push_back("input rows were not in date order; sorted");
    }
    for (size_t i = 1; i < out.rows.size(); ++i)
        if (out.rows[i].date == out.rows[i - 1].date)
            throw ConfigError("duplicate date " + out.rows[i].date);
    return out;
}

PriceSeries ingest_csv(const std::string& path, const std::string& dateColumn, const std::string& closeColumn)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open " + path);
    return parse_price_csv(in, dateColumn, closeColumn);
}

VolSeries build_vol_series(const PriceSeries& prices)
{
    VolSeries v;
    for (size_t i = 1; i < prices.rows.size(); ++i) {
        VolRow r;
        r.date = prices.rows[i].date;
        r.logReturn = std::log(prices.rows[i].close / prices.rows[i - 1].close);
        r.vol = std::abs(r.logReturn);
        v.rows.push_back(std::move(r));
    }
    return v;
}

double calibrate_threshold(std::vector<double> vols, double q)
{
    if (vols.empty())
        throw ConfigError("calibration window is empty");
    if (!(q > 0.0 && q <= 1.0))
        throw ConfigError("quantile must lie in (0,1]");
    auto k = static_cast<size_t>(std::ceil(q * static_cast<double>(vols.size())));
    k = std::clamp<size_t>(k, 1, vols.size());
    std::nth_element(vols.begin(), vols.begin() + static_cast<long>(k - 1), vols.end());
    return vols[k - 1];
}

void apply_threshold(VolSeries& s, double c)
{
    s.threshold = c;
    for (auto& r : s.rows)
        r.x = r.vol >= c ? 1 : 0;
}

std::vector<FinanceRow> run_volatility_pipeline(const std::vector<int>& xs, const std::vector<std::string>& dates,
    std::uint64_t seed, const AdjusterSpec& a, double eps)
{
    if (!dates.empty() && dates.size() != xs.size())
        throw ConfigError("dates and indicators differ in length");
    std::vector<Component> parts;
    parts.emplace_back(0.5, make_stream("ui-exch"));
    parts.emplace_back(0.5, e_lift(make_stream("conf:jumper,eps=" + fmt_double(eps)), a));
    CombinedStream comb(std::move(parts));
    comb.reset(seed);

    std::vector<FinanceRow> out;
    out.reserve(xs.size());
    for (size_t i = 0; i < xs.size(); ++i) {
        comb.step(xs[i]);
        FinanceRow r;
        r.date = dates.empty() ? std::to_string(i + 1) : dates[i];
        r.x = xs[i];
        r.logUi = comb.component(0).current().logValue;
        r.logConfLifted = comb.component(1).current().logValue;
        r.eUi = std::exp(r.logUi);
        r.eConfLifted = std::exp(r.logConfLifted);
        r.eCombined = 0.5 * (r.eUi + r.eConfLifted);
        r.logCombined = log_add(r.logUi, r.logConfLifted) - std::numbers::ln2;
        out.push_back(std::move(r));
    }
    return out;
}

FinanceResult run_finance(const PriceSeries& prices, const FinanceConfig& cfg)
{
    if (cfg.calibStart.empty() || cfg.calibEnd.empty())
        throw ConfigError("calibration window needs start and end dates");
    if (!valid_iso_date(cfg.calibStart) || !valid_iso_date(cfg.calibEnd) || cfg.calibEnd < cfg.calibStart)
        throw ConfigError("calibration dates must be YYYY-MM-DD with start <= end");
    FinanceResult res;
    res.warnings = prices.warnings;
    VolSeries vs = build_vol_series(prices);
    std::vector<double> calib;
    for (auto& r : vs.rows)
        if (r.date >= cfg.calibStart && r.date <= cfg.calibEnd)
            calib.push_back(r.vol);
    res.calibrationDays = static_cast<std::int64_t>(calib.size());
    res.threshold = calibrate_threshold(calib, cfg.q);
    apply_threshold(vs, res.threshold);

    std::vector<int> xs;
    std::vector<std::string> dates;
    for (auto& r : vs.rows)
        if (r.date > cfg.calibEnd) {
            xs.push_back(r.x);
            dates.push_back(r.date);
        }
    if (xs.empty())
        throw ConfigError("no trading days after the calibration window");
    res.rows = run_volatility_pipeline(xs, dates, cfg.seed, cfg.adjuster);
    return res;
}

} // namespace savi
