#include "savi/experiment.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "savi/adjust.hpp"
#include "savi/finance.hpp"
#include "savi/forecast.hpp"
#include "savi/pipeline.hpp"
#include "savi/randomized.hpp"
#include "savi/sim.hpp"
#include "savi/text.hpp"

namespace savi {

using nlohmann::json;
using ordered = nlohmann::ordered_json;

namespace {

std::string pm(double mean, double se)
{
    std::ostringstream os;
    os.precision(6);
    os << mean << " +/- " << se;
    return os.str();
}

StopSpec stop_of(const ExperimentConfig& c)
{
    StopSpec s = parse_stop(c.stop);
    if (c.horizon)
        s.horizon = *c.horizon;
    return s;
}

McConfig mc_of(const ExperimentConfig& c)
{
    McConfig m;
    m.runs = c.runs;
    m.seed = c.seed.value_or(0);
    m.workers = c.workers;
    m.keepSamples = !c.samplesPath.empty();
    return m;
}

std::vector<Pipeline> pipelines_of(const ExperimentConfig& c, const std::string& fallback)
{
    std::vector<Pipeline> ps;
    if (c.pipelines.empty())
        ps.push_back(parse_pipeline(fallback));
    for (auto& s : c.pipelines)
        ps.push_back(parse_pipeline(s));
    return ps;
}

ordered base(const ExperimentConfig& c)
{
    ordered j;
    j["config"] = ordered::parse(config_to_json(c, -1));
    return j;
}

void write_file(const std::string& path, const std::string& body)
{
    std::ofstream f(resolve_output_path(path), std::ios::binary);
    if (!f)
        throw ConfigError("cannot write " + path);
    f << body;
}

std::string run_simulate(const ExperimentConfig& c, std::ostream& con)
{
    GeneratorSpec gen = parse_generator(c.generator);
    StopSpec stop = stop_of(c);
    ordered j = base(c);
    j["results"] = ordered::array();
    std::ostringstream samples;
    samples << "pipeline,run,value\n";
    for (auto& p : pipelines_of(c, "lift(mix, conf:lambda=1)")) {
        McReport r = stopped_mean(p, gen, stop, mc_of(c));
        ordered e;
        e["pipeline"] = p.canonical();
        e["is_eprocess"] = p.isEProcess();
        e["data_filtration_valid"] = p.dataFiltrationValid();
        e["runs"] = r.runs;
        e["mean"] = r.mean;
        e["se"] = r.se;
        e["truncated"] = r.truncated;
        if (!r.quantiles.empty())
            e["quantiles"] = r.quantiles;
        if (!c.samplesPath.empty()) {
            e["samplesPath"] = c.samplesPath;
            for (size_t i = 0; i < r.samples.size(); ++i)
                samples << '"' << p.canonical() << "\"," << i << ',' << fmt_double(r.samples[i]) << '\n';
        }
        j["results"].push_back(e);
        con << p.canonical() << ": stopped mean " << pm(r.mean, r.se) << " (runs " << r.runs << ", truncated "
            << r.truncated << ")" << (p.isEProcess() ? "" : " [not an e-process]") << '\n';
    }
    if (!c.samplesPath.empty())
        write_file(c.samplesPath, samples.str());
    return j.dump(2) + "\n";
}

Family family_of(const std::string& s)
{
    if (s == "switch")
        return Family::PeriodicSwitch;
    if (s == "markov")
        return Family::Markov2;
    throw ConfigError("unknown family '" + s + "' (switch|markov)");
}

std::string run_power(const ExperimentConfig& c, std::ostream& con)
{
    PowerConfig pc;
    pc.family = family_of(c.family);
    pc.mu = c.mu;
    pc.period = c.period;
    pc.deltas = c.deltas;
    pc.alpha = c.alpha;
    pc.T = c.T;
    pc.runs = c.runs;
    pc.seed = c.seed.value_or(0);
    pc.workers = c.workers;
    pc.checkpoints = c.checkpoints;
    ordered j = base(c);
    j["results"] = ordered::array();
    for (auto& p : pipelines_of(c, "combine(0.5*ui-exch, 0.5*lift(zero:1, conf:jumper,eps=0.01))")) {
        PowerReport r = power_study(p, pc);
        ordered e;
        e["pipeline"] = r.pipeline;
        e["is_eprocess"] = r.isEProcess;
        e["rows"] = ordered::array();
        con << r.pipeline << (r.isEProcess ? "" : " [not an e-process]") << '\n';
        con << "  delta  rate   se     mean_tau\n";
        for (auto& row : r.rows) {
            ordered o;
            o["delta"] = row.delta;
            o["rejection_rate"] = row.rejectionRate;
            o["rate_se"] = row.rateSe;
            o["mean_rejection_time"] = row.meanRejectionTime;
            ordered ep = ordered::array();
            for (auto& [t, v] : row.ePower)
                ep.push_back({{"t", t}, {"mean_log_e", v}});
            o["e_power"] = ep;
            e["rows"].push_back(o);
            char buf[96];
            std::snprintf(buf, sizeof buf, "  %-6g %-6.3f %-6.3f %.1f\n", row.delta, row.rejectionRate, row.rateSe,
                row.meanRejectionTime);
            con << buf;
        }
        j["results"].push_back(e);
    }
    return j.dump(2) + "\n";
}

std::string run_trajectory(const ExperimentConfig& c, std::ostream& con)
{
    GeneratorSpec gen = parse_generator(c.generator);
    std::vector<std::int64_t> cps = c.checkpoints;
    if (cps.empty())
        cps = {c.T};
    auto ps = pipelines_of(c, "lift(mix, conf:lambda=1)");
    if (c.format == "csv") {
        std::ostringstream os;
        os << "pipeline,t,mean,se,mean_log,mean_max_log\n";
        for (auto& p : ps)
            for (auto& r : mean_trajectory(p, gen, c.T, mc_of(c), cps)) {
                os << '"' << p.canonical() << "\"," << r.t << ',' << fmt_double(r.mean) << ',' << fmt_double(r.se)
                   << ',' << fmt_double(r.meanLog) << ',' << fmt_double(r.meanMaxLog) << '\n';
                con << p.canonical() << " t=" << r.t << ": " << pm(r.mean, r.se) << '\n';
            }
        return os.str();
    }
    ordered j = base(c);
    j["results"] = ordered::array();
    for (auto& p : ps) {
        ordered e;
        e["pipeline"] = p.canonical();
        e["is_eprocess"] = p.isEProcess();
        e["rows"] = ordered::array();
        for (auto& r : mean_trajectory(p, gen, c.T, mc_of(c), cps)) {
            e["rows"].push_back(
                {{"t", r.t}, {"mean", r.mean}, {"se", r.se}, {"mean_log", r.meanLog}, {"mean_max_log", r.meanMaxLog}});
            con << p.canonical() << " t=" << r.t << ": " << pm(r.mean, r.se) << '\n';
        }
        j["results"].push_back(e);
    }
    return j.dump(2) + "\n";
}

std::string run_finance_cmd(const ExperimentConfig& c, std::ostream& con)
{
    if (c.csv.empty())
        throw ConfigError("finance needs --csv");
    PriceSeries prices = ingest_csv(c.csv, c.dateColumn, c.closeColumn);
    FinanceConfig fc;
    fc.calibStart = c.calibStart;
    fc.calibEnd = c.calibEnd;
    fc.q = c.q;
    fc.seed = c.seed.value_or(0);
    fc.adjuster = parse_adjuster(c.adjuster);
    FinanceResult r = run_finance(prices, fc);
    for (auto& w : r.warnings)
        con << "warning: " << w << '\n';
    con << "threshold " << fmt_double(r.threshold) << " from " << r.calibrationDays << " calibration days; "
        << r.rows.size() << " evaluation days\n";
    if (!r.rows.empty()) {
        auto& l = r.rows.back();
        con << "final " << l.date << ": e_ui " << fmt_double(l.eUi) << ", e_conf_lifted " << fmt_double(l.eConfLifted)
            << ", e_combined " << fmt_double(l.eCombined) << '\n';
    }
    if (c.format == "json") {
        ordered j = base(c);
        j["threshold"] = r.threshold;
        j["calibration_days"] = r.calibrationDays;
        j["warnings"] = r.warnings;
        j["rows"] = ordered::array();
        for (auto& x : r.rows)
            j["rows"].push_back({{"date", x.date}, {"x", x.x}, {"e_ui", x.eUi}, {"e_conf_lifted", x.eConfLifted},
                {"e_combined", x.eCombined}, {"log_e_ui", x.logUi}, {"log_e_conf_lifted", x.logConfLifted},
                {"log_e_combined", x.logCombined}});
        return j.dump(2) + "\n";
    }
    std::ostringstream os;
    os << "date,x,e_ui,e_conf_lifted,e_combined,log_e_ui,log_e_conf_lifted,log_e_combined\n";
    for (auto& x : r.rows)
        os << x.date << ',' << x.x << ',' << fmt_double(x.eUi) << ',' << fmt_double(x.eConfLifted) << ','
           << fmt_double(x.eCombined) << ',' << fmt_double(x.logUi) << ',' << fmt_double(x.logConfLifted) << ','
           << fmt_double(x.logCombined) << '\n';
    return os.str();
}

const char* measure_flag(const char* name)
{
    std::string n = name;
    if (n == "e_bar" || n == "e_tilde")
        return "eprocess";
    if (n == "p_tilde")
        return "pprocess";
    return "not_an_eprocess";
}

std::string run_forecast(const ExperimentConfig& c, std::ostream& con)
{
    auto records = c.records.empty() ? synthetic_brier_drift(c.T, c.gap, c.seed.value_or(0))
                                     : read_records_csv(c.records);
    ForecastCombiner comb = parse_combiner(c.combiner);
    ForecastTable tab =
        compare_forecasters(records, c.h, parse_adjuster(c.adjuster), parse_calibrator(c.calibrator), c.lambda);
    con << "combiner " << to_string(comb) << (combiner_is_eprocess(comb) ? "" : " [not an e-process]") << ", "
        << tab.rows.size() << " records, h=" << c.h;
    if (!tab.rows.empty())
        con << ", final value " << fmt_double(combiner_value(tab.rows.back(), comb));
    con << '\n';

    static const char* names[] = {"e_bar", "p_tilde", "m_tilde", "e_tilde", "m_bar"};
    if (c.format == "json") {
        ordered j = base(c);
        j["scenario"] = c.records.empty() ? "brier-drift-v1" : c.records;
        j["combiner"] = to_string(comb);
        ordered flags;
        for (auto n : names)
            flags[n] = measure_flag(n);
        j["flags"] = flags;
        j["rows"] = ordered::array();
        for (auto& r : tab.rows)
            j["rows"].push_back({{"t", r.t}, {"d", r.d}, {"e_bar", r.eBar}, {"p_tilde", r.pTilde},
                {"m_tilde", r.mTilde}, {"e_tilde", r.eTilde}, {"m_bar", r.mBar},
                {"selected", combiner_value(r, comb)}});
        return j.dump(2) + "\n";
    }
    // flags travel in the header: name:flag
    std::ostringstream os;
    os << "t,d";
    for (auto n : names)
        os << ',' << n << ':' << measure_flag(n);
    os << ",selected:" << to_string(comb) << '\n';
    for (auto& r : tab.rows)
        os << r.t << ',' << fmt_double(r.d) << ',' << fmt_double(r.eBar) << ',' << fmt_double(r.pTilde) << ','
           << fmt_double(r.mTilde) << ',' << fmt_double(r.eTilde) << ',' << fmt_double(r.mBar) << ','
           << fmt_double(combiner_value(r, comb)) << '\n';
    return os.str();
}

std::string run_randomized(const ExperimentConfig& c, std::ostream& con)
{
    GeneratorSpec gen = parse_generator(c.generator);
    StopSpec stop = stop_of(c);
    AdjusterSpec a = parse_adjuster(c.adjuster);
    ordered j = base(c);
    j["results"] = ordered::array();
    for (auto& p : pipelines_of(c, "conf:lambda=1")) {
        RateEstimate r;
        if (c.procedure == "ltr")
            r = ltr_experiment(p, a, gen, stop, c.alpha, mc_of(c));
        else if (c.procedure == "ville")
            r = ville_experiment(p, a, gen, stop, c.alpha, mc_of(c));
        else if (c.procedure == "rtl")
            r = rtl_violation_experiment(p, gen, stop, c.alpha, mc_of(c));
        else
            throw ConfigError("unknown procedure '" + c.procedure + "' (ltr|ville|rtl)");
        ordered e;
        e["pipeline"] = p.canonical();
        e["procedure"] = c.procedure;
        e["runs"] = r.runs;
        e["rate"] = r.rate;
        e["se"] = r.se;
        e["truncated"] = r.truncated;
        if (c.procedure == "rtl")
            e["bound"] = r.bound;
        if (c.procedure == "ville")
            e["threshold_rate"] = r.thresholdRate;
        j["results"].push_back(e);
        con << p.canonical() << " " << c.procedure << ": rate " << pm(r.rate, r.se) << " at alpha "
            << fmt_double(c.alpha);
        if (c.procedure == "rtl")
            con << " (bound " << fmt_double(r.bound) << ")";
        con << '\n';
    }
    return j.dump(2) + "\n";
}

std::string run_verify(const ExperimentConfig& c, std::ostream& con)
{
    ordered j = base(c);
    j["adjusters"] = ordered::array();
    bool all = true;
    con << "spec            integral             error      admissible\n";
    for (auto& a : shipped_adjusters()) {
        Admissibility r = check_adjuster_admissibility(a);
        all = all && r.admissible;
        j["adjusters"].push_back({{"spec", to_string(a)}, {"integral", r.integral},
            {"error_estimate", r.errorEstimate}, {"converged", r.converged}, {"admissible", r.admissible}});
        char buf[128];
        std::snprintf(buf, sizeof buf, "%-15s %.15f %.2e   %s\n", to_string(a).c_str(), r.integral, r.errorEstimate,
            r.admissible ? "yes" : "NO");
        con << buf;
    }
    double x = mix_kv_crossover();
    j["mix_kv_crossover"] = x;
    j["all_admissible"] = all;
    con << "mix dominates kv from e = " << fmt_double(x) << '\n';
    return j.dump(2) + "\n";
}

} // namespace

std::string resolve_output_path(const std::string& path)
{
    const char* dir = std::getenv("SAVI_OUT_DIR");
    if (!dir || !*dir || path.empty() || std::filesystem::path(path).is_absolute())
        return path;
    return (std::filesystem::path(dir) / path).string();
}

std::string experiment_report(const ExperimentConfig& cfg, std::ostream& console)
{
    validate(cfg);
    const auto& s = cfg.subcommand;
    if (s == "simulate")
        return run_simulate(cfg, console);
    if (s == "power")
        return run_power(cfg, console);
    if (s == "trajectory")
        return run_trajectory(cfg, console);
    if (s == "finance")
        return run_finance_cmd(cfg, console);
    if (s == "forecast")
        return run_forecast(cfg, console);
    if (s == "randomized")
        return run_randomized(cfg, console);
    return run_verify(cfg, console);
}

int run_experiment(const ExperimentConfig& cfg, std::ostream& console)
{
    std::string body = experiment_report(cfg, console);
    if (cfg.out.empty())
        console << body;
    else
        write_file(cfg.out, body);
    if (cfg.subcommand == "verify-adjusters")
        return json::parse(body).at("all_admissible").get<bool>() ? 0 : 1;
    return 0;
}

} // namespace savi
