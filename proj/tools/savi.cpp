#include <functional>
#include <map>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "savi/adjust.hpp"
#include "savi/config.hpp"
#include "savi/experiment.hpp"
#include "savi/pipeline.hpp"
#include "savi/sim.hpp"
#include "savi/streams.hpp"

using namespace savi;

namespace {

std::string spec_help()
{
    std::ostringstream os;
    os << "\nStreams:\n";
    for (auto& s : stream_spec_help())
        os << "  " << s << '\n';
    os << "Adjusters:\n";
    for (auto& a : shipped_adjusters())
        os << "  " << to_string(a) << '\n';
    os << "  power:K  zero:K  spine:K (control only)  [,scale=S]\n";
    os << "Calibrators:\n  mix  power:K\n";
    os << "Pipelines:\n";
    for (auto& s : pipeline_grammar_help())
        os << "  " << s << '\n';
    os << "Generators:\n";
    for (auto& s : generator_spec_help())
        os << "  " << s << '\n';
    os << "Stop rules:\n";
    for (auto& s : stop_spec_help())
        os << "  " << s << '\n';
    os << "Forecast combiners:\n  adjusted  harmonic-p  scaled-mean  calibrated-e  lagged-mean\n";
    os << "Output paths that are relative are placed under $SAVI_OUT_DIR when set.\n";
    return os.str();
}

struct Binder {
    ExperimentConfig& cli;
    std::vector<std::pair<CLI::Option*, std::function<void(ExperimentConfig&)>>> copiers;

    template <class T>
    CLI::Option* opt(CLI::App* sub, const std::string& flag, T ExperimentConfig::*m, const std::string& desc)
    {
        auto* o = sub->add_option(flag, cli.*m, desc)->capture_default_str();
        copiers.emplace_back(o, [this, m](ExperimentConfig& d) { d.*m = cli.*m; });
        return o;
    }
};

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"savi: anytime-valid sequential evidence experiments"};
    app.footer(spec_help());
    app.require_subcommand(1);

    ExperimentConfig cli;
    Binder b{cli, {}};
    std::uint64_t seed = 0;
    std::int64_t horizon = 0;
    std::string configPath;

    struct SubOpts {
        CLI::Option* seed;
        CLI::Option* horizon;
        CLI::Option* config;
    };
    std::map<std::string, SubOpts> subOpts;

    auto common = [&](CLI::App* s) {
        SubOpts so;
        so.seed = s->add_option("--seed", seed, "master seed (required except for verify-adjusters)");
        so.config = s->add_option("--config", configPath, "JSON config; flags given on the command line override it");
        b.opt(s, "--workers", &ExperimentConfig::workers, "worker threads");
        b.opt(s, "--out", &ExperimentConfig::out, "report path (stdout when omitted)");
        b.opt(s, "--format", &ExperimentConfig::format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
        so.horizon = nullptr;
        subOpts[s->get_name()] = so;
    };
    auto mc = [&](CLI::App* s) {
        b.opt(s, "--pipeline", &ExperimentConfig::pipelines, "pipeline expression (repeatable)");
        b.opt(s, "--gen", &ExperimentConfig::generator, "data generator");
        b.opt(s, "--runs", &ExperimentConfig::runs, "Monte Carlo runs");
    };
    auto stopOpts = [&](CLI::App* s) {
        b.opt(s, "--stop", &ExperimentConfig::stop, "stopping rule");
        subOpts[s->get_name()].horizon = s->add_option("--horizon", horizon, "truncation horizon for the stop rule");
    };

    auto* sim = app.add_subcommand("simulate", "stopped means of pipelines under a generator and stop rule");
    common(sim);
    mc(sim);
    stopOpts(sim);
    b.opt(sim, "--samples", &ExperimentConfig::samplesPath, "per-run CSV of stopped values");

    auto* pow = app.add_subcommand("power", "rejection rate and e-power over a delta grid");
    common(pow);
    b.opt(pow, "--pipeline", &ExperimentConfig::pipelines, "pipeline expression (repeatable)");
    b.opt(pow, "--runs", &ExperimentConfig::runs, "runs per delta");
    b.opt(pow, "--family", &ExperimentConfig::family, "switch or markov");
    b.opt(pow, "--mu", &ExperimentConfig::mu, "base rate");
    b.opt(pow, "--period", &ExperimentConfig::period, "switch period");
    b.opt(pow, "--deltas", &ExperimentConfig::deltas, "delta grid")->delimiter(',');
    b.opt(pow, "--alpha", &ExperimentConfig::alpha, "level");
    b.opt(pow, "-T", &ExperimentConfig::T, "horizon");
    b.opt(pow, "--checkpoints", &ExperimentConfig::checkpoints, "e-power times")->delimiter(',');

    auto* traj = app.add_subcommand("trajectory", "mean evidence at checkpoints");
    common(traj);
    mc(traj);
    b.opt(traj, "-T", &ExperimentConfig::T, "horizon");
    b.opt(traj, "--checkpoints", &ExperimentConfig::checkpoints, "times to report")->delimiter(',');

    auto* fin = app.add_subcommand("finance", "high-volatility evidence from a price CSV");
    common(fin);
    b.opt(fin, "--csv", &ExperimentConfig::csv, "price CSV");
    b.opt(fin, "--date-column", &ExperimentConfig::dateColumn, "date column name");
    b.opt(fin, "--close-column", &ExperimentConfig::closeColumn, "close column name");
    b.opt(fin, "--calib-start", &ExperimentConfig::calibStart, "calibration start YYYY-MM-DD");
    b.opt(fin, "--calib-end", &ExperimentConfig::calibEnd, "calibration end YYYY-MM-DD");
    b.opt(fin, "--q", &ExperimentConfig::q, "threshold quantile");
    b.opt(fin, "--adjuster", &ExperimentConfig::adjuster, "adjuster for the conformal stream");

    auto* fc = app.add_subcommand("forecast", "h-step forecast comparison");
    fc->set_help_flag("--help", "Print this help message and exit");
    common(fc);
    b.opt(fc, "--h", &ExperimentConfig::h, "lag");
    b.opt(fc, "--records", &ExperimentConfig::records, "records CSV (t,p,q,y); synthetic brier-drift-v1 when omitted");
    b.opt(fc, "--combiner", &ExperimentConfig::combiner, "combiner")
        ->check(CLI::IsMember({"adjusted", "harmonic-p", "scaled-mean", "calibrated-e", "lagged-mean"}));
    b.opt(fc, "--adjuster", &ExperimentConfig::adjuster, "adjuster for the adjusted mean");
    b.opt(fc, "--calibrator", &ExperimentConfig::calibrator, "calibrator for the harmonic p-process");
    b.opt(fc, "--lambda", &ExperimentConfig::lambda, "betting fraction");
    b.opt(fc, "-T", &ExperimentConfig::T, "synthetic length");
    b.opt(fc, "--gap", &ExperimentConfig::gap, "synthetic final Brier gap");

    auto* rnd = app.add_subcommand("randomized", "randomized stopping procedures");
    common(rnd);
    mc(rnd);
    stopOpts(rnd);
    b.opt(rnd, "--procedure", &ExperimentConfig::procedure, "ltr, ville or rtl")
        ->check(CLI::IsMember({"ltr", "ville", "rtl"}));
    b.opt(rnd, "--alpha", &ExperimentConfig::alpha, "level");
    b.opt(rnd, "--adjuster", &ExperimentConfig::adjuster, "adjuster for ltr and ville");

    auto* ver = app.add_subcommand("verify-adjusters", "admissibility integrals of the shipped adjusters");
    common(ver);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        CLI::App* used = app.get_subcommands().front();
        const std::string name = used->get_name();
        const SubOpts& so = subOpts[name];
        ExperimentConfig cfg;
        if (so.config->count()) {
            cfg = load_config(configPath);
            if (cfg.subcommand != name)
                throw ConfigError("config is for '" + cfg.subcommand + "', not '" + name + "'");
        }
        cfg.subcommand = name;
        for (auto& [o, copy] : b.copiers)
            if (o->count())
                copy(cfg);
        if (so.seed->count())
            cfg.seed = seed;
        if (so.horizon && so.horizon->count())
            cfg.horizon = horizon;
        return run_experiment(cfg, std::cout);
    } catch (const std::exception& e) {
        nlohmann::json err{{"error", e.what()}};
        if (auto* pe = dynamic_cast<const ParseError*>(&e))
            err["position"] = pe->position;
        std::cerr << err.dump() << '\n';
        return 2;
    }
}
