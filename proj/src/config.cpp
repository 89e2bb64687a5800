#include "savi/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "savi/core.hpp"

namespace savi {

using nlohmann::json;

const std::vector<std::string>& subcommands()
{
    static const std::vector<std::string> s{
        "simulate", "power", "trajectory", "finance", "forecast", "randomized", "verify-adjusters"};
    return s;
}

namespace {

json to_j(const ExperimentConfig& c)
{
    json j;
    j["subcommand"] = c.subcommand;
    j["pipelines"] = c.pipelines;
    j["generator"] = c.generator;
    j["stop"] = c.stop;
    j["runs"] = c.runs;
    j["seed"] = c.seed ? json(*c.seed) : json(nullptr);
    j["horizon"] = c.horizon ? json(*c.horizon) : json(nullptr);
    j["workers"] = c.workers;
    j["out"] = c.out;
    j["format"] = c.format;
    j["samples_path"] = c.samplesPath;
    j["family"] = c.family;
    j["mu"] = c.mu;
    j["period"] = c.period;
    j["deltas"] = c.deltas;
    j["alpha"] = c.alpha;
    j["T"] = c.T;
    j["checkpoints"] = c.checkpoints;
    j["procedure"] = c.procedure;
    j["adjuster"] = c.adjuster;
    j["csv"] = c.csv;
    j["date_column"] = c.dateColumn;
    j["close_column"] = c.closeColumn;
    j["calib_start"] = c.calibStart;
    j["calib_end"] = c.calibEnd;
    j["q"] = c.q;
    j["h"] = c.h;
    j["records"] = c.records;
    j["combiner"] = c.combiner;
    j["calibrator"] = c.calibrator;
    j["lambda"] = c.lambda;
    j["gap"] = c.gap;
    return j;
}

template <class T>
void get(const json& j, const char* key, T& dst)
{
    if (!j.contains(key))
        return;
    try {
        dst = j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config key '") + key + "': " + e.what());
    }
}

template <class T>
void get_opt(const json& j, const char* key, std::optional<T>& dst)
{
    if (!j.contains(key))
        return;
    if (j.at(key).is_null()) {
        dst.reset();
        return;
    }
    T v{};
    get(j, key, v);
    dst = v;
}

} // namespace

std::string config_to_json(const ExperimentConfig& c, int indent)
{
    return to_j(c).dump(indent);
}

ExperimentConfig config_from_json(const std::string& text)
{
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object())
        throw ConfigError("config must be a JSON object");
    json known = to_j(ExperimentConfig{});
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!known.contains(it.key()))
            throw ConfigError("unknown config key '" + it.key() + "'");

    ExperimentConfig c;
    get(j, "subcommand", c.subcommand);
    get(j, "pipelines", c.pipelines);
    get(j, "generator", c.generator);
    get(j, "stop", c.stop);
    get(j, "runs", c.runs);
    get_opt(j, "seed", c.seed);
    get_opt(j, "horizon", c.horizon);
    get(j, "workers", c.workers);
    get(j, "out", c.out);
    get(j, "format", c.format);
    get(j, "samples_path", c.samplesPath);
    get(j, "family", c.family);
    get(j, "mu", c.mu);
    get(j, "period", c.period);
    get(j, "deltas", c.deltas);
    get(j, "alpha", c.alpha);
    get(j, "T", c.T);
    get(j, "checkpoints", c.checkpoints);
    get(j, "procedure", c.procedure);
    get(j, "adjuster", c.adjuster);
    get(j, "csv", c.csv);
    get(j, "date_column", c.dateColumn);
    get(j, "close_column", c.closeColumn);
    get(j, "calib_start", c.calibStart);
    get(j, "calib_end", c.calibEnd);
    get(j, "q", c.q);
    get(j, "h", c.h);
    get(j, "records", c.records);
    get(j, "combiner", c.combiner);
    get(j, "calibrator", c.calibrator);
    get(j, "lambda", c.lambda);
    get(j, "gap", c.gap);
    return c;
}

ExperimentConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open config " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return config_from_json(ss.str());
}

void validate(const ExperimentConfig& c)
{
    auto& subs = subcommands();
    if (std::find(subs.begin(), subs.end(), c.subcommand) == subs.end())
        throw ConfigError("unknown subcommand '" + c.subcommand + "'");
    if (c.subcommand != "verify-adjusters" && !c.seed)
        throw ConfigError("--seed is required for " + c.subcommand);
    if (c.runs < 1)
        throw ConfigError("runs must be >= 1");
    if (c.workers < 1)
        throw ConfigError("workers must be >= 1");
    if (c.format != "json" && c.format != "csv")
        throw ConfigError("format must be json or csv");
    if (c.horizon && *c.horizon < 1)
        throw ConfigError("horizon must be >= 1");
    if (!(c.alpha > 0.0 && c.alpha < 1.0))
        throw ConfigError("alpha must lie in (0,1)");
}

} // namespace savi
