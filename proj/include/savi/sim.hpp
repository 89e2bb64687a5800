#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "savi/core.hpp"
#include "savi/pipeline.hpp"
#include "savi/rng.hpp"

namespace savi {

// ---- generators ----

enum class GenKind { IidBernoulli, Markov2, Piecewise, PeriodicSwitch, Normal };

struct GeneratorSpec {
    GenKind kind = GenKind::IidBernoulli;
    double p = 0.5;                                      // IidBernoulli
    double p01 = 0.5, p11 = 0.5;                         // Markov2
    std::optional<int> initial;                          // Markov2; uniform when unset
    std::vector<std::pair<std::int64_t, double>> schedule; // Piecewise (length, p); last p persists
    double mu = 0.5, delta = 0.0;                        // PeriodicSwitch
    std::int64_t period = 100;
    double mean = 0.0, sd = 1.0;                         // Normal

    static GeneratorSpec bernoulli(double p);
    static GeneratorSpec markov(double p01, double p11);
    static GeneratorSpec periodicSwitch(double mu, double delta, std::int64_t period);
    static GeneratorSpec normal(double mean, double sd);
};

void validate(const GeneratorSpec& g);
// ber:0.3, markov:p01=0.5,p11=0.4[,init=0], piecewise:1000x0.5/1000x0.2,
// switch:mu=0.3,delta=0.2,period=100, normal:mean=0,sd=1
GeneratorSpec parse_generator(const std::string& s);
std::string to_string(const GeneratorSpec& g);

class Generator {
public:
    explicit Generator(GeneratorSpec spec);
    double next(Rng& rng);
    void reset();
    std::int64_t time() const { return t_; }

private:
    GeneratorSpec spec_;
    std::int64_t t_ = 0;
    int prev_ = -1;
    size_t segment_ = 0;
    std::int64_t segUsed_ = 0;
};

std::vector<double> generate(const GeneratorSpec& spec, std::int64_t length, Rng& rng);

// ---- stopping rules ----

enum class StopKind { FixedTime, ConsecutiveRun, CountThreshold, EvidenceThreshold, GaussWindow };

struct StopSpec {
    StopKind kind = StopKind::FixedTime;
    std::int64_t T = 100;          // FixedTime
    int k = 5;                     // ConsecutiveRun length / CountThreshold count
    bool targets[2] = {true, false}; // ConsecutiveRun / CountThreshold symbols
    double level = 20.0;           // EvidenceThreshold
    double a = 0.44, b = 1.70;     // GaussWindow
    std::int64_t horizon = 1'000'000;

    static StopSpec fixed(std::int64_t T);
    static StopSpec run(int k, int target);
    static StopSpec count(int k, int target);
    static StopSpec evidence(double level);
    static StopSpec gaussWindow(double a, double b);
};

void validate(const StopSpec& s);
// fixed:100, run:k=5,target=0, count:k=3,target=1, evidence:20,
// gauss-window:a=0.44,b=1.7; any of them accepts horizon=N
StopSpec parse_stop(const std::string& s);
std::string to_string(const StopSpec& s);

// Decides from the observed prefix (and, for EvidenceThreshold, the
// monitored value) whether to stop after the current observation.
class StopRule {
public:
    explicit StopRule(StopSpec spec);
    // returns true when the rule fires or the horizon is reached
    bool observe(double x, Evidence current);
    bool truncated() const { return truncated_; }
    void reset();
    std::int64_t time() const { return t_; }

private:
    StopSpec spec_;
    std::int64_t t_ = 0;
    std::int64_t runLen_ = 0;
    std::int64_t count_ = 0;
    bool truncated_ = false;
};

// ---- Monte Carlo engine ----

struct McConfig {
    std::int64_t runs = 10000;
    std::uint64_t seed = 0;
    int workers = 1;
    bool keepSamples = false;
};

struct McReport {
    std::int64_t runs = 0;
    double mean = 0.0;
    double se = 0.0;
    std::int64_t truncated = 0;
    std::vector<double> quantiles; // 5%, 25%, 50%, 75%, 95% when samples are kept
    std::vector<double> samples;
};

// Runs f(i) for i in [0, runs) on `workers` threads. Results must be written
// into per-index slots; reductions happen afterwards in index order.
void parallel_for_runs(std::int64_t runs, int workers, const std::function<void(std::int64_t)>& f);

McReport summarize(const std::vector<double>& values, std::int64_t truncated, bool keepSamples);

struct StoppedRun {
    Evidence value;
    std::int64_t tau = 0;
    bool truncated = false;
};

StoppedRun run_until_stop(EvidenceStream& s, Generator& g, StopRule& rule, Rng& data);

McReport stopped_mean(const Pipeline& p, const GeneratorSpec& gen, const StopSpec& stop, const McConfig& cfg);

// Per-run stopped values of several pipelines fed the same data (shared
// data and pipeline seeds per run); used for paired comparisons.
std::vector<std::vector<StoppedRun>> stopped_values(const std::vector<Pipeline>& ps, const GeneratorSpec& gen,
    const StopSpec& stop, const McConfig& cfg);

// ---- power and trajectories ----

enum class Family { PeriodicSwitch, Markov2 };

struct PowerConfig {
    Family family = Family::PeriodicSwitch;
    double mu = 0.3;
    std::int64_t period = 100;
    std::vector<double> deltas{0.0, 0.1, 0.2, 0.3, 0.4};
    double alpha = 0.1;
    std::int64_t T = 2000;
    std::int64_t runs = 100;
    std::uint64_t seed = 0;
    int workers = 1;
    std::vector<std::int64_t> checkpoints; // e-power sampling times
};

struct PowerRow {
    double delta = 0.0;
    double rejectionRate = 0.0;
    double rateSe = 0.0;
    double meanRejectionTime = 0.0;
    std::vector<std::pair<std::int64_t, double>> ePower; // (t, mean log e_t)
};

struct PowerReport {
    std::string pipeline;
    bool isEProcess = true;
    std::vector<PowerRow> rows;
};

GeneratorSpec family_member(Family f, double mu, double delta, std::int64_t period);
PowerReport power_study(const Pipeline& p, const PowerConfig& cfg);

struct TrajectoryRow {
    std::int64_t t = 0;
    double mean = 0.0;
    double se = 0.0;
    double meanLog = 0.0;
    double meanMaxLog = 0.0; // mean log running max
};

std::vector<TrajectoryRow> mean_trajectory(const Pipeline& p, const GeneratorSpec& gen, std::int64_t T,
    const McConfig& cfg, const std::vector<std::int64_t>& checkpoints);

std::vector<std::string> generator_spec_help();
std::vector<std::string> stop_spec_help();

} // namespace savi
