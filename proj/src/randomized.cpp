#include "savi/randomized.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace savi {

namespace {

RateEstimate rate_of(const std::vector<char>& hits, std::int64_t truncated)
{
    RateEstimate r;
    r.runs = static_cast<std::int64_t>(hits.size());
    double s = 0.0;
    for (char h : hits)
        s += h ? 1.0 : 0.0;
    double n = static_cast<double>(hits.size());
    r.rate = n > 0 ? s / n : 0.0;
    r.se = n > 1 ? std::sqrt(r.rate * (1.0 - r.rate) / (n - 1.0)) : 0.0;
    r.truncated = truncated;
    return r;
}

void check_alpha(double alpha)
{
    if (!(alpha > 0.0 && alpha < 1.0))
        throw ConfigError("alpha must lie in (0,1)");
}

} // namespace

double uniform_u(Rng& r)
{
    return r.uniform();
}

double ltr_pvalue(Evidence lifted, double u)
{
    if (!(u >= 0.0 && u <= 1.0))
        throw DomainError("u must lie in [0,1]");
    if (lifted.logValue == -std::numeric_limits<double>::infinity())
        return 1.0;
    return std::min(1.0, u * std::exp(-lifted.logValue));
}

RandomizedDecision randomized_ville_run(EvidenceStream& s, const AdjusterSpec& a, StopRule& rule, Generator& g,
    double alpha, Rng& data, Rng& uRng, const UDistribution& draw)
{
    check_alpha(alpha);
    const double logLevel = -std::log(alpha);
    RandomizedDecision d;
    Evidence mx = Evidence::one();
    for (;;) {
        double x = g.next(data);
        Evidence e = s.step(x);
        mx = max(mx, e);
        bool stop = rule.observe(x, e);
        if (e.logValue >= logLevel) {
            d.stoppedAt = rule.time();
            d.viaThreshold = true;
            d.finalEvidence = e;
            d.liftedAtStop = adjuster_eval(a, mx);
            d.reject = true;
            return d;
        }
        if (stop) {
            d.stoppedAt = rule.time();
            d.truncated = rule.truncated();
            d.finalEvidence = e;
            d.liftedAtStop = adjuster_eval(a, mx);
            // drawn only now, at the stopping time
            d.u = draw(uRng);
            d.reject = d.liftedAtStop.logValue >= std::log(d.u) + logLevel;
            return d;
        }
    }
}

double rtl_bound(double alpha)
{
    check_alpha(alpha);
    return alpha * (1.0 + std::log(1.0 / alpha));
}

RateEstimate ltr_experiment(const Pipeline& p, const AdjusterSpec& a, const GeneratorSpec& gen, const StopSpec& stop,
    double alpha, const McConfig& cfg)
{
    check_alpha(alpha);
    std::vector<char> hit(static_cast<size_t>(cfg.runs));
    std::vector<char> trunc(hit.size());
    parallel_for_runs(cfg.runs, cfg.workers, [&](std::int64_t i) {
        auto u = static_cast<std::uint64_t>(i);
        auto s = p.instantiate();
        s->reset(split_seed(cfg.seed, StreamId::ConformalU, u));
        Generator g(gen);
        StopRule rule(stop);
        Rng data(split_seed(cfg.seed, StreamId::Data, u));
        Rng ur(split_seed(cfg.seed, StreamId::StopU, u));
        StoppedRun r = run_until_stop(*s, g, rule, data);
        double pv = ltr_pvalue(adjuster_eval(a, s->runningMax()), ur.uniform());
        hit[static_cast<size_t>(i)] = pv <= alpha;
        trunc[static_cast<size_t>(i)] = r.truncated;
    });
    return rate_of(hit, std::count(trunc.begin(), trunc.end(), 1));
}

RateEstimate ville_experiment(const Pipeline& p, const AdjusterSpec& a, const GeneratorSpec& gen,
    const StopSpec& stop, double alpha, const McConfig& cfg)
{
    std::vector<char> hit(static_cast<size_t>(cfg.runs)), thr(hit.size()), trunc(hit.size());
    parallel_for_runs(cfg.runs, cfg.workers, [&](std::int64_t i) {
        auto u = static_cast<std::uint64_t>(i);
        auto s = p.instantiate();
        s->reset(split_seed(cfg.seed, StreamId::ConformalU, u));
        Generator g(gen);
        StopRule rule(stop);
        Rng data(split_seed(cfg.seed, StreamId::Data, u));
        Rng ur(split_seed(cfg.seed, StreamId::StopU, u));
        auto d = randomized_ville_run(*s, a, rule, g, alpha, data, ur);
        hit[static_cast<size_t>(i)] = d.reject;
        thr[static_cast<size_t>(i)] = d.viaThreshold;
        trunc[static_cast<size_t>(i)] = d.truncated;
    });
    RateEstimate r = rate_of(hit, std::count(trunc.begin(), trunc.end(), 1));
    r.thresholdRate = static_cast<double>(std::count(thr.begin(), thr.end(), 1)) / static_cast<double>(cfg.runs);
    return r;
}

RateEstimate rtl_violation_experiment(const Pipeline& p, const GeneratorSpec& gen, const StopSpec& stop,
    double alpha, const McConfig& cfg)
{
    check_alpha(alpha);
    const double logLevel = -std::log(alpha);
    std::vector<char> hit(static_cast<size_t>(cfg.runs)), trunc(hit.size());
    parallel_for_runs(cfg.runs, cfg.workers, [&](std::int64_t i) {
        auto u = static_cast<std::uint64_t>(i);
        auto s = p.instantiate();
        s->reset(split_seed(cfg.seed, StreamId::ConformalU, u));
        Generator g(gen);
        StopRule rule(stop);
        Rng data(split_seed(cfg.seed, StreamId::Data, u));
        Rng ur(split_seed(cfg.seed, StreamId::StopU, u));
        StoppedRun r = run_until_stop(*s, g, rule, data);
        double U = ur.uniform();
        hit[static_cast<size_t>(i)] = r.value.logValue >= std::log(U) + logLevel;
        trunc[static_cast<size_t>(i)] = r.truncated;
    });
    RateEstimate est = rate_of(hit, std::count(trunc.begin(), trunc.end(), 1));
    est.bound = rtl_bound(alpha);
    return est;
}

} // namespace savi
