#include "savi/sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>

#include "savi/text.hpp"

namespace savi {

namespace {

void check_prob(double p, const char* what)
{
    if (!(p >= 0.0 && p <= 1.0))
        throw ConfigError(std::string(what) + " must lie in [0,1], got " + fmt_double(p));
}

double param_or(const SpecString& sp, const char* key, double dflt, bool bareFirst = false)
{
    if (const std::string* v = sp.find(key))
        return parse_double(*v, key);
    if (bareFirst && !sp.params.empty() && sp.params.front().second.empty())
        return parse_double(sp.params.front().first, key);
    return dflt;
}

void only_keys(const SpecString& sp, std::initializer_list<const char*> keys, bool allowBare)
{
    for (size_t i = 0; i < sp.params.size(); ++i) {
        auto& [k, v] = sp.params[i];
        if (v.empty() && allowBare && i == 0)
            continue;
        bool ok = false;
        for (auto key : keys)
            ok = ok || k == key;
        if (!ok)
            throw ConfigError("unknown parameter '" + k + "' for '" + sp.name + "'");
    }
}

std::string targets_str(const bool t[2])
{
    std::string s;
    if (t[0])
        s += "0";
    if (t[1])
        s += "1";
    return s;
}

void parse_targets(const std::string& v, bool t[2])
{
    t[0] = t[1] = false;
    for (char c : v) {
        if (c == '0')
            t[0] = true;
        else if (c == '1')
            t[1] = true;
        else
            throw ConfigError("target symbols must be 0 and/or 1, got '" + v + "'");
    }
    if (!t[0] && !t[1])
        throw ConfigError("target set is empty");
}

} // namespace

// ---- generators ----

GeneratorSpec GeneratorSpec::bernoulli(double p)
{
    GeneratorSpec g;
    g.kind = GenKind::IidBernoulli;
    g.p = p;
    validate(g);
    return g;
}

GeneratorSpec GeneratorSpec::markov(double p01, double p11)
{
    GeneratorSpec g;
    g.kind = GenKind::Markov2;
    g.p01 = p01;
    g.p11 = p11;
    validate(g);
    return g;
}

GeneratorSpec GeneratorSpec::periodicSwitch(double mu, double delta, std::int64_t period)
{
    GeneratorSpec g;
    g.kind = GenKind::PeriodicSwitch;
    g.mu = mu;
    g.delta = delta;
    g.period = period;
    validate(g);
    return g;
}

GeneratorSpec GeneratorSpec::normal(double mean, double sd)
{
    GeneratorSpec g;
    g.kind = GenKind::Normal;
    g.mean = mean;
    g.sd = sd;
    validate(g);
    return g;
}

void validate(const GeneratorSpec& g)
{
    switch (g.kind) {
    case GenKind::IidBernoulli:
        check_prob(g.p, "ber p");
        break;
    case GenKind::Markov2:
        check_prob(g.p01, "markov p01");
        check_prob(g.p11, "markov p11");
        if (g.initial && *g.initial != 0 && *g.initial != 1)
            throw ConfigError("markov init must be 0 or 1");
        break;
    case GenKind::Piecewise:
        if (g.schedule.empty())
            throw ConfigError("piecewise schedule is empty");
        for (auto& [len, p] : g.schedule) {
            if (len <= 0)
                throw ConfigError("piecewise lengths must be positive");
            check_prob(p, "piecewise p");
        }
        break;
    case GenKind::PeriodicSwitch:
        check_prob(g.mu, "switch mu");
        check_prob(g.mu + g.delta, "switch mu+delta");
        if (g.period <= 0)
            throw ConfigError("switch period must be positive");
        break;
    case GenKind::Normal:
        if (!std::isfinite(g.mean) || !(g.sd > 0.0))
            throw ConfigError("normal needs finite mean and sd > 0");
        break;
    }
}

GeneratorSpec parse_generator(const std::string& s)
{
    auto sp = parse_spec_string(s);
    GeneratorSpec g;
    if (sp.name == "ber") {
        only_keys(sp, {"p"}, true);
        g.kind = GenKind::IidBernoulli;
        g.p = param_or(sp, "p", std::numeric_limits<double>::quiet_NaN(), true);
    } else if (sp.name == "markov") {
        only_keys(sp, {"p01", "p11", "init"}, false);
        g.kind = GenKind::Markov2;
        g.p01 = param_or(sp, "p01", std::numeric_limits<double>::quiet_NaN());
        g.p11 = param_or(sp, "p11", std::numeric_limits<double>::quiet_NaN());
        if (const std::string* v = sp.find("init"))
            g.initial = static_cast<int>(parse_int(*v, "init"));
    } else if (sp.name == "piecewise") {
        if (sp.params.size() != 1 || !sp.params.front().second.empty())
            throw ConfigError("piecewise expects piecewise:LENxP/LENxP/...");
        g.kind = GenKind::Piecewise;
        for (auto& seg : split(sp.params.front().first, '/')) {
            auto x = seg.find('x');
            if (x == std::string::npos)
                throw ConfigError("piecewise segment '" + seg + "' should look like 1000x0.5");
            g.schedule.emplace_back(parse_int(seg.substr(0, x), "length"), parse_double(seg.substr(x + 1), "p"));
        }
    } else if (sp.name == "switch") {
        only_keys(sp, {"mu", "delta", "period"}, false);
        g.kind = GenKind::PeriodicSwitch;
        g.mu = param_or(sp, "mu", 0.5);
        g.delta = param_or(sp, "delta", 0.0);
        if (const std::string* v = sp.find("period"))
            g.period = parse_int(*v, "period");
    } else if (sp.name == "normal") {
        only_keys(sp, {"mean", "sd"}, false);
        g.kind = GenKind::Normal;
        g.mean = param_or(sp, "mean", 0.0);
        g.sd = param_or(sp, "sd", 1.0);
    } else {
        throw ConfigError("unknown generator '" + sp.name + "'");
    }
    validate(g);
    return g;
}

std::string to_string(const GeneratorSpec& g)
{
    switch (g.kind) {
    case GenKind::IidBernoulli:
        return "ber:" + fmt_double(g.p);
    case GenKind::Markov2: {
        std::string s = "markov:p01=" + fmt_double(g.p01) + ",p11=" + fmt_double(g.p11);
        if (g.initial)
            s += ",init=" + std::to_string(*g.initial);
        return s;
    }
    case GenKind::Piecewise: {
        std::string s = "piecewise:";
        for (size_t i = 0; i < g.schedule.size(); ++i) {
            if (i)
                s += "/";
            s += std::to_string(g.schedule[i].first) + "x" + fmt_double(g.schedule[i].second);
        }
        return s;
    }
    case GenKind::PeriodicSwitch:
        return "switch:mu=" + fmt_double(g.mu) + ",delta=" + fmt_double(g.delta) + ",period="
            + std::to_string(g.period);
    case GenKind::Normal:
        return "normal:mean=" + fmt_double(g.mean) + ",sd=" + fmt_double(g.sd);
    }
    return {};
}

Generator::Generator(GeneratorSpec spec) : spec_(std::move(spec))
{
    validate(spec_);
}

void Generator::reset()
{
    t_ = 0;
    prev_ = -1;
    segment_ = 0;
    segUsed_ = 0;
}

double Generator::next(Rng& rng)
{
    ++t_;
    switch (spec_.kind) {
    case GenKind::IidBernoulli:
        return rng.bernoulli(spec_.p);
    case GenKind::Markov2: {
        int x;
        if (prev_ < 0)
            x = spec_.initial ? *spec_.initial : rng.bernoulli(0.5);
        else
            x = rng.bernoulli(prev_ == 0 ? spec_.p01 : spec_.p11);
        prev_ = x;
        return x;
    }
    case GenKind::Piecewise: {
        if (segment_ + 1 < spec_.schedule.size() && segUsed_ >= spec_.schedule[segment_].first) {
            ++segment_;
            segUsed_ = 0;
        }
        ++segUsed_;
        return rng.bernoulli(spec_.schedule[segment_].second);
    }
    case GenKind::PeriodicSwitch: {
        bool alt = ((t_ - 1) / spec_.period) % 2 == 1;
        return rng.bernoulli(alt ? spec_.mu + spec_.delta : spec_.mu);
    }
    case GenKind::Normal:
        return spec_.mean + spec_.sd * rng.normal();
    }
    return 0.0;
}

std::vector<double> generate(const GeneratorSpec& spec, std::int64_t length, Rng& rng)
{
    if (length < 1)
        throw ConfigError("length must be >= 1");
    Generator g(spec);
    std::vector<double> out(static_cast<size_t>(length));
    for (auto& x : out)
        x = g.next(rng);
    return out;
}

// ---- stopping rules ----

StopSpec StopSpec::fixed(std::int64_t T)
{
    StopSpec s;
    s.kind = StopKind::FixedTime;
    s.T = T;
    validate(s);
    return s;
}

StopSpec StopSpec::run(int k, int target)
{
    StopSpec s;
    s.kind = StopKind::ConsecutiveRun;
    s.k = k;
    s.targets[0] = target == 0;
    s.targets[1] = target == 1;
    validate(s);
    return s;
}

StopSpec StopSpec::count(int k, int target)
{
    StopSpec s = run(k, target);
    s.kind = StopKind::CountThreshold;
    return s;
}

StopSpec StopSpec::evidence(double level)
{
    StopSpec s;
    s.kind = StopKind::EvidenceThreshold;
    s.level = level;
    validate(s);
    return s;
}

StopSpec StopSpec::gaussWindow(double a, double b)
{
    StopSpec s;
    s.kind = StopKind::GaussWindow;
    s.a = a;
    s.b = b;
    validate(s);
    return s;
}

void validate(const StopSpec& s)
{
    if (s.horizon < 1)
        throw ConfigError("horizon must be >= 1");
    switch (s.kind) {
    case StopKind::FixedTime:
        if (s.T < 1)
            throw ConfigError("fixed time must be >= 1");
        break;
    case StopKind::ConsecutiveRun:
    case StopKind::CountThreshold:
        if (s.k < 1)
            throw ConfigError("k must be >= 1");
        if (!s.targets[0] && !s.targets[1])
            throw ConfigError("target set is empty");
        break;
    case StopKind::EvidenceThreshold:
        if (!(s.level > 0.0))
            throw ConfigError("evidence level must be positive");
        break;
    case StopKind::GaussWindow:
        if (!(s.a > 0.0 && s.a < s.b))
            throw ConfigError("gauss-window needs 0 < a < b");
        break;
    }
}

StopSpec parse_stop(const std::string& str)
{
    auto sp = parse_spec_string(str);
    StopSpec s;
    if (sp.name == "fixed") {
        only_keys(sp, {"T", "horizon"}, true);
        s.kind = StopKind::FixedTime;
        s.T = static_cast<std::int64_t>(param_or(sp, "T", 100, true));
    } else if (sp.name == "run" || sp.name == "count") {
        only_keys(sp, {"k", "target", "horizon"}, false);
        s.kind = sp.name == "run" ? StopKind::ConsecutiveRun : StopKind::CountThreshold;
        s.k = static_cast<int>(param_or(sp, "k", 5));
        if (const std::string* v = sp.find("target"))
            parse_targets(*v, s.targets);
    } else if (sp.name == "evidence") {
        only_keys(sp, {"level", "horizon"}, true);
        s.kind = StopKind::EvidenceThreshold;
        s.level = param_or(sp, "level", 20.0, true);
    } else if (sp.name == "gauss-window") {
        only_keys(sp, {"a", "b", "horizon"}, false);
        s.kind = StopKind::GaussWindow;
        s.a = param_or(sp, "a", 0.44);
        s.b = param_or(sp, "b", 1.70);
    } else {
        throw ConfigError("unknown stop rule '" + sp.name + "'");
    }
    if (const std::string* v = sp.find("horizon"))
        s.horizon = parse_int(*v, "horizon");
    validate(s);
    return s;
}

std::string to_string(const StopSpec& s)
{
    std::string out;
    switch (s.kind) {
    case StopKind::FixedTime:
        out = "fixed:" + std::to_string(s.T);
        break;
    case StopKind::ConsecutiveRun:
        out = "run:k=" + std::to_string(s.k) + ",target=" + targets_str(s.targets);
        break;
    case StopKind::CountThreshold:
        out = "count:k=" + std::to_string(s.k) + ",target=" + targets_str(s.targets);
        break;
    case StopKind::EvidenceThreshold:
        out = "evidence:" + fmt_double(s.level);
        break;
    case StopKind::GaussWindow:
        out = "gauss-window:a=" + fmt_double(s.a) + ",b=" + fmt_double(s.b);
        break;
    }
    if (s.horizon != 1'000'000)
        out += ",horizon=" + std::to_string(s.horizon);
    return out;
}

StopRule::StopRule(StopSpec spec) : spec_(spec)
{
    validate(spec_);
}

void StopRule::reset()
{
    t_ = 0;
    runLen_ = 0;
    count_ = 0;
    truncated_ = false;
}

bool StopRule::observe(double x, Evidence current)
{
    ++t_;
    bool fire = false;
    switch (spec_.kind) {
    case StopKind::FixedTime:
        fire = t_ >= spec_.T;
        break;
    case StopKind::ConsecutiveRun:
    case StopKind::CountThreshold: {
        if (x != 0.0 && x != 1.0)
            throw DomainError("run/count rules need binary data");
        bool hit = spec_.targets[static_cast<int>(x)];
        if (spec_.kind == StopKind::ConsecutiveRun) {
            runLen_ = hit ? runLen_ + 1 : 0;
            fire = runLen_ >= spec_.k;
        } else {
            count_ += hit ? 1 : 0;
            fire = count_ >= spec_.k;
        }
        break;
    }
    case StopKind::EvidenceThreshold:
        fire = current.logValue >= std::log(spec_.level);
        break;
    case StopKind::GaussWindow:
        if (t_ == 1) {
            double ax = std::abs(x);
            fire = !(ax >= spec_.a && ax <= spec_.b);
        } else {
            fire = true;
        }
        break;
    }
    if (!fire && t_ >= spec_.horizon) {
        truncated_ = true;
        fire = true;
    }
    return fire;
}

// ---- Monte Carlo ----

void parallel_for_runs(std::int64_t runs, int workers, const std::function<void(std::int64_t)>& f)
{
    if (workers <= 1 || runs < 2) {
        for (std::int64_t i = 0; i < runs; ++i)
            f(i);
        return;
    }
    std::atomic<std::int64_t> next{0};
    std::vector<std::thread> pool;
    std::exception_ptr err;
    std::mutex errMu;
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            try {
                for (std::int64_t i = next.fetch_add(1); i < runs; i = next.fetch_add(1))
                    f(i);
            } catch (...) {
                std::lock_guard lock(errMu);
                if (!err)
                    err = std::current_exception();
                next.store(runs);
            }
        });
    }
    for (auto& t : pool)
        t.join();
    if (err)
        std::rethrow_exception(err);
}

McReport summarize(const std::vector<double>& values, std::int64_t truncated, bool keepSamples)
{
    McReport r;
    r.runs = static_cast<std::int64_t>(values.size());
    r.truncated = truncated;
    if (values.empty())
        return r;
    double sum = 0.0;
    for (double v : values)
        sum += v;
    r.mean = sum / static_cast<double>(values.size());
    double ss = 0.0;
    for (double v : values)
        ss += (v - r.mean) * (v - r.mean);
    if (values.size() > 1)
        r.se = std::sqrt(ss / static_cast<double>(values.size() - 1)) / std::sqrt(static_cast<double>(values.size()));
    if (keepSamples) {
        r.samples = values;
        std::vector<double> sorted = values;
        std::sort(sorted.begin(), sorted.end());
        for (double q : {0.05, 0.25, 0.5, 0.75, 0.95}) {
            auto idx = static_cast<size_t>(std::ceil(q * sorted.size())) - 1;
            r.quantiles.push_back(sorted[std::min(idx, sorted.size() - 1)]);
        }
    }
    return r;
}

StoppedRun run_until_stop(EvidenceStream& s, Generator& g, StopRule& rule, Rng& data)
{
    for (;;) {
        double x = g.next(data);
        Evidence e = s.step(x);
        if (rule.observe(x, e))
            return StoppedRun{e, rule.time(), rule.truncated()};
    }
}

std::vector<std::vector<StoppedRun>> stopped_values(const std::vector<Pipeline>& ps, const GeneratorSpec& gen,
    const StopSpec& stop, const McConfig& cfg)
{
    std::vector<std::vector<StoppedRun>> out(ps.size(), std::vector<StoppedRun>(static_cast<size_t>(cfg.runs)));
    parallel_for_runs(cfg.runs, cfg.workers, [&](std::int64_t i) {
        auto u = static_cast<std::uint64_t>(i);
        for (size_t j = 0; j < ps.size(); ++j) {
            auto s = ps[j].instantiate();
            s->reset(split_seed(cfg.seed, StreamId::ConformalU, u));
            Generator g(gen);
            StopRule rule(stop);
            Rng data(split_seed(cfg.seed, StreamId::Data, u));
            out[j][static_cast<size_t>(i)] = run_until_stop(*s, g, rule, data);
        }
    });
    return out;
}

McReport stopped_mean(const Pipeline& p, const GeneratorSpec& gen, const StopSpec& stop, const McConfig& cfg)
{
    auto runs = stopped_values({p}, gen, stop, cfg).front();
    std::vector<double> vals(runs.size());
    std::int64_t trunc = 0;
    for (size_t i = 0; i < runs.size(); ++i) {
        vals[i] = runs[i].value.value();
        trunc += runs[i].truncated ? 1 : 0;
    }
    return summarize(vals, trunc, cfg.keepSamples);
}

GeneratorSpec family_member(Family f, double mu, double delta, std::int64_t period)
{
    if (f == Family::PeriodicSwitch)
        return GeneratorSpec::periodicSwitch(mu, delta, period);
    return GeneratorSpec::markov(mu, mu + delta);
}

PowerReport power_study(const Pipeline& p, const PowerConfig& cfg)
{
    if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0))
        throw ConfigError("alpha must lie in (0,1)");
    if (cfg.T < 1)
        throw ConfigError("T must be >= 1");
    PowerReport rep;
    rep.pipeline = p.canonical();
    rep.isEProcess = p.isEProcess();
    const double logLevel = -std::log(cfg.alpha);
    std::vector<std::int64_t> cks = cfg.checkpoints;
    std::sort(cks.begin(), cks.end());
    for (size_t di = 0; di < cfg.deltas.size(); ++di) {
        GeneratorSpec gen = family_member(cfg.family, cfg.mu, cfg.deltas[di], cfg.period);
        std::uint64_t master = split_seed(cfg.seed, 100 + di, 0);
        std::vector<std::int64_t> tau(static_cast<size_t>(cfg.runs));
        std::vector<std::vector<double>> logs(static_cast<size_t>(cfg.runs),
            std::vector<double>(cks.size()));
        parallel_for_runs(cfg.runs, cfg.workers, [&](std::int64_t i) {
            auto u = static_cast<std::uint64_t>(i);
            auto s = p.instantiate();
            s->reset(split_seed(master, StreamId::ConformalU, u));
            Generator g(gen);
            Rng data(split_seed(master, StreamId::Data, u));
            std::int64_t first = cfg.T + 1;
            size_t ck = 0;
            for (std::int64_t t = 1; t <= cfg.T; ++t) {
                Evidence e = s->step(g.next(data));
                if (first > cfg.T && e.logValue >= logLevel)
                    first = t;
                while (ck < cks.size() && cks[ck] == t)
                    logs[static_cast<size_t>(i)][ck++] = e.logValue;
                if (first <= cfg.T && ck >= cks.size())
                    break;
            }
            tau[static_cast<size_t>(i)] = first;
        });
        PowerRow row;
        row.delta = cfg.deltas[di];
        double rej = 0.0, tsum = 0.0;
        for (auto t : tau) {
            rej += t <= cfg.T ? 1.0 : 0.0;
            tsum += static_cast<double>(t);
        }
        double n = static_cast<double>(cfg.runs);
        row.rejectionRate = rej / n;
        row.rateSe = std::sqrt(row.rejectionRate * (1.0 - row.rejectionRate) / n);
        row.meanRejectionTime = tsum / n;
        for (size_t c = 0; c < cks.size(); ++c) {
            double s = 0.0;
            for (auto& l : logs)
                s += l[c];
            row.ePower.emplace_back(cks[c], s / n);
        }
        rep.rows.push_back(std::move(row));
    }
    return rep;
}

std::vector<TrajectoryRow> mean_trajectory(const Pipeline& p, const GeneratorSpec& gen, std::int64_t T,
    const McConfig& cfg, const std::vector<std::int64_t>& checkpoints)
{
    std::vector<std::int64_t> cks = checkpoints;
    if (cks.empty())
        for (std::int64_t t = 1; t <= T; ++t)
            cks.push_back(t);
    std::sort(cks.begin(), cks.end());
    if (cks.front() < 1 || cks.back() > T)
        throw ConfigError("checkpoints must lie in [1, T]");
    size_t K = cks.size();
    std::vector<double> val(static_cast<size_t>(cfg.runs) * K), lg(val.size()), mx(val.size());
    parallel_for_runs(cfg.runs, cfg.workers, [&](std::int64_t i) {
        auto u = static_cast<std::uint64_t>(i);
        auto s = p.instantiate();
        s->reset(split_seed(cfg.seed, StreamId::ConformalU, u));
        Generator g(gen);
        Rng data(split_seed(cfg.seed, StreamId::Data, u));
        size_t ck = 0;
        size_t base = static_cast<size_t>(i) * K;
        for (std::int64_t t = 1; t <= T && ck < K; ++t) {
            Evidence e = s->step(g.next(data));
            while (ck < K && cks[ck] == t) {
                val[base + ck] = e.value();
                lg[base + ck] = e.logValue;
                mx[base + ck] = s->runningMax().logValue;
                ++ck;
            }
        }
    });
    std::vector<TrajectoryRow> out;
    for (size_t c = 0; c < K; ++c) {
        std::vector<double> v(static_cast<size_t>(cfg.runs));
        double ls = 0.0, ms = 0.0;
        for (size_t i = 0; i < v.size(); ++i) {
            v[i] = val[i * K + c];
            ls += lg[i * K + c];
            ms += mx[i * K + c];
        }
        McReport r = summarize(v, 0, false);
        double n = static_cast<double>(cfg.runs);
        out.push_back(TrajectoryRow{cks[c], r.mean, r.se, ls / n, ms / n});
    }
    return out;
}

std::vector<std::string> generator_spec_help()
{
    return {
        "ber:P                            IID Bernoulli(P)",
        "markov:p01=A,p11=B[,init=0|1]    first-order chain; initial state uniform unless init",
        "piecewise:LENxP/LENxP/...        Bernoulli blocks; the last p persists",
        "switch:mu=M,delta=D,period=N     alternate Ber(M) and Ber(M+D) every N steps",
        "normal:mean=M,sd=S               IID Gaussian",
    };
}

std::vector<std::string> stop_spec_help()
{
    return {
        "fixed:T                          stop at time T",
        "run:k=K,target=0|1|01            first time the last K symbols are all in target",
        "count:k=K,target=0|1|01          first time K target symbols have been seen",
        "evidence:L                       first time the monitored value reaches L",
        "gauss-window:a=A,b=B             stop at 1 unless |X1| in [A,B], else at 2",
        "any rule accepts ,horizon=N      (default 1000000; truncated runs are counted)",
    };
}

} // namespace savi
