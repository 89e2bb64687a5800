#include "savi/streams.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "savi/numerics.hpp"
#include "savi/text.hpp"

namespace savi {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

int as_binary(double x)
{
    if (x == 0.0)
        return 0;
    if (x == 1.0)
        return 1;
    throw DomainError("binary stream expects 0 or 1, got " + fmt_double(x));
}

double log_factor(double f)
{
    return f > 0.0 ? std::log(f) : -kInf;
}

} // namespace

// ---- UI exchangeability ----

Evidence ui_exch_step(UiExchState& st, int x)
{
    if (x != 0 && x != 1)
        throw DomainError("ui-exch expects binary observations");
    if (st.prevSymbol) {
        int j = *st.prevSymbol;
        double row = static_cast<double>(st.n[j][0] + st.n[j][1]);
        st.logNumerator += std::log((st.n[j][x] + 0.5) / (row + 1.0));
        ++st.n[j][x];
    } else {
        st.logNumerator += -std::numbers::ln2;
    }
    ++st.t;
    if (x == 1)
        ++st.n1;
    else
        ++st.n0;
    st.prevSymbol = x;
    return Evidence::fromLog(st.logNumerator - ui_exch_log_mle(st));
}

double ui_exch_log_numerator(const UiExchState& st)
{
    if (st.t == 0)
        return 0.0;
    double s = 0.0;
    for (int j = 0; j < 2; ++j)
        for (int k = 0; k < 2; ++k)
            s += log_gamma(st.n[j][k] + 0.5);
    s -= std::numbers::ln2 + 4.0 * log_gamma(0.5);
    s -= log_gamma(static_cast<double>(st.n[0][0] + st.n[0][1]) + 1.0);
    s -= log_gamma(static_cast<double>(st.n[1][0] + st.n[1][1]) + 1.0);
    return s;
}

double ui_exch_log_mle(const UiExchState& st)
{
    double t = static_cast<double>(st.t);
    double r = 0.0;
    if (st.n1 > 0)
        r += st.n1 * std::log(st.n1 / t);
    if (st.n0 > 0)
        r += st.n0 * std::log(st.n0 / t);
    return r;
}

Evidence UiExchStream::step(double x)
{
    Evidence e = ui_exch_step(st_, as_binary(x));
    record(e);
    return e;
}

void UiExchStream::reset(std::uint64_t)
{
    st_ = UiExchState{};
    clearTrack();
}

std::unique_ptr<EvidenceStream> UiExchStream::clone() const
{
    return std::make_unique<UiExchStream>(*this);
}

// ---- conformal ----

ConformalState ConformalState::fixed(double lambda)
{
    if (!(lambda >= -2.0 && lambda <= 2.0))
        throw ConfigError("conformal lambda must lie in [-2, 2] to keep wealth nonnegative");
    ConformalState st;
    st.mode = ConformalMode::FixedLambda;
    st.lambda = lambda;
    return st;
}

ConformalState ConformalState::jumper(double eps, std::array<double, 3> w)
{
    if (!(eps > 0.0 && eps < 1.0))
        throw ConfigError("jumper eps must lie in (0,1)");
    double sum = 0.0;
    for (double v : w) {
        if (!(v >= 0.0))
            throw ConfigError("jumper weights must be nonnegative");
        sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-9)
        throw ConfigError("jumper weights must sum to 1");
    ConformalState st;
    st.mode = ConformalMode::SimpleJumper;
    st.eps = eps;
    st.weights = w;
    st.shares = w;
    return st;
}

double conformal_pvalue(ConformalState& st, int x, double u)
{
    if (x != 0 && x != 1)
        throw DomainError("conformal p-value expects binary observations");
    if (!(u >= 0.0 && u <= 1.0))
        throw DomainError("u must lie in [0,1]");
    ++st.t;
    st.count1 += x;
    double t = static_cast<double>(st.t);
    double f1 = st.count1 / t;
    double f0 = (st.t - st.count1) / t;
    return x == 1 ? u * f1 : f1 + u * f0;
}

Evidence conformal_step(ConformalState& st, double s)
{
    if (!(s >= 0.0 && s <= 1.0))
        throw DomainError("conformal p-value must lie in [0,1]");
    if (st.mode == ConformalMode::FixedLambda) {
        st.logWealth += log_factor(1.0 + st.lambda * (s - 0.5));
        return Evidence::fromLog(st.logWealth);
    }
    // rebalance toward the prior weights using last round's total, then bet
    static constexpr double lambdas[3] = {-1.0, 0.0, 1.0};
    std::array<double, 3> g{};
    double total = 0.0;
    for (int i = 0; i < 3; ++i) {
        double share = (1.0 - st.eps) * st.shares[i] + st.eps * st.weights[i];
        g[i] = share * (1.0 + lambdas[i] * (s - 0.5));
        total += g[i];
    }
    st.logWealth += log_factor(total);
    if (total > 0.0)
        for (int i = 0; i < 3; ++i)
            st.shares[i] = g[i] / total;
    return Evidence::fromLog(st.logWealth);
}

ConformalStream::ConformalStream(ConformalState init) : init_(init), st_(init) {}

Evidence ConformalStream::step(double x)
{
    int b = as_binary(x);
    lastS_ = conformal_pvalue(st_, b, rng_.uniform());
    Evidence e = conformal_step(st_, lastS_);
    record(e);
    return e;
}

void ConformalStream::reset(std::uint64_t seed)
{
    st_ = init_;
    rng_.seed(seed);
    lastS_ = 0.5;
    clearTrack();
}

std::unique_ptr<EvidenceStream> ConformalStream::clone() const
{
    return std::make_unique<ConformalStream>(*this);
}

std::string ConformalStream::describe() const
{
    if (init_.mode == ConformalMode::FixedLambda)
        return "conf:lambda=" + fmt_double(init_.lambda);
    std::string s = "conf:jumper,eps=" + fmt_double(init_.eps);
    const auto& w = init_.weights;
    if (!(w[0] == 1.0 / 3 && w[1] == 1.0 / 3 && w[2] == 1.0 / 3))
        s += ",w=" + fmt_double(w[0]) + "/" + fmt_double(w[1]) + "/" + fmt_double(w[2]);
    return s;
}

// ---- bounded mean ----

BoundedMeanState BoundedMeanState::constant(double mu, double lambda)
{
    BoundedMeanState st;
    st.mu = mu;
    st.strategy = BetStrategy::Constant;
    st.lambda = lambda;
    validate(st);
    return st;
}

BoundedMeanState BoundedMeanState::scaledDecay(double mu, double c)
{
    BoundedMeanState st;
    st.mu = mu;
    st.strategy = BetStrategy::ScaledDecay;
    st.c = c;
    validate(st);
    return st;
}

void validate(const BoundedMeanState& st)
{
    if (!(st.mu >= 0.0 && st.mu <= 1.0))
        throw ConfigError("bounded-mean mu must lie in [0,1]");
    if (st.strategy == BetStrategy::Constant) {
        if (st.mu == 0.0)
            throw ConfigError("bounded-mean with mu = 0 has no finite constant bet bound 1/mu; use decay with a cap");
        if (!(st.lambda > 0.0 && st.lambda <= 1.0 / st.mu))
            throw ConfigError("bounded-mean lambda must lie in (0, 1/mu]");
    } else {
        if (!(st.c > 0.0) || !(st.cap > 0.0))
            throw ConfigError("bounded-mean decay needs c > 0 and cap > 0");
    }
}

double bounded_mean_next_lambda(const BoundedMeanState& st)
{
    if (st.strategy == BetStrategy::Constant)
        return st.lambda;
    double tn = static_cast<double>(st.t + 1);
    double var = (0.25 + st.sumSqDev) / tn;
    double lam = st.c / std::sqrt(var * tn * std::log(tn + 1.0));
    double hi = st.mu > 0.0 ? 1.0 / st.mu : st.cap;
    return std::clamp(lam, 0.0, hi);
}

Evidence bounded_mean_step(BoundedMeanState& st, double x)
{
    if (!(x >= 0.0 && x <= 1.0))
        throw DomainError("bounded-mean observations must lie in [0,1]");
    double lam = bounded_mean_next_lambda(st);
    st.logWealth += log_factor(1.0 + lam * (x - st.mu));
    ++st.t;
    st.sumX += x;
    double muHat = (0.5 + st.sumX) / (st.t + 1.0);
    st.sumSqDev += (x - muHat) * (x - muHat);
    return Evidence::fromLog(st.logWealth);
}

BoundedMeanStream::BoundedMeanStream(BoundedMeanState init) : init_(init), st_(init)
{
    validate(init_);
}

Evidence BoundedMeanStream::step(double x)
{
    Evidence e = bounded_mean_step(st_, x);
    record(e);
    return e;
}

void BoundedMeanStream::reset(std::uint64_t)
{
    st_ = init_;
    clearTrack();
}

std::unique_ptr<EvidenceStream> BoundedMeanStream::clone() const
{
    return std::make_unique<BoundedMeanStream>(*this);
}

std::string BoundedMeanStream::describe() const
{
    std::string s = "bounded-mean:mu=" + fmt_double(init_.mu);
    if (init_.strategy == BetStrategy::Constant)
        return s + ",lambda=" + fmt_double(init_.lambda);
    s += ",decay,c=" + fmt_double(init_.c);
    if (init_.mu == 0.0)
        s += ",cap=" + fmt_double(init_.cap);
    return s;
}

// ---- Gaussian ----

double GaussianState::sigmaHat() const
{
    return t > 0 ? std::sqrt(m2dev / static_cast<double>(t)) : 0.0;
}

namespace {

void gaussian_update(GaussianState& st, double x)
{
    ++st.t;
    double d = x - st.mean;
    st.mean += d / static_cast<double>(st.t);
    st.m2dev += d * (x - st.mean);
    st.sumSq += x * x;
}

} // namespace

Evidence gaussian_ui_ttest_step(GaussianState& st, double x)
{
    if (!std::isfinite(x))
        throw DomainError("gaussian observations must be finite");
    if (!st.started && st.t > 0 && st.m2dev > 0.0)
        st.started = true;
    if (st.started) {
        double sig = st.sigmaHat();
        double z = (x - st.mean) / sig;
        ++st.m;
        st.sumSqSinceStart += x * x;
        st.logProduct += -std::log(sig) - 0.5 * z * z;
    }
    gaussian_update(st, x);
    if (!st.started)
        return Evidence::one();
    double m = static_cast<double>(st.m);
    double lv = 0.5 * m * std::log(st.sumSqSinceStart / m) + 0.5 * m + st.logProduct;
    return Evidence::fromLog(lv);
}

double gaussian_maxinv_log_ratio(std::int64_t t, double mean, double meanSq, double d0, double d1,
    int points, double halfWidth)
{
    if (t < 2 || !(meanSq > 0.0))
        return 0.0;
    const GaussLegendre& gl = gauss_legendre(points);
    double c = 0.5 * std::log(meanSq);
    double tt = static_cast<double>(t);
    std::vector<double> f0(points), f1(points);
    // integrate over u = log sigma against d(sigma)/sigma
    for (int j = 0; j < points; ++j) {
        double u = c + halfWidth * gl.nodes[j];
        double eu = std::exp(-u);
        double base = -tt * u - 0.5 * tt * meanSq * eu * eu + std::log(gl.weights[j]);
        f0[j] = base - 0.5 * tt * (-2.0 * d0 * mean * eu + d0 * d0);
        f1[j] = base - 0.5 * tt * (-2.0 * d1 * mean * eu + d1 * d1);
    }
    return log_sum_exp(f1) - log_sum_exp(f0);
}

Evidence gaussian_maxinv_step(GaussianState& st, double x)
{
    if (!std::isfinite(x))
        throw DomainError("gaussian observations must be finite");
    gaussian_update(st, x);
    if (st.t < 2)
        return Evidence::one();
    double meanSq = st.sumSq / static_cast<double>(st.t);
    return Evidence::fromLog(gaussian_maxinv_log_ratio(st.t, st.mean, meanSq, st.d0, st.d1));
}

Evidence GaussianUiStream::step(double x)
{
    Evidence e = gaussian_ui_ttest_step(st_, x);
    record(e);
    return e;
}

void GaussianUiStream::reset(std::uint64_t)
{
    st_ = GaussianState{};
    clearTrack();
}

std::unique_ptr<EvidenceStream> GaussianUiStream::clone() const
{
    return std::make_unique<GaussianUiStream>(*this);
}

GaussianMaxInvStream::GaussianMaxInvStream(double d0, double d1)
{
    if (!std::isfinite(d0) || !std::isfinite(d1))
        throw ConfigError("gauss-maxinv effect sizes must be finite");
    st_.d0 = d0;
    st_.d1 = d1;
}

Evidence GaussianMaxInvStream::step(double x)
{
    Evidence e = gaussian_maxinv_step(st_, x);
    record(e);
    return e;
}

void GaussianMaxInvStream::reset(std::uint64_t)
{
    double d0 = st_.d0, d1 = st_.d1;
    st_ = GaussianState{};
    st_.d0 = d0;
    st_.d1 = d1;
    clearTrack();
}

std::unique_ptr<EvidenceStream> GaussianMaxInvStream::clone() const
{
    return std::make_unique<GaussianMaxInvStream>(*this);
}

std::string GaussianMaxInvStream::describe() const
{
    return "gauss-maxinv:d0=" + fmt_double(st_.d0) + ",d1=" + fmt_double(st_.d1);
}

// ---- factory ----

namespace {

void reject_unknown(const SpecString& sp, const std::vector<std::string>& keys)
{
    for (auto& [k, v] : sp.params)
        if (std::find(keys.begin(), keys.end(), k) == keys.end())
            throw ConfigError("unknown parameter '" + k + "' for stream '" + sp.name + "'");
}

double get_or(const SpecString& sp, const char* key, double dflt)
{
    const std::string* v = sp.find(key);
    return v ? parse_double(*v, key) : dflt;
}

} // namespace

bool is_stream_name(const std::string& name)
{
    return name == "ui-exch" || name == "conf" || name == "bounded-mean" || name == "gauss-ui"
        || name == "gauss-maxinv";
}

std::vector<std::string> stream_param_keys(const std::string& name)
{
    if (name == "conf")
        return {"lambda", "jumper", "eps", "w"};
    if (name == "bounded-mean")
        return {"mu", "lambda", "decay", "c", "cap"};
    if (name == "gauss-maxinv")
        return {"d0", "d1"};
    return {};
}

std::unique_ptr<EvidenceStream> make_stream(const std::string& spec)
{
    auto sp = parse_spec_string(spec);
    if (!is_stream_name(sp.name))
        throw ConfigError("unknown stream '" + sp.name + "'");
    reject_unknown(sp, stream_param_keys(sp.name));

    if (sp.name == "ui-exch")
        return std::make_unique<UiExchStream>();
    if (sp.name == "gauss-ui")
        return std::make_unique<GaussianUiStream>();
    if (sp.name == "gauss-maxinv")
        return std::make_unique<GaussianMaxInvStream>(get_or(sp, "d0", 0.0), get_or(sp, "d1", 1.0));
    if (sp.name == "conf") {
        if (sp.has("jumper")) {
            if (sp.has("lambda"))
                throw ConfigError("conf: jumper and lambda are exclusive");
            std::array<double, 3> w{1.0 / 3, 1.0 / 3, 1.0 / 3};
            if (const std::string* ws = sp.find("w")) {
                auto parts = split(*ws, '/');
                if (parts.size() != 3)
                    throw ConfigError("conf: w needs three weights a/b/c");
                for (int i = 0; i < 3; ++i)
                    w[i] = parse_double(parts[i], "w");
            }
            return std::make_unique<ConformalStream>(ConformalState::jumper(get_or(sp, "eps", 0.01), w));
        }
        if (sp.has("eps") || sp.has("w"))
            throw ConfigError("conf: eps and w only apply to the jumper");
        return std::make_unique<ConformalStream>(ConformalState::fixed(get_or(sp, "lambda", 1.0)));
    }
    // bounded-mean
    double mu = get_or(sp, "mu", 0.5);
    if (sp.has("decay")) {
        if (sp.has("lambda"))
            throw ConfigError("bounded-mean: decay and lambda are exclusive");
        auto st = BoundedMeanState::scaledDecay(mu, get_or(sp, "c", 2.716));
        st.cap = get_or(sp, "cap", 1e3);
        validate(st);
        return std::make_unique<BoundedMeanStream>(st);
    }
    return std::make_unique<BoundedMeanStream>(BoundedMeanState::constant(mu, get_or(sp, "lambda", 1.0)));
}

std::vector<std::string> stream_spec_help()
{
    return {
        "ui-exch                        universal-inference exchangeability e-process (binary)",
        "conf:lambda=L                  conformal test martingale with fixed bet L in [-2,2]",
        "conf:jumper,eps=E[,w=a/b/c]    simple jumper over bets -1,0,1",
        "bounded-mean:mu=M,lambda=L     betting martingale for a [0,1] mean, constant bet",
        "bounded-mean:mu=M,decay[,c=C]  same with a predictable decaying bet",
        "gauss-ui                       Gaussian t-test e-process (real data)",
        "gauss-maxinv:d0=A,d1=B         scale-invariant likelihood-ratio mixture (real data)",
    };
}

} // namespace savi
