#include "savi/adjust.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "savi/text.hpp"

namespace savi {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// sum_{j>=0} L^j / (j+2)!
double mix_series(double L)
{
    double term = 0.5, sum = 0.0;
    for (int j = 0; j < 40; ++j) {
        sum += term;
        term *= L / (j + 3);
        if (std::abs(term) < 1e-18 * std::abs(sum))
            break;
    }
    return sum;
}

// log(A_mix(e) / e), L = log e >= 0.
double log_mix_over_e(double L)
{
    if (L == kInf)
        return kInf;
    if (std::abs(L) < 0.5)
        return std::log(mix_series(L)) - L;
    if (L < 30.0)
        return std::log(std::expm1(L) - L) - 2.0 * std::log(std::abs(L)) - L;
    return std::log1p(-(1.0 + L) * std::exp(-L)) - 2.0 * std::log(L);
}

double log_mix(double L)
{
    if (L == kInf)
        return kInf;
    if (L == -kInf)
        return -kInf;
    if (std::abs(L) < 0.5)
        return std::log(mix_series(L));
    if (L < 30.0)
        return std::log(std::expm1(L) - L) - 2.0 * std::log(std::abs(L));
    return L + std::log1p(-(1.0 + L) * std::exp(-L)) - 2.0 * std::log(L);
}

// log(1 + e^L)
double log1p_exp(double L)
{
    if (L > 35.0)
        return L + std::exp(-L);
    return std::log1p(std::exp(L));
}

double log_over_e(const AdjusterSpec& a, double L)
{
    double base = 0.0;
    switch (a.kind) {
    case AdjusterKind::Mix:
        base = log_mix_over_e(L);
        break;
    case AdjusterKind::KV: {
        if (L == kInf)
            return kInf;
        double l1 = log1p_exp(L);
        double tail = L > 35.0 ? std::exp(-L) : std::log1p(std::exp(-L));
        base = std::log(std::numbers::ln2) - tail - 2.0 * std::log(l1);
        break;
    }
    case AdjusterKind::Sqrt:
        if (L == kInf)
            return kInf;
        if (L == 0.0)
            return -kInf;
        base = L < 1.0 ? std::log(std::expm1(0.5 * L)) - L
                       : -0.5 * L + std::log1p(-std::exp(-0.5 * L));
        break;
    case AdjusterKind::Power:
        if (L == kInf)
            return kInf;
        base = std::log(a.kappa) - a.kappa * L;
        break;
    case AdjusterKind::Zero:
        if (L == kInf)
            return kInf;
        if (L < 1.0 + a.kappa)
            return -kInf;
        base = std::log(a.kappa) + a.kappa * std::log1p(a.kappa) - (1.0 + a.kappa) * std::log(L);
        break;
    case AdjusterKind::Spine:
        throw DomainError("spine adjuster takes (running max, current); use spine_eval");
    }
    return base + std::log(a.scale);
}

} // namespace

void validate(const AdjusterSpec& a)
{
    if (!(a.scale > 0.0))
        throw ConfigError("adjuster scale must be positive");
    switch (a.kind) {
    case AdjusterKind::Power:
        if (!(a.kappa > 0.0 && a.kappa < 1.0))
            throw ConfigError("power adjuster needs kappa in (0,1)");
        break;
    case AdjusterKind::Zero:
        if (!(a.kappa > 0.0))
            throw ConfigError("zero adjuster needs kappa > 0");
        break;
    case AdjusterKind::Spine:
        if (!(a.kappa >= 0.0 && a.kappa <= 1.0))
            throw ConfigError("spine needs kappa in [0,1]");
        break;
    default:
        break;
    }
}

void validate(const CalibratorSpec& c)
{
    if (c.kind == CalibratorKind::Power && !(c.kappa > 0.0 && c.kappa < 1.0))
        throw ConfigError("power calibrator needs kappa in (0,1)");
}

AdjusterSpec parse_adjuster(const std::string& s)
{
    auto sp = parse_spec_string(s);
    AdjusterSpec a;
    bool needsKappa = false;
    if (sp.name == "mix")
        a.kind = AdjusterKind::Mix;
    else if (sp.name == "kv")
        a.kind = AdjusterKind::KV;
    else if (sp.name == "sqrt")
        a.kind = AdjusterKind::Sqrt;
    else if (sp.name == "power")
        a.kind = AdjusterKind::Power, needsKappa = true;
    else if (sp.name == "zero")
        a.kind = AdjusterKind::Zero, needsKappa = true;
    else if (sp.name == "spine")
        a.kind = AdjusterKind::Spine, needsKappa = true;
    else
        throw ConfigError("unknown adjuster '" + sp.name + "'");

    bool gotKappa = false;
    for (auto& [k, v] : sp.params) {
        if (v.empty() && !gotKappa && needsKappa) {
            a.kappa = parse_double(k, "kappa");
            gotKappa = true;
        } else if (k == "kappa" && needsKappa) {
            a.kappa = parse_double(v, "kappa");
            gotKappa = true;
        } else if (k == "scale") {
            a.scale = parse_double(v, "scale");
        } else {
            throw ConfigError("unexpected adjuster parameter '" + k + "' in '" + s + "'");
        }
    }
    if (needsKappa && !gotKappa)
        throw ConfigError("adjuster '" + sp.name + "' needs a parameter, e.g. " + sp.name + ":0.5");
    validate(a);
    return a;
}

std::string to_string(const AdjusterSpec& a)
{
    std::string out;
    switch (a.kind) {
    case AdjusterKind::Mix: out = "mix"; break;
    case AdjusterKind::KV: out = "kv"; break;
    case AdjusterKind::Sqrt: out = "sqrt"; break;
    case AdjusterKind::Power: out = "power:" + fmt_double(a.kappa); break;
    case AdjusterKind::Zero: out = "zero:" + fmt_double(a.kappa); break;
    case AdjusterKind::Spine: out = "spine:" + fmt_double(a.kappa); break;
    }
    if (a.scale != 1.0)
        out += (out.find(':') == std::string::npos ? ":" : ",") + std::string("scale=") + fmt_double(a.scale);
    return out;
}

CalibratorSpec parse_calibrator(const std::string& s)
{
    auto sp = parse_spec_string(s);
    CalibratorSpec c;
    if (sp.name == "mix") {
        c.kind = CalibratorKind::Mix;
        if (!sp.params.empty())
            throw ConfigError("mix calibrator takes no parameters");
    } else if (sp.name == "power") {
        c.kind = CalibratorKind::Power;
        if (sp.params.size() != 1)
            throw ConfigError("power calibrator needs one parameter, e.g. power:0.5");
        auto& [k, v] = sp.params.front();
        c.kappa = parse_double(v.empty() ? k : v, "kappa");
    } else {
        throw ConfigError("unknown calibrator '" + sp.name + "'");
    }
    validate(c);
    return c;
}

std::string to_string(const CalibratorSpec& c)
{
    return c.kind == CalibratorKind::Mix ? "mix" : "power:" + fmt_double(c.kappa);
}

double log_adjust(const AdjusterSpec& a, double L)
{
    if (a.kind == AdjusterKind::Spine)
        throw DomainError("spine adjuster takes (running max, current); use spine_eval");
    if (std::isnan(L) || L < 0.0)
        throw DomainError("adjuster argument must be >= 1");
    if (L == kInf)
        return kInf;
    if (a.kind == AdjusterKind::Mix)
        return log_mix(L) + std::log(a.scale);
    double r = log_over_e(a, L);
    return r == -kInf ? r : r + L;
}

Evidence adjuster_eval(const AdjusterSpec& a, Evidence e)
{
    return Evidence::fromLog(log_adjust(a, e.logValue));
}

Evidence adjuster_eval_extended(const AdjusterSpec& a, Evidence e)
{
    double L = e.logValue;
    if (L >= 0.0)
        return adjuster_eval(a, e);
    switch (a.kind) {
    case AdjusterKind::Mix:
        return Evidence::fromLog(log_mix(L) + std::log(a.scale));
    case AdjusterKind::Power:
        return Evidence::fromLog(std::log(a.kappa) + (1.0 - a.kappa) * L + std::log(a.scale));
    default:
        return adjuster_eval(a, Evidence::one());
    }
}

double log_calibrate(const CalibratorSpec& c, double p)
{
    if (std::isnan(p) || p < 0.0 || p > 1.0)
        throw DomainError("calibrator argument must lie in [0,1]");
    if (p == 0.0)
        return kInf;
    double q = std::log(p);
    if (c.kind == CalibratorKind::Power)
        return std::log(c.kappa) + (c.kappa - 1.0) * q;
    if (std::abs(q) < 0.5) {
        // e^{-q} sum_{k>=2} (k-1) q^{k-2} / k!
        double term = 1.0, sum = 0.0;
        double fact = 2.0;
        for (int k = 2; k < 42; ++k) {
            double add = (k - 1) * term / fact;
            sum += add;
            term *= q;
            fact *= (k + 1);
            if (std::abs(add) < 1e-18 * std::abs(sum) && k > 3)
                break;
        }
        return -q + std::log(sum);
    }
    return std::log(1.0 - p + p * q) - q - 2.0 * std::log(-q);
}

Evidence calibrator_eval(const CalibratorSpec& c, double p)
{
    return Evidence::fromLog(log_calibrate(c, p));
}

Evidence spine_eval(double kappa, Evidence eMax, Evidence eCur)
{
    if (!(kappa >= 0.0 && kappa <= 1.0))
        throw DomainError("spine kappa must lie in [0,1]");
    if (std::isnan(eMax.logValue) || eMax.logValue < 0.0)
        throw DomainError("spine running max must be >= 1");
    if (eMax.isInfinite())
        return Evidence::infinity();
    double a = kappa > 0.0 ? std::log(kappa) + (1.0 - kappa) * eMax.logValue : -kInf;
    double b = kappa < 1.0 ? std::log1p(-kappa) - kappa * eMax.logValue + eCur.logValue : -kInf;
    return Evidence::fromLog(log_add(a, b));
}

Admissibility check_adjuster_admissibility(const AdjusterSpec& a, double tol)
{
    if (a.kind == AdjusterKind::Spine)
        throw DomainError("spine is not a one-argument adjuster; admissibility is undefined");
    validate(a);

    // p in [1/e, 1]: direct integrand A(1/p)
    auto near1 = [&](double p) {
        double L = -std::log(p);
        if (L < 0.0)
            L = 0.0;
        double la = log_adjust(a, L);
        return std::exp(la);
    };
    // p in (0, 1/e]: p = exp(-e^v), integrand A(e)/e * L
    const double kink = a.kind == AdjusterKind::Zero ? std::log1p(a.kappa) : kInf;
    auto near0 = [&](double v) {
        double L = std::exp(v);
        if (v >= kink)
            L = std::max(L, 1.0 + a.kappa); // exp(log1p(k)) may round below 1+k
        double r = log_over_e(a, L);
        if (r == -kInf)
            return 0.0;
        return std::exp(r + v);
    };

    const double qtol = std::min(1e-11, tol * 1e-3);
    Admissibility out;
    auto add = [&](const QuadResult& q) {
        out.integral += q.value;
        out.errorEstimate += q.errorEstimate;
        out.converged = out.converged && q.converged;
    };
    add(adaptive_simpson(near1, std::exp(-1.0), 1.0, qtol));

    std::vector<double> cuts = {0.0, 0.5, 1.0, 1.5, 2.0, 3.0, 4.0, 6.0, 8.0, 12.0, 16.0, 24.0,
        32.0, 64.0, 128.0, 256.0, 400.0, 600.0};
    if (a.kind == AdjusterKind::Zero) {
        cuts.push_back(kink);
        std::sort(cuts.begin(), cuts.end());
    }
    for (size_t i = 0; i + 1 < cuts.size(); ++i) {
        // A vanishes below the Zero boundary; integrating up to it would see the jump at the endpoint
        if (cuts[i + 1] <= cuts[i] || (a.kind == AdjusterKind::Zero && cuts[i + 1] <= kink))
            continue;
        add(adaptive_simpson(near0, cuts[i], cuts[i + 1], qtol / cuts.size()));
    }
    // the tail beyond v = 600 is below exp(-600 kappa) for every shipped family
    out.admissible = out.converged && std::abs(out.integral - 1.0) <= tol;
    return out;
}

Evidence AdjusterView::operator()(Evidence e) const
{
    if (e.logValue < 0.0)
        throw DomainError("adjuster argument must be >= 1");
    // 1/inf = 0
    double p = e.isInfinite() ? 0.0 : std::exp(-e.logValue);
    return calibrator_eval(source, p);
}

Evidence CalibratorView::operator()(double p) const
{
    if (std::isnan(p) || p < 0.0 || p > 1.0)
        throw DomainError("calibrator argument must lie in [0,1]");
    double L = p == 0.0 ? kInf : -std::log(p);
    return Evidence::fromLog(log_adjust(source, L));
}

AdjusterView adjuster_from_calibrator(const CalibratorSpec& c)
{
    validate(c);
    return AdjusterView{c};
}

CalibratorView calibrator_from_adjuster(const AdjusterSpec& a)
{
    if (a.kind == AdjusterKind::Spine)
        throw DomainError("spine has no corresponding calibrator");
    validate(a);
    return CalibratorView{a};
}

double mix_kv_crossover(double lo, double hi, double tol)
{
    auto diff = [](double e) {
        double L = std::log(e);
        return std::exp(log_adjust(AdjusterSpec::mix(), L)) - std::exp(log_adjust(AdjusterSpec::kv(), L));
    };
    if (!(diff(lo) < 0.0 && diff(hi) >= 0.0))
        throw DomainError("crossover not bracketed");
    while (hi - lo > tol) {
        double mid = 0.5 * (lo + hi);
        if (diff(mid) < 0.0)
            lo = mid;
        else
            hi = mid;
    }
    return hi;
}

std::vector<AdjusterSpec> shipped_adjusters()
{
    return {AdjusterSpec::mix(), AdjusterSpec::kv(), AdjusterSpec::sqrt(), AdjusterSpec::power(0.1),
        AdjusterSpec::power(0.5), AdjusterSpec::power(0.9), AdjusterSpec::zero(0.5),
        AdjusterSpec::zero(1.0), AdjusterSpec::zero(2.0)};
}

} // namespace savi
