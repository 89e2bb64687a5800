#include "savi/lift.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "savi/rng.hpp"
#include "savi/text.hpp"

namespace savi {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::uint64_t child_seed(std::uint64_t seed, size_t i)
{
    return split_seed(seed, StreamId::Child, i);
}

double mean_linear(const std::vector<Evidence>& es)
{
    if (es.empty())
        throw DomainError("need at least one stream");
    double s = 0.0;
    for (auto e : es)
        s += e.value();
    return s / static_cast<double>(es.size());
}

} // namespace

// ---- lifted ----

LiftedStream::LiftedStream(std::unique_ptr<EvidenceStream> inner, AdjusterSpec a, MaxMode mode)
    : inner_(std::move(inner)), adj_(a), mode_(mode)
{
    if (adj_.kind == AdjusterKind::Spine)
        throw ConfigError("spine adjusters cannot lift: the spine family inflates stopped means above 1 "
                          "(negative result for two-argument adjusters); use spine(k, node) as a control");
    validate(adj_);
    mx_ = mode_ == MaxMode::Floor ? Evidence::one() : Evidence::zero();
}

LiftedStream::LiftedStream(const LiftedStream& o)
    : StreamBase(o), inner_(o.inner_->clone()), adj_(o.adj_), mode_(o.mode_), mx_(o.mx_)
{
}

Evidence LiftedStream::step(double x)
{
    mx_ = max(mx_, inner_->step(x));
    Evidence out = mode_ == MaxMode::Floor ? adjuster_eval(adj_, mx_) : adjuster_eval_extended(adj_, mx_);
    record(out);
    return out;
}

void LiftedStream::reset(std::uint64_t seed)
{
    inner_->reset(child_seed(seed, 0));
    mx_ = mode_ == MaxMode::Floor ? Evidence::one() : Evidence::zero();
    clearTrack();
}

std::unique_ptr<EvidenceStream> LiftedStream::clone() const
{
    return std::make_unique<LiftedStream>(*this);
}

std::string LiftedStream::describe() const
{
    std::string s = "lift(" + to_string(adj_) + ", " + inner_->describe();
    if (mode_ == MaxMode::Observed)
        s += ", max=observed";
    return s + ")";
}

// ---- combined ----

CombinedStream::CombinedStream(std::vector<Component> parts) : parts_(std::move(parts))
{
    if (parts_.empty())
        throw ConfigError("combine needs at least one component");
    double sum = 0.0;
    for (auto& [w, s] : parts_) {
        if (!(w >= 0.0))
            throw ConfigError("combine weights must be nonnegative");
        if (!s)
            throw ConfigError("combine component is empty");
        sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-9)
        throw ConfigError("combine weights sum to " + fmt_double(sum) + ", expected 1");
}

CombinedStream::CombinedStream(const CombinedStream& o) : StreamBase(o)
{
    for (auto& [w, s] : o.parts_)
        parts_.emplace_back(w, s->clone());
}

Evidence CombinedStream::step(double x)
{
    double acc = -kInf;
    for (auto& [w, s] : parts_) {
        Evidence e = s->step(x);
        if (w > 0.0)
            acc = log_add(acc, std::log(w) + e.logValue);
    }
    Evidence out = Evidence::fromLog(acc);
    record(out);
    return out;
}

void CombinedStream::reset(std::uint64_t seed)
{
    for (size_t i = 0; i < parts_.size(); ++i)
        parts_[i].second->reset(child_seed(seed, i));
    clearTrack();
}

std::unique_ptr<EvidenceStream> CombinedStream::clone() const
{
    return std::make_unique<CombinedStream>(*this);
}

std::string CombinedStream::describe() const
{
    std::string s = "combine(";
    for (size_t i = 0; i < parts_.size(); ++i) {
        if (i)
            s += ", ";
        s += fmt_double(parts_[i].first) + "*" + parts_[i].second->describe();
    }
    return s + ")";
}

bool CombinedStream::dataFiltrationValid() const
{
    return std::all_of(parts_.begin(), parts_.end(), [](auto& p) { return p.second->dataFiltrationValid(); });
}

bool CombinedStream::isEProcess() const
{
    return std::all_of(parts_.begin(), parts_.end(), [](auto& p) { return p.second->isEProcess(); });
}

// ---- naive mean ----

NaiveMeanStream::NaiveMeanStream(std::vector<std::unique_ptr<EvidenceStream>> parts) : parts_(std::move(parts))
{
    if (parts_.empty())
        throw ConfigError("naive-mean needs at least one component");
}

NaiveMeanStream::NaiveMeanStream(const NaiveMeanStream& o) : StreamBase(o)
{
    for (auto& s : o.parts_)
        parts_.push_back(s->clone());
}

Evidence NaiveMeanStream::step(double x)
{
    double acc = -kInf;
    for (auto& s : parts_)
        acc = log_add(acc, s->step(x).logValue);
    Evidence out = Evidence::fromLog(acc - std::log(static_cast<double>(parts_.size())));
    record(out);
    return out;
}

void NaiveMeanStream::reset(std::uint64_t seed)
{
    for (size_t i = 0; i < parts_.size(); ++i)
        parts_[i]->reset(child_seed(seed, i));
    clearTrack();
}

std::unique_ptr<EvidenceStream> NaiveMeanStream::clone() const
{
    return std::make_unique<NaiveMeanStream>(*this);
}

std::string NaiveMeanStream::describe() const
{
    std::string s = "naive-mean(";
    for (size_t i = 0; i < parts_.size(); ++i) {
        if (i)
            s += ", ";
        s += parts_[i]->describe();
    }
    return s + ")";
}

// ---- spine ----

SpineStream::SpineStream(double kappa, std::unique_ptr<EvidenceStream> inner)
    : kappa_(kappa), inner_(std::move(inner))
{
    if (!(kappa_ >= 0.0 && kappa_ <= 1.0))
        throw ConfigError("spine kappa must lie in [0,1]");
}

SpineStream::SpineStream(const SpineStream& o) : StreamBase(o), kappa_(o.kappa_), inner_(o.inner_->clone()) {}

Evidence SpineStream::step(double x)
{
    Evidence cur = inner_->step(x);
    Evidence out = spine_eval(kappa_, inner_->runningMax(), cur);
    record(out);
    return out;
}

void SpineStream::reset(std::uint64_t seed)
{
    inner_->reset(child_seed(seed, 0));
    clearTrack();
}

std::unique_ptr<EvidenceStream> SpineStream::clone() const
{
    return std::make_unique<SpineStream>(*this);
}

std::string SpineStream::describe() const
{
    return "spine(" + fmt_double(kappa_) + ", " + inner_->describe() + ")";
}

// ---- p-process views ----

double PProcessView::value() const
{
    Evidence e = mode == PMode::Reciprocal ? source->current() : source->runningMax();
    return std::min(1.0, std::exp(-e.logValue));
}

PProcessView p_lift(PProcessView v)
{
    return v;
}

CalibratedStream::CalibratedStream(std::unique_ptr<EvidenceStream> inner, CalibratorSpec c, PMode mode)
    : inner_(std::move(inner)), cal_(c), mode_(mode)
{
    validate(cal_);
}

CalibratedStream::CalibratedStream(const CalibratedStream& o)
    : StreamBase(o), inner_(o.inner_->clone()), cal_(o.cal_), mode_(o.mode_)
{
}

Evidence CalibratedStream::step(double x)
{
    inner_->step(x);
    PProcessView v = p_lift(PProcessView{inner_.get(), mode_});
    Evidence out = calibrator_eval(cal_, v.value());
    record(out);
    return out;
}

void CalibratedStream::reset(std::uint64_t seed)
{
    inner_->reset(child_seed(seed, 0));
    clearTrack();
}

std::unique_ptr<EvidenceStream> CalibratedStream::clone() const
{
    return std::make_unique<CalibratedStream>(*this);
}

std::string CalibratedStream::describe() const
{
    std::string s = "calibrate(" + to_string(cal_) + ", " + inner_->describe();
    if (mode_ == PMode::Reciprocal)
        s += ", p=current";
    return s + ")";
}

bool CalibratedStream::dataFiltrationValid() const
{
    // the running-max p-process lifts for free; the pointwise reciprocal does not
    return mode_ == PMode::ReciprocalMax || inner_->dataFiltrationValid();
}

std::unique_ptr<EvidenceStream> e_lift(std::unique_ptr<EvidenceStream> s, const AdjusterSpec& a, MaxMode mode)
{
    return std::make_unique<LiftedStream>(std::move(s), a, mode);
}

std::unique_ptr<EvidenceStream> combine(std::vector<Component> parts)
{
    return std::make_unique<CombinedStream>(std::move(parts));
}

std::unique_ptr<EvidenceStream> calibrate_p_to_e(std::unique_ptr<EvidenceStream> s, const CalibratorSpec& c,
    PMode mode)
{
    return std::make_unique<CalibratedStream>(std::move(s), c, mode);
}

// ---- forecast combiners ----

Evidence forecast_combine_adjusted(const std::vector<Evidence>& maxima, const AdjusterSpec& a)
{
    if (maxima.empty())
        throw DomainError("need at least one stream");
    double acc = -kInf;
    for (auto e : maxima)
        acc = log_add(acc, adjuster_eval(a, max(e, Evidence::one())).logValue);
    return Evidence::fromLog(acc - std::log(static_cast<double>(maxima.size())));
}

double forecast_harmonic_p(const std::vector<Evidence>& maxima)
{
    if (maxima.size() < 2)
        throw DomainError("harmonic-mean merging needs K >= 2");
    double K = static_cast<double>(maxima.size());
    double p = std::numbers::e * std::log(K) / mean_linear(maxima);
    return std::clamp(p, 0.0, 1.0);
}

double forecast_scaled_mean(const std::vector<Evidence>& maxima)
{
    if (maxima.size() < 2)
        throw DomainError("scaled mean needs K >= 2");
    double K = static_cast<double>(maxima.size());
    return mean_linear(maxima) / (std::numbers::e * std::log(K));
}

Evidence forecast_calibrated_e(const std::vector<Evidence>& maxima, const CalibratorSpec& c)
{
    return calibrator_eval(c, forecast_harmonic_p(maxima));
}

double forecast_lagged_mean(const std::vector<Evidence>& currents)
{
    return mean_linear(currents);
}

} // namespace savi
