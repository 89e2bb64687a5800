#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "savi/adjust.hpp"
#include "savi/core.hpp"

namespace savi {

// Which running maximum feeds the adjuster. Floor includes e_0 = 1 so the
// adjuster sees [1, inf]; Observed uses only emitted values and relies on
// the closed-form continuation below 1 (Mix, Power) or clamps.
enum class MaxMode { Floor, Observed };

class LiftedStream : public StreamBase {
public:
    LiftedStream(std::unique_ptr<EvidenceStream> inner, AdjusterSpec a, MaxMode mode = MaxMode::Floor);
    LiftedStream(const LiftedStream& o);

    Evidence step(double x) override;
    void reset(std::uint64_t seed) override;
    std::unique_ptr<EvidenceStream> clone() const override;
    std::string describe() const override;
    bool dataFiltrationValid() const override { return true; }
    bool isEProcess() const override { return inner_->isEProcess(); }

    const EvidenceStream& inner() const { return *inner_; }
    Evidence innerMax() const { return mx_; }

private:
    std::unique_ptr<EvidenceStream> inner_;
    AdjusterSpec adj_;
    MaxMode mode_;
    Evidence mx_;
};

using Component = std::pair<double, std::unique_ptr<EvidenceStream>>;

class CombinedStream : public StreamBase {
public:
    explicit CombinedStream(std::vector<Component> parts);
    CombinedStream(const CombinedStream& o);

    Evidence step(double x) override;
    void reset(std::uint64_t seed) override;
    std::unique_ptr<EvidenceStream> clone() const override;
    std::string describe() const override;
    bool dataFiltrationValid() const override;
    bool isEProcess() const override;

    size_t size() const { return parts_.size(); }
    const EvidenceStream& component(size_t i) const { return *parts_[i].second; }
    double weight(size_t i) const { return parts_[i].first; }

private:
    std::vector<Component> parts_;
};

// Equal-weight average of raw streams without lifting. Comparator only.
class NaiveMeanStream : public StreamBase {
public:
    explicit NaiveMeanStream(std::vector<std::unique_ptr<EvidenceStream>> parts);
    NaiveMeanStream(const NaiveMeanStream& o);

    Evidence step(double x) override;
    void reset(std::uint64_t seed) override;
    std::unique_ptr<EvidenceStream> clone() const override;
    std::string describe() const override;
    bool dataFiltrationValid() const override { return false; }
    bool isEProcess() const override { return false; }

private:
    std::vector<std::unique_ptr<EvidenceStream>> parts_;
};

// kappa e*^(1-kappa) + (1-kappa) e*^(-kappa) e. Negative control only.
class SpineStream : public StreamBase {
public:
    SpineStream(double kappa, std::unique_ptr<EvidenceStream> inner);
    SpineStream(const SpineStream& o);

    Evidence step(double x) override;
    void reset(std::uint64_t seed) override;
    std::unique_ptr<EvidenceStream> clone() const override;
    std::string describe() const override;
    bool dataFiltrationValid() const override { return false; }
    bool isEProcess() const override { return false; }

private:
    double kappa_;
    std::unique_ptr<EvidenceStream> inner_;
};

enum class PMode { Reciprocal, ReciprocalMax };

struct PProcessView {
    const EvidenceStream* source = nullptr;
    PMode mode = PMode::ReciprocalMax;

    double value() const;
};

// Identity on values; marks that the p-process is used in the finer filtration.
PProcessView p_lift(PProcessView v);

// Per-step C(p_t) of a p-process view over `inner`.
class CalibratedStream : public StreamBase {
public:
    CalibratedStream(std::unique_ptr<EvidenceStream> inner, CalibratorSpec c, PMode mode = PMode::ReciprocalMax);
    CalibratedStream(const CalibratedStream& o);

    Evidence step(double x) override;
    void reset(std::uint64_t seed) override;
    std::unique_ptr<EvidenceStream> clone() const override;
    std::string describe() const override;
    bool dataFiltrationValid() const override;
    bool isEProcess() const override { return inner_->isEProcess(); }

private:
    std::unique_ptr<EvidenceStream> inner_;
    CalibratorSpec cal_;
    PMode mode_;
};

std::unique_ptr<EvidenceStream> e_lift(std::unique_ptr<EvidenceStream> s, const AdjusterSpec& a,
    MaxMode mode = MaxMode::Floor);
std::unique_ptr<EvidenceStream> combine(std::vector<Component> parts);
std::unique_ptr<EvidenceStream> calibrate_p_to_e(std::unique_ptr<EvidenceStream> s, const CalibratorSpec& c,
    PMode mode = PMode::ReciprocalMax);

// ---- combiners over K per-offset streams ----
// `maxima` are running maxima with the floor 1; `currents` are raw values.

Evidence forecast_combine_adjusted(const std::vector<Evidence>& maxima, const AdjusterSpec& a);
double forecast_harmonic_p(const std::vector<Evidence>& maxima);
double forecast_scaled_mean(const std::vector<Evidence>& maxima);
Evidence forecast_calibrated_e(const std::vector<Evidence>& maxima, const CalibratorSpec& c);
double forecast_lagged_mean(const std::vector<Evidence>& currents);

} // namespace savi
