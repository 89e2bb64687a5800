#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "savi/core.hpp"
#include "savi/rng.hpp"

namespace savi {

// ---- universal-inference exchangeability e-process (binary data) ----

struct UiExchState {
    std::int64_t t = 0;
    std::int64_t n0 = 0, n1 = 0;
    std::int64_t n[2][2] = {{0, 0}, {0, 0}};
    std::optional<int> prevSymbol;
    double logNumerator = 0.0; // KT mixture over Markov transitions
};

Evidence ui_exch_step(UiExchState& st, int x);
// log of the Gamma-ratio numerator recomputed from counts
double ui_exch_log_numerator(const UiExchState& st);
// log sup_mu of the IID Bernoulli likelihood, with 0^0 = 1
double ui_exch_log_mle(const UiExchState& st);

class UiExchStream : public StreamBase {
public:
    Evidence step(double x) override;
    void reset(std::uint64_t seed) override;
    std::unique_ptr<EvidenceStream> clone() const override;
    std::string describe() const override { return "ui-exch"; }
    bool dataFiltrationValid() const override { return true; }
    const UiExchState& state() const { return st_; }

private:
    UiExchState st_;
};

// ---- conformal p-values and test martingales ----

enum class ConformalMode { FixedLambda, SimpleJumper };

struct ConformalState {
    std::int64_t t = 0;
    std::int64_t count1 = 0;
    ConformalMode mode = ConformalMode::FixedLambda;
    double lambda = 1.0;
    double eps = 0.01;
    std::array<double, 3> weights{1.0 / 3, 1.0 / 3, 1.0 / 3}; // for lambda = -1, 0, 1
    double logWealth = 0.0;
    // jumper: fraction of wealth currently held by each lambda
    std::array<double, 3> shares{1.0 / 3, 1.0 / 3, 1.0 / 3};

    static ConformalState fixed(double lambda);
    static ConformalState jumper(double eps, std::array<double, 3> w = {1.0 / 3, 1.0 / 3, 1.0 / 3});
};

// Observes x and returns its randomized conformal p-value. Counts include x.
double conformal_pvalue(ConformalState& st, int x, double u);
Evidence conformal_step(ConformalState& st, double s);

class ConformalStream : public StreamBase {
public:
    explicit ConformalStream(ConformalState init);
    Evidence step(double x) override;
    void reset(std::uint64_t seed) override;
    std::unique_ptr<EvidenceStream> clone() const override;
    std::string describe() const override;
    bool dataFiltrationValid() const override { return false; }
    const ConformalState& state() const { return st_; }
    double lastPValue() const { return lastS_; }

private:
    ConformalState init_;
    ConformalState st_;
    Rng rng_;
    double lastS_ = 0.5;
};

// ---- bounded-mean betting martingale ----

enum class BetStrategy { Constant, ScaledDecay };

struct BoundedMeanState {
    std::int64_t t = 0;
    double logWealth = 0.0;
    double mu = 0.5;
    BetStrategy strategy = BetStrategy::Constant;
    double lambda = 1.0; // Constant
    double c = 2.716;    // ScaledDecay numerator, about sqrt(2 log 40)
    double cap = 1e3;    // ScaledDecay clip when mu = 0
    // running quantities for ScaledDecay
    double sumX = 0.0;
    double sumSqDev = 0.0;

    static BoundedMeanState constant(double mu, double lambda);
    static BoundedMeanState scaledDecay(double mu, double c = 2.716);
};

void validate(const BoundedMeanState& st);
double bounded_mean_next_lambda(const BoundedMeanState& st);
Evidence bounded_mean_step(BoundedMeanState& st, double x);

class BoundedMeanStream : public StreamBase {
public:
    explicit BoundedMeanStream(BoundedMeanState init);
    Evidence step(double x) override;
    void reset(std::uint64_t seed) override;
    std::unique_ptr<EvidenceStream> clone() const override;
    std::string describe() const override;
    bool dataFiltrationValid() const override { return true; }

private:
    BoundedMeanState init_;
    BoundedMeanState st_;
};

// ---- scale-invariant Gaussian e-processes ----

struct GaussianState {
    std::int64_t t = 0;
    double mean = 0.0;
    double m2dev = 0.0; // sum of squared deviations (Welford)
    double sumSq = 0.0;
    // t-test: product starts once the plug-in scale is positive
    bool started = false;
    std::int64_t m = 0;
    double sumSqSinceStart = 0.0;
    double logProduct = 0.0;
    // MaxInv effect sizes
    double d0 = 0.0, d1 = 1.0;

    double sigmaHat() const;
};

Evidence gaussian_ui_ttest_step(GaussianState& st, double x);
Evidence gaussian_maxinv_step(GaussianState& st, double x);
// log of the MaxInv ratio for summary statistics (t, mean, mean of squares)
double gaussian_maxinv_log_ratio(std::int64_t t, double mean, double meanSq, double d0, double d1,
    int points = 400, double halfWidth = 12.0);

class GaussianUiStream : public StreamBase {
public:
    Evidence step(double x) override;
    void reset(std::uint64_t seed) override;
    std::unique_ptr<EvidenceStream> clone() const override;
    std::string describe() const override { return "gauss-ui"; }
    bool dataFiltrationValid() const override { return true; }

private:
    GaussianState st_;
};

class GaussianMaxInvStream : public StreamBase {
public:
    GaussianMaxInvStream(double d0, double d1);
    Evidence step(double x) override;
    void reset(std::uint64_t seed) override;
    std::unique_ptr<EvidenceStream> clone() const override;
    std::string describe() const override;
    // valid only in the scale-invariant coarsening
    bool dataFiltrationValid() const override { return false; }

private:
    GaussianState st_;
};

// Atom spec strings: ui-exch, conf:lambda=1, conf:jumper,eps=0.01,
// bounded-mean:mu=0.5,lambda=1, bounded-mean:mu=0.5,decay, gauss-ui,
// gauss-maxinv:d0=0,d1=1
std::unique_ptr<EvidenceStream> make_stream(const std::string& spec);
bool is_stream_name(const std::string& name);
// parameter keys an atom accepts, used to disambiguate commas in pipelines
std::vector<std::string> stream_param_keys(const std::string& name);
std::vector<std::string> stream_spec_help();

} // namespace savi
