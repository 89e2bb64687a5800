#pragma once

#include <functional>

#include "savi/adjust.hpp"
#include "savi/core.hpp"
#include "savi/sim.hpp"

namespace savi {

struct RandomizedDecision {
    std::int64_t stoppedAt = 0;
    bool viaThreshold = false;
    double u = 1.0; // 1 when no draw was needed
    Evidence finalEvidence;
    Evidence liftedAtStop;
    bool reject = false;
    bool truncated = false;
};

// Draws the external randomizer. Anything stochastically larger than
// Uniform[0,1] keeps the guarantees; the default is exactly uniform.
using UDistribution = std::function<double(Rng&)>;
double uniform_u(Rng& r);

// min(u / A(e*_tau), 1)
double ltr_pvalue(Evidence liftedValueAtStop, double u);

RandomizedDecision randomized_ville_run(EvidenceStream& s, const AdjusterSpec& a, StopRule& rule, Generator& g,
    double alpha, Rng& data, Rng& uRng, const UDistribution& draw = uniform_u);

double rtl_bound(double alpha);

struct RateEstimate {
    std::int64_t runs = 0;
    double rate = 0.0;
    double se = 0.0;
    std::int64_t truncated = 0;
    double bound = 0.0; // rtl only
    double thresholdRate = 0.0; // ville only: fraction rejected before tau
};

// P(ltr p-value <= alpha) with A applied to the stream's running max.
RateEstimate ltr_experiment(const Pipeline& p, const AdjusterSpec& a, const GeneratorSpec& gen, const StopSpec& stop,
    double alpha, const McConfig& cfg);
RateEstimate ville_experiment(const Pipeline& p, const AdjusterSpec& a, const GeneratorSpec& gen,
    const StopSpec& stop, double alpha, const McConfig& cfg);
// P(e_tau >= U / alpha) for the raw stream.
RateEstimate rtl_violation_experiment(const Pipeline& p, const GeneratorSpec& gen, const StopSpec& stop,
    double alpha, const McConfig& cfg);

} // namespace savi
