#pragma once

#include <string>
#include <vector>

#include "savi/core.hpp"
#include "savi/numerics.hpp"

namespace savi {

enum class AdjusterKind { Power, Mix, KV, Sqrt, Zero, Spine };
enum class CalibratorKind { Power, Mix };

struct AdjusterSpec {
    AdjusterKind kind = AdjusterKind::Mix;
    double kappa = 0.0;
    // Multiplies A; only used to build deliberately inadmissible variants.
    double scale = 1.0;

    static AdjusterSpec mix() { return {AdjusterKind::Mix}; }
    static AdjusterSpec kv() { return {AdjusterKind::KV}; }
    static AdjusterSpec sqrt() { return {AdjusterKind::Sqrt}; }
    static AdjusterSpec power(double k) { return {AdjusterKind::Power, k}; }
    static AdjusterSpec zero(double k) { return {AdjusterKind::Zero, k}; }
    static AdjusterSpec spine(double k) { return {AdjusterKind::Spine, k}; }

    bool operator==(const AdjusterSpec&) const = default;
};

struct CalibratorSpec {
    CalibratorKind kind = CalibratorKind::Mix;
    double kappa = 0.0;

    static CalibratorSpec mix() { return {CalibratorKind::Mix}; }
    static CalibratorSpec power(double k) { return {CalibratorKind::Power, k}; }

    bool operator==(const CalibratorSpec&) const = default;
};

void validate(const AdjusterSpec& a);
void validate(const CalibratorSpec& c);

// Parse `mix`, `kv`, `sqrt`, `power:0.5`, `zero:1`, `spine:0.5`.
AdjusterSpec parse_adjuster(const std::string& s);
std::string to_string(const AdjusterSpec& a);
CalibratorSpec parse_calibrator(const std::string& s);
std::string to_string(const CalibratorSpec& c);

// log A(e) for log e = L >= 0. Spine is rejected.
double log_adjust(const AdjusterSpec& a, double L);
Evidence adjuster_eval(const AdjusterSpec& a, Evidence e);

// Mix and Power have closed forms that extend below e = 1; other kinds
// are clamped to A(1) there.
Evidence adjuster_eval_extended(const AdjusterSpec& a, Evidence e);

double log_calibrate(const CalibratorSpec& c, double p);
Evidence calibrator_eval(const CalibratorSpec& c, double p);

Evidence spine_eval(double kappa, Evidence eMax, Evidence eCur);

struct Admissibility {
    double integral = 0.0;
    double errorEstimate = 0.0;
    bool converged = true;
    bool admissible = false;
};

Admissibility check_adjuster_admissibility(const AdjusterSpec& a, double tol = 1e-6);

// A(e) = C(1/e) views.
struct AdjusterView {
    CalibratorSpec source;
    Evidence operator()(Evidence e) const;
};

struct CalibratorView {
    AdjusterSpec source;
    Evidence operator()(double p) const;
};

AdjusterView adjuster_from_calibrator(const CalibratorSpec& c);
CalibratorView calibrator_from_adjuster(const AdjusterSpec& a);

// First e in [lo, hi] where A_mix(e) >= A_KV(e), by bisection.
double mix_kv_crossover(double lo = 2.0, double hi = 10.0, double tol = 1e-12);

std::vector<AdjusterSpec> shipped_adjusters();

} // namespace savi
