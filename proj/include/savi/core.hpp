#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <stdexcept>
#include <string>

namespace savi {

struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Extended nonnegative real kept as its natural log.
struct Evidence {
    double logValue = 0.0;

    static Evidence fromLog(double l) { return Evidence{l}; }
    static Evidence fromLinear(double v)
    {
        if (!(v >= 0.0))
            throw DomainError("evidence must be nonnegative");
        return Evidence{std::log(v)};
    }
    static Evidence one() { return Evidence{0.0}; }
    static Evidence zero() { return Evidence{-std::numeric_limits<double>::infinity()}; }
    static Evidence infinity() { return Evidence{std::numeric_limits<double>::infinity()}; }

    double value() const { return std::exp(logValue); }
    bool isInfinite() const { return logValue == std::numeric_limits<double>::infinity(); }

    friend bool operator<(Evidence a, Evidence b) { return a.logValue < b.logValue; }
    friend bool operator<=(Evidence a, Evidence b) { return a.logValue <= b.logValue; }
    friend bool operator==(Evidence a, Evidence b) { return a.logValue == b.logValue; }
};

inline Evidence max(Evidence a, Evidence b) { return a.logValue < b.logValue ? b : a; }

// Sequential evidence source. Observations are doubles; binary streams
// expect 0 or 1.
class EvidenceStream {
public:
    virtual ~EvidenceStream() = default;

    virtual Evidence step(double x) = 0;
    virtual Evidence current() const = 0;
    // Running maximum with the t = 0 floor of 1 included.
    virtual Evidence runningMax() const = 0;
    virtual void reset(std::uint64_t seed) = 0;
    virtual std::unique_ptr<EvidenceStream> clone() const = 0;
    // Canonical spec string; parses back to an equivalent stream.
    virtual std::string describe() const = 0;
    // Valid in the data filtration (as opposed to only a coarsening of it).
    virtual bool dataFiltrationValid() const = 0;
    // False for comparators that are not e-processes in any filtration.
    virtual bool isEProcess() const { return true; }
    virtual std::int64_t time() const = 0;
};

// Tracks current value and running max for concrete streams.
class StreamBase : public EvidenceStream {
public:
    Evidence current() const override { return cur_; }
    Evidence runningMax() const override { return max_; }
    std::int64_t time() const override { return t_; }

protected:
    void record(Evidence e)
    {
        ++t_;
        cur_ = e;
        max_ = max(max_, e);
    }
    void clearTrack()
    {
        t_ = 0;
        cur_ = Evidence::one();
        max_ = Evidence::one();
    }

    std::int64_t t_ = 0;
    Evidence cur_ = Evidence::one();
    Evidence max_ = Evidence::one();
};

} // namespace savi
