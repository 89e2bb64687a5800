#pragma once

#include <cstdint>
#include <random>

namespace savi {

// Stream identifiers for seed splitting.
enum class StreamId : std::uint64_t {
    Data = 1,
    ConformalU = 2,
    StopU = 3,
    Child = 4,
};

std::uint64_t mix64(std::uint64_t z);
// Seed for run `run` of stream `stream` under `master`.
std::uint64_t split_seed(std::uint64_t master, std::uint64_t stream, std::uint64_t run);
inline std::uint64_t split_seed(std::uint64_t master, StreamId s, std::uint64_t run)
{
    return split_seed(master, static_cast<std::uint64_t>(s), run);
}

class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) : eng_(seed) {}

    void seed(std::uint64_t s) { eng_.seed(s); }
    // Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }
    int bernoulli(double p) { return uniform() < p ? 1 : 0; }
    double normal();
    std::uint64_t bits() { return eng_(); }

private:
    std::mt19937_64 eng_;
};

} // namespace savi
