#include "savi/rng.hpp"

#include <cmath>
#include <numbers>

namespace savi {

std::uint64_t mix64(std::uint64_t z)
{
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::uint64_t split_seed(std::uint64_t master, std::uint64_t stream, std::uint64_t run)
{
    std::uint64_t h = mix64(master);
    h = mix64(h ^ (stream * 0xd1b54a32d192ed03ULL));
    h = mix64(h ^ (run * 0x8cb92ba72f3d8dd7ULL));
    return h;
}

double Rng::normal()
{
    // Box-Muller, one draw per call so the stream position is simple to reason about
    double u1 = uniform();
    double u2 = uniform();
    if (u1 <= 0.0)
        u1 = 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

} // namespace savi
