#pragma once

// Every random draw in the project comes from here: a 64-bit Mersenne
// Twister seeded from (config seed, stream name). Boost.Random
// distributions are used because their output is fixed across standard
// library implementations; std:: distributions are not.

#include <cstdint>
#include <string_view>

#include <boost/random/mersenne_twister.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_01.hpp>

namespace specdyn {

using Rng = boost::random::mt19937_64;

/// Independent generator for a named purpose ("kernel-basis", "weights/3"…).
inline Rng make_rng(std::uint64_t seed, std::string_view stream)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
    for (unsigned char c : stream) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    // splitmix64 finalizer
    std::uint64_t z = seed ^ h;
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    z ^= z >> 31;
    return Rng(z);
}

inline double uniform01(Rng& rng)
{
    return boost::random::uniform_01<double>{}(rng);
}

inline double uniform(Rng& rng, double lo, double hi)
{
    return lo + (hi - lo) * uniform01(rng);
}

inline double standard_normal(Rng& rng)
{
    return boost::random::normal_distribution<double>{}(rng);
}

}  // namespace specdyn
