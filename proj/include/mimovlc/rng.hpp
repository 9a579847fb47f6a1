#pragma once

#include <cstdint>
#include <random>

#include "mimovlc/common.hpp"

namespace mimovlc::rng {

using Engine = std::mt19937_64;

/// Purpose tags for counter-based stream splitting.
enum class Stream : std::uint64_t {
    Bits = 1,
    Noise = 2,
    Delay = 3,
    Point = 4,
};

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Seed for an independent stream identified by (master, purpose, counter...).
/// The same tuple always yields the same seed, independent of evaluation order.
constexpr std::uint64_t derive(std::uint64_t master, Stream purpose, std::uint64_t a = 0,
                               std::uint64_t b = 0) noexcept
{
    std::uint64_t s = splitmix64(master);
    s = splitmix64(s ^ static_cast<std::uint64_t>(purpose));
    s = splitmix64(s ^ a);
    return splitmix64(s ^ b);
}

inline Engine engine(std::uint64_t master, Stream purpose, std::uint64_t a = 0, std::uint64_t b = 0)
{
    return Engine(derive(master, purpose, a, b));
}

inline Bits random_bits(Engine& eng, std::size_t count)
{
    Bits bits(count);
    std::uint64_t word = 0;
    for (std::size_t i = 0; i < count; ++i) {
        if (i % 64 == 0)
            word = eng();
        bits[i] = static_cast<std::uint8_t>((word >> (i % 64)) & 1u);
    }
    return bits;
}

} // namespace mimovlc::rng
