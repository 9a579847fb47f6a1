#pragma once

#include <bit>
#include <cstdint>
#include <span>
#include <vector>

namespace mimovlc::bytes {

inline void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v)
{
    for (int i = 0; i < 4; ++i)
        out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

inline std::uint32_t get_u32(std::span<const std::uint8_t> in, std::size_t at)
{
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i)
        v |= static_cast<std::uint32_t>(in[at + i]) << (8 * i);
    return v;
}

inline void put_f32(std::vector<std::uint8_t>& out, float v) { put_u32(out, std::bit_cast<std::uint32_t>(v)); }

inline float get_f32(std::span<const std::uint8_t> in, std::size_t at)
{
    return std::bit_cast<float>(get_u32(in, at));
}

} // namespace mimovlc::bytes
