#pragma once

#include <array>
#include <cstdint>

namespace hem
{

// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
class Philox4x32
{
public:
    using counter_type = std::array<std::uint32_t, 4>;
    using key_type = std::array<std::uint32_t, 2>;

    static counter_type block(counter_type ctr, key_type key) noexcept
    {
        for (int r = 0; r < 10; ++r) {
            if (r > 0) {
                key[0] += 0x9E3779B9u;
                key[1] += 0xBB67AE85u;
            }
            const std::uint64_t p0 = std::uint64_t(0xD2511F53u) * ctr[0];
            const std::uint64_t p1 = std::uint64_t(0xCD9E8D57u) * ctr[2];
            ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0], static_cast<std::uint32_t>(p1),
                   static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1], static_cast<std::uint32_t>(p0)};
        }
        return ctr;
    }
};

// Independent stream for (seed, stream index); draws are numbered by an internal counter.
class CounterStream
{
public:
    CounterStream(std::uint64_t seed, std::uint64_t stream) noexcept
        : m_key{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
          m_stream{static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)}
    {
    }

    // Uniform on [0, 1) with 53 random bits.
    double uniform() noexcept
    {
        if (m_used >= 2) {
            refill();
        }
        const auto hi = m_block[2 * m_used];
        const auto lo = m_block[2 * m_used + 1];
        ++m_used;
        const std::uint64_t bits = (std::uint64_t(hi) << 32 | lo) >> 11;
        return static_cast<double>(bits) * 0x1.0p-53;
    }

private:
    void refill() noexcept
    {
        m_block = Philox4x32::block({static_cast<std::uint32_t>(m_counter), static_cast<std::uint32_t>(m_counter >> 32),
                                     m_stream[0], m_stream[1]},
                                    m_key);
        ++m_counter;
        m_used = 0;
    }

    Philox4x32::key_type m_key;
    std::array<std::uint32_t, 2> m_stream;
    std::uint64_t m_counter = 0;
    Philox4x32::counter_type m_block{};
    int m_used = 2;
};

} // namespace hem
