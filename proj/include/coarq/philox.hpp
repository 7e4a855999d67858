#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace coarq {

using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

/// Philox4x32 with 10 rounds (Salmon et al., SC'11). Pure function of (counter, key).
PhiloxCounter philox4x32_10(PhiloxCounter ctr, PhiloxKey key);

/// A reproducible random stream identified by (seed, stream id). Distinct stream ids
/// give statistically independent sequences, so every simulated frame can own one
/// and results do not depend on how frames are spread over threads.
class PhiloxStream {
public:
    using result_type = std::uint32_t;

    PhiloxStream(std::uint64_t seed, std::uint64_t stream);

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
    result_type operator()() { return next_u32(); }

    std::uint32_t next_u32();
    /// Uniform on the open interval (0, 1) with 53 random bits.
    double uniform();
    /// Unit-mean exponential.
    double exponential();
    /// Standard normal (Box-Muller).
    double normal();

private:
    PhiloxKey key_;
    PhiloxCounter counter_;
    PhiloxCounter block_{};
    int used_ = 4;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace coarq
