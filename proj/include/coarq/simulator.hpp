#pragma once

#include "coarq/analytics.hpp"
#include "coarq/execution.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace coarq {

/// R-D draw during a relay retransmission.
enum class RdSampling {
    unconditional,           // an outage draw silences the relay and the packet is lost
    non_outage_conditioned,  // redraw from the law truncated to the non-outage region
};

enum class SimScheme { coop, conventional, slowfade, fixed, lmsc };

struct SimConfig {
    std::uint64_t frames = 1'000'000;
    std::uint64_t seed = 1;
    RdSampling rd_sampling = RdSampling::non_outage_conditioned;
    SimScheme scheme = SimScheme::coop;
    Execution exec = Execution::parallel;
};

struct SimResult {
    std::uint64_t frames = 0;
    double eta_hat = 0.0;
    std::optional<double> eta_se;  // empty with fewer than two frames
    double plr_hat = 0.0;
    std::optional<double> plr_se;  // empty when nothing was transmitted

    std::uint64_t transmitted = 0;
    std::uint64_t lost = 0;
    std::uint64_t outage_frames = 0;
    std::uint64_t relay_engagements = 0;
    /// Transmitted packets by number of retransmissions, 0..N_r.
    std::vector<std::uint64_t> retransmissions;

    std::uint64_t lost_undecoded = 0;  // relay failed to decode, no retransmission
    std::uint64_t lost_exhausted = 0;  // all N_r retransmissions failed
    std::uint64_t lost_silent = 0;     // relay silenced by an R-D outage draw
};

/// Closed-form policy whose expectation the given sampling rule reproduces.
RdOutage analytic_policy(RdSampling sampling);

/// Cooperative ARQ (cfg.scheme = coop) or the satellite relay scheme (lmsc), where an
/// S-D outage frame transmits at the outage rate on the mode-1 error curve.
SimResult run(const RelayLinkModel& model, const SimConfig& cfg);

/// Conventional ARQ: the first attempt uses `tx`, every retransmission a fresh draw
/// from the same law switched by `rtx`.
SimResult run_conventional(const LinkDesign& tx, const LinkDesign& rtx, int nr, const SimConfig& cfg);

/// One retransmission on an unchanged channel.
SimResult run_slowfade(const LinkDesign& link, const SimConfig& cfg);

/// Fixed rates: mode n from the source, mode m from the relay, N_r = 1.
SimResult run_fixed(const FixedRateModel& model, int n, int m, const SimConfig& cfg);

/// Frames per independently reduced block. Results are reduced in block order, so
/// they do not depend on the thread count.
inline constexpr std::uint64_t kSimBlockFrames = 1 << 15;

}  // namespace coarq
