#include "coarq/simulator.hpp"

#include "coarq/errors.hpp"
#include "coarq/philox.hpp"

#include <algorithm>
#include <cmath>

namespace coarq {

namespace {

enum class Loss { none, undecoded, exhausted, silent };

struct Frame {
    double eta = 0.0;
    bool transmitted = false;
    bool engaged = false;
    int retransmissions = 0;
    Loss loss = Loss::none;
};

struct Tally {
    double eta_sum = 0.0;
    double eta_sq_sum = 0.0;
    std::uint64_t transmitted = 0;
    std::uint64_t outage = 0;
    std::uint64_t engaged = 0;
    std::uint64_t lost[4] = {0, 0, 0, 0};
    std::vector<std::uint64_t> hist;

    void add(const Frame& f)
    {
        eta_sum += f.eta;
        eta_sq_sum += f.eta * f.eta;
        if (!f.transmitted) {
            ++outage;
            return;
        }
        ++transmitted;
        engaged += f.engaged ? 1 : 0;
        ++lost[static_cast<int>(f.loss)];
        ++hist[static_cast<std::size_t>(f.retransmissions)];
    }

    void merge(const Tally& o)
    {
        eta_sum += o.eta_sum;
        eta_sq_sum += o.eta_sq_sum;
        transmitted += o.transmitted;
        outage += o.outage;
        engaged += o.engaged;
        for (int i = 0; i < 4; ++i) {
            lost[i] += o.lost[i];
        }
        for (std::size_t i = 0; i < hist.size(); ++i) {
            hist[i] += o.hist[i];
        }
    }
};

// Mode selected by the switching thresholds; 0 is the outage mode.
int select_mode(const LinkDesign& link, double gamma)
{
    const auto& t = link.thresholds();
    return static_cast<int>(std::upper_bound(t.begin(), t.end(), gamma) - t.begin());
}

template <typename Kernel>
SimResult simulate(const SimConfig& cfg, int nr, Kernel kernel)
{
    if (cfg.frames < 1) {
        throw DomainError("simulation needs at least one frame");
    }
    const std::uint64_t blocks = (cfg.frames + kSimBlockFrames - 1) / kSimBlockFrames;
    std::vector<Tally> tallies(blocks);
    const auto count = static_cast<long long>(blocks);
#pragma omp parallel for schedule(dynamic, 1) if (cfg.exec == Execution::parallel)
    for (long long b = 0; b < count; ++b) {
        Tally& t = tallies[static_cast<std::size_t>(b)];
        t.hist.assign(static_cast<std::size_t>(nr) + 1, 0);
        const std::uint64_t first = static_cast<std::uint64_t>(b) * kSimBlockFrames;
        const std::uint64_t last = std::min(cfg.frames, first + kSimBlockFrames);
        for (std::uint64_t f = first; f < last; ++f) {
            PhiloxStream rng(cfg.seed, f);
            t.add(kernel(rng));
        }
    }
    Tally total;
    total.hist.assign(static_cast<std::size_t>(nr) + 1, 0);
    for (const auto& t : tallies) {
        total.merge(t);
    }

    SimResult r;
    r.frames = cfg.frames;
    const double n = static_cast<double>(cfg.frames);
    r.eta_hat = total.eta_sum / n;
    if (cfg.frames > 1) {
        const double var = std::max(0.0, (total.eta_sq_sum - n * r.eta_hat * r.eta_hat) / (n - 1.0));
        r.eta_se = std::sqrt(var / n);
    }
    r.transmitted = total.transmitted;
    r.lost_undecoded = total.lost[static_cast<int>(Loss::undecoded)];
    r.lost_exhausted = total.lost[static_cast<int>(Loss::exhausted)];
    r.lost_silent = total.lost[static_cast<int>(Loss::silent)];
    r.lost = r.lost_undecoded + r.lost_exhausted + r.lost_silent;
    if (r.transmitted > 0) {
        const double tx = static_cast<double>(r.transmitted);
        r.plr_hat = static_cast<double>(r.lost) / tx;
        r.plr_se = std::sqrt(r.plr_hat * (1.0 - r.plr_hat) / tx);
    }
    r.outage_frames = total.outage;
    r.relay_engagements = total.engaged;
    r.retransmissions = std::move(total.hist);
    return r;
}

// Relay retransmissions after a decoded S-D failure; inv_len holds 1/R of the
// symbols already spent.
void relay_phase(const LinkDesign& rd, int nr, RdSampling sampling, PhiloxStream& rng, Frame& f,
                 double& inv_len)
{
    const ModeSet& ms = rd.mode_set();
    const bool conditioned = sampling == RdSampling::non_outage_conditioned;
    const bool reachable = rd.usage_prob() > 0.0;
    f.engaged = true;
    for (int k = 1; k <= nr; ++k) {
        int m = 0;
        double g2 = 0.0;
        if (!conditioned || reachable) {
            g2 = conditioned ? rd.dist().sample_above(rd.lower(1), rng) : rd.dist().sample(rng);
            m = select_mode(rd, g2);
        }
        if (m == 0) {
            f.loss = Loss::silent;
            return;
        }
        inv_len += 1.0 / ms.rate(m);
        ++f.retransmissions;
        if (rng.uniform() >= per_instantaneous(ms.mode(m), g2)) {
            return;
        }
    }
    f.loss = Loss::exhausted;
}

}  // namespace

RdOutage analytic_policy(RdSampling sampling)
{
    return sampling == RdSampling::unconditional ? RdOutage::silent_loss : RdOutage::conditioned;
}

SimResult run(const RelayLinkModel& model, const SimConfig& cfg)
{
    if (cfg.scheme != SimScheme::coop && cfg.scheme != SimScheme::lmsc) {
        throw DomainError("run: scheme must be coop or lmsc");
    }
    if (model.nr < 0) {
        throw DomainError("run: N_r must be non-negative");
    }
    const bool lmsc = cfg.scheme == SimScheme::lmsc;
    const ModeSet& ms = model.sd.mode_set();
    std::vector<double> eps(static_cast<std::size_t>(ms.size()) + 1, 0.0);
    for (int n = 1; n <= ms.size(); ++n) {
        eps[static_cast<std::size_t>(n)] = model.eps(n);
    }
    const bool outage_transmits = lmsc && ms.outage_rate > 0.0;

    return simulate(cfg, model.nr, [&](PhiloxStream& rng) {
        Frame f;
        const double g1 = model.sd.dist().sample(rng);
        const int n = select_mode(model.sd, g1);
        if (n == 0 && !outage_transmits) {
            return f;
        }
        f.transmitted = true;
        const AmcMode& curve = ms.mode(std::max(n, 1));
        double inv_len = 1.0 / ms.rate(n);
        if (rng.uniform() < per_instantaneous(curve, g1)) {
            if (rng.uniform() < eps[static_cast<std::size_t>(n)]) {
                f.loss = Loss::undecoded;
            } else if (model.nr == 0) {
                f.loss = Loss::exhausted;
            } else {
                relay_phase(model.rd, model.nr, cfg.rd_sampling, rng, f, inv_len);
            }
        }
        f.eta = 1.0 / inv_len;
        return f;
    });
}

SimResult run_conventional(const LinkDesign& tx, const LinkDesign& rtx, int nr, const SimConfig& cfg)
{
    SimConfig c = cfg;
    c.scheme = SimScheme::coop;
    return run(RelayLinkModel{tx, rtx, std::nullopt, nr}, c);
}

SimResult run_slowfade(const LinkDesign& link, const SimConfig& cfg)
{
    const ModeSet& ms = link.mode_set();
    return simulate(cfg, 1, [&](PhiloxStream& rng) {
        Frame f;
        const double g = link.dist().sample(rng);
        const int n = select_mode(link, g);
        if (n == 0) {
            return f;
        }
        f.transmitted = true;
        const double per = per_instantaneous(ms.mode(n), g);
        double inv_len = 1.0 / ms.rate(n);
        if (rng.uniform() < per) {
            inv_len *= 2.0;
            f.retransmissions = 1;
            if (rng.uniform() < per) {
                f.loss = Loss::exhausted;
            }
        }
        f.eta = 1.0 / inv_len;
        return f;
    });
}

SimResult run_fixed(const FixedRateModel& model, int n, int m, const SimConfig& cfg)
{
    const AmcMode& src = model.modes.mode(n);
    const AmcMode& rel = model.modes.mode(m);
    const double eps = model.eps(n);
    return simulate(cfg, 1, [&](PhiloxStream& rng) {
        Frame f;
        f.transmitted = true;
        double inv_len = 1.0 / src.rate;
        const double g1 = model.sd.sample(rng);
        if (rng.uniform() < per_instantaneous(src, g1)) {
            if (rng.uniform() < eps) {
                f.loss = Loss::undecoded;
            } else {
                f.engaged = true;
                f.retransmissions = 1;
                inv_len += 1.0 / rel.rate;
                const double g2 = model.rd.sample(rng);
                if (rng.uniform() < per_instantaneous(rel, g2)) {
                    f.loss = Loss::exhausted;
                }
            }
        }
        f.eta = 1.0 / inv_len;
        return f;
    });
}

}  // namespace coarq
