#pragma once

// Exhaustive path enumeration over finite-support channels. Written from the protocol
// description only; shares no code with the library.

#include <algorithm>
#include <cmath>
#include <optional>
#include <utility>
#include <vector>

namespace oracle {

struct Mode {
    double rate;
    double a;
    double g;
    double gamma_pl;
};

struct Link {
    std::vector<std::pair<double, double>> atoms;  // (gamma, probability)
    std::vector<double> thresholds;                // one per mode, non-decreasing
};

inline double per(const Mode& m, double gamma)
{
    if (gamma < m.gamma_pl) {
        return 1.0;
    }
    return std::min(1.0, m.a * std::exp(-m.g * gamma));
}

inline int select(const std::vector<double>& thr, double gamma)
{
    int n = 0;
    for (std::size_t i = 0; i < thr.size(); ++i) {
        if (gamma >= thr[i]) {
            n = static_cast<int>(i) + 1;
        }
    }
    return n;
}

enum class Policy { as_written, conditioned, silent };

struct Totals {
    double eta = 0.0;
    double transmitted = 0.0;
    double lost = 0.0;
    std::vector<double> retx;  // probability mass by retransmission count
};

struct Walker {
    const std::vector<Mode>& modes;
    const Link& rd;
    int nr;
    Policy policy;
    Totals& t;

    double rd_usage() const
    {
        double u = 0.0;
        for (const auto& [g, p] : rd.atoms) {
            u += select(rd.thresholds, g) > 0 ? p : 0.0;
        }
        return u;
    }

    // Relay attempt k (1-based) reached with probability w after spending inv_len.
    void attempt(int k, double w, double inv_len)
    {
        const double usage = rd_usage();
        if (policy == Policy::conditioned && usage == 0.0) {
            t.eta += w / inv_len;
            t.lost += w;
            t.retx[static_cast<std::size_t>(k - 1)] += w;
            return;
        }
        for (const auto& [g, p] : rd.atoms) {
            const int m = select(rd.thresholds, g);
            if (m == 0) {
                if (policy == Policy::silent) {
                    t.eta += w * p / inv_len;
                    t.lost += w * p;
                    t.retx[static_cast<std::size_t>(k - 1)] += w * p;
                }
                continue;
            }
            const double q = policy == Policy::conditioned ? p / usage : p;
            const Mode& mode = modes[static_cast<std::size_t>(m - 1)];
            const double len = inv_len + 1.0 / mode.rate;
            const double e = per(mode, g);
            t.eta += w * q * (1.0 - e) / len;
            t.retx[static_cast<std::size_t>(k)] += w * q * (1.0 - e);
            if (k < nr) {
                attempt(k + 1, w * q * e, len);
            } else {
                t.eta += w * q * e / len;
                t.lost += w * q * e;
                t.retx[static_cast<std::size_t>(k)] += w * q * e;
            }
        }
    }
};

struct CoopValues {
    double eta = 0.0;
    double plr = 0.0;
    std::vector<double> retx_pmf;  // over transmitted packets
};

/// Cooperative ARQ with up to nr relay retransmissions. With outage_rate > 0 the S-D
/// outage region transmits at that rate on the mode-1 curve.
inline CoopValues enumerate_coop(const std::vector<Mode>& modes, const Link& sd, const Link& rd,
                                 std::optional<double> sr_snr, int nr, Policy policy,
                                 double outage_rate = 0.0)
{
    Totals t;
    t.retx.assign(static_cast<std::size_t>(nr) + 1, 0.0);
    Walker walker{modes, rd, nr, policy, t};
    for (const auto& [g, p] : sd.atoms) {
        int n = select(sd.thresholds, g);
        double rate;
        const Mode* curve;
        if (n == 0) {
            if (!(outage_rate > 0.0)) {
                continue;
            }
            rate = outage_rate;
            curve = &modes.front();
        } else {
            rate = modes[static_cast<std::size_t>(n - 1)].rate;
            curve = &modes[static_cast<std::size_t>(n - 1)];
        }
        t.transmitted += p;
        const double e = per(*curve, g);
        const double eps = (sr_snr && n > 0) ? per(*curve, *sr_snr) : 0.0;
        t.eta += p * (1.0 - e) * rate;
        t.retx[0] += p * (1.0 - e);
        t.eta += p * e * eps * rate;
        t.lost += p * e * eps;
        t.retx[0] += p * e * eps;
        const double engaged = p * e * (1.0 - eps);
        if (nr == 0) {
            t.eta += engaged * rate;
            t.lost += engaged;
            t.retx[0] += engaged;
        } else if (engaged > 0.0) {
            walker.attempt(1, engaged, 1.0 / rate);
        }
    }
    CoopValues v;
    v.eta = t.eta;
    v.plr = t.lost / t.transmitted;
    for (double r : t.retx) {
        v.retx_pmf.push_back(r / t.transmitted);
    }
    return v;
}

/// Single retransmission on the same channel realisation.
inline CoopValues enumerate_slowfade(const std::vector<Mode>& modes, const Link& link)
{
    double eta = 0.0;
    double tx = 0.0;
    double lost = 0.0;
    for (const auto& [g, p] : link.atoms) {
        const int n = select(link.thresholds, g);
        if (n == 0) {
            continue;
        }
        const Mode& m = modes[static_cast<std::size_t>(n - 1)];
        const double e = per(m, g);
        tx += p;
        eta += p * ((1.0 - e) * m.rate + e * m.rate / 2.0);
        lost += p * e * e;
    }
    return {eta, lost / tx, {}};
}

/// Fixed rates n (source) and m (relay) over the whole SNR range, one retransmission.
inline CoopValues enumerate_fixed(const std::vector<Mode>& modes, const Link& sd, const Link& rd,
                                  std::optional<double> sr_snr, int n, int m)
{
    const Mode& s = modes[static_cast<std::size_t>(n - 1)];
    const Mode& r = modes[static_cast<std::size_t>(m - 1)];
    const double eps = sr_snr ? per(s, *sr_snr) : 0.0;
    double eta = 0.0;
    double lost = 0.0;
    for (const auto& [g1, p1] : sd.atoms) {
        const double e1 = per(s, g1);
        eta += p1 * (1.0 - e1 + e1 * eps) * s.rate;
        lost += p1 * e1 * eps;
        for (const auto& [g2, p2] : rd.atoms) {
            const double e2 = per(r, g2);
            const double w = p1 * e1 * (1.0 - eps) * p2;
            eta += w / (1.0 / s.rate + 1.0 / r.rate);
            lost += w * e2;
        }
    }
    return {eta, lost, {}};
}

}  // namespace oracle
