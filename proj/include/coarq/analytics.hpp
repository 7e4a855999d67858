#pragma once

#include "coarq/distributions.hpp"
#include "coarq/modes.hpp"

#include <optional>
#include <vector>

namespace coarq {

/// Switching thresholds of one link plus the cached per-mode statistics.
///
/// Mode n (1..N) is used on [gamma_n, gamma_{n+1}) with gamma_{N+1} = inf; mode 0
/// (outage) covers [0, gamma_1). Probabilities and PER integrals are evaluated once
/// at construction; every scheme formula below is a pure function of the caches.
class LinkDesign {
public:
    LinkDesign(ModeSet modes, SnrDistribution dist, std::vector<double> thresholds,
               std::vector<bool> clamped = {});

    const ModeSet& mode_set() const { return modes_; }
    const SnrDistribution& dist() const { return dist_; }
    const std::vector<double>& thresholds() const { return thresholds_; }
    int size() const { return modes_.size(); }

    double lower(int n) const;
    double upper(int n) const;

    /// P_n, n = 0..N.
    double mode_probability(int n) const;
    /// Integral of PER_n p over the mode-n interval (n = 1..N); for n = 0 the mode-1
    /// curve over the outage interval, which is what an outage-mode transmission sees.
    double per_mass(int n) const;
    /// Integral of PER_n^2 p over the mode-n interval, n = 1..N.
    double per_squared_mass(int n) const;
    /// Conditional average PER of mode n; empty when the mode is never used.
    std::optional<double> mode_avg_per(int n) const;
    /// Average PER of the outage interval transmitted on the mode-1 curve.
    std::optional<double> outage_mode_avg_per() const;

    /// Sum of P_n over n = 1..N.
    double usage_prob() const { return usage_; }
    /// Sum of per_mass(n) over n = 1..N.
    double total_per_mass() const { return mass_total_; }
    /// sum PER_n P_n / sum P_n over n >= 1. Throws AllOutageError when nothing is used.
    double weighted_per() const;

    bool clamped(int n) const;

private:
    ModeSet modes_;
    SnrDistribution dist_;
    std::vector<double> thresholds_;
    std::vector<bool> clamped_;
    std::vector<double> prob_;     // 0..N
    std::vector<double> mass_;     // 0..N
    std::vector<double> mass_sq_;  // 0..N (index 0 unused)
    double usage_ = 0.0;
    double mass_total_ = 0.0;
};

/// S-D and R-D designs plus the source-relay link and the retransmission limit.
struct RelayLinkModel {
    LinkDesign sd;
    LinkDesign rd;
    std::optional<double> sr_snr;  // empty: error-free source-relay link
    int nr = 1;

    double eps(int n) const;
};

/// How a relay retransmission behaves when the R-D draw lands in the outage mode.
enum class RdOutage {
    as_written,   // outage outcomes dropped from the sum (unnormalised R-D probabilities)
    conditioned,  // R-D SNR redrawn until it leaves the outage mode
    silent_loss,  // the relay stays silent and the packet is lost
};

inline constexpr double kDefaultTermBudget = 1e7;

double eps_bar(const RelayLinkModel& model);

/// Adaptive cooperative ARQ efficiency for any N_r >= 0 (N_r = 0 is AMC only).
double eta_coop(const RelayLinkModel& model, double term_budget = kDefaultTermBudget);
double eta_coop_nr1(const RelayLinkModel& model);
/// Expected efficiency when R-D outages follow `policy`; as_written equals eta_coop.
double eta_coop_under(const RelayLinkModel& model, RdOutage policy,
                      double term_budget = kDefaultTermBudget);
/// eta_coop_under(policy) - eta_coop: the part of the simulated efficiency that the
/// unnormalised closed form does not account for.
double eta_reconciliation_gap(const RelayLinkModel& model, RdOutage policy);

double plr_coop_nr1(const RelayLinkModel& model);
/// Loss rate for any N_r >= 1 under `policy` (as_written behaves like conditioned).
double plr_coop(const RelayLinkModel& model, RdOutage policy = RdOutage::conditioned);

/// Distribution of the number of relay retransmissions per transmitted packet,
/// entries 0..N_r, with R-D draws conditioned on non-outage.
std::vector<double> retransmission_pmf(const RelayLinkModel& model);

double eta_amc_only(const LinkDesign& link);
double plr_amc_only(const LinkDesign& link);

/// Conventional truncated ARQ: first attempt on `tx`, retransmissions on `rtx`, each
/// attempt with an independent channel draw.
double eta_conventional(const LinkDesign& tx, const LinkDesign& rtx, int nr,
                        double term_budget = kDefaultTermBudget);
double plr_conventional(const LinkDesign& tx, const LinkDesign& rtx);

/// Conventional ARQ with one retransmission on an unchanged channel.
double eta_slowfade(const LinkDesign& link);
double plr_slowfade(const LinkDesign& link);
/// Conditional mean of PER_n^2 over the mode-n interval.
std::optional<double> mode_avg_per_squared(const LinkDesign& link, int n);

/// Land-mobile-satellite relay scheme: the S-D outage mode transmits at R_0 and the
/// relay (error-free S-R link) always forwards after a failure. N_r = 1.
double eta_lmsc(const RelayLinkModel& model);
double plr_lmsc(const RelayLinkModel& model);
/// Satellite-scheme efficiency when R-D outages follow `policy`.
double eta_lmsc_under(const RelayLinkModel& model, RdOutage policy);

/// Fixed-rate cooperative ARQ using channel statistics only.
struct FixedRateModel {
    ModeSet modes;
    SnrDistribution sd;
    SnrDistribution rd;
    std::optional<double> sr_snr;

    double eps(int n) const;
};

/// Average PER of mode n over the whole SNR range.
double full_range_avg_per(const SnrDistribution& dist, const AmcMode& mode);
double eta_fixed(int n, int m, const FixedRateModel& model);
double plr_fixed(int n, int m, const FixedRateModel& model);

}  // namespace coarq
