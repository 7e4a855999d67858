#include "coarq/analytics.hpp"

#include "coarq/errors.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace coarq {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_budget(int modes, int depth, double budget)
{
    const double terms = std::pow(static_cast<double>(modes), static_cast<double>(depth));
    if (terms > budget) {
        throw BudgetError("nested sum needs " + std::to_string(terms) + " terms, budget is "
                          + std::to_string(budget));
    }
}

// R-D statistics as seen by a retransmission under the given outage policy.
struct RdView {
    std::vector<double> prob;  // 1..N (index 0 unused)
    std::vector<double> mass;
    double silent = 0.0;       // probability that the relay stays silent
};

RdView rd_view(const LinkDesign& rd, RdOutage policy)
{
    const int n_modes = rd.size();
    RdView v;
    v.prob.assign(static_cast<std::size_t>(n_modes) + 1, 0.0);
    v.mass.assign(static_cast<std::size_t>(n_modes) + 1, 0.0);
    const double usage = rd.usage_prob();
    double scale = 1.0;
    if (policy == RdOutage::conditioned) {
        scale = usage > 0.0 ? 1.0 / usage : 0.0;
    } else if (policy == RdOutage::silent_loss) {
        v.silent = rd.mode_probability(0);
    }
    for (int m = 1; m <= n_modes; ++m) {
        v.prob[static_cast<std::size_t>(m)] = rd.mode_probability(m) * scale;
        v.mass[static_cast<std::size_t>(m)] = rd.per_mass(m) * scale;
    }
    if (policy == RdOutage::conditioned && usage == 0.0) {
        // A relay that can never transmit behaves like a silent one.
        v.silent = 1.0;
    }
    return v;
}

// Retransmission tree below one S-D failure: weight is the probability of reaching
// the current depth, inv_len the normalised symbol count spent so far.
double relay_tree(const ModeSet& ms, const RdView& rd, int depth, int nr, double weight,
                  double inv_len)
{
    double sum = 0.0;
    const int n_modes = ms.size();
    for (int m = 1; m <= n_modes; ++m) {
        const auto mi = static_cast<std::size_t>(m);
        const double len = inv_len + 1.0 / ms.rate(m);
        if (depth < nr) {
            sum += weight * (rd.prob[mi] - rd.mass[mi]) / len;
            if (rd.mass[mi] > 0.0) {
                sum += relay_tree(ms, rd, depth + 1, nr, weight * rd.mass[mi], len);
            }
        } else {
            sum += weight * rd.prob[mi] / len;
        }
    }
    if (rd.silent > 0.0) {
        sum += weight * rd.silent / inv_len;
    }
    return sum;
}

double conditional_ratio(double num, double den)
{
    if (!(den > 0.0)) {
        throw AllOutageError();
    }
    return num / den;
}

}  // namespace

LinkDesign::LinkDesign(ModeSet modes, SnrDistribution dist, std::vector<double> thresholds,
                       std::vector<bool> clamped)
    : modes_(std::move(modes)), dist_(std::move(dist)), thresholds_(std::move(thresholds)),
      clamped_(std::move(clamped))
{
    const int n_modes = modes_.size();
    if (static_cast<int>(thresholds_.size()) != n_modes) {
        throw DomainError("LinkDesign: need one threshold per mode");
    }
    for (int i = 0; i < n_modes; ++i) {
        const double t = thresholds_[static_cast<std::size_t>(i)];
        if (!(t >= 0.0) || (i > 0 && t < thresholds_[static_cast<std::size_t>(i - 1)])) {
            throw DomainError("LinkDesign: thresholds must be non-negative and non-decreasing");
        }
    }
    if (clamped_.empty()) {
        clamped_.assign(static_cast<std::size_t>(n_modes), false);
    }
    if (static_cast<int>(clamped_.size()) != n_modes) {
        throw DomainError("LinkDesign: clamp flags must match the mode count");
    }

    prob_.assign(static_cast<std::size_t>(n_modes) + 1, 0.0);
    mass_.assign(static_cast<std::size_t>(n_modes) + 1, 0.0);
    mass_sq_.assign(static_cast<std::size_t>(n_modes) + 1, 0.0);
    for (int n = 0; n <= n_modes; ++n) {
        const auto i = static_cast<std::size_t>(n);
        const double lo = lower(n);
        const double hi = upper(n);
        prob_[i] = dist_.interval_prob(lo, hi);
        if (n == 0) {
            mass_[i] = prob_[i] > 0.0 ? coarq::per_mass(dist_, modes_.mode(1), lo, hi) : 0.0;
            continue;
        }
        if (prob_[i] > 0.0) {
            mass_[i] = coarq::per_mass(dist_, modes_.mode(n), lo, hi);
            mass_sq_[i] = coarq::per_squared_mass(dist_, modes_.mode(n), lo, hi);
        }
        usage_ += prob_[i];
        mass_total_ += mass_[i];
    }
}

double LinkDesign::lower(int n) const
{
    if (n < 0 || n > size()) {
        throw DomainError("LinkDesign: mode index out of range");
    }
    return n == 0 ? 0.0 : thresholds_[static_cast<std::size_t>(n - 1)];
}

double LinkDesign::upper(int n) const
{
    if (n < 0 || n > size()) {
        throw DomainError("LinkDesign: mode index out of range");
    }
    return n == size() ? kInf : thresholds_[static_cast<std::size_t>(n)];
}

double LinkDesign::mode_probability(int n) const
{
    lower(n);
    return prob_[static_cast<std::size_t>(n)];
}

double LinkDesign::per_mass(int n) const
{
    lower(n);
    return mass_[static_cast<std::size_t>(n)];
}

double LinkDesign::per_squared_mass(int n) const
{
    if (n < 1 || n > size()) {
        throw DomainError("LinkDesign: mode index out of range");
    }
    return mass_sq_[static_cast<std::size_t>(n)];
}

std::optional<double> LinkDesign::mode_avg_per(int n) const
{
    if (n < 1 || n > size()) {
        throw DomainError("LinkDesign: mode index out of range");
    }
    const double p = prob_[static_cast<std::size_t>(n)];
    if (!(p > 0.0)) {
        return std::nullopt;
    }
    return std::min(1.0, mass_[static_cast<std::size_t>(n)] / p);
}

std::optional<double> LinkDesign::outage_mode_avg_per() const
{
    if (!(thresholds_.front() > 0.0)) {
        throw DomainError("outage_mode_avg_per: the outage interval is empty");
    }
    if (!(prob_[0] > 0.0)) {
        return std::nullopt;
    }
    return std::min(1.0, mass_[0] / prob_[0]);
}

double LinkDesign::weighted_per() const
{
    return conditional_ratio(mass_total_, usage_);
}

bool LinkDesign::clamped(int n) const
{
    if (n < 1 || n > size()) {
        throw DomainError("LinkDesign: mode index out of range");
    }
    return clamped_[static_cast<std::size_t>(n - 1)];
}

double RelayLinkModel::eps(int n) const
{
    if (n < 1 || n > sd.size()) {
        throw DomainError("eps: mode index out of range");
    }
    if (!sr_snr) {
        return 0.0;
    }
    return per_instantaneous(sd.mode_set().mode(n), *sr_snr);
}

double eps_bar(const RelayLinkModel& model)
{
    double num = 0.0;
    for (int n = 1; n <= model.sd.size(); ++n) {
        num += model.eps(n) * model.sd.mode_probability(n);
    }
    return conditional_ratio(num, model.sd.usage_prob());
}

double eta_coop_under(const RelayLinkModel& model, RdOutage policy, double term_budget)
{
    if (model.nr < 0) {
        throw DomainError("eta_coop: N_r must be non-negative");
    }
    const ModeSet& ms = model.sd.mode_set();
    check_budget(ms.size(), model.nr + 1, term_budget);
    const RdView rd = rd_view(model.rd, policy);

    double eta = 0.0;
    for (int n = 1; n <= ms.size(); ++n) {
        const double p = model.sd.mode_probability(n);
        const double mass = model.sd.per_mass(n);
        const double eps = model.eps(n);
        // No retransmission: S-D success, or failure with the relay unable to decode.
        eta += ms.rate(n) * (p - (1.0 - eps) * mass);
        const double engaged = (1.0 - eps) * mass;
        if (model.nr == 0) {
            // Nothing is retransmitted: the failed packet still occupied 1/R_n.
            eta += ms.rate(n) * engaged;
        } else if (engaged > 0.0) {
            eta += relay_tree(ms, rd, 1, model.nr, engaged, 1.0 / ms.rate(n));
        }
    }
    return eta;
}

double eta_coop(const RelayLinkModel& model, double term_budget)
{
    return eta_coop_under(model, RdOutage::as_written, term_budget);
}

double eta_coop_nr1(const RelayLinkModel& model)
{
    const ModeSet& ms = model.sd.mode_set();
    double first = 0.0;
    double relay = 0.0;
    for (int n = 1; n <= ms.size(); ++n) {
        const double rn = ms.rate(n);
        const double pn = model.sd.mode_probability(n);
        const double mn = model.sd.per_mass(n);
        const double eps = model.eps(n);
        first += rn * (pn - (1.0 - eps) * mn);
        for (int m = 1; m <= ms.size(); ++m) {
            const double rm = ms.rate(m);
            relay += rn * rm / (rn + rm) * (1.0 - eps) * mn * model.rd.mode_probability(m);
        }
    }
    return first + relay;
}

double eta_reconciliation_gap(const RelayLinkModel& model, RdOutage policy)
{
    return eta_coop_under(model, policy) - eta_coop(model);
}

double plr_coop_nr1(const RelayLinkModel& model)
{
    const double usage = model.sd.usage_prob();
    double sd_mass = 0.0;
    double eps_mass = 0.0;
    for (int n = 1; n <= model.sd.size(); ++n) {
        sd_mass += model.sd.per_mass(n);
        eps_mass += model.eps(n) * model.sd.per_mass(n);
    }
    const double w_sd = conditional_ratio(sd_mass, usage);
    const double w_eps = conditional_ratio(eps_mass, usage);
    const double w_rd = model.rd.weighted_per();
    return w_sd * w_rd + w_eps * (1.0 - w_rd);
}

double plr_coop(const RelayLinkModel& model, RdOutage policy)
{
    if (model.nr < 0) {
        throw DomainError("plr_coop: N_r must be non-negative");
    }
    const double usage = model.sd.usage_prob();
    if (!(usage > 0.0)) {
        throw AllOutageError();
    }
    double lost_direct = 0.0;
    double engaged = 0.0;
    for (int n = 1; n <= model.sd.size(); ++n) {
        const double mn = model.sd.per_mass(n);
        const double eps = model.eps(n);
        lost_direct += eps * mn;
        engaged += (1.0 - eps) * mn;
    }
    if (model.nr == 0) {
        return (lost_direct + engaged) / usage;
    }
    double fail_all;
    if (policy == RdOutage::silent_loss) {
        // Each attempt: success with prob (usage - mass), retry on an error, stop on silence.
        const double cont = model.rd.total_per_mass();
        const double succ = model.rd.usage_prob() - cont;
        double reach = 1.0;
        double success = 0.0;
        for (int k = 0; k < model.nr; ++k) {
            success += reach * succ;
            reach *= cont;
        }
        fail_all = 1.0 - success;
    } else {
        const double w_rd = model.rd.usage_prob() > 0.0 ? model.rd.weighted_per() : 1.0;
        fail_all = std::pow(w_rd, model.nr);
    }
    return (lost_direct + engaged * fail_all) / usage;
}

std::vector<double> retransmission_pmf(const RelayLinkModel& model)
{
    const double usage = model.sd.usage_prob();
    if (!(usage > 0.0)) {
        throw AllOutageError();
    }
    std::vector<double> pmf(static_cast<std::size_t>(model.nr) + 1, 0.0);
    double engaged = 0.0;
    for (int n = 1; n <= model.sd.size(); ++n) {
        engaged += (1.0 - model.eps(n)) * model.sd.per_mass(n);
    }
    engaged /= usage;
    pmf[0] = 1.0 - engaged;
    if (model.nr == 0) {
        pmf[0] = 1.0;
        return pmf;
    }
    const double w_rd = model.rd.usage_prob() > 0.0 ? model.rd.weighted_per() : 1.0;
    double reach = engaged;
    for (int k = 1; k < model.nr; ++k) {
        pmf[static_cast<std::size_t>(k)] = reach * (1.0 - w_rd);
        reach *= w_rd;
    }
    pmf[static_cast<std::size_t>(model.nr)] = reach;
    return pmf;
}

double eta_amc_only(const LinkDesign& link)
{
    double eta = 0.0;
    for (int n = 1; n <= link.size(); ++n) {
        eta += link.mode_set().rate(n) * link.mode_probability(n);
    }
    return eta;
}

double plr_amc_only(const LinkDesign& link)
{
    return link.weighted_per();
}

namespace {

// Attempt tree of conventional ARQ: attempt `depth` (1-based) draws its mode from
// `rtx`, the first attempt was already accounted for by the caller.
double conventional_tree(const LinkDesign& rtx, int depth, int attempts, double weight,
                         double inv_len)
{
    const ModeSet& ms = rtx.mode_set();
    double sum = 0.0;
    for (int n = 1; n <= ms.size(); ++n) {
        const double p = rtx.mode_probability(n);
        const double mass = rtx.per_mass(n);
        const double len = inv_len + 1.0 / ms.rate(n);
        if (depth < attempts) {
            sum += weight * (p - mass) / len;
            if (mass > 0.0) {
                sum += conventional_tree(rtx, depth + 1, attempts, weight * mass, len);
            }
        } else {
            sum += weight * p / len;
        }
    }
    return sum;
}

}  // namespace

double eta_conventional(const LinkDesign& tx, const LinkDesign& rtx, int nr, double term_budget)
{
    if (nr < 0) {
        throw DomainError("eta_conventional: N_r must be non-negative");
    }
    const ModeSet& ms = tx.mode_set();
    check_budget(ms.size(), nr + 1, term_budget);
    double eta = 0.0;
    for (int n = 1; n <= ms.size(); ++n) {
        const double p = tx.mode_probability(n);
        const double mass = tx.per_mass(n);
        eta += ms.rate(n) * (p - mass);
        if (nr == 0) {
            eta += ms.rate(n) * mass;
        } else if (mass > 0.0) {
            eta += conventional_tree(rtx, 2, nr + 1, mass, 1.0 / ms.rate(n));
        }
    }
    return eta;
}

double plr_conventional(const LinkDesign& tx, const LinkDesign& rtx)
{
    return tx.weighted_per() * rtx.weighted_per();
}

double eta_slowfade(const LinkDesign& link)
{
    double eta = 0.0;
    for (int n = 1; n <= link.size(); ++n) {
        eta += link.mode_set().rate(n) * (link.mode_probability(n) - 0.5 * link.per_mass(n));
    }
    return eta;
}

std::optional<double> mode_avg_per_squared(const LinkDesign& link, int n)
{
    const double p = link.mode_probability(n);
    if (!(p > 0.0)) {
        return std::nullopt;
    }
    return std::min(1.0, link.per_squared_mass(n) / p);
}

double plr_slowfade(const LinkDesign& link)
{
    double sq = 0.0;
    for (int n = 1; n <= link.size(); ++n) {
        sq += link.per_squared_mass(n);
    }
    return conditional_ratio(sq, link.usage_prob());
}

namespace {

void require_error_free(const RelayLinkModel& model, const char* who)
{
    if (model.sr_snr) {
        throw DomainError(std::string(who) + ": the satellite scheme assumes an error-free S-R link");
    }
    if (model.nr != 1) {
        throw DomainError(std::string(who) + ": only N_r = 1 is supported");
    }
}

}  // namespace

double eta_lmsc(const RelayLinkModel& model)
{
    require_error_free(model, "eta_lmsc");
    const ModeSet& ms = model.sd.mode_set();
    double eta = 0.0;
    for (int n = 0; n <= ms.size(); ++n) {
        const double rn = ms.rate(n);
        if (!(rn > 0.0)) {
            continue;
        }
        const double pn = model.sd.mode_probability(n);
        const double mn = model.sd.per_mass(n);
        eta += rn * (pn - mn);
        for (int m = 1; m <= ms.size(); ++m) {
            const double rm = ms.rate(m);
            eta += rn * rm / (rn + rm) * mn * model.rd.mode_probability(m);
        }
    }
    return eta;
}

double eta_lmsc_under(const RelayLinkModel& model, RdOutage policy)
{
    if (policy == RdOutage::as_written) {
        return eta_lmsc(model);
    }
    require_error_free(model, "eta_lmsc_under");
    const ModeSet& ms = model.sd.mode_set();
    const double rd_usage = model.rd.usage_prob();
    double eta = 0.0;
    for (int n = 0; n <= ms.size(); ++n) {
        const double rn = ms.rate(n);
        if (!(rn > 0.0)) {
            continue;
        }
        const double pn = model.sd.mode_probability(n);
        const double mn = model.sd.per_mass(n);
        double relay = 0.0;
        for (int m = 1; m <= ms.size(); ++m) {
            const double rm = ms.rate(m);
            relay += rn * rm / (rn + rm) * model.rd.mode_probability(m);
        }
        if (policy == RdOutage::conditioned) {
            relay = rd_usage > 0.0 ? relay / rd_usage : rn;
        } else {
            relay += rn * model.rd.mode_probability(0);
        }
        eta += rn * (pn - mn) + mn * relay;
    }
    return eta;
}

double plr_lmsc(const RelayLinkModel& model)
{
    require_error_free(model, "plr_lmsc");
    double sd_mass = model.sd.total_per_mass();
    if (model.sd.mode_set().outage_rate > 0.0) {
        sd_mass += model.sd.per_mass(0);
    }
    return sd_mass * model.rd.weighted_per();
}

double FixedRateModel::eps(int n) const
{
    if (!sr_snr) {
        return 0.0;
    }
    return per_instantaneous(modes.mode(n), *sr_snr);
}

double full_range_avg_per(const SnrDistribution& dist, const AmcMode& mode)
{
    return std::min(1.0, per_mass(dist, mode, 0.0, kInf));
}

double eta_fixed(int n, int m, const FixedRateModel& model)
{
    const double rn = model.modes.rate(n);
    const double rm = model.modes.rate(m);
    const double per_sd = full_range_avg_per(model.sd, model.modes.mode(n));
    return rn * (1.0 - (1.0 - model.eps(n)) * rn / (rn + rm) * per_sd);
}

double plr_fixed(int n, int m, const FixedRateModel& model)
{
    const double per_sd = full_range_avg_per(model.sd, model.modes.mode(n));
    const double per_rd = full_range_avg_per(model.rd, model.modes.mode(m));
    const double eps = model.eps(n);
    return per_sd * per_rd + eps * per_sd * (1.0 - per_rd);
}

}  // namespace coarq
