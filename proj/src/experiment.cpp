#include "coarq/experiment.hpp"

#include "coarq/errors.hpp"

#include <cmath>
#include <cstdio>
#include <exception>

namespace coarq {

namespace {

constexpr double kPlrSlack = 1e-12;

std::string db_tag(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    std::string out;
    for (const char* c = buf; *c; ++c) {
        out += *c == '-' ? 'm' : (*c == '.' ? 'p' : *c);
    }
    return out;
}

bool uses_source_relay(Scheme s)
{
    return s == Scheme::coop_amc || s == Scheme::fixed_coop || s == Scheme::fixed_coop_equal_rate;
}

PointChannels point_channels(const Scenario& s, const SeriesSpec& spec, double p_bar_db)
{
    PointChannels ch = channels_at(s, p_bar_db, spec.alpha_db.value_or(0.0), spec.lambda_db.value_or(0.0));
    if (!uses_source_relay(spec.scheme)) {
        ch.sr_snr.reset();
    }
    return ch;
}

std::vector<int> clamped_of(const LinkDesign& link)
{
    std::vector<int> out;
    for (int n = 1; n <= link.size(); ++n) {
        if (link.clamped(n)) {
            out.push_back(n);
        }
    }
    return out;
}

void take_outcome(Row& row, const DesignOutcome& out)
{
    row.feasible = true;
    row.p_t_sd = out.p_t_sd;
    row.p_t_rd = out.p_t_rd;
    row.sd_thresholds = out.sd_design->thresholds();
    row.rd_thresholds = out.rd_design->thresholds();
    row.clamped_sd = out.clamped_sd;
    row.clamped_rd = out.clamped_rd;
}

void take_single(Row& row, const LinkDesign& link, double plr, double p_loss)
{
    row.sd_thresholds = link.thresholds();
    row.clamped_sd = clamped_of(link);
    row.feasible = link.usage_prob() > 0.0 && plr <= p_loss + kPlrSlack;
    if (!row.feasible) {
        row.note = link.usage_prob() > 0.0 ? "loss constraint violated" : "link always in outage";
    }
}

}  // namespace

std::string SeriesSpec::id() const
{
    std::string out = to_string(scheme);
    if (alpha_db) {
        out += "_a" + db_tag(*alpha_db);
    }
    if (lambda_db) {
        out += "_l" + db_tag(*lambda_db);
    }
    return out;
}

std::vector<SeriesSpec> expand_series(const Scenario& s)
{
    std::vector<SeriesSpec> out;
    for (Scheme sc : s.schemes) {
        std::vector<std::optional<double>> alphas{std::nullopt};
        std::vector<std::optional<double>> lambdas{std::nullopt};
        if (uses_source_relay(sc) && s.sr.kind == "awgn") {
            alphas.assign(s.alpha_db.begin(), s.alpha_db.end());
        }
        if (scheme_uses_relay(sc)) {
            lambdas.assign(s.lambda_db.begin(), s.lambda_db.end());
        }
        for (const auto& a : alphas) {
            for (const auto& l : lambdas) {
                out.push_back({sc, a, l});
            }
        }
    }
    return out;
}

std::size_t Series::feasible_count() const
{
    std::size_t n = 0;
    for (const auto& r : rows) {
        n += r.feasible ? 1 : 0;
    }
    return n;
}

PowerThreshold detect_power_threshold(const Series& series)
{
    PowerThreshold th;
    const auto& rows = series.rows;
    std::size_t first = rows.size();
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].feasible) {
            first = i;
            break;
        }
    }
    th.monotone = true;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].feasible != (i >= first)) {
            th.monotone = false;
        }
    }
    if (first < rows.size()) {
        th.p_bar_db = rows[first].p_bar_db;
        th.detected = first > 0 && th.monotone;
    }
    return th;
}

ModeSet scheme_mode_set(const Scenario& s, Scheme scheme)
{
    ModeSet ms = build_mode_set(s.mode_set);
    ms.outage_rate = scheme == Scheme::lmsc_coop ? ms.modes.front().rate : 0.0;
    return ms;
}

Row design_point(const Scenario& s, const SeriesSpec& spec, double p_bar_db, Execution exec)
{
    Row row;
    row.p_bar_db = p_bar_db;
    const PointChannels ch = point_channels(s, spec, p_bar_db);
    const ModeSet ms = scheme_mode_set(s, spec.scheme);

    try {
        switch (spec.scheme) {
        case Scheme::coop_amc:
            take_outcome(row, optimize_coop({ms, ch.sd, ch.rd, ch.sr_snr, s.p_loss, s.grid_points}, exec));
            break;
        case Scheme::lmsc_coop:
            take_outcome(row, optimize_lmsc({ms, ch.sd, ch.rd, std::nullopt, s.p_loss, s.grid_points}, exec));
            break;
        case Scheme::conventional_amc:
            take_outcome(row, optimize_conventional({ms, ch.sd, s.p_loss, s.grid_points}, exec).best);
            break;
        case Scheme::slowfade_conventional: {
            const LinkDesign link = design_slowfade(ch.sd, ms, s.p_loss);
            take_single(row, link, link.usage_prob() > 0.0 ? plr_slowfade(link) : 1.0, s.p_loss);
            break;
        }
        case Scheme::amc_only: {
            const LinkDesign link = design_thresholds(ch.sd, ms, s.p_loss);
            take_single(row, link, link.usage_prob() > 0.0 ? plr_amc_only(link) : 1.0, s.p_loss);
            break;
        }
        case Scheme::fixed_coop:
        case Scheme::fixed_coop_equal_rate:
        case Scheme::lmsc_fixed: {
            const FixedRateModel model{ms, ch.sd, ch.rd, ch.sr_snr};
            const FixedOutcome out = optimize_fixed(model, s.p_loss, spec.scheme == Scheme::fixed_coop_equal_rate);
            row.min_plr = out.min_plr;
            row.feasible = out.feasible;
            if (out.feasible) {
                row.mode_sd = out.n;
                row.mode_rd = out.m;
            } else {
                row.note = "no rate pair meets the loss target";
            }
            break;
        }
        }
    } catch (const InfeasibleError& e) {
        row.feasible = false;
        row.note = e.what();
    }
    evaluate_row(s, spec, row, RdSampling::non_outage_conditioned);
    return row;
}

void evaluate_row(const Scenario& s, const SeriesSpec& spec, Row& row, RdSampling sampling)
{
    row.eta.reset();
    row.plr.reset();
    row.eta_baseline.reset();
    row.plr_baseline.reset();
    row.eta_gap.reset();
    if (!row.feasible) {
        if (scheme_is_fixed_rate(spec.scheme)) {
            row.eta = 0.0;
        }
        return;
    }
    const PointChannels ch = point_channels(s, spec, row.p_bar_db);
    const ModeSet ms = scheme_mode_set(s, spec.scheme);
    const RdOutage policy = analytic_policy(sampling);

    switch (spec.scheme) {
    case Scheme::coop_amc: {
        const RelayLinkModel model{LinkDesign(ms, ch.sd, row.sd_thresholds), LinkDesign(ms, ch.rd, row.rd_thresholds),
                                   ch.sr_snr, s.nr};
        row.eta = eta_coop(model);
        row.plr = plr_coop(model, RdOutage::conditioned);
        row.eta_gap = eta_reconciliation_gap(model, policy);
        break;
    }
    case Scheme::lmsc_coop: {
        const RelayLinkModel model{LinkDesign(ms, ch.sd, row.sd_thresholds), LinkDesign(ms, ch.rd, row.rd_thresholds),
                                   std::nullopt, 1};
        row.eta = eta_lmsc(model);
        row.plr = plr_lmsc(model);
        row.eta_gap = eta_lmsc_under(model, policy) - *row.eta;
        break;
    }
    case Scheme::conventional_amc: {
        const LinkDesign tx(ms, ch.sd, row.sd_thresholds);
        const LinkDesign rtx(ms, ch.sd, row.rd_thresholds);
        row.eta = eta_conventional(tx, rtx, 1);
        row.plr = plr_conventional(tx, rtx);
        row.eta_gap = eta_reconciliation_gap(RelayLinkModel{tx, rtx, std::nullopt, 1}, policy);
        const LinkDesign equal = design_thresholds(ch.sd, ms, std::sqrt(s.p_loss));
        if (equal.usage_prob() > 0.0) {
            row.eta_baseline = eta_conventional(equal, equal, 1);
            row.plr_baseline = plr_conventional(equal, equal);
        }
        break;
    }
    case Scheme::slowfade_conventional: {
        const LinkDesign link(ms, ch.sd, row.sd_thresholds);
        row.eta = eta_slowfade(link);
        row.plr = plr_slowfade(link);
        break;
    }
    case Scheme::amc_only: {
        const LinkDesign link(ms, ch.sd, row.sd_thresholds);
        row.eta = eta_amc_only(link);
        row.plr = plr_amc_only(link);
        break;
    }
    case Scheme::fixed_coop:
    case Scheme::fixed_coop_equal_rate:
    case Scheme::lmsc_fixed: {
        const FixedRateModel model{ms, ch.sd, ch.rd, ch.sr_snr};
        row.eta = eta_fixed(*row.mode_sd, *row.mode_rd, model);
        row.plr = plr_fixed(*row.mode_sd, *row.mode_rd, model);
        break;
    }
    }
}

void simulate_row(const Scenario& s, const SeriesSpec& spec, Row& row, const SimConfig& cfg)
{
    row.sim.reset();
    if (!row.feasible) {
        return;
    }
    const PointChannels ch = point_channels(s, spec, row.p_bar_db);
    const ModeSet ms = scheme_mode_set(s, spec.scheme);
    SimConfig c = cfg;

    switch (spec.scheme) {
    case Scheme::coop_amc:
        c.scheme = SimScheme::coop;
        row.sim = run(RelayLinkModel{LinkDesign(ms, ch.sd, row.sd_thresholds),
                                     LinkDesign(ms, ch.rd, row.rd_thresholds), ch.sr_snr, s.nr},
                      c);
        break;
    case Scheme::lmsc_coop:
        c.scheme = SimScheme::lmsc;
        row.sim = run(RelayLinkModel{LinkDesign(ms, ch.sd, row.sd_thresholds),
                                     LinkDesign(ms, ch.rd, row.rd_thresholds), std::nullopt, 1},
                      c);
        break;
    case Scheme::conventional_amc:
        c.scheme = SimScheme::conventional;
        row.sim = run_conventional(LinkDesign(ms, ch.sd, row.sd_thresholds), LinkDesign(ms, ch.sd, row.rd_thresholds),
                                   1, c);
        break;
    case Scheme::slowfade_conventional:
        c.scheme = SimScheme::slowfade;
        row.sim = run_slowfade(LinkDesign(ms, ch.sd, row.sd_thresholds), c);
        break;
    case Scheme::amc_only: {
        c.scheme = SimScheme::coop;
        const LinkDesign link(ms, ch.sd, row.sd_thresholds);
        row.sim = run(RelayLinkModel{link, link, std::nullopt, 0}, c);
        break;
    }
    case Scheme::fixed_coop:
    case Scheme::fixed_coop_equal_rate:
    case Scheme::lmsc_fixed:
        c.scheme = SimScheme::fixed;
        row.sim = run_fixed(FixedRateModel{ms, ch.sd, ch.rd, ch.sr_snr}, *row.mode_sd, *row.mode_rd, c);
        break;
    }
}

std::vector<Series> design_all(const Scenario& s, Execution exec)
{
    const auto specs = expand_series(s);
    const std::size_t points = s.p_bar_db.size();
    std::vector<Series> out;
    for (const auto& spec : specs) {
        out.push_back({spec, std::vector<Row>(points)});
    }
    const auto tasks = static_cast<long>(specs.size() * points);
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(tasks));
#pragma omp parallel for schedule(dynamic, 1) if (exec == Execution::parallel)
    for (long t = 0; t < tasks; ++t) {
        const auto k = static_cast<std::size_t>(t);
        const std::size_t si = k / points;
        const std::size_t pi = k % points;
        try {
            out[si].rows[pi] = design_point(s, specs[si], s.p_bar_db[pi], Execution::serial);
        } catch (...) {
            errors[k] = std::current_exception();
        }
    }
    for (const auto& e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }
    return out;
}

}  // namespace coarq
