#include "coarq/designer.hpp"

#include "coarq/errors.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <sstream>

namespace coarq {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPlrSlack = 1e-12;
constexpr double kTieTolerance = 1e-12;

// Conditional mean of PER^power over [x, y); the empty-interval limit is the
// pointwise value at x, which keeps the function monotone for the root search.
double interval_avg(const SnrDistribution& dist, const AmcMode& mode, int power, double x, double y)
{
    const double p = dist.interval_prob(x, y);
    if (p > 0.0) {
        const double mass = power == 1 ? per_mass(dist, mode, x, y) : per_squared_mass(dist, mode, x, y);
        return std::min(1.0, mass / p);
    }
    const double per = per_instantaneous(mode, x);
    return power == 1 ? per : per * per;
}

// Smallest x in [lo, hi] (to relative 1e-13) with avg(x) <= target, given
// avg(lo) > target >= avg(hi). Illinois false position with bisection fallback.
template <typename Avg>
double solve_threshold(Avg avg, double lo, double hi, double target)
{
    double f_lo = avg(lo) - target;
    double f_hi = avg(hi) - target;
    int side = 0;
    for (int iter = 0; iter < 400; ++iter) {
        const double width = hi - lo;
        if (width <= 1e-13 * std::max(hi, 1e-300) || f_hi == 0.0) {
            break;
        }
        double x = hi - f_hi * width / (f_hi - f_lo);
        // Fall back to bisection every few steps or when the secant leaves the bracket.
        if (!(x > lo && x < hi) || iter % 4 == 3) {
            x = lo + 0.5 * width;
        }
        if (!(x > lo && x < hi)) {
            break;
        }
        const double fx = avg(x) - target;
        if (fx > 0.0) {
            lo = x;
            f_lo = fx;
            if (side == -1) {
                f_hi *= 0.5;
            }
            side = -1;
        } else {
            hi = x;
            f_hi = fx;
            if (side == 1) {
                f_lo *= 0.5;
            }
            side = 1;
        }
        if (fx <= 0.0 && fx > -1e-14) {
            break;
        }
    }
    return hi;
}

LinkDesign design_top_down(const SnrDistribution& dist, const ModeSet& ms, double target, int power)
{
    if (!(target > 0.0 && target <= 1.0)) {
        throw DomainError("threshold design: target must lie in (0, 1]");
    }
    const int n_modes = ms.size();
    std::vector<double> thresholds(static_cast<std::size_t>(n_modes), 0.0);
    std::vector<bool> clamped(static_cast<std::size_t>(n_modes), false);
    double upper = kInf;
    for (int n = n_modes; n >= 1; --n) {
        const AmcMode& mode = ms.mode(n);
        const auto idx = static_cast<std::size_t>(n - 1);
        auto avg = [&](double x) { return interval_avg(dist, mode, power, x, upper); };
        const double bound = mode.gamma_pl;
        if (bound >= upper) {
            thresholds[idx] = upper;
            continue;
        }
        const double at_bound = avg(bound);
        if (at_bound <= target) {
            thresholds[idx] = bound;
            clamped[idx] = at_bound < target;
            upper = bound;
            continue;
        }
        double hi;
        if (std::isfinite(upper)) {
            const double per = per_instantaneous(mode, upper);
            if ((power == 1 ? per : per * per) > target) {
                // Even a vanishing interval misses the target: the mode goes unused.
                thresholds[idx] = upper;
                continue;
            }
            hi = upper;
        } else {
            const double g_eff = power * mode.fit_g;
            const double a_eff = std::pow(mode.fit_a, power);
            hi = std::max(bound, std::log(a_eff / target) / g_eff);
            int grow = 0;
            while (avg(hi) > target) {
                hi = bound + 2.0 * (hi - bound) + 1.0;
                if (++grow > 200) {
                    std::ostringstream msg;
                    msg << "threshold design: cannot bracket mode " << n << " for target " << target;
                    throw NumericalError(msg.str());
                }
            }
        }
        thresholds[idx] = solve_threshold(avg, bound, hi, target);
        upper = thresholds[idx];
    }
    return LinkDesign(ms, dist, std::move(thresholds), std::move(clamped));
}

template <typename Evaluate>
std::vector<SearchPoint> evaluate_grid(const std::vector<double>& grid, Evaluate evaluate, Execution exec)
{
    const auto count = static_cast<long>(grid.size());
    std::vector<SearchPoint> trace(grid.size());
    std::vector<std::exception_ptr> errors(grid.size());
#pragma omp parallel for schedule(dynamic, 1) if (exec == Execution::parallel)
    for (long i = 0; i < count; ++i) {
        const auto k = static_cast<std::size_t>(i);
        try {
            trace[k] = evaluate(grid[k]);
        } catch (...) {
            errors[k] = std::current_exception();
        }
    }
    for (const auto& e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }
    return trace;
}

// First index with the largest eta among feasible points (ties within 1e-12 go to
// the smaller target, which comes first in the grid).
std::optional<std::size_t> best_index(const std::vector<SearchPoint>& trace)
{
    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < trace.size(); ++i) {
        if (!trace[i].feasible) {
            continue;
        }
        if (!best || trace[i].eta > trace[*best].eta + kTieTolerance) {
            best = i;
        }
    }
    return best;
}

std::vector<int> clamped_modes(const LinkDesign& link)
{
    std::vector<int> out;
    for (int n = 1; n <= link.size(); ++n) {
        if (link.clamped(n)) {
            out.push_back(n);
        }
    }
    return out;
}

double sd_eps_bar(const LinkDesign& sd, const std::optional<double>& sr_snr)
{
    if (!sr_snr) {
        return 0.0;
    }
    double num = 0.0;
    for (int n = 1; n <= sd.size(); ++n) {
        num += per_instantaneous(sd.mode_set().mode(n), *sr_snr) * sd.mode_probability(n);
    }
    return num / sd.usage_prob();
}

}  // namespace

LinkDesign design_thresholds(const SnrDistribution& dist, const ModeSet& ms, double p_target)
{
    return design_top_down(dist, ms, p_target, 1);
}

LinkDesign design_slowfade(const SnrDistribution& dist, const ModeSet& ms, double p_loss)
{
    return design_top_down(dist, ms, p_loss, 2);
}

std::vector<double> target_per_upper_bounds(const SnrDistribution& dist, const ModeSet& ms)
{
    std::vector<double> out;
    for (int n = 1; n <= ms.size(); ++n) {
        const AmcMode& mode = ms.mode(n);
        const double lo = mode.gamma_pl;
        const double hi = n == ms.size() ? kInf : ms.mode(n + 1).gamma_pl;
        double bound = 0.0;
        if (lo < hi) {
            const double p = dist.interval_prob(lo, hi);
            if (p > 0.0) {
                bound = dist.exp_weighted(lo, hi, mode.fit_a, mode.fit_g) / p;
            }
        }
        out.push_back(bound);
    }
    return out;
}

double target_per_upper_bound(const SnrDistribution& dist, const ModeSet& ms)
{
    const auto all = target_per_upper_bounds(dist, ms);
    return all.empty() ? 0.0 : *std::max_element(all.begin(), all.end());
}

std::optional<double> solve_rd_target(double p_loss, double p_t_sd, double eps_bar)
{
    if (!(eps_bar >= 0.0 && eps_bar < 1.0) || !(p_t_sd > 0.0)) {
        throw DomainError("solve_rd_target: need 0 <= eps_bar < 1 and p_t_sd > 0");
    }
    const double numerator = p_loss - eps_bar * p_t_sd;
    if (numerator < 0.0) {
        return std::nullopt;
    }
    return numerator / (p_t_sd * (1.0 - eps_bar));
}

double solve_rd_target_lmsc(double p_loss, double p_t_sd, double p_out, double per0)
{
    const double denominator = p_t_sd * (1.0 - p_out) + p_out * per0;
    if (!(denominator > 0.0)) {
        throw DomainError("solve_rd_target_lmsc: degenerate denominator");
    }
    return p_loss / denominator;
}

std::vector<double> target_grid(double p_loss, double upper, int points)
{
    if (!(p_loss > 0.0 && p_loss < 1.0)) {
        throw DomainError("target_grid: p_loss must lie in (0, 1)");
    }
    std::vector<double> grid{p_loss};
    if (!(upper > p_loss) || points <= 0) {
        return grid;
    }
    const double span = std::log(upper / p_loss);
    for (int i = 1; i <= points; ++i) {
        grid.push_back(p_loss * std::exp(span * i / (points + 1)));
    }
    return grid;
}

DesignOutcome optimize_coop(const CoopProblem& pb, Execution exec)
{
    const double upper = std::min(1.0, target_per_upper_bound(pb.sd, pb.modes));
    const auto grid = target_grid(pb.p_loss, upper, pb.grid_points);

    auto evaluate = [&](double p_t_sd) {
        SearchPoint pt;
        pt.p_t_sd = p_t_sd;
        const LinkDesign sd = design_thresholds(pb.sd, pb.modes, p_t_sd);
        if (!(sd.usage_prob() > 0.0)) {
            pt.note = "S-D link always in outage";
            return pt;
        }
        pt.eps_bar = sd_eps_bar(sd, pb.sr_snr);
        double p_t_rd;
        if (pt.eps_bar >= 1.0) {
            // The relay never decodes; only the direct-link endpoint can meet the budget.
            if (p_t_sd > pb.p_loss) {
                pt.note = "relay never decodes";
                return pt;
            }
            p_t_rd = 1.0;
        } else {
            const auto target = solve_rd_target(pb.p_loss, p_t_sd, pt.eps_bar);
            if (!target || !(*target > 0.0)) {
                pt.note = "no positive R-D target";
                return pt;
            }
            p_t_rd = *target;
        }
        pt.p_t_rd = p_t_rd;
        const LinkDesign rd = design_thresholds(pb.rd, pb.modes, std::min(1.0, p_t_rd));
        if (!(rd.usage_prob() > 0.0)) {
            pt.note = "R-D link always in outage";
            return pt;
        }
        const RelayLinkModel model{sd, rd, pb.sr_snr, 1};
        pt.eta = eta_coop_nr1(model);
        pt.plr = plr_coop_nr1(model);
        pt.feasible = pt.plr <= pb.p_loss + kPlrSlack;
        if (!pt.feasible) {
            pt.note = "loss constraint violated";
        }
        return pt;
    };

    DesignOutcome out;
    out.p_t_sd_upper = upper;
    out.trace = evaluate_grid(grid, evaluate, exec);
    const auto best = best_index(out.trace);
    if (!best) {
        throw InfeasibleError("optimize_coop: no feasible S-D target");
    }
    const SearchPoint& pt = out.trace[*best];
    out.p_t_sd = pt.p_t_sd;
    out.p_t_rd = *pt.p_t_rd;
    out.eta = pt.eta;
    out.plr = pt.plr;
    out.sd_design = design_thresholds(pb.sd, pb.modes, pt.p_t_sd);
    out.rd_design = design_thresholds(pb.rd, pb.modes, std::min(1.0, out.p_t_rd));
    out.clamped_sd = clamped_modes(*out.sd_design);
    out.clamped_rd = clamped_modes(*out.rd_design);
    return out;
}

DesignOutcome optimize_lmsc(const CoopProblem& pb, Execution exec)
{
    if (pb.sr_snr) {
        throw DomainError("optimize_lmsc: the satellite scheme assumes an error-free S-R link");
    }
    const double upper = std::min(1.0, target_per_upper_bound(pb.sd, pb.modes));
    const auto grid = target_grid(pb.p_loss, upper, pb.grid_points);

    auto evaluate = [&](double p_t_sd) {
        SearchPoint pt;
        pt.p_t_sd = p_t_sd;
        const LinkDesign sd = design_thresholds(pb.sd, pb.modes, p_t_sd);
        const double p_out = sd.mode_probability(0);
        const double per0 = p_out > 0.0 ? sd.outage_mode_avg_per().value_or(0.0) : 0.0;
        const double p_t_rd = solve_rd_target_lmsc(pb.p_loss, p_t_sd, p_out, per0);
        pt.p_t_rd = p_t_rd;
        const LinkDesign rd = design_thresholds(pb.rd, pb.modes, std::min(1.0, p_t_rd));
        if (!(rd.usage_prob() > 0.0)) {
            pt.note = "R-D link always in outage";
            return pt;
        }
        const RelayLinkModel model{sd, rd, std::nullopt, 1};
        pt.eta = eta_lmsc(model);
        pt.plr = plr_lmsc(model);
        pt.feasible = pt.plr <= pb.p_loss + kPlrSlack;
        if (!pt.feasible) {
            pt.note = "loss constraint violated";
        }
        return pt;
    };

    DesignOutcome out;
    out.p_t_sd_upper = upper;
    out.trace = evaluate_grid(grid, evaluate, exec);
    const auto best = best_index(out.trace);
    if (!best) {
        throw InfeasibleError("optimize_lmsc: no feasible S-D target");
    }
    const SearchPoint& pt = out.trace[*best];
    out.p_t_sd = pt.p_t_sd;
    out.p_t_rd = *pt.p_t_rd;
    out.eta = pt.eta;
    out.plr = pt.plr;
    out.sd_design = design_thresholds(pb.sd, pb.modes, pt.p_t_sd);
    out.rd_design = design_thresholds(pb.rd, pb.modes, std::min(1.0, out.p_t_rd));
    out.clamped_sd = clamped_modes(*out.sd_design);
    out.clamped_rd = clamped_modes(*out.rd_design);
    return out;
}

ConventionalOutcome optimize_conventional(const ConventionalProblem& pb, Execution exec)
{
    auto grid = target_grid(pb.p_loss, 1.0, pb.grid_points);
    const double equal_target = std::sqrt(pb.p_loss);
    grid.push_back(equal_target);
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

    auto evaluate = [&](double p_t) {
        SearchPoint pt;
        pt.p_t_sd = p_t;
        pt.p_t_rd = std::min(1.0, pb.p_loss / p_t);
        const LinkDesign tx = design_thresholds(pb.dist, pb.modes, p_t);
        const LinkDesign rtx = design_thresholds(pb.dist, pb.modes, *pt.p_t_rd);
        if (!(tx.usage_prob() > 0.0) || !(rtx.usage_prob() > 0.0)) {
            pt.note = "link always in outage";
            return pt;
        }
        pt.eta = eta_conventional(tx, rtx, 1);
        pt.plr = plr_conventional(tx, rtx);
        pt.feasible = pt.plr <= pb.p_loss + kPlrSlack;
        if (!pt.feasible) {
            pt.note = "loss constraint violated";
        }
        return pt;
    };

    ConventionalOutcome out;
    out.best.trace = evaluate_grid(grid, evaluate, exec);
    const auto best = best_index(out.best.trace);
    if (!best) {
        throw InfeasibleError("optimize_conventional: no feasible target split");
    }
    const SearchPoint& pt = out.best.trace[*best];
    out.best.p_t_sd = pt.p_t_sd;
    out.best.p_t_rd = *pt.p_t_rd;
    out.best.eta = pt.eta;
    out.best.plr = pt.plr;
    out.best.sd_design = design_thresholds(pb.dist, pb.modes, pt.p_t_sd);
    out.best.rd_design = design_thresholds(pb.dist, pb.modes, out.best.p_t_rd);
    out.best.clamped_sd = clamped_modes(*out.best.sd_design);
    out.best.clamped_rd = clamped_modes(*out.best.rd_design);
    for (const auto& p : out.best.trace) {
        if (p.p_t_sd == equal_target) {
            out.baseline_eta = p.eta;
            out.baseline_plr = p.plr;
        }
    }
    return out;
}

FixedOutcome optimize_fixed(const FixedRateModel& model, double p_loss, bool equal_rates)
{
    const int n_modes = model.modes.size();
    std::vector<double> per_sd(static_cast<std::size_t>(n_modes) + 1, 1.0);
    std::vector<double> per_rd(static_cast<std::size_t>(n_modes) + 1, 1.0);
    for (int n = 1; n <= n_modes; ++n) {
        per_sd[static_cast<std::size_t>(n)] = full_range_avg_per(model.sd, model.modes.mode(n));
        per_rd[static_cast<std::size_t>(n)] = full_range_avg_per(model.rd, model.modes.mode(n));
    }
    FixedOutcome out;
    for (int n = 1; n <= n_modes; ++n) {
        for (int m = 1; m <= n_modes; ++m) {
            if (equal_rates && m != n) {
                continue;
            }
            const double rn = model.modes.rate(n);
            const double rm = model.modes.rate(m);
            const double eps = model.eps(n);
            const double psd = per_sd[static_cast<std::size_t>(n)];
            const double prd = per_rd[static_cast<std::size_t>(m)];
            const double plr = psd * prd + eps * psd * (1.0 - prd);
            out.min_plr = std::min(out.min_plr, plr);
            if (plr > p_loss + kPlrSlack) {
                continue;
            }
            const double eta = rn * (1.0 - (1.0 - eps) * rn / (rn + rm) * psd);
            if (!out.feasible || eta > out.eta + kTieTolerance) {
                out = {true, n, m, eta, plr, out.min_plr};
            }
        }
    }
    return out;
}

}  // namespace coarq
