// Acceptance checks. Prints one PASS/FAIL line per criterion and exits non-zero if
// any criterion fails.

#include "coarq/analytics.hpp"
#include "coarq/designer.hpp"
#include "coarq/experiment.hpp"
#include "coarq/special_functions.hpp"

#include "oracles/enumerate.hpp"
#include "oracles/lutz.hpp"
#include "oracles/rayleigh.hpp"
#include "support/hiperlan.hpp"
#include "support/random_configs.hpp"

#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <map>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

using namespace coarq;
namespace fs = std::filesystem;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Report {
    bool pass = true;
    std::vector<std::string> details;

    void fail(const std::string& what)
    {
        pass = false;
        if (details.size() < 40) {
            details.push_back(what);
        }
    }
    void note(const std::string& what) { details.push_back(what); }
    void require(bool ok, const std::string& what)
    {
        if (!ok) {
            fail(what);
        }
    }
};

std::string fmt(const char* f, auto... args)
{
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0)
{
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Designed sweeps shared by several criteria, keyed by scenario file name.
struct Sweeps {
    std::map<std::string, Scenario> scenarios;
    std::map<std::string, std::vector<Series>> series;

    const Series& get(const std::string& file, const std::string& id) const
    {
        for (const auto& s : series.at(file)) {
            if (s.spec.id() == id) {
                return s;
            }
        }
        throw std::runtime_error("no series " + id + " in " + file);
    }
};

const std::vector<std::string> kStandardScenarios = {
    "rayleigh_coop_vs_direct.json", "rayleigh_alpha_sweep.json", "rayleigh_adaptive_vs_fixed.json",
    "rayleigh_distinct_targets.json", "lmsc_relay.json", "rayleigh_monte_carlo.json",
};

Sweeps design_standard_sweeps()
{
    Sweeps w;
    for (const auto& f : kStandardScenarios) {
        w.scenarios[f] = load_scenario_file(support::scenario_path(f));
        w.series[f] = design_all(w.scenarios[f], Execution::parallel);
    }
    return w;
}

// 1. Discrete channels against exhaustive path enumeration.
Report discrete_exactness()
{
    Report r;
    const auto t0 = Clock::now();
    support::ConfigGenerator gen(20240601);
    const int configs = 60;
    double worst = 0.0;
    for (int i = 0; i < configs; ++i) {
        const auto c = gen.config(3, 4, 2);
        const auto model = c.model();
        const auto aw = oracle::enumerate_coop(c.modes, c.sd, c.rd, c.sr_snr, c.nr, oracle::Policy::as_written);
        const auto cond = oracle::enumerate_coop(c.modes, c.sd, c.rd, c.sr_snr, c.nr, oracle::Policy::conditioned);
        const double de = std::fabs(eta_coop(model) - aw.eta);
        const double dp = std::fabs(plr_coop(model) - cond.plr);
        worst = std::max({worst, de, dp});
        r.require(de <= 1e-12, fmt("config %d: eta differs by %.3g", i, de));
        r.require(dp <= 1e-12, fmt("config %d: plr differs by %.3g", i, dp));
    }
    const double secs = seconds_since(t0);
    r.require(secs < 10.0, fmt("took %.2f s", secs));
    r.note(fmt("%d configurations, worst deviation %.3g, %.3f s", configs, worst, secs));
    return r;
}

// 2. Reductions to the simpler schemes.
Report limiting_case_reductions()
{
    Report r;
    support::ConfigGenerator gen(777);
    double worst = 0.0;
    auto check = [&](double a, double b, const std::string& what) {
        const double d = std::fabs(a - b);
        worst = std::max(worst, d);
        r.require(d <= 1e-12, fmt("%s differs by %.3g", what.c_str(), d));
    };
    for (int i = 0; i < 10; ++i) {
        auto c = gen.config(3, 4, 2);
        c.sr_snr.reset();

        auto same = c;
        same.rd = same.sd;
        const auto m_same = same.model();
        check(eta_coop(m_same), eta_conventional(m_same.sd, m_same.rd, same.nr), fmt("conventional eta %d", i));
        if (same.nr == 1) {
            check(plr_coop(m_same), plr_conventional(m_same.sd, m_same.rd), fmt("conventional plr %d", i));
        }

        auto none = c;
        none.nr = 0;
        const auto m_none = none.model();
        check(eta_coop(m_none), eta_amc_only(m_none.sd), fmt("nr=0 eta %d", i));
        check(plr_coop(m_none), plr_amc_only(m_none.sd), fmt("nr=0 plr %d", i));

        auto sat = c;
        sat.nr = 1;
        sat.sd.thresholds.front() = 0.0;
        const auto m_sat = sat.model(sat.modes.front().rate);
        const auto m_coop = sat.model();
        check(eta_lmsc(m_sat), eta_coop_nr1(m_coop), fmt("satellite eta %d", i));
        check(plr_lmsc(m_sat), plr_coop_nr1(m_coop), fmt("satellite plr %d", i));
    }
    r.note(fmt("10 configurations x 3 reductions, worst deviation %.3g", worst));
    return r;
}

// 3. Monte Carlo oracle at the designed operating point.
Report monte_carlo(const Sweeps& w)
{
    Report r;
    const auto t0 = Clock::now();
    const std::string file = "rayleigh_monte_carlo.json";
    const Scenario& s = w.scenarios.at(file);
    const auto spec = expand_series(s).front();
    Row row = w.get(file, spec.id()).rows.front();
    if (!row.feasible || row.p_bar_db != 15.0) {
        r.fail("the 15 dB operating point is not feasible");
        return r;
    }
    SimConfig cfg;
    cfg.frames = 10'000'000;
    cfg.seed = s.sim ? s.sim->seed : 1;
    cfg.rd_sampling = RdSampling::non_outage_conditioned;
    evaluate_row(s, spec, row, cfg.rd_sampling);
    simulate_row(s, spec, row, cfg);
    const SimResult& sim = *row.sim;
    const double gap = std::fabs(*row.eta_gap);
    const double de = std::fabs(sim.eta_hat - *row.eta);
    const double dp = std::fabs(sim.plr_hat - *row.plr);
    r.require(de <= 3.0 * *sim.eta_se + gap,
              fmt("eta: |%.8f - %.8f| = %.3g > 3 SE + gap = %.3g", sim.eta_hat, *row.eta, de, 3.0 * *sim.eta_se + gap));
    r.require(dp <= 3.0 * *sim.plr_se,
              fmt("plr: |%.6g - %.6g| = %.3g > 3 SE = %.3g", sim.plr_hat, *row.plr, dp, 3.0 * *sim.plr_se));
    const double secs = seconds_since(t0);
    r.require(secs < 300.0, fmt("took %.1f s", secs));
    r.note(fmt("eta %.6f vs sim %.6f (SE %.2g, gap %.2g); plr %.4g vs sim %.4g (SE %.2g, %llu losses); %.1f s",
               *row.eta, sim.eta_hat, *sim.eta_se, gap, *row.plr, sim.plr_hat, *sim.plr_se,
               static_cast<unsigned long long>(sim.lost), secs));
    return r;
}

// Conditional mean of PER^power over [lo, hi) computed without the library's
// closed forms.
double oracle_avg(const SnrDistribution& dist, const AmcMode& mode, double lo, double hi, int power)
{
    const oracle::FitMode fm{mode.fit_a, mode.fit_g, mode.gamma_pl};
    if (const auto* e = std::get_if<ExponentialLaw>(&dist.law())) {
        return oracle::rayleigh_avg(fm, e->mean, lo, hi, power);
    }
    const auto& p = std::get<LutzParams>(dist.law());
    const oracle::LutzRef ref{p.blockage_prob, p.rice_factor, p.unblocked_mean_snr, p.shadow_mean_db, p.shadow_std_db};
    const double edge = std::max(mode.gamma_pl, mode.fit_a > 1.0 ? std::log(mode.fit_a) / mode.fit_g : 0.0);
    const double mass = oracle::integrate_split(
        [&](double x) { return std::pow(oracle::fit_per(fm, x), power) * oracle::pdf(ref, x); }, lo, hi, {edge});
    const double prob = oracle::integrate_split([&](double x) { return oracle::pdf(ref, x); }, lo, hi, {edge});
    return mass / prob;
}

struct ModeCheck {
    std::string where;
    SnrDistribution dist;
    AmcMode mode;
    double lo;
    double hi;
    double target;
    int power;
    double result = 0.0;
};

// 4. Loss constraint and per-mode targets of every designed point.
Report designer_constraint(const Sweeps& w)
{
    Report r;
    std::vector<ModeCheck> checks;
    int rows = 0;
    for (const auto& [file, all] : w.series) {
        const Scenario& s = w.scenarios.at(file);
        for (const auto& series : all) {
            const Scheme sc = series.spec.scheme;
            const ModeSet ms = scheme_mode_set(s, sc);
            for (const auto& row : series.rows) {
                if (!row.feasible) {
                    continue;
                }
                ++rows;
                const std::string where = fmt("%s @ %g dB", series.spec.id().c_str(), row.p_bar_db);
                r.require(row.plr && *row.plr <= s.p_loss + 1e-12,
                          where + fmt(": plr %.6g exceeds the budget", row.plr.value_or(-1.0)));
                if (scheme_is_fixed_rate(sc)) {
                    continue;
                }
                const auto ch = channels_at(s, row.p_bar_db, series.spec.alpha_db.value_or(0.0),
                                            series.spec.lambda_db.value_or(0.0));
                auto add = [&](const std::vector<double>& thr, const std::vector<int>& clamped,
                               const SnrDistribution& dist, double target, int power, const char* link) {
                    const LinkDesign design(ms, dist, thr);
                    for (int n = 1; n <= ms.size(); ++n) {
                        const bool is_clamped = std::find(clamped.begin(), clamped.end(), n) != clamped.end();
                        const double lo = design.lower(n);
                        const double hi = design.upper(n);
                        if (is_clamped || !(hi > lo) || !(design.mode_probability(n) > 1e-200)) {
                            continue;
                        }
                        checks.push_back({where + fmt(" %s mode %d", link, n), dist, ms.mode(n), lo, hi, target, power});
                    }
                };
                switch (sc) {
                case Scheme::coop_amc:
                case Scheme::lmsc_coop:
                    add(row.sd_thresholds, row.clamped_sd, ch.sd, *row.p_t_sd, 1, "sd");
                    add(row.rd_thresholds, row.clamped_rd, ch.rd, std::min(1.0, *row.p_t_rd), 1, "rd");
                    break;
                case Scheme::conventional_amc:
                    add(row.sd_thresholds, row.clamped_sd, ch.sd, *row.p_t_sd, 1, "tx");
                    add(row.rd_thresholds, row.clamped_rd, ch.sd, *row.p_t_rd, 1, "rtx");
                    break;
                case Scheme::slowfade_conventional:
                    add(row.sd_thresholds, row.clamped_sd, ch.sd, s.p_loss, 2, "sd");
                    break;
                case Scheme::amc_only:
                    add(row.sd_thresholds, row.clamped_sd, ch.sd, s.p_loss, 1, "sd");
                    break;
                default:
                    break;
                }
            }
        }
    }
    const long count = static_cast<long>(checks.size());
#pragma omp parallel for schedule(dynamic, 1)
    for (long i = 0; i < count; ++i) {
        auto& c = checks[static_cast<std::size_t>(i)];
        c.result = oracle_avg(c.dist, c.mode, c.lo, c.hi, c.power);
    }
    double worst = 0.0;
    for (const auto& c : checks) {
        const double d = std::fabs(c.result - c.target);
        worst = std::max(worst, d);
        r.require(d <= 1e-9, fmt("%s: average %.12g vs target %.12g", c.where.c_str(), c.result, c.target));
    }
    r.note(fmt("%d feasible points, %zu unclamped modes checked by quadrature, worst |PER - target| %.3g", rows,
               checks.size(), worst));
    return r;
}

// 5. Special functions and the satellite law.
Report special_functions()
{
    Report r;
    double worst = 0.0;
    for (double x = 0.0; x <= 40.0; x += 0.25) {
        const double d1 = std::fabs(marcum_q1(x, 0.0) - 1.0);
        const double d2 = std::fabs(marcum_q1(0.0, x) - std::exp(-0.5 * x * x));
        worst = std::max({worst, d1, d2});
        r.require(d1 <= 1e-12 && d2 <= 1e-12, fmt("marcum closed form at %g", x));
    }
    const LutzParams sd{0.89, db_to_linear(3.9), 1.0, -11.5, 2.0};
    const LutzParams rd{0.24, db_to_linear(10.2), 1.0, -8.9, 5.1};
    const double fsd = lutz_F(0.0, kInf, sd);
    const double frd = lutz_F(0.0, kInf, rd);
    r.require(std::fabs(fsd - 1.0) <= 1e-8, fmt("S-D normalization %.12f", fsd));
    r.require(std::fabs(frd - 1.0) <= 1e-8, fmt("R-D normalization %.12f", frd));

    support::ConfigGenerator gen(55);
    struct GCase {
        LutzParams p;
        double x, y, a, g, lib, ref;
    };
    std::vector<GCase> cases;
    for (int i = 0; i < 50; ++i) {
        const LutzParams& p = i % 2 == 0 ? sd : rd;
        double x = gen.uniform(0.0, 4.0);
        double y = i % 10 == 9 ? kInf : x + gen.uniform(0.0, 4.0);
        cases.push_back({p, x, y, gen.uniform(1.0, 300.0), gen.uniform(0.3, 8.0), 0.0, 0.0});
    }
    const long count = static_cast<long>(cases.size());
#pragma omp parallel for schedule(dynamic, 1)
    for (long i = 0; i < count; ++i) {
        auto& c = cases[static_cast<std::size_t>(i)];
        const oracle::LutzRef ref{c.p.blockage_prob, c.p.rice_factor, c.p.unblocked_mean_snr, c.p.shadow_mean_db,
                                  c.p.shadow_std_db};
        c.lib = lutz_G(c.x, c.y, c.p, c.a, c.g);
        c.ref = oracle::weighted(ref, c.x, c.y, c.a, c.g);
    }
    double worst_g = 0.0;
    for (const auto& c : cases) {
        const double d = std::fabs(c.lib - c.ref);
        worst_g = std::max(worst_g, d);
        r.require(d <= 1e-8, fmt("G(%g, %g; a=%g, g=%g): %.12g vs %.12g", c.x, c.y, c.a, c.g, c.lib, c.ref));
    }
    r.note(fmt("marcum worst %.3g; F(0,inf) = 1%+.2g (S-D), 1%+.2g (R-D); 50 G intervals worst %.3g", worst,
               fsd - 1.0, frd - 1.0, worst_g));
    return r;
}

// Pointwise a >= b along two series sharing a sweep.
void ordering(Report& r, const Series& a, const Series& b, int& violations)
{
    for (std::size_t i = 0; i < a.rows.size(); ++i) {
        const double ea = a.rows[i].eta.value_or(0.0);
        const double eb = b.rows[i].eta.value_or(0.0);
        if (!(ea >= eb)) {
            ++violations;
            r.fail(fmt("%s (%.9f) < %s (%.9f) at %g dB", a.spec.id().c_str(), ea, b.spec.id().c_str(), eb,
                       a.rows[i].p_bar_db));
        }
    }
}

// 6. Orderings between schemes.
Report orderings(const Sweeps& w)
{
    Report r;
    struct Pair {
        const char* file;
        const char* hi;
        const char* lo;
    };
    const Pair pairs[] = {
        {"rayleigh_coop_vs_direct.json", "coop_amc_a10_l10", "slowfade_conventional"},
        {"rayleigh_coop_vs_direct.json", "slowfade_conventional", "amc_only"},
        {"rayleigh_adaptive_vs_fixed.json", "coop_amc_a10_l10", "fixed_coop_a10_l10"},
        {"rayleigh_adaptive_vs_fixed.json", "fixed_coop_a10_l10", "fixed_coop_equal_rate_a10_l10"},
        {"rayleigh_coop_vs_direct.json", "coop_amc_a10_l10", "coop_amc_a10_l0"},
        {"rayleigh_alpha_sweep.json", "coop_amc_a10_l10", "coop_amc_a0_l10"},
        {"rayleigh_alpha_sweep.json", "coop_amc_a0_l10", "coop_amc_am10_l10"},
    };
    for (const auto& p : pairs) {
        int v = 0;
        ordering(r, w.get(p.file, p.hi), w.get(p.file, p.lo), v);
        r.note(fmt("%s >= %s: %s", p.hi, p.lo, v == 0 ? "holds at every point" : fmt("%d violations", v).c_str()));
    }
    return r;
}

// 7. Power threshold of the fixed-rate scheme.
Report power_threshold(const Sweeps& w)
{
    Report r;
    for (const char* id : {"fixed_coop_a10_l10", "fixed_coop_equal_rate_a10_l10"}) {
        const Series& s = w.get("rayleigh_adaptive_vs_fixed.json", id);
        const auto th = detect_power_threshold(s);
        r.require(th.detected, fmt("%s: no single infeasible-to-feasible transition", id));
        for (const auto& row : s.rows) {
            if (!row.feasible) {
                r.require(row.eta && *row.eta == 0.0, fmt("%s: infeasible point at %g dB not reported as 0", id,
                                                          row.p_bar_db));
            }
        }
        if (th.p_bar_db) {
            r.note(fmt("%s: threshold at %g dB", id, *th.p_bar_db));
        }
    }
    return r;
}

// 8. Distinct transmission and retransmission targets against equal targets.
Report distinct_targets(const Sweeps& w)
{
    Report r;
    const Scenario& s = w.scenarios.at("rayleigh_distinct_targets.json");
    const Series& series = w.series.at("rayleigh_distinct_targets.json").front();
    const double mid = 0.5 * (s.p_bar_db.front() + s.p_bar_db.back());
    int strict_low = 0;
    double best_gain = 0.0;
    for (const auto& row : series.rows) {
        if (!row.feasible || !row.eta_baseline) {
            r.fail(fmt("no design at %g dB", row.p_bar_db));
            continue;
        }
        const double gain = *row.eta - *row.eta_baseline;
        r.require(gain >= 0.0, fmt("worse than equal targets at %g dB by %.3g", row.p_bar_db, -gain));
        if (gain > 1e-9 && row.p_bar_db <= mid) {
            ++strict_low;
        }
        best_gain = std::max(best_gain, gain);
    }
    r.require(strict_low >= 1, "no strict improvement in the lower half of the sweep");
    r.note(fmt("strict improvement at %d low-SNR points, largest gain %.4f bit/symbol", strict_low, best_gain));
    return r;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::map<std::string, std::string> csv_payloads(const fs::path& dir)
{
    std::map<std::string, std::string> out;
    for (const auto& e : fs::directory_iterator(dir)) {
        if (e.path().extension() == ".csv") {
            out[e.path().filename().string()] = slurp(e.path());
        }
    }
    return out;
}

// 9. Byte-identical CSV output across repeated runs and thread counts.
Report determinism()
{
    Report r;
    const fs::path root = fs::temp_directory_path() / fmt("coarq_acceptance_%d", static_cast<int>(::getpid()));
    fs::remove_all(root);
    fs::create_directories(root);
    struct Job {
        const char* scenario;
        const char* args;
    };
    const Job jobs[] = {
        {"rayleigh_monte_carlo.json", "sweep --frames 300000 --seed 7"},
        {"rayleigh_adaptive_vs_fixed.json", "design --grid 60"},
    };
    for (const auto& job : jobs) {
        std::vector<std::map<std::string, std::string>> runs;
        int k = 0;
        for (int threads : {1, 8, 8}) {
            const fs::path out = root / fmt("%s_%d", job.scenario, k++);
            std::string sub = job.args;
            const std::string verb = sub.substr(0, sub.find(' '));
            const std::string rest = sub.substr(sub.find(' ') + 1);
            const std::string cmd = fmt("\"%s\" %s \"%s\" %s --threads %d -o \"%s\" > /dev/null", COARQ_CLI_PATH,
                                        verb.c_str(), support::scenario_path(job.scenario).c_str(), rest.c_str(),
                                        threads, out.string().c_str());
            const int rc = std::system(cmd.c_str());
            r.require(rc == 0, fmt("%s exited with %d", cmd.c_str(), rc));
            runs.push_back(csv_payloads(out));
        }
        r.require(!runs.front().empty(), fmt("%s: no CSV output", job.scenario));
        r.require(runs[0] == runs[1], fmt("%s: 1 thread and 8 threads differ", job.scenario));
        r.require(runs[1] == runs[2], fmt("%s: repeated 8-thread runs differ", job.scenario));
        r.note(fmt("%s: %zu CSV files identical across 3 runs", job.scenario, runs.front().size()));
    }
    fs::remove_all(root);
    return r;
}

}  // namespace

int main()
{
    struct Criterion {
        int id;
        const char* title;
        std::function<Report()> run;
    };
    std::printf("Designing the standard sweeps...\n");
    std::fflush(stdout);
    const auto t0 = Clock::now();
    const Sweeps sweeps = design_standard_sweeps();
    std::printf("  done in %.1f s\n\n", seconds_since(t0));

    const std::vector<Criterion> criteria = {
        {1, "discrete-channel exactness", discrete_exactness},
        {2, "limiting-case reductions", limiting_case_reductions},
        {3, "Monte Carlo agreement at 15 dB", [&] { return monte_carlo(sweeps); }},
        {4, "designer loss constraint and per-mode targets", [&] { return designer_constraint(sweeps); }},
        {5, "special functions and satellite law", special_functions},
        {6, "scheme orderings", [&] { return orderings(sweeps); }},
        {7, "fixed-rate power threshold", [&] { return power_threshold(sweeps); }},
        {8, "distinct targets beat equal targets", [&] { return distinct_targets(sweeps); }},
        {9, "deterministic output", determinism},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        Report rep;
        try {
            rep = c.run();
        } catch (const std::exception& e) {
            rep.fail(std::string("exception: ") + e.what());
        }
        failed += rep.pass ? 0 : 1;
        std::printf("[%s] criterion %d: %s\n", rep.pass ? "PASS" : "FAIL", c.id, c.title);
        for (const auto& d : rep.details) {
            std::printf("       %s\n", d.c_str());
        }
        std::fflush(stdout);
    }
    std::printf("\n%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
