#pragma once

#include "coarq/analytics.hpp"
#include "coarq/execution.hpp"

#include <optional>
#include <string>
#include <vector>

namespace coarq {

/// Top-down threshold design: mode N first, then downward, each threshold chosen so
/// the mode's conditional average PER equals `p_target` (0 < p_target <= 1). Modes
/// that stay below the target even at their fit bound are clamped there; modes that
/// cannot reach it on any non-empty interval get an empty interval.
LinkDesign design_thresholds(const SnrDistribution& dist, const ModeSet& ms, double p_target);

/// Same procedure on the conditional mean of PER^2 (slow fading, one retransmission
/// on an unchanged channel).
LinkDesign design_slowfade(const SnrDistribution& dist, const ModeSet& ms, double p_loss);

/// Largest per-mode average PER attainable with every threshold at its fit bound.
double target_per_upper_bound(const SnrDistribution& dist, const ModeSet& ms);
/// Per-mode terms of the bound above (entry n-1 for mode n); empty modes give 0.
std::vector<double> target_per_upper_bounds(const SnrDistribution& dist, const ModeSet& ms);

/// R-D target that splits the loss budget given the S-D target and the mean S-R
/// error. Empty when the S-R errors alone already exceed the budget.
std::optional<double> solve_rd_target(double p_loss, double p_t_sd, double eps_bar);

/// R-D target for the satellite scheme, where the outage mode also transmits.
double solve_rd_target_lmsc(double p_loss, double p_t_sd, double p_out, double per0);

/// Target grid for the S-D search: the lower endpoint p_loss itself followed by
/// `points` log-spaced values strictly inside (p_loss, upper).
std::vector<double> target_grid(double p_loss, double upper, int points);

struct SearchPoint {
    double p_t_sd = 0.0;
    double eps_bar = 0.0;
    std::optional<double> p_t_rd;
    bool feasible = false;
    double eta = 0.0;
    double plr = 0.0;
    std::string note;
};

struct DesignOutcome {
    std::optional<LinkDesign> sd_design;
    std::optional<LinkDesign> rd_design;
    double p_t_sd = 0.0;
    double p_t_rd = 0.0;
    double eta = 0.0;
    double plr = 0.0;
    double p_t_sd_upper = 1.0;
    std::vector<int> clamped_sd;
    std::vector<int> clamped_rd;
    std::vector<SearchPoint> trace;
};

struct CoopProblem {
    ModeSet modes;
    SnrDistribution sd;
    SnrDistribution rd;
    std::optional<double> sr_snr;
    double p_loss = 1e-3;
    int grid_points = 200;
};

DesignOutcome optimize_coop(const CoopProblem& problem, Execution exec = Execution::parallel);
DesignOutcome optimize_lmsc(const CoopProblem& problem, Execution exec = Execution::parallel);

struct ConventionalProblem {
    ModeSet modes;
    SnrDistribution dist;
    double p_loss = 1e-3;
    int grid_points = 200;
};

struct ConventionalOutcome {
    DesignOutcome best;            // sd_design = first attempt, rd_design = retransmission
    double baseline_eta = 0.0;     // equal targets sqrt(p_loss) on both attempts
    double baseline_plr = 0.0;
};

ConventionalOutcome optimize_conventional(const ConventionalProblem& problem,
                                          Execution exec = Execution::parallel);

struct FixedOutcome {
    bool feasible = false;
    int n = 0;
    int m = 0;
    double eta = 0.0;
    double plr = 0.0;
    double min_plr = 1.0;  // smallest loss over all candidate pairs
};

FixedOutcome optimize_fixed(const FixedRateModel& model, double p_loss, bool equal_rates);

}  // namespace coarq
