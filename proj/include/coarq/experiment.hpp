#pragma once

#include "coarq/designer.hpp"
#include "coarq/execution.hpp"
#include "coarq/scenario.hpp"
#include "coarq/simulator.hpp"

#include <optional>
#include <string>
#include <vector>

namespace coarq {

/// One curve of a sweep: a scheme at fixed alpha and lambda.
struct SeriesSpec {
    Scheme scheme = Scheme::coop_amc;
    std::optional<double> alpha_db;   // only for schemes with an S-R link
    std::optional<double> lambda_db;  // only for schemes with an R-D link

    /// File-system friendly identifier, e.g. "coop_amc_a10_l10".
    std::string id() const;
};

/// Cartesian product schemes x alpha x lambda, collapsing axes a scheme ignores.
std::vector<SeriesSpec> expand_series(const Scenario& s);

/// Everything reported for one sweep point. Absent values stay empty and are written
/// as explicit null markers.
struct Row {
    double p_bar_db = 0.0;
    bool feasible = false;
    std::string note;

    std::optional<double> p_t_sd;
    std::optional<double> p_t_rd;
    std::vector<double> sd_thresholds;  // linear SNR
    std::vector<double> rd_thresholds;
    std::vector<int> clamped_sd;
    std::vector<int> clamped_rd;
    std::optional<int> mode_sd;         // fixed-rate pair
    std::optional<int> mode_rd;
    std::optional<double> min_plr;      // fixed rate: smallest loss over all pairs

    std::optional<double> eta;
    std::optional<double> plr;
    std::optional<double> eta_baseline;  // conventional: equal targets
    std::optional<double> plr_baseline;
    std::optional<double> eta_gap;       // expected efficiency under the sampling policy minus eta

    std::optional<SimResult> sim;
};

struct Series {
    SeriesSpec spec;
    std::vector<Row> rows;

    std::size_t feasible_count() const;
};

/// Lowest sweep point from which every point is feasible, when the sweep shows a single
/// infeasible-to-feasible transition.
struct PowerThreshold {
    bool detected = false;      // a transition exists inside the sweep
    bool monotone = false;      // infeasible points all lie below feasible ones
    std::optional<double> p_bar_db;
};

PowerThreshold detect_power_threshold(const Series& series);

/// Effective mode set of a scheme (satellite schemes transmit the outage mode at R_1).
ModeSet scheme_mode_set(const Scenario& s, Scheme scheme);

/// Runs the scheme's optimizer at one sweep point and fills the design and analytic
/// fields. Infeasible points come back with feasible = false.
Row design_point(const Scenario& s, const SeriesSpec& spec, double p_bar_db,
                 Execution exec = Execution::serial);

/// Recomputes the analytic fields of a designed row from its thresholds or rates.
void evaluate_row(const Scenario& s, const SeriesSpec& spec, Row& row, RdSampling sampling);

/// Monte Carlo run of a feasible designed row.
void simulate_row(const Scenario& s, const SeriesSpec& spec, Row& row, const SimConfig& cfg);

/// Designs every (series, sweep point). Points are independent and run concurrently
/// when exec is parallel; output order follows the scenario.
std::vector<Series> design_all(const Scenario& s, Execution exec = Execution::parallel);

}  // namespace coarq
