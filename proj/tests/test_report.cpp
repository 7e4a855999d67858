#include "coarq/experiment.hpp"
#include "coarq/report.hpp"

#include "support/hiperlan.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>
#include <sstream>

using namespace coarq;

namespace {

Series sample_series()
{
    Series s;
    s.spec = {Scheme::fixed_coop, 10.0, 10.0};
    Row bad;
    bad.p_bar_db = 0.0;
    bad.note = "no rate pair meets the loss budget";
    bad.min_plr = 0.25;
    bad.eta = 0.0;
    Row good;
    good.p_bar_db = 3.5;
    good.feasible = true;
    good.mode_sd = 2;
    good.mode_rd = 1;
    good.eta = 0.9375;
    good.plr = 1e-4;
    good.min_plr = 1e-5;
    SimResult sim;
    sim.frames = 10;
    sim.eta_hat = 0.9;
    sim.eta_se = 0.01;
    sim.plr_hat = 0.0;
    sim.transmitted = 10;
    sim.retransmissions = {10, 0};
    good.sim = sim;
    s.rows = {bad, good};
    return s;
}

std::vector<std::string> lines(const std::string& text)
{
    std::vector<std::string> out;
    std::istringstream in(text);
    for (std::string l; std::getline(in, l);) {
        out.push_back(l);
    }
    return out;
}

}  // namespace

TEST_CASE("numbers use the shortest round-trip form")
{
    CHECK(format_number(0.1) == "0.1");
    CHECK(format_number(1e-12) == "1e-12");
    CHECK(format_number(3.0) == "3");
    CHECK(format_number(std::numeric_limits<double>::quiet_NaN()) == kNullMarker);
    CHECK(std::stod(format_number(1.0 / 3.0)) == 1.0 / 3.0);
}

TEST_CASE("absent values become explicit null markers")
{
    const auto csv = lines(series_csv(sample_series(), Command::eval, true));
    REQUIRE(csv.size() == 3);
    CHECK(csv[0].rfind("p_bar_db,feasible,eta_analytic,plr_analytic", 0) == 0);
    CHECK(csv[1].rfind("0,false,0,NA,NA,NA,NA,NA,0.25,", 0) == 0);
    CHECK(csv[1].find(",NA,NA,NA,NA,NA,NA,NA,NA,NA,") != std::string::npos);
    CHECK(csv[2].rfind("3.5,true,0.9375,1e-04,NA,NA,2,1,1e-05,", 0) == 0);
    // The binomial standard error of zero losses is reported as missing, not as zero.
    CHECK(csv[2].find(",0.9,0.01,0,NA,10,10,") != std::string::npos);
}

TEST_CASE("design columns")
{
    const auto csv = lines(series_csv(sample_series(), Command::design, false));
    CHECK(csv[0] == "p_bar_db,feasible,p_t_sd,p_t_rd,mode_sd,mode_rd,eta,plr,thresholds_sd_db,thresholds_rd_db,"
                    "clamped_sd,clamped_rd,note");
}

TEST_CASE("rows round-trip through JSON")
{
    for (const auto& r : sample_series().rows) {
        const auto j = row_to_json(r);
        CHECK(row_to_json(row_from_json(j, "row")) == j);
    }
}

TEST_CASE("sidecar carries metadata and reloads as designs")
{
    const Scenario sc = load_scenario_file(support::scenario_path("rayleigh_adaptive_vs_fixed.json"));
    std::vector<Series> series;
    for (const auto& spec : expand_series(sc)) {
        Series s;
        s.spec = spec;
        for (double p : sc.p_bar_db) {
            Row r = sample_series().rows[1];
            r.p_bar_db = p;
            s.rows.push_back(r);
        }
        series.push_back(s);
    }
    ReportMeta meta;
    meta.command = Command::design;
    const auto doc = report_sidecar(sc, series, meta);
    CHECK(doc.at("tool").is_string());
    CHECK(doc.at("command") == "design");
    CHECK(doc.at("scenario_hash").get<std::string>().size() == 16);
    REQUIRE(doc.at("series").size() == series.size());
    const auto back = designs_from_sidecar(doc, sc);
    REQUIRE(back.size() == series.size());
    for (std::size_t i = 0; i < back.size(); ++i) {
        CHECK(back[i].spec.id() == series[i].spec.id());
        REQUIRE(back[i].rows.size() == series[i].rows.size());
        for (std::size_t k = 0; k < back[i].rows.size(); ++k) {
            // Designs are reloaded without simulation results.
            Row expected = series[i].rows[k];
            expected.sim.reset();
            CHECK(row_to_json(back[i].rows[k]) == row_to_json(expected));
        }
    }
}
