#include "coarq/errors.hpp"
#include "coarq/experiment.hpp"
#include "coarq/report.hpp"
#include "coarq/scenario.hpp"

#include <CLI11.hpp>
#include <omp.h>

#include <chrono>
#include <ctime>
#include <fstream>
#include <iostream>

namespace {

using namespace coarq;

enum Exit { kOk = 0, kSchema = 1, kInfeasible = 2, kNumerical = 3 };

struct Options {
    std::string scenario;
    std::string design_file;
    std::string out_dir = "out";
    std::optional<std::uint64_t> seed;
    std::optional<std::uint64_t> frames;
    std::optional<int> grid;
    std::optional<int> threads;
    std::string rd_sampling;
};

std::string utc_now()
{
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return buf;
}

Scenario load(const Options& o)
{
    Scenario s = load_scenario_file(o.scenario);
    if (o.grid) {
        if (*o.grid < 1) {
            throw SchemaError("--grid", "must be at least 1");
        }
        s.grid_points = *o.grid;
    }
    if (o.seed || o.frames || !o.rd_sampling.empty()) {
        SimSpec sim = s.sim.value_or(SimSpec{});
        if (o.seed) {
            sim.seed = *o.seed;
        }
        if (o.frames) {
            if (*o.frames < 1) {
                throw SchemaError("--frames", "must be at least 1");
            }
            sim.frames = *o.frames;
        }
        if (o.rd_sampling == "unconditional") {
            sim.rd_sampling = RdSampling::unconditional;
        } else if (o.rd_sampling == "non_outage_conditioned") {
            sim.rd_sampling = RdSampling::non_outage_conditioned;
        } else if (!o.rd_sampling.empty()) {
            throw SchemaError("--rd-sampling", "expected 'unconditional' or 'non_outage_conditioned'");
        }
        s.sim = sim;
    }
    return s;
}

std::vector<Series> designs(const Scenario& s, const Options& o, RdSampling sampling)
{
    if (o.design_file.empty()) {
        return design_all(s);
    }
    std::ifstream in(o.design_file);
    if (!in) {
        throw SchemaError(o.design_file, "cannot open design file");
    }
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw SchemaError(o.design_file, e.what());
    }
    auto series = designs_from_sidecar(doc, s);
    for (auto& ser : series) {
        for (auto& row : ser.rows) {
            evaluate_row(s, ser.spec, row, sampling);
        }
    }
    return series;
}

SimConfig sim_config(const SimSpec& spec)
{
    SimConfig cfg;
    cfg.frames = spec.frames;
    cfg.seed = spec.seed;
    cfg.rd_sampling = spec.rd_sampling;
    return cfg;
}

void simulate_all(const Scenario& s, std::vector<Series>& series, const SimConfig& cfg)
{
    for (auto& ser : series) {
        for (auto& row : ser.rows) {
            evaluate_row(s, ser.spec, row, cfg.rd_sampling);
            simulate_row(s, ser.spec, row, cfg);
        }
    }
}

int finish(const Scenario& s, const std::vector<Series>& series, const ReportMeta& meta, const Options& o)
{
    write_report(o.out_dir, s, series, meta);
    int code = kOk;
    for (const auto& ser : series) {
        const std::size_t ok = ser.feasible_count();
        std::cout << ser.spec.id() << ": " << ok << "/" << ser.rows.size() << " feasible points\n";
        if (ok == 0) {
            code = kInfeasible;
        }
    }
    std::cout << "wrote " << o.out_dir << "\n";
    return code;
}

int run_command(Command cmd, const Options& o)
{
    const Scenario s = load(o);
    ReportMeta meta;
    meta.command = cmd;
    meta.generated_at = utc_now();
    switch (cmd) {
    case Command::design:
        return finish(s, design_all(s), meta, o);
    case Command::eval:
        return finish(s, designs(s, o, RdSampling::non_outage_conditioned), meta, o);
    case Command::simulate: {
        const SimConfig cfg = sim_config(s.sim.value_or(SimSpec{}));
        auto series = designs(s, o, cfg.rd_sampling);
        simulate_all(s, series, cfg);
        meta.sim = cfg;
        return finish(s, series, meta, o);
    }
    case Command::sweep: {
        auto series = design_all(s);
        if (s.sim) {
            const SimConfig cfg = sim_config(*s.sim);
            simulate_all(s, series, cfg);
            meta.sim = cfg;
        }
        return finish(s, series, meta, o);
    }
    }
    return kOk;
}

int validate(const Options& o)
{
    const Scenario s = load(o);
    std::cout << "scenario '" << s.name << "' is valid\n";
    for (const auto& spec : expand_series(s)) {
        std::cout << "  series " << spec.id() << " over " << s.p_bar_db.size() << " points\n";
    }
    return kOk;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Joint AMC and cooperative ARQ design, evaluation and simulation"};
    app.require_subcommand(1);
    Options o;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("scenario", o.scenario, "Scenario file (JSON)")->required()->check(CLI::ExistingFile);
        sub->add_option("-o,--out", o.out_dir, "Output directory");
        sub->add_option("--grid", o.grid, "Grid points for the target search");
        sub->add_option("--threads", o.threads, "Worker threads");
    };
    auto add_sim = [&](CLI::App* sub) {
        sub->add_option("--seed", o.seed, "Simulation seed");
        sub->add_option("--frames", o.frames, "Simulated frames per sweep point");
        sub->add_option("--rd-sampling", o.rd_sampling, "unconditional or non_outage_conditioned");
    };

    auto* design = app.add_subcommand("design", "Optimize thresholds or rates at every sweep point");
    add_common(design);
    auto* eval = app.add_subcommand("eval", "Analytic efficiency and loss at every sweep point");
    add_common(eval);
    eval->add_option("--design", o.design_file, "Reuse designs from a report.json")->check(CLI::ExistingFile);
    auto* simulate = app.add_subcommand("simulate", "Monte Carlo check of the designed schemes");
    add_common(simulate);
    add_sim(simulate);
    simulate->add_option("--design", o.design_file, "Reuse designs from a report.json")->check(CLI::ExistingFile);
    auto* sweep = app.add_subcommand("sweep", "Design, evaluate and (with a sim block) simulate");
    add_common(sweep);
    add_sim(sweep);
    auto* check = app.add_subcommand("validate", "Check a scenario file");
    check->add_option("scenario", o.scenario, "Scenario file (JSON)")->required()->check(CLI::ExistingFile);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kOk : kSchema;
    }

    if (o.threads) {
        omp_set_num_threads(std::max(1, *o.threads));
    }

    try {
        if (check->parsed()) {
            return validate(o);
        }
        if (design->parsed()) {
            return run_command(Command::design, o);
        }
        if (eval->parsed()) {
            return run_command(Command::eval, o);
        }
        if (simulate->parsed()) {
            return run_command(Command::simulate, o);
        }
        return run_command(Command::sweep, o);
    } catch (const SchemaError& e) {
        std::cerr << "schema error: " << e.what() << "\n";
        return kSchema;
    } catch (const DomainError& e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return kSchema;
    } catch (const InfeasibleError& e) {
        std::cerr << "infeasible: " << e.what() << "\n";
        return kInfeasible;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kNumerical;
    }
}
