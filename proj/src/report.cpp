#include "coarq/report.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace coarq {

using nlohmann::json;

namespace {

template <typename T>
std::string opt(const std::optional<T>& v)
{
    if (!v) {
        return kNullMarker;
    }
    if constexpr (std::is_floating_point_v<T>) {
        return format_number(*v);
    } else {
        return std::to_string(*v);
    }
}

std::string db_list(const std::vector<double>& xs)
{
    if (xs.empty()) {
        return kNullMarker;
    }
    std::string out;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        out += (i ? ";" : "") + (xs[i] > 0.0 ? format_number(linear_to_db(xs[i])) : std::string("-inf"));
    }
    return out;
}

std::string int_list(const std::vector<int>& xs)
{
    std::string out;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        out += (i ? ";" : "") + std::to_string(xs[i]);
    }
    return out;
}

std::string csv_text(const std::string& s)
{
    if (s.find_first_of(",\"\n") == std::string::npos) {
        return s;
    }
    std::string out = "\"";
    for (char c : s) {
        out += c == '"' ? std::string("\"\"") : std::string(1, c);
    }
    return out + "\"";
}

template <typename T>
json opt_json(const std::optional<T>& v)
{
    return v ? json(*v) : json(nullptr);
}

template <typename T>
std::optional<T> opt_from(const json& doc, const char* key)
{
    const auto it = doc.find(key);
    if (it == doc.end() || it->is_null()) {
        return std::nullopt;
    }
    return it->get<T>();
}

json sim_to_json(const SimResult& r)
{
    return {{"frames", r.frames},
            {"eta_hat", r.eta_hat},
            {"eta_se", opt_json(r.eta_se)},
            {"plr_hat", r.plr_hat},
            {"plr_se", opt_json(r.plr_se)},
            {"transmitted", r.transmitted},
            {"lost", r.lost},
            {"outage_frames", r.outage_frames},
            {"relay_engagements", r.relay_engagements},
            {"retransmissions", r.retransmissions},
            {"lost_undecoded", r.lost_undecoded},
            {"lost_exhausted", r.lost_exhausted},
            {"lost_silent", r.lost_silent}};
}

SimResult sim_from_json(const json& d)
{
    SimResult r;
    r.frames = d.at("frames").get<std::uint64_t>();
    r.eta_hat = d.at("eta_hat").get<double>();
    r.eta_se = opt_from<double>(d, "eta_se");
    r.plr_hat = d.at("plr_hat").get<double>();
    r.plr_se = opt_from<double>(d, "plr_se");
    r.transmitted = d.at("transmitted").get<std::uint64_t>();
    r.lost = d.at("lost").get<std::uint64_t>();
    r.outage_frames = d.at("outage_frames").get<std::uint64_t>();
    r.relay_engagements = d.at("relay_engagements").get<std::uint64_t>();
    r.retransmissions = d.at("retransmissions").get<std::vector<std::uint64_t>>();
    r.lost_undecoded = d.at("lost_undecoded").get<std::uint64_t>();
    r.lost_exhausted = d.at("lost_exhausted").get<std::uint64_t>();
    r.lost_silent = d.at("lost_silent").get<std::uint64_t>();
    return r;
}

std::string sampling_name(RdSampling s)
{
    return s == RdSampling::unconditional ? "unconditional" : "non_outage_conditioned";
}

std::string hex64(std::uint64_t v)
{
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

}  // namespace

std::string to_string(Command c)
{
    switch (c) {
    case Command::design:
        return "design";
    case Command::eval:
        return "eval";
    case Command::simulate:
        return "simulate";
    case Command::sweep:
        return "sweep";
    }
    return "unknown";
}

std::string format_number(double v)
{
    if (!std::isfinite(v)) {
        return kNullMarker;
    }
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::string series_csv(const Series& series, Command command, bool with_sim)
{
    std::ostringstream out;
    if (command == Command::design) {
        out << "p_bar_db,feasible,p_t_sd,p_t_rd,mode_sd,mode_rd,eta,plr,thresholds_sd_db,thresholds_rd_db,"
               "clamped_sd,clamped_rd,note\n";
        for (const auto& r : series.rows) {
            out << format_number(r.p_bar_db) << ',' << (r.feasible ? "true" : "false") << ',' << opt(r.p_t_sd) << ','
                << opt(r.p_t_rd) << ',' << opt(r.mode_sd) << ',' << opt(r.mode_rd) << ',' << opt(r.eta) << ','
                << opt(r.plr) << ',' << db_list(r.sd_thresholds) << ',' << db_list(r.rd_thresholds) << ','
                << int_list(r.clamped_sd) << ',' << int_list(r.clamped_rd) << ',' << csv_text(r.note) << '\n';
        }
        return out.str();
    }
    out << "p_bar_db,feasible,eta_analytic,plr_analytic,p_t_sd,p_t_rd,mode_sd,mode_rd,min_plr,eta_baseline,"
           "plr_baseline,eta_policy_gap";
    if (with_sim) {
        out << ",eta_sim,eta_sim_se,plr_sim,plr_sim_se,frames,transmitted,lost,outage_frames,relay_engagements";
    }
    out << ",note\n";
    for (const auto& r : series.rows) {
        out << format_number(r.p_bar_db) << ',' << (r.feasible ? "true" : "false") << ',' << opt(r.eta) << ','
            << opt(r.plr) << ',' << opt(r.p_t_sd) << ',' << opt(r.p_t_rd) << ',' << opt(r.mode_sd) << ','
            << opt(r.mode_rd) << ',' << opt(r.min_plr) << ',' << opt(r.eta_baseline) << ',' << opt(r.plr_baseline)
            << ',' << opt(r.eta_gap);
        if (with_sim) {
            if (r.sim) {
                const SimResult& s = *r.sim;
                out << ',' << format_number(s.eta_hat) << ',' << opt(s.eta_se) << ',' << format_number(s.plr_hat)
                    << ',' << opt(s.plr_se) << ',' << s.frames << ',' << s.transmitted << ',' << s.lost << ','
                    << s.outage_frames << ',' << s.relay_engagements;
            } else {
                for (int i = 0; i < 9; ++i) {
                    out << ',' << kNullMarker;
                }
            }
        }
        out << ',' << csv_text(r.note) << '\n';
    }
    return out.str();
}

json row_to_json(const Row& r)
{
    return {{"p_bar_db", r.p_bar_db},
            {"feasible", r.feasible},
            {"note", r.note},
            {"p_t_sd", opt_json(r.p_t_sd)},
            {"p_t_rd", opt_json(r.p_t_rd)},
            {"sd_thresholds", r.sd_thresholds},
            {"rd_thresholds", r.rd_thresholds},
            {"clamped_sd", r.clamped_sd},
            {"clamped_rd", r.clamped_rd},
            {"mode_sd", opt_json(r.mode_sd)},
            {"mode_rd", opt_json(r.mode_rd)},
            {"min_plr", opt_json(r.min_plr)},
            {"eta", opt_json(r.eta)},
            {"plr", opt_json(r.plr)},
            {"eta_baseline", opt_json(r.eta_baseline)},
            {"plr_baseline", opt_json(r.plr_baseline)},
            {"eta_policy_gap", opt_json(r.eta_gap)},
            {"sim", r.sim ? sim_to_json(*r.sim) : json(nullptr)}};
}

Row row_from_json(const json& d, const std::string& path)
{
    try {
        Row r;
        r.p_bar_db = d.at("p_bar_db").get<double>();
        r.feasible = d.at("feasible").get<bool>();
        r.note = d.value("note", "");
        r.p_t_sd = opt_from<double>(d, "p_t_sd");
        r.p_t_rd = opt_from<double>(d, "p_t_rd");
        r.sd_thresholds = d.at("sd_thresholds").get<std::vector<double>>();
        r.rd_thresholds = d.at("rd_thresholds").get<std::vector<double>>();
        r.clamped_sd = d.at("clamped_sd").get<std::vector<int>>();
        r.clamped_rd = d.at("clamped_rd").get<std::vector<int>>();
        r.mode_sd = opt_from<int>(d, "mode_sd");
        r.mode_rd = opt_from<int>(d, "mode_rd");
        r.min_plr = opt_from<double>(d, "min_plr");
        r.eta = opt_from<double>(d, "eta");
        r.plr = opt_from<double>(d, "plr");
        r.eta_baseline = opt_from<double>(d, "eta_baseline");
        r.plr_baseline = opt_from<double>(d, "plr_baseline");
        r.eta_gap = opt_from<double>(d, "eta_policy_gap");
        if (const auto it = d.find("sim"); it != d.end() && !it->is_null()) {
            r.sim = sim_from_json(*it);
        }
        return r;
    } catch (const json::exception& e) {
        throw SchemaError(path, e.what());
    }
}

json report_sidecar(const Scenario& s, const std::vector<Series>& series, const ReportMeta& meta)
{
    json out;
    out["tool"] = "coarq";
    out["tool_version"] = kToolVersion;
    out["command"] = to_string(meta.command);
    out["scenario_name"] = s.name;
    out["scenario_hash"] = hex64(scenario_hash(s));
    out["p_loss"] = s.p_loss;
    out["generated_at"] = meta.generated_at;
    if (meta.sim) {
        out["simulation"] = {{"seed", meta.sim->seed},
                             {"frames", meta.sim->frames},
                             {"rd_sampling", sampling_name(meta.sim->rd_sampling)}};
    } else {
        out["simulation"] = nullptr;
    }
    json list = json::array();
    for (const auto& ser : series) {
        json entry;
        entry["id"] = ser.spec.id();
        entry["scheme"] = to_string(ser.spec.scheme);
        entry["alpha_db"] = opt_json(ser.spec.alpha_db);
        entry["lambda_db"] = opt_json(ser.spec.lambda_db);
        entry["csv"] = ser.spec.id() + ".csv";
        entry["points"] = ser.rows.size();
        entry["feasible_points"] = ser.feasible_count();
        bool degenerate = false;
        for (const auto& r : ser.rows) {
            degenerate = degenerate || (r.sim && (!r.sim->eta_se || !r.sim->plr_se));
        }
        entry["degenerate_standard_errors"] = degenerate;
        if (scheme_is_fixed_rate(ser.spec.scheme)) {
            const PowerThreshold th = detect_power_threshold(ser);
            entry["power_threshold"] = {{"detected", th.detected},
                                        {"monotone", th.monotone},
                                        {"p_bar_th_db", opt_json(th.p_bar_db)}};
        }
        json rows = json::array();
        for (const auto& r : ser.rows) {
            rows.push_back(row_to_json(r));
        }
        entry["rows"] = rows;
        list.push_back(entry);
    }
    out["series"] = list;
    return out;
}

std::vector<Series> designs_from_sidecar(const json& doc, const Scenario& s)
{
    if (!doc.is_object() || !doc.contains("series") || !doc["series"].is_array()) {
        throw SchemaError("series", "design file has no series list");
    }
    std::vector<Series> out;
    for (const auto& spec : expand_series(s)) {
        const std::string id = spec.id();
        const json* found = nullptr;
        for (const auto& entry : doc["series"]) {
            if (entry.is_object() && entry.value("id", "") == id) {
                found = &entry;
            }
        }
        if (!found) {
            throw SchemaError("series", "design file lacks series '" + id + "'");
        }
        const std::string path = "series[" + id + "].rows";
        const json& rows = found->contains("rows") ? (*found)["rows"] : json();
        if (!rows.is_array() || rows.size() != s.p_bar_db.size()) {
            throw SchemaError(path, "expected one row per sweep point");
        }
        Series ser{spec, {}};
        for (std::size_t i = 0; i < rows.size(); ++i) {
            Row r = row_from_json(rows[i], path + "[" + std::to_string(i) + "]");
            if (r.p_bar_db != s.p_bar_db[i]) {
                throw SchemaError(path + "[" + std::to_string(i) + "].p_bar_db", "does not match the scenario sweep");
            }
            r.sim.reset();
            ser.rows.push_back(std::move(r));
        }
        out.push_back(std::move(ser));
    }
    return out;
}

void write_report(const std::filesystem::path& dir, const Scenario& s, const std::vector<Series>& series,
                  const ReportMeta& meta)
{
    std::filesystem::create_directories(dir);
    const bool with_sim = meta.sim.has_value();
    for (const auto& ser : series) {
        std::ofstream csv(dir / (ser.spec.id() + ".csv"), std::ios::binary);
        csv << series_csv(ser, meta.command, with_sim);
        if (!csv) {
            throw std::runtime_error("cannot write " + (dir / (ser.spec.id() + ".csv")).string());
        }
    }
    std::ofstream side(dir / "report.json", std::ios::binary);
    side << report_sidecar(s, series, meta).dump(2) << '\n';
    if (!side) {
        throw std::runtime_error("cannot write " + (dir / "report.json").string());
    }
}

}  // namespace coarq
