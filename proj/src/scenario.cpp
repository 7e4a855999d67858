#include "coarq/scenario.hpp"

#include "coarq/errors.hpp"

#include <array>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace coarq {

using nlohmann::json;

namespace {

constexpr std::array<std::pair<Scheme, const char*>, 8> kSchemeNames{{
    {Scheme::coop_amc, "coop_amc"},
    {Scheme::conventional_amc, "conventional_amc"},
    {Scheme::slowfade_conventional, "slowfade_conventional"},
    {Scheme::amc_only, "amc_only"},
    {Scheme::fixed_coop, "fixed_coop"},
    {Scheme::fixed_coop_equal_rate, "fixed_coop_equal_rate"},
    {Scheme::lmsc_coop, "lmsc_coop"},
    {Scheme::lmsc_fixed, "lmsc_fixed"},
}};

std::string join(const std::string& path, const std::string& key)
{
    return path.empty() ? key : path + "." + key;
}

std::string index_path(const std::string& path, std::size_t i)
{
    return path + "[" + std::to_string(i) + "]";
}

const json& require_object(const json& doc, const std::string& path)
{
    if (!doc.is_object()) {
        throw SchemaError(path.empty() ? "<root>" : path, "expected an object");
    }
    return doc;
}

void reject_unknown(const json& obj, const std::string& path, std::initializer_list<const char*> allowed)
{
    for (const auto& [key, value] : obj.items()) {
        bool ok = false;
        for (const char* a : allowed) {
            ok = ok || key == a;
        }
        if (!ok) {
            throw SchemaError(join(path, key), "unknown field");
        }
    }
}

const json& field(const json& obj, const std::string& path, const char* key)
{
    const auto it = obj.find(key);
    if (it == obj.end()) {
        throw SchemaError(join(path, key), "required field is missing");
    }
    return *it;
}

double as_number(const json& v, const std::string& path)
{
    if (!v.is_number()) {
        throw SchemaError(path, "expected a number");
    }
    const double x = v.get<double>();
    if (!std::isfinite(x)) {
        throw SchemaError(path, "expected a finite number");
    }
    return x;
}

std::int64_t as_integer(const json& v, const std::string& path)
{
    if (!v.is_number_integer()) {
        throw SchemaError(path, "expected an integer");
    }
    return v.get<std::int64_t>();
}

std::string as_string(const json& v, const std::string& path)
{
    if (!v.is_string()) {
        throw SchemaError(path, "expected a string");
    }
    return v.get<std::string>();
}

// A number or a non-empty array of numbers.
std::vector<double> number_list(const json& v, const std::string& path)
{
    if (v.is_number()) {
        return {as_number(v, path)};
    }
    if (!v.is_array() || v.empty()) {
        throw SchemaError(path, "expected a number or a non-empty array of numbers");
    }
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        out.push_back(as_number(v[i], index_path(path, i)));
    }
    return out;
}

ChannelSpec parse_channel(const json& doc, const std::string& path, bool source_relay)
{
    require_object(doc, path);
    ChannelSpec c;
    c.kind = as_string(field(doc, path, "kind"), join(path, "kind"));
    if (source_relay) {
        if (c.kind != "awgn" && c.kind != "error_free") {
            throw SchemaError(join(path, "kind"), "S-R link must be 'awgn' or 'error_free'");
        }
        reject_unknown(doc, path, {"kind"});
        return c;
    }
    if (c.kind == "rayleigh") {
        reject_unknown(doc, path, {"kind"});
    } else if (c.kind == "rician") {
        reject_unknown(doc, path, {"kind", "rice_factor_db"});
        c.rice_factor_db = as_number(field(doc, path, "rice_factor_db"), join(path, "rice_factor_db"));
    } else if (c.kind == "rayleigh_lognormal") {
        reject_unknown(doc, path, {"kind", "shadow_mean_db", "shadow_std_db"});
        c.shadow_mean_db = as_number(field(doc, path, "shadow_mean_db"), join(path, "shadow_mean_db"));
        c.shadow_std_db = as_number(field(doc, path, "shadow_std_db"), join(path, "shadow_std_db"));
    } else if (c.kind == "lutz") {
        reject_unknown(doc, path, {"kind", "blockage_prob", "rice_factor_db", "shadow_mean_db", "shadow_std_db"});
        c.blockage_prob = as_number(field(doc, path, "blockage_prob"), join(path, "blockage_prob"));
        c.rice_factor_db = as_number(field(doc, path, "rice_factor_db"), join(path, "rice_factor_db"));
        c.shadow_mean_db = as_number(field(doc, path, "shadow_mean_db"), join(path, "shadow_mean_db"));
        c.shadow_std_db = as_number(field(doc, path, "shadow_std_db"), join(path, "shadow_std_db"));
        if (!(c.blockage_prob >= 0.0 && c.blockage_prob <= 1.0)) {
            throw SchemaError(join(path, "blockage_prob"), "must lie in [0, 1]");
        }
    } else if (c.kind == "discrete") {
        reject_unknown(doc, path, {"kind", "atoms"});
        const std::string apath = join(path, "atoms");
        const json& atoms = field(doc, path, "atoms");
        if (!atoms.is_array() || atoms.empty()) {
            throw SchemaError(apath, "expected a non-empty array of atoms");
        }
        for (std::size_t i = 0; i < atoms.size(); ++i) {
            const std::string ap = index_path(apath, i);
            require_object(atoms[i], ap);
            reject_unknown(atoms[i], ap, {"gamma_db", "prob"});
            c.atoms.push_back({as_number(field(atoms[i], ap, "gamma_db"), join(ap, "gamma_db")),
                               as_number(field(atoms[i], ap, "prob"), join(ap, "prob"))});
        }
    } else {
        throw SchemaError(join(path, "kind"), "unknown channel kind '" + c.kind + "'");
    }
    if ((c.kind == "rayleigh_lognormal" || c.kind == "lutz") && !(c.shadow_std_db > 0.0)) {
        throw SchemaError(join(path, "shadow_std_db"), "must be positive");
    }
    // Shape errors surface here rather than at the first sweep point.
    build_link(c, 1.0, path);
    return c;
}

json channel_to_json(const ChannelSpec& c)
{
    json out{{"kind", c.kind}};
    if (c.kind == "rician" || c.kind == "lutz") {
        out["rice_factor_db"] = c.rice_factor_db;
    }
    if (c.kind == "lutz") {
        out["blockage_prob"] = c.blockage_prob;
    }
    if (c.kind == "rayleigh_lognormal" || c.kind == "lutz") {
        out["shadow_mean_db"] = c.shadow_mean_db;
        out["shadow_std_db"] = c.shadow_std_db;
    }
    if (c.kind == "discrete") {
        json atoms = json::array();
        for (const auto& a : c.atoms) {
            atoms.push_back({{"gamma_db", a.gamma_db}, {"prob", a.prob}});
        }
        out["atoms"] = atoms;
    }
    return out;
}

std::string rd_sampling_name(RdSampling s)
{
    return s == RdSampling::unconditional ? "unconditional" : "non_outage_conditioned";
}

json read_json_file(const std::filesystem::path& file)
{
    std::ifstream in(file);
    if (!in) {
        throw SchemaError(file.string(), "cannot open file");
    }
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw SchemaError(file.string(), std::string("invalid JSON: ") + e.what());
    }
}

json scenario_json(const Scenario& s, bool inline_modes)
{
    json out;
    out["name"] = s.name;
    json schemes = json::array();
    for (Scheme sc : s.schemes) {
        schemes.push_back(to_string(sc));
    }
    out["schemes"] = schemes;
    if (s.mode_set_file && !inline_modes) {
        out["mode_set"] = *s.mode_set_file;
    } else {
        out["mode_set"] = mode_set_to_json(s.mode_set);
    }
    out["channels"] = {{"sd", channel_to_json(s.sd)}, {"rd", channel_to_json(s.rd)}, {"sr", channel_to_json(s.sr)}};
    out["alpha_db"] = s.alpha_db;
    out["lambda_db"] = s.lambda_db;
    out["p_bar_sweep_db"] = s.p_bar_db;
    out["nr"] = s.nr;
    out["p_loss"] = s.p_loss;
    out["grid_points"] = s.grid_points;
    if (s.sim) {
        out["sim"] = {{"frames", s.sim->frames},
                      {"seed", s.sim->seed},
                      {"rd_sampling", rd_sampling_name(s.sim->rd_sampling)}};
    }
    return out;
}

}  // namespace

std::string to_string(Scheme s)
{
    for (const auto& [scheme, name] : kSchemeNames) {
        if (scheme == s) {
            return name;
        }
    }
    throw DomainError("unknown scheme");
}

Scheme scheme_from_string(const std::string& name)
{
    for (const auto& [scheme, n] : kSchemeNames) {
        if (name == n) {
            return scheme;
        }
    }
    throw DomainError("unknown scheme '" + name + "'");
}

bool scheme_uses_relay(Scheme s)
{
    return s == Scheme::coop_amc || s == Scheme::fixed_coop || s == Scheme::fixed_coop_equal_rate
        || s == Scheme::lmsc_coop || s == Scheme::lmsc_fixed;
}

bool scheme_is_fixed_rate(Scheme s)
{
    return s == Scheme::fixed_coop || s == Scheme::fixed_coop_equal_rate || s == Scheme::lmsc_fixed;
}

bool scheme_is_lmsc(Scheme s)
{
    return s == Scheme::lmsc_coop || s == Scheme::lmsc_fixed;
}

ModeSet build_mode_set(const ModeSetSpec& spec)
{
    ModeSet ms;
    ms.packet_length = spec.packet_length;
    for (std::size_t i = 0; i < spec.modes.size(); ++i) {
        const auto& m = spec.modes[i];
        ms.modes.push_back({static_cast<int>(i) + 1, m.rate, m.a, m.g, db_to_linear(m.gamma_pl_db)});
    }
    ms.outage_rate = spec.outage_rate == "first_mode" && !ms.modes.empty() ? ms.modes.front().rate : 0.0;
    return ms;
}

ModeSetSpec parse_mode_set(const json& doc, const std::string& path)
{
    require_object(doc, path);
    reject_unknown(doc, path, {"source", "n", "packet_length", "outage_rate", "modes"});
    ModeSetSpec spec;
    if (const auto it = doc.find("source"); it != doc.end()) {
        spec.source = as_string(*it, join(path, "source"));
    }
    if (const auto it = doc.find("packet_length"); it != doc.end()) {
        const auto n = as_integer(*it, join(path, "packet_length"));
        if (n <= 0) {
            throw SchemaError(join(path, "packet_length"), "packet length must be positive");
        }
        spec.packet_length = static_cast<int>(n);
    }
    if (const auto it = doc.find("outage_rate"); it != doc.end()) {
        spec.outage_rate = as_string(*it, join(path, "outage_rate"));
        if (spec.outage_rate != "zero" && spec.outage_rate != "first_mode") {
            throw SchemaError(join(path, "outage_rate"), "expected 'zero' or 'first_mode'");
        }
    }
    const std::string mpath = join(path, "modes");
    const json& modes = field(doc, path, "modes");
    if (!modes.is_array() || modes.empty()) {
        throw SchemaError(mpath, "expected a non-empty array of modes");
    }
    for (std::size_t i = 0; i < modes.size(); ++i) {
        const std::string mp = index_path(mpath, i);
        require_object(modes[i], mp);
        reject_unknown(modes[i], mp, {"rate", "a", "g", "gamma_pl_db"});
        spec.modes.push_back({as_number(field(modes[i], mp, "rate"), join(mp, "rate")),
                              as_number(field(modes[i], mp, "a"), join(mp, "a")),
                              as_number(field(modes[i], mp, "g"), join(mp, "g")),
                              as_number(field(modes[i], mp, "gamma_pl_db"), join(mp, "gamma_pl_db"))});
    }
    if (const auto it = doc.find("n"); it != doc.end()) {
        if (as_integer(*it, join(path, "n")) != static_cast<std::int64_t>(spec.modes.size())) {
            throw SchemaError(join(path, "n"), "does not match the number of modes");
        }
    }
    const auto violations = validate_mode_set(build_mode_set(spec));
    if (!violations.empty()) {
        throw SchemaError(join(path, violations.front().field), violations.front().message);
    }
    return spec;
}

ModeSetSpec load_mode_set_file(const std::filesystem::path& file)
{
    return parse_mode_set(read_json_file(file), "mode_set");
}

json mode_set_to_json(const ModeSetSpec& spec)
{
    json modes = json::array();
    for (const auto& m : spec.modes) {
        modes.push_back({{"rate", m.rate}, {"a", m.a}, {"g", m.g}, {"gamma_pl_db", m.gamma_pl_db}});
    }
    return {{"source", spec.source},
            {"n", spec.modes.size()},
            {"packet_length", spec.packet_length},
            {"outage_rate", spec.outage_rate},
            {"modes", modes}};
}

Scenario parse_scenario(const json& doc, const std::filesystem::path& base_dir)
{
    require_object(doc, "");
    reject_unknown(doc, "", {"name", "scheme", "schemes", "mode_set", "channels", "alpha_db", "lambda_db",
                             "p_bar_sweep_db", "nr", "p_loss", "grid_points", "sim"});
    Scenario s;
    if (const auto it = doc.find("name"); it != doc.end()) {
        s.name = as_string(*it, "name");
    }

    const bool one = doc.contains("scheme");
    const bool many = doc.contains("schemes");
    if (one == many) {
        throw SchemaError("schemes", "give exactly one of 'scheme' or 'schemes'");
    }
    const std::string spath = one ? "scheme" : "schemes";
    std::vector<std::pair<std::string, std::string>> names;
    if (one) {
        names.emplace_back(as_string(doc["scheme"], spath), spath);
    } else {
        const json& arr = doc["schemes"];
        if (!arr.is_array() || arr.empty()) {
            throw SchemaError(spath, "expected a non-empty array of scheme names");
        }
        for (std::size_t i = 0; i < arr.size(); ++i) {
            names.emplace_back(as_string(arr[i], index_path(spath, i)), index_path(spath, i));
        }
    }
    std::set<Scheme> seen;
    for (const auto& [name, path] : names) {
        Scheme sc;
        try {
            sc = scheme_from_string(name);
        } catch (const DomainError&) {
            throw SchemaError(path, "unknown scheme '" + name + "'");
        }
        if (!seen.insert(sc).second) {
            throw SchemaError(path, "scheme listed twice");
        }
        s.schemes.push_back(sc);
    }

    const json& ms = field(doc, "", "mode_set");
    if (ms.is_string()) {
        s.mode_set_file = ms.get<std::string>();
        const std::filesystem::path file = base_dir / *s.mode_set_file;
        json mdoc;
        try {
            mdoc = read_json_file(file);
        } catch (const SchemaError& e) {
            throw SchemaError("mode_set", e.what());
        }
        s.mode_set = parse_mode_set(mdoc, "mode_set");
    } else {
        s.mode_set = parse_mode_set(ms, "mode_set");
    }

    const json& ch = require_object(field(doc, "", "channels"), "channels");
    reject_unknown(ch, "channels", {"sd", "rd", "sr"});
    s.sd = parse_channel(field(ch, "channels", "sd"), "channels.sd", false);
    bool relay = false;
    for (Scheme sc : s.schemes) {
        relay = relay || scheme_uses_relay(sc);
    }
    if (relay || ch.contains("rd")) {
        s.rd = parse_channel(field(ch, "channels", "rd"), "channels.rd", false);
    }
    if (ch.contains("sr")) {
        s.sr = parse_channel(ch["sr"], "channels.sr", true);
    }

    if (const auto it = doc.find("alpha_db"); it != doc.end()) {
        s.alpha_db = number_list(*it, "alpha_db");
    }
    if (const auto it = doc.find("lambda_db"); it != doc.end()) {
        s.lambda_db = number_list(*it, "lambda_db");
    }
    const json& sweep = field(doc, "", "p_bar_sweep_db");
    if (!sweep.is_array()) {
        throw SchemaError("p_bar_sweep_db", "expected a non-empty array of numbers");
    }
    s.p_bar_db = number_list(sweep, "p_bar_sweep_db");

    if (const auto it = doc.find("nr"); it != doc.end()) {
        const auto nr = as_integer(*it, "nr");
        if (nr < 0 || nr > 16) {
            throw SchemaError("nr", "must lie in 0..16");
        }
        s.nr = static_cast<int>(nr);
    }
    for (Scheme sc : s.schemes) {
        if (sc != Scheme::amc_only && s.nr != 1) {
            throw SchemaError("nr", "scheme " + to_string(sc) + " is designed for a single retransmission");
        }
    }
    s.p_loss = as_number(field(doc, "", "p_loss"), "p_loss");
    if (!(s.p_loss > 0.0 && s.p_loss < 1.0)) {
        throw SchemaError("p_loss", "must lie in (0, 1)");
    }
    if (const auto it = doc.find("grid_points"); it != doc.end()) {
        const auto g = as_integer(*it, "grid_points");
        if (g < 1 || g > 100000) {
            throw SchemaError("grid_points", "must lie in 1..100000");
        }
        s.grid_points = static_cast<int>(g);
    }

    if (const auto it = doc.find("sim"); it != doc.end()) {
        require_object(*it, "sim");
        reject_unknown(*it, "sim", {"frames", "seed", "rd_sampling"});
        SimSpec sim;
        if (const auto f = it->find("frames"); f != it->end()) {
            const auto frames = as_integer(*f, "sim.frames");
            if (frames < 1) {
                throw SchemaError("sim.frames", "must be at least 1");
            }
            sim.frames = static_cast<std::uint64_t>(frames);
        }
        if (const auto f = it->find("seed"); f != it->end()) {
            if (!f->is_number_unsigned() && !(f->is_number_integer() && f->get<std::int64_t>() >= 0)) {
                throw SchemaError("sim.seed", "expected a non-negative integer");
            }
            sim.seed = f->get<std::uint64_t>();
        }
        if (const auto f = it->find("rd_sampling"); f != it->end()) {
            const std::string v = as_string(*f, "sim.rd_sampling");
            if (v == "unconditional") {
                sim.rd_sampling = RdSampling::unconditional;
            } else if (v == "non_outage_conditioned") {
                sim.rd_sampling = RdSampling::non_outage_conditioned;
            } else {
                throw SchemaError("sim.rd_sampling", "expected 'unconditional' or 'non_outage_conditioned'");
            }
        }
        s.sim = sim;
    }
    return s;
}

Scenario load_scenario_file(const std::filesystem::path& file)
{
    return parse_scenario(read_json_file(file), file.parent_path().empty() ? "." : file.parent_path());
}

json scenario_to_json(const Scenario& s)
{
    return scenario_json(s, false);
}

json scenario_canonical_json(const Scenario& s)
{
    return scenario_json(s, true);
}

std::uint64_t fnv1a64(const std::string& bytes)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t scenario_hash(const Scenario& s)
{
    return fnv1a64(scenario_canonical_json(s).dump());
}

SnrDistribution build_link(const ChannelSpec& c, double mean_snr, const std::string& path)
{
    try {
        if (c.kind == "rayleigh") {
            return SnrDistribution::exponential(mean_snr);
        }
        if (c.kind == "rician") {
            return SnrDistribution::rician(db_to_linear(c.rice_factor_db), mean_snr);
        }
        if (c.kind == "rayleigh_lognormal") {
            return SnrDistribution::rayleigh_lognormal(c.shadow_mean_db + linear_to_db(mean_snr), c.shadow_std_db);
        }
        if (c.kind == "lutz") {
            LutzParams p;
            p.blockage_prob = c.blockage_prob;
            p.rice_factor = db_to_linear(c.rice_factor_db);
            p.unblocked_mean_snr = mean_snr;
            p.shadow_mean_db = c.shadow_mean_db + linear_to_db(mean_snr);
            p.shadow_std_db = c.shadow_std_db;
            return SnrDistribution::lutz(p);
        }
        if (c.kind == "discrete") {
            std::vector<Atom> atoms;
            for (const auto& a : c.atoms) {
                atoms.push_back({db_to_linear(a.gamma_db), a.prob});
            }
            return SnrDistribution::discrete(std::move(atoms));
        }
    } catch (const DomainError& e) {
        throw SchemaError(path, e.what());
    }
    throw SchemaError(join(path, "kind"), "not a fading law: '" + c.kind + "'");
}

PointChannels channels_at(const Scenario& s, double p_bar_db, double alpha_db, double lambda_db)
{
    const double p = db_to_linear(p_bar_db);
    std::optional<double> sr;
    if (s.sr.kind == "awgn") {
        sr = p * db_to_linear(alpha_db);
    }
    return {build_link(s.sd, p, "channels.sd"), build_link(s.rd, p * db_to_linear(lambda_db), "channels.rd"), sr};
}

}  // namespace coarq
