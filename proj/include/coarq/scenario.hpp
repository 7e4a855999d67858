#pragma once

#include "coarq/distributions.hpp"
#include "coarq/modes.hpp"
#include "coarq/simulator.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace coarq {

/// Malformed scenario or mode-set document; `path` names the offending field.
class SchemaError : public std::runtime_error {
public:
    SchemaError(std::string path, const std::string& message)
        : std::runtime_error(path + ": " + message), path(std::move(path))
    {
    }

    std::string path;
};

enum class Scheme {
    coop_amc,
    conventional_amc,
    slowfade_conventional,
    amc_only,
    fixed_coop,
    fixed_coop_equal_rate,
    lmsc_coop,
    lmsc_fixed,
};

std::string to_string(Scheme s);
Scheme scheme_from_string(const std::string& name);

/// Whether a scheme uses the relay links (rd and sr blocks, alpha and lambda).
bool scheme_uses_relay(Scheme s);
bool scheme_is_fixed_rate(Scheme s);
bool scheme_is_lmsc(Scheme s);

struct ModeSpec {
    double rate = 0.0;
    double a = 1.0;
    double g = 1.0;
    double gamma_pl_db = 0.0;

    bool operator==(const ModeSpec&) const = default;
};

/// Mode-set document as written: SNR bounds kept in dB so that documents round-trip.
struct ModeSetSpec {
    std::string source;
    int packet_length = 1080;
    std::string outage_rate = "zero";  // "zero" or "first_mode"
    std::vector<ModeSpec> modes;

    bool operator==(const ModeSetSpec&) const = default;
};

ModeSet build_mode_set(const ModeSetSpec& spec);

struct AtomSpec {
    double gamma_db = 0.0;
    double prob = 0.0;

    bool operator==(const AtomSpec&) const = default;
};

/// Channel block. Mean SNRs come from the sweep normalisation, so only shape
/// parameters live here.
struct ChannelSpec {
    std::string kind = "rayleigh";  // rayleigh, rician, rayleigh_lognormal, lutz, discrete; S-R: awgn, error_free
    double rice_factor_db = 0.0;
    double blockage_prob = 0.0;
    double shadow_mean_db = 0.0;
    double shadow_std_db = 1.0;
    std::vector<AtomSpec> atoms;

    bool operator==(const ChannelSpec&) const = default;
};

struct SimSpec {
    std::uint64_t frames = 1'000'000;
    std::uint64_t seed = 1;
    RdSampling rd_sampling = RdSampling::non_outage_conditioned;

    bool operator==(const SimSpec&) const = default;
};

struct Scenario {
    std::string name;
    std::vector<Scheme> schemes;
    std::optional<std::string> mode_set_file;  // as written; resolved against the scenario directory
    ModeSetSpec mode_set;
    ChannelSpec sd;
    ChannelSpec rd;
    ChannelSpec sr{"awgn", 0.0, 0.0, 0.0, 1.0, {}};
    std::vector<double> alpha_db{10.0};
    std::vector<double> lambda_db{10.0};
    std::vector<double> p_bar_db;
    int nr = 1;
    double p_loss = 1e-3;
    int grid_points = 200;
    std::optional<SimSpec> sim;

    bool operator==(const Scenario&) const = default;
};

ModeSetSpec parse_mode_set(const nlohmann::json& doc, const std::string& path = "mode_set");
ModeSetSpec load_mode_set_file(const std::filesystem::path& file);
nlohmann::json mode_set_to_json(const ModeSetSpec& spec);

/// Parses a scenario document. A mode_set given as a file name is loaded relative to
/// `base_dir`.
Scenario parse_scenario(const nlohmann::json& doc, const std::filesystem::path& base_dir = ".");
Scenario load_scenario_file(const std::filesystem::path& file);
/// Serialises a scenario; a referenced mode-set file is written back as the reference.
nlohmann::json scenario_to_json(const Scenario& s);
/// Same document with the mode set inlined, used for hashing.
nlohmann::json scenario_canonical_json(const Scenario& s);

/// 64-bit FNV-1a of a byte string.
std::uint64_t fnv1a64(const std::string& bytes);
std::uint64_t scenario_hash(const Scenario& s);

/// Links at one sweep point: mean SNRs P, alpha P and lambda P (dB inputs).
struct PointChannels {
    SnrDistribution sd;
    SnrDistribution rd;
    std::optional<double> sr_snr;
};

SnrDistribution build_link(const ChannelSpec& spec, double mean_snr, const std::string& path);
PointChannels channels_at(const Scenario& s, double p_bar_db, double alpha_db, double lambda_db);

}  // namespace coarq
