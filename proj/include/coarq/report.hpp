#pragma once

#include "coarq/experiment.hpp"
#include "coarq/scenario.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace coarq {

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr const char* kNullMarker = "NA";

enum class Command { design, eval, simulate, sweep };

std::string to_string(Command c);

/// Shortest round-trip decimal form; non-finite values become the null marker.
std::string format_number(double v);

/// CSV payload of one series. Columns depend on the command; simulated columns are
/// included when `with_sim` is set.
std::string series_csv(const Series& series, Command command, bool with_sim);

nlohmann::json row_to_json(const Row& row);
Row row_from_json(const nlohmann::json& doc, const std::string& path);

struct ReportMeta {
    Command command = Command::eval;
    std::optional<SimConfig> sim;
    std::string generated_at;  // informational, excluded from the scenario hash
};

/// JSON sidecar: metadata, per-series flags and the full per-point records (which
/// double as a design file for later eval or simulate runs).
nlohmann::json report_sidecar(const Scenario& s, const std::vector<Series>& series, const ReportMeta& meta);

/// Reads the designs back from a sidecar, matching series by identifier.
std::vector<Series> designs_from_sidecar(const nlohmann::json& doc, const Scenario& s);

/// Writes <series id>.csv for every series plus report.json into `dir`.
void write_report(const std::filesystem::path& dir, const Scenario& s, const std::vector<Series>& series,
                  const ReportMeta& meta);

}  // namespace coarq
