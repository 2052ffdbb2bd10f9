#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "tcsde/analysis.hpp"

namespace tcsde {

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr int kSchemaVersion = 1;

/// Ordered key/value pairs echoed into every output header.
using ConfigEcho = std::vector<std::pair<std::string, std::string>>;

/// "# key=value" lines, starting with the schema version.
void write_comment_header(std::ostream& out, const ConfigEcho& echo);

std::string format_double(double value);

nlohmann::json report_to_json(const ConvergenceReport& report);
ConvergenceReport report_from_json(const nlohmann::json& j);

/// Writes report.json, errors.csv, rates.csv and loglog.dat into `dir`
/// and returns their paths. loglog.dat holds one gnuplot index block per
/// report (separated by two blank lines).
std::vector<std::filesystem::path> write_convergence_outputs(const std::filesystem::path& dir,
                                                             const std::vector<ConvergenceReport>& reports,
                                                             const ConfigEcho& echo);

std::string sha256_file(const std::filesystem::path& path);

struct ManifestEntry {
    std::string path;  // relative to the manifest directory
    std::string sha256;
};

struct RunManifest {
    std::string tool_version = kToolVersion;
    nlohmann::json config;
    std::uint64_t master_seed = 0;
    double wall_seconds = 0.0;
    std::vector<ManifestEntry> files;
};

nlohmann::json manifest_to_json(const RunManifest& manifest);

struct ReproOptions {
    Profile profile = Profile::Desk;
    std::filesystem::path out_dir;
    std::uint64_t master_seed = 0;
    unsigned threads = 0;
    std::optional<std::size_t> samples;  // overrides the profile's M
    std::optional<double> dt_ref;        // overrides the profile's dt_ref
    std::vector<double> table_alphas = {0.60, 0.65, 0.70, 0.75, 0.80, 0.85, 0.90};
    std::vector<double> drift_alphas = {0.6, 0.8};
    double drift = 1.0;
};

/**
 * Regenerates the convergence table (drift 0 sweep, under table1/) and the
 * drifted-clock figures (under drift/), then writes manifest.json listing
 * every output with its SHA-256. Outputs already written are removed if a
 * study fails. `log` receives one progress line per study when non-null.
 */
RunManifest repro(const ReproOptions& options, std::ostream* log = nullptr);

}  // namespace tcsde
