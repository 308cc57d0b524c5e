#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

namespace snn {

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr const char* kTableSchema = "#schema natrain.metrics.v1";

// Shortest round-trippable decimal form; identical strings for identical
// doubles regardless of locale.
std::string format_double(double x);

// A delimited table with a schema-version header row. Every numeric cell is
// serialized through format_double so repeated runs emit identical bytes.
struct MetricsTable {
    std::string name;  // file stem, e.g. "metrics"
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    void add_row(std::vector<std::string> cells);
};

void write_table(const MetricsTable& table, const std::filesystem::path& file);
MetricsTable read_table(const std::filesystem::path& file);

// Everything needed to rerun or summarize an experiment: merged config,
// seed, version, summary statistics, timing records, and table locations.
struct RunManifest {
    std::string experiment;
    std::uint64_t seed = 0;
    nlohmann::json config;
    nlohmann::json summary;
    std::map<std::string, std::string> tables;          // table name -> file name
    std::vector<std::pair<std::string, double>> timings;  // label -> seconds
    std::map<std::string, bool> flags;

    nlohmann::json to_json() const;
    static RunManifest from_json(const nlohmann::json& j);
};

// Writes manifest.json plus every table into out_dir.
void write_metrics(const RunManifest& manifest, const std::vector<MetricsTable>& tables,
                   const std::filesystem::path& out_dir);

RunManifest read_manifest(const std::filesystem::path& manifest_file);

}  // namespace snn
