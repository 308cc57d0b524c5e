#include "snn/metrics.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>

namespace snn {

std::string format_double(double x) {
    char buf[40];
    // Shortest representation that parses back to the same double.
    for (int prec = 15; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof buf, "%.*g", prec, x);
        if (std::strtod(buf, nullptr) == x) break;
    }
    return buf;
}

void MetricsTable::add_row(std::vector<std::string> cells) {
    if (cells.size() != columns.size())
        throw std::invalid_argument("MetricsTable: row width != column count");
    rows.push_back(std::move(cells));
}

void write_table(const MetricsTable& table, const std::filesystem::path& file) {
    std::ofstream out(file, std::ios::binary);  // binary: '\n' only, all platforms
    if (!out) throw std::runtime_error("cannot write " + file.string());
    out << kTableSchema << "\n";
    for (std::size_t i = 0; i < table.columns.size(); ++i)
        out << (i ? "," : "") << table.columns[i];
    out << "\n";
    for (const auto& row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
        out << "\n";
    }
    if (!out) throw std::runtime_error("failed writing " + file.string());
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> cells;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            cells.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    cells.push_back(cur);
    return cells;
}

}  // namespace

MetricsTable read_table(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + file.string());
    std::string line;
    if (!std::getline(in, line) || line != kTableSchema)
        throw std::runtime_error(file.string() + ": unknown table schema");
    MetricsTable table;
    table.name = file.stem().string();
    if (!std::getline(in, line)) throw std::runtime_error(file.string() + ": missing header row");
    table.columns = split_csv(line);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto cells = split_csv(line);
        if (cells.size() != table.columns.size())
            throw std::runtime_error(file.string() + ": ragged row");
        table.rows.push_back(std::move(cells));
    }
    return table;
}

nlohmann::json RunManifest::to_json() const {
    nlohmann::json j;
    j["schema_version"] = 1;
    j["tool_version"] = kToolVersion;
    j["experiment"] = experiment;
    j["seed"] = seed;
    j["config"] = config;
    j["summary"] = summary;
    j["tables"] = tables;
    nlohmann::json jt = nlohmann::json::array();
    for (const auto& [label, seconds] : timings)
        jt.push_back({{"label", label}, {"seconds", seconds}});
    j["timings"] = jt;
    j["flags"] = flags;
    return j;
}

RunManifest RunManifest::from_json(const nlohmann::json& j) {
    if (j.value("schema_version", 0) != 1)
        throw std::runtime_error("manifest: unsupported schema version");
    RunManifest m;
    m.experiment = j.at("experiment").get<std::string>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.config = j.value("config", nlohmann::json::object());
    m.summary = j.value("summary", nlohmann::json::object());
    if (j.contains("tables")) m.tables = j.at("tables").get<std::map<std::string, std::string>>();
    if (j.contains("timings"))
        for (const auto& t : j.at("timings"))
            m.timings.emplace_back(t.at("label").get<std::string>(), t.at("seconds").get<double>());
    if (j.contains("flags")) m.flags = j.at("flags").get<std::map<std::string, bool>>();
    return m;
}

void write_metrics(const RunManifest& manifest, const std::vector<MetricsTable>& tables,
                   const std::filesystem::path& out_dir) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw std::runtime_error("cannot create " + out_dir.string() + ": " + ec.message());

    RunManifest m = manifest;
    for (const MetricsTable& t : tables) {
        std::string file = t.name + ".csv";
        write_table(t, out_dir / file);
        m.tables[t.name] = file;
    }
    std::ofstream out(out_dir / "manifest.json", std::ios::binary);
    if (!out) throw std::runtime_error("cannot write manifest in " + out_dir.string());
    out << m.to_json().dump(2) << "\n";
}

RunManifest read_manifest(const std::filesystem::path& manifest_file) {
    std::ifstream in(manifest_file, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + manifest_file.string());
    nlohmann::json j;
    in >> j;
    return RunManifest::from_json(j);
}

}  // namespace snn
