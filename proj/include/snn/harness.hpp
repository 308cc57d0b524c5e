#pragma once

#include <iosfwd>
#include <map>

#include "snn/metrics.hpp"
#include "snn/train.hpp"

namespace snn {

// Sparse counts of spike-train transitions across one weight update,
// indexed by the trains' binary codes.
struct TransferMatrix {
    int n_steps = 0;
    bool diagonal_zeroed = false;
    std::map<std::pair<std::uint64_t, std::uint64_t>, std::uint64_t> counts;

    void record(std::uint64_t before, std::uint64_t after) { ++counts[{before, after}]; }
    void zero_diagonal();
    std::uint64_t total() const;
    std::uint64_t total_off_diagonal() const;
};

// Event distances ranked ascending with their cumulative fraction.
struct DistanceRankCdf {
    std::vector<double> distances;
    std::vector<double> cumulative;

    static DistanceRankCdf from_events(std::vector<double> event_distances);
};

// Experiment drivers. Each writes manifest.json plus metrics tables under
// cfg.out_dir and returns the manifest.
RunManifest run_single_neuron(const TrainConfig& cfg);
RunManifest run_mpdist_eval(const TrainConfig& cfg);
RunManifest run_bench(const TrainConfig& cfg);
RunManifest run_train(const TrainConfig& cfg);

// Summarizes a finished run from its manifest: prints human-readable
// statistics and writes plot-ready tables next to the manifest (or to
// table_dir when given). Never recomputes training.
void report(const std::filesystem::path& manifest_file, std::ostream& out,
            const std::filesystem::path& table_dir = {});

}  // namespace snn
