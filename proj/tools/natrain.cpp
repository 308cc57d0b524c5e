#include <iostream>

#include <CLI11.hpp>

#include "snn/harness.hpp"

namespace {

// Flags are applied over the config file, so anything given on the command
// line wins.
void add_common_flags(CLI::App* cmd, std::string& config_path, snn::TrainConfig& cfg) {
    cmd->add_option("--config", config_path, "JSON config file (flags override its values)");
    cmd->add_option("--seed", cfg.seed, "master seed");
    cmd->add_option("--method", cfg.method, "na | surrogate")
        ->check(CLI::IsMember({"na", "surrogate"}));
    cmd->add_option("--steps", cfg.n_steps, "simulation steps per sample");
    cmd->add_option("--out", cfg.out_dir, "output directory for manifest and tables");
    cmd->add_option("--clip-b", cfg.clip_b, "finite-difference clip bound");
    cmd->add_option("--lr", cfg.learning_rate, "learning rate");
    cmd->add_option("--batch-size", cfg.batch_size, "mini-batch size");
    cmd->add_option("--epochs", cfg.epochs, "training epochs");
    cmd->add_option("--arch", cfg.arch, "architecture string, e.g. 784-400-10 or 15C5-P2-300");
    cmd->add_option("--gain", cfg.input_gain, "input current gain");
    cmd->add_option("--data-dir", cfg.data_dir, "directory with the IDX dataset files");
    cmd->add_option("--train-limit", cfg.train_limit, "cap on training samples (0 = all)");
    cmd->add_option("--test-limit", cfg.test_limit, "cap on test samples (0 = all)");
    cmd->add_option("--rounds", cfg.rounds, "single-neuron study rounds");
    cmd->add_option("--iterations", cfg.iterations, "single-neuron iterations per round");
    cmd->add_option("--single-neuron-lr", cfg.single_neuron_lr, "single-neuron learning rate");
    cmd->add_option("--bench-steps", cfg.bench_steps, "step counts swept by bench");
    cmd->add_option("--bench-reps", cfg.bench_reps, "timed repetitions per bench point");
}

snn::TrainConfig merge_config(const CLI::App* cmd, const std::string& config_path,
                              const snn::TrainConfig& flag_values) {
    if (config_path.empty()) return flag_values;
    snn::TrainConfig cfg = snn::load_config_file(config_path);
    // Reapply only the flags the user actually passed.
    snn::TrainConfig merged = cfg;
    auto take = [&](const char* name, auto member) {
        if (cmd->count(name) > 0) merged.*member = flag_values.*member;
    };
    take("--seed", &snn::TrainConfig::seed);
    take("--method", &snn::TrainConfig::method);
    take("--steps", &snn::TrainConfig::n_steps);
    take("--out", &snn::TrainConfig::out_dir);
    take("--clip-b", &snn::TrainConfig::clip_b);
    take("--lr", &snn::TrainConfig::learning_rate);
    take("--batch-size", &snn::TrainConfig::batch_size);
    take("--epochs", &snn::TrainConfig::epochs);
    take("--arch", &snn::TrainConfig::arch);
    take("--gain", &snn::TrainConfig::input_gain);
    take("--data-dir", &snn::TrainConfig::data_dir);
    take("--train-limit", &snn::TrainConfig::train_limit);
    take("--test-limit", &snn::TrainConfig::test_limit);
    take("--rounds", &snn::TrainConfig::rounds);
    take("--iterations", &snn::TrainConfig::iterations);
    take("--single-neuron-lr", &snn::TrainConfig::single_neuron_lr);
    take("--bench-steps", &snn::TrainConfig::bench_steps);
    take("--bench-reps", &snn::TrainConfig::bench_reps);
    return merged;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Spiking network training via neighborhood aggregation"};
    app.require_subcommand(1);

    snn::TrainConfig cfg;
    std::string config_path;
    std::string manifest_path;
    std::string report_out;

    CLI::App* single = app.add_subcommand("single-neuron", "train one neuron on random spike "
                                                           "trains over many rounds");
    add_common_flags(single, config_path, cfg);

    CLI::App* mpdist = app.add_subcommand("mpdist-eval", "track spike-train transitions during "
                                                         "training and rank them by distance");
    add_common_flags(mpdist, config_path, cfg);

    CLI::App* bench = app.add_subcommand("bench", "wall-clock comparison of the two backward "
                                                  "methods across step counts");
    add_common_flags(bench, config_path, cfg);

    CLI::App* train = app.add_subcommand("train", "train a classifier on an IDX dataset");
    add_common_flags(train, config_path, cfg);

    CLI::App* rep = app.add_subcommand("report", "summarize a finished run from its manifest");
    rep->add_option("manifest", manifest_path, "path to manifest.json")->required();
    rep->add_option("--out", report_out, "directory for derived tables");

    CLI11_PARSE(app, argc, argv);

    try {
        if (rep->parsed()) {
            snn::report(manifest_path, std::cout, std::filesystem::path(report_out));
            return 0;
        }

        const CLI::App* cmd = app.get_subcommands().front();
        snn::TrainConfig merged = merge_config(cmd, config_path, cfg);

        snn::RunManifest manifest;
        if (single->parsed()) {
            manifest = snn::run_single_neuron(merged);
        } else if (mpdist->parsed()) {
            merged.record_snapshots = true;
            manifest = snn::run_mpdist_eval(merged);
        } else if (bench->parsed()) {
            manifest = snn::run_bench(merged);
        } else if (train->parsed()) {
            manifest = snn::run_train(merged);
        }
        std::cout << "wrote " << (std::filesystem::path(merged.out_dir) / "manifest.json").string()
                  << "\n";
        for (const auto& [key, value] : manifest.summary.items())
            std::cout << key << ": " << value.dump() << "\n";
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 1;
    }
    return 0;
}
