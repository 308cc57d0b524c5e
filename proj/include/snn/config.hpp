#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "snn/layers.hpp"
#include "snn/optimizer.hpp"

namespace snn {

// Merged run configuration. Every field can come from a JSON config file
// and be overridden from the command line; the effective values are written
// into the run manifest.
struct TrainConfig {
    // method & neuron constants
    std::string method = "na";  // na | surrogate
    double tau_m = 5.0;
    double tau_s = 2.0;
    double theta = 1.0;
    int n_steps = 5;

    // aggregation backward
    double clip_b = 10.0;
    bool na_scaled = true;
    bool na_signed = true;

    // surrogate backward
    std::string surrogate_kind = "rectangular";  // rectangular | fast-sigmoid
    double surrogate_window = 0.5;

    // optimizer / loop
    double learning_rate = 5e-4;
    double weight_decay = 0.01;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    int batch_size = 32;
    int epochs = 10;
    std::uint64_t seed = 1;

    // model & encoding
    std::string arch = "784-400-10";
    std::string target_encoding = "all_steps";  // all_steps | last_step
    std::string decision_rule = "psc_sum_argmax";
    double input_gain = 1.0;

    // dataset
    std::string data_dir = "data/mnist";
    int train_limit = 0;  // 0 = use everything
    int test_limit = 0;

    // single-neuron study
    int rounds = 100;
    int iterations = 200;
    int n_inputs = 200;
    double p_in = 0.05;
    double p_out = 0.2;
    double single_neuron_lr = 0.002;
    // Initial weight scale, as a multiple of 1/sqrt(n_inputs). The inputs
    // are normalized to unit variance, so this is roughly the initial
    // membrane-potential scale relative to the threshold.
    double single_neuron_init = 0.2;
    bool record_snapshots = false;

    // benchmark
    std::vector<int> bench_steps = {5, 10, 20};
    std::string bench_arch = "4-384-2";
    int bench_batch_size = 16;
    int bench_batches = 32;
    int bench_reps = 9;

    std::string out_dir = "out";

    NeuronParams neuron_params() const { return NeuronParams(tau_m, tau_s, theta, n_steps); }
    NeuronParams neuron_params(int steps) const { return NeuronParams(tau_m, tau_s, theta, steps); }

    BackwardOptions backward_options() const;
    AdamWConfig adamw_config() const;

    nlohmann::json to_json() const;
    static TrainConfig from_json(const nlohmann::json& j);  // unknown keys rejected
};

TrainConfig load_config_file(const std::string& path);

// Desired spike trains per class: the labeled neuron gets the encoding's
// active train, every other class stays silent.
std::vector<SpikeTrain> encode_target(const std::string& scheme, int label, int n_classes,
                                      int n_steps);

}  // namespace snn
