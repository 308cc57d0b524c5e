#include "snn/config.hpp"

#include <fstream>

namespace snn {

namespace {

// Field table keeps to_json/from_json in lockstep.
template <typename Fn>
void for_each_field(TrainConfig& c, Fn&& fn) {
    fn("method", c.method);
    fn("tau_m", c.tau_m);
    fn("tau_s", c.tau_s);
    fn("theta", c.theta);
    fn("n_steps", c.n_steps);
    fn("clip_b", c.clip_b);
    fn("na_scaled", c.na_scaled);
    fn("na_signed", c.na_signed);
    fn("surrogate_kind", c.surrogate_kind);
    fn("surrogate_window", c.surrogate_window);
    fn("learning_rate", c.learning_rate);
    fn("weight_decay", c.weight_decay);
    fn("adam_beta1", c.adam_beta1);
    fn("adam_beta2", c.adam_beta2);
    fn("adam_eps", c.adam_eps);
    fn("batch_size", c.batch_size);
    fn("epochs", c.epochs);
    fn("seed", c.seed);
    fn("arch", c.arch);
    fn("target_encoding", c.target_encoding);
    fn("decision_rule", c.decision_rule);
    fn("input_gain", c.input_gain);
    fn("data_dir", c.data_dir);
    fn("train_limit", c.train_limit);
    fn("test_limit", c.test_limit);
    fn("rounds", c.rounds);
    fn("iterations", c.iterations);
    fn("n_inputs", c.n_inputs);
    fn("p_in", c.p_in);
    fn("p_out", c.p_out);
    fn("single_neuron_lr", c.single_neuron_lr);
    fn("single_neuron_init", c.single_neuron_init);
    fn("record_snapshots", c.record_snapshots);
    fn("bench_steps", c.bench_steps);
    fn("bench_arch", c.bench_arch);
    fn("bench_batch_size", c.bench_batch_size);
    fn("bench_batches", c.bench_batches);
    fn("bench_reps", c.bench_reps);
    fn("out_dir", c.out_dir);
}

void validate(const TrainConfig& c) {
    if (c.method != "na" && c.method != "surrogate")
        throw std::invalid_argument("config: method must be na or surrogate");
    if (c.surrogate_kind != "rectangular" && c.surrogate_kind != "fast-sigmoid")
        throw std::invalid_argument("config: surrogate_kind must be rectangular or fast-sigmoid");
    if (c.target_encoding != "all_steps" && c.target_encoding != "last_step")
        throw std::invalid_argument("config: target_encoding must be all_steps or last_step");
    if (c.decision_rule != "psc_sum_argmax")
        throw std::invalid_argument("config: decision_rule must be psc_sum_argmax");
    if (!(c.learning_rate > 0.0)) throw std::invalid_argument("config: learning_rate must be > 0");
    if (c.epochs < 0) throw std::invalid_argument("config: epochs must be >= 0");
    if (c.batch_size < 1) throw std::invalid_argument("config: batch_size must be >= 1");
    (void)c.neuron_params();  // neuron constants checked by NeuronParams
}

}  // namespace

BackwardOptions TrainConfig::backward_options() const {
    BackwardOptions opt;
    opt.method = method == "na" ? BackwardOptions::Method::na : BackwardOptions::Method::surrogate;
    opt.bound = ClipBound(clip_b);
    opt.na.scaled = na_scaled;
    opt.na.signed_distances = na_signed;
    opt.sg.window = surrogate_window;
    opt.sg.kind = surrogate_kind == "rectangular" ? SurrogateKind::rectangular
                                                  : SurrogateKind::fast_sigmoid;
    return opt;
}

AdamWConfig TrainConfig::adamw_config() const {
    AdamWConfig a;
    a.lr = learning_rate;
    a.weight_decay = weight_decay;
    a.beta1 = adam_beta1;
    a.beta2 = adam_beta2;
    a.eps = adam_eps;
    return a;
}

nlohmann::json TrainConfig::to_json() const {
    nlohmann::json j;
    TrainConfig& self = const_cast<TrainConfig&>(*this);
    for_each_field(self, [&j](const char* key, auto& value) { j[key] = value; });
    return j;
}

TrainConfig TrainConfig::from_json(const nlohmann::json& j) {
    TrainConfig c;
    std::vector<std::string> known;
    for_each_field(c, [&](const char* key, auto& value) {
        known.emplace_back(key);
        if (j.contains(key)) value = j.at(key).get<std::decay_t<decltype(value)>>();
    });
    for (const auto& [key, _] : j.items())
        if (std::find(known.begin(), known.end(), key) == known.end())
            throw std::invalid_argument("config: unknown key \"" + key + "\"");
    validate(c);
    return c;
}

TrainConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read config file " + path);
    nlohmann::json j;
    in >> j;
    return TrainConfig::from_json(j);
}

std::vector<SpikeTrain> encode_target(const std::string& scheme, int label, int n_classes,
                                      int n_steps) {
    if (label < 0 || label >= n_classes)
        throw std::invalid_argument("encode_target: label outside class range");
    std::vector<SpikeTrain> targets(static_cast<std::size_t>(n_classes),
                                    SpikeTrain(static_cast<std::size_t>(n_steps), 0));
    SpikeTrain& active = targets[static_cast<std::size_t>(label)];
    if (scheme == "all_steps") {
        std::fill(active.begin(), active.end(), 1);
    } else if (scheme == "last_step") {
        active.back() = 1;
    } else {
        throw std::invalid_argument("encode_target: unknown scheme " + scheme);
    }
    return targets;
}

}  // namespace snn
