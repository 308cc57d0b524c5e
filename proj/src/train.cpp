#include "snn/train.hpp"

#include <chrono>
#include <numeric>

#include "snn/loss.hpp"

namespace snn {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

}  // namespace

TraceSnapshot collect_traces(const Model& model) {
    TraceSnapshot snap(model.layers.size());
    for (std::size_t i = 0; i < model.layers.size(); ++i)
        if (model.layers[i].spec.kind != LayerKind::avgpool2d)
            snap[i] = model.layers[i].traces;
    return snap;
}

std::vector<SpikeTrain> resolve_targets(const EncodedSample& sample, const TrainConfig& cfg,
                                        int n_classes) {
    if (sample.label >= 0)
        return encode_target(cfg.target_encoding, sample.label, n_classes, cfg.n_steps);
    if (sample.targets.empty())
        throw std::invalid_argument("sample has neither a label nor explicit targets");
    return sample.targets;
}

EpochResult train_epoch(Model& model, AdamW& optimizer, const std::vector<EncodedSample>& data,
                        const TrainConfig& cfg, int n_classes, Rng& shuffle_rng, int epoch_index,
                        std::vector<IterationRecord>& records, SnapshotRecorder* recorder) {
    const BackwardOptions opt = cfg.backward_options();
    const Wave kernel = psc_kernel(model.params);
    const int batch = cfg.batch_size;

    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    // Fisher-Yates with the run's generator keeps the order reproducible.
    for (std::size_t i = order.size(); i > 1; --i) {
        auto j = static_cast<std::size_t>(shuffle_rng.uniform() * static_cast<double>(i));
        if (j >= i) j = i - 1;
        std::swap(order[i - 1], order[j]);
    }

    if (recorder && !recorder->prev) {
        model_forward(model, recorder->probe_streams);
        recorder->prev = collect_traces(model);
    }

    EpochResult result;
    std::vector<Matrix> grad_accum = make_gradient_buffers(model);
    double loss_sum = 0.0;
    long train_hits = 0, train_seen = 0;
    const int n_batches = static_cast<int>(data.size()) / batch;  // remainder dropped
    for (int b = 0; b < n_batches; ++b) {
        double batch_loss = 0.0;
        for (int k = 0; k < batch; ++k) {
            const EncodedSample& sample = data[order[static_cast<std::size_t>(b * batch + k)]];

            auto t0 = Clock::now();
            std::vector<Psc> out = model_forward(model, sample.currents);
            result.timings.forward_s += seconds_since(t0);

            if (sample.label >= 0) {
                ++train_seen;
                if (classify(out) == sample.label) ++train_hits;
            }

            t0 = Clock::now();
            LossResult lr = van_rossum_loss(out, resolve_targets(sample, cfg, n_classes), kernel);
            batch_loss += lr.loss;
            model_backward_accumulate(model, lr.g, opt, grad_accum);
            result.timings.backward_s += seconds_since(t0);
        }

        auto t0 = Clock::now();
        const double inv_batch = 1.0 / batch;
        for (Matrix& g : grad_accum)
            for (double& w : g.v) w *= inv_batch;
        optimizer.step(model, grad_accum);
        for (Matrix& g : grad_accum) g.fill(0.0);
        result.timings.optimizer_s += seconds_since(t0);

        const double mean_loss = batch_loss / batch;
        loss_sum += mean_loss;
        records.push_back({epoch_index, b, mean_loss});
        ++result.iterations;

        if (recorder && recorder->on_update) {
            model_forward(model, recorder->probe_streams);
            TraceSnapshot after = collect_traces(model);
            recorder->on_update(*recorder->prev, after);
            recorder->prev = std::move(after);
        }
    }
    result.mean_loss = result.iterations > 0 ? loss_sum / result.iterations : 0.0;
    result.train_accuracy =
        train_seen > 0 ? static_cast<double>(train_hits) / static_cast<double>(train_seen) : 0.0;
    return result;
}

double evaluate_accuracy(Model& model, const std::vector<EncodedSample>& data) {
    if (data.empty()) return 0.0;
    std::size_t hits = 0;
    for (const EncodedSample& sample : data) {
        std::vector<Psc> out = model_forward(model, sample.currents);
        if (classify(out) == sample.label) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(data.size());
}

}  // namespace snn
