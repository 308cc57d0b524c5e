#pragma once

#include <functional>
#include <optional>

#include "snn/config.hpp"
#include "snn/data.hpp"
#include "snn/model.hpp"
#include "snn/optimizer.hpp"

namespace snn {

struct IterationRecord {
    int epoch = 0;
    int iteration = 0;  // batch index within the epoch
    double mean_loss = 0.0;
};

struct PhaseTimings {
    double forward_s = 0.0;
    double backward_s = 0.0;  // loss + error propagation + gradient accumulation
    double optimizer_s = 0.0;
};

struct EpochResult {
    double mean_loss = 0.0;
    double train_accuracy = 0.0;  // over the samples seen this epoch (labeled data only)
    int iterations = 0;
    PhaseTimings timings;
};

// Traces of every spiking neuron, by layer (weightless layers stay empty).
using TraceSnapshot = std::vector<std::vector<NeuronTrace>>;
TraceSnapshot collect_traces(const Model& model);

// Re-runs a fixed probe input around every weight update and hands the
// before/after traces to the callback.
struct SnapshotRecorder {
    std::vector<Wave> probe_streams;
    std::function<void(const TraceSnapshot& before, const TraceSnapshot& after)> on_update;
    std::optional<TraceSnapshot> prev;  // filled on first use
};

// One pass over the dataset in shuffled order: forward, loss, backward with
// the configured method, one optimizer step per batch. A trailing partial
// batch is dropped. Batch gradients are averaged in sample order.
EpochResult train_epoch(Model& model, AdamW& optimizer, const std::vector<EncodedSample>& data,
                        const TrainConfig& cfg, int n_classes, Rng& shuffle_rng, int epoch_index,
                        std::vector<IterationRecord>& records, SnapshotRecorder* recorder = nullptr);

// Fraction of samples whose classify() output equals the label.
double evaluate_accuracy(Model& model, const std::vector<EncodedSample>& data);

// Targets for one sample: class labels go through encode_target; synthetic
// samples (label < 0) carry their spike trains explicitly.
std::vector<SpikeTrain> resolve_targets(const EncodedSample& sample, const TrainConfig& cfg,
                                        int n_classes);

}  // namespace snn
