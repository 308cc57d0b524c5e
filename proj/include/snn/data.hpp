#pragma once

#include <string>

#include "snn/rng.hpp"
#include "snn/common.hpp"

namespace snn {

// Typed failure from the IDX parser.
class IdxError : public std::runtime_error {
  public:
    enum class Kind { io, bad_magic, bad_dims, truncated, count_mismatch };

    IdxError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    Kind kind() const { return kind_; }

  private:
    Kind kind_;
};

struct IdxDataset {
    int rows = 0;
    int cols = 0;
    std::vector<std::vector<std::uint8_t>> images;  // rows*cols pixels each
    std::vector<std::uint8_t> labels;
    std::size_t size() const { return images.size(); }
};

// Big-endian IDX pair: magic 0x00000803 for images, 0x00000801 for labels;
// image and label counts must agree.
IdxDataset load_mnist_idx(const std::string& images_path, const std::string& labels_path);

struct EncodedSample {
    std::vector<Wave> currents;        // one stream per input channel
    int label = -1;                    // class index, or -1 for synthetic tasks
    std::vector<SpikeTrain> targets;   // explicit desired trains when label < 0
};

// Constant-current coding: current[ch][t] = gain * pixel/255 at every step.
EncodedSample encode_image_current(const std::vector<std::uint8_t>& pixels,
                                   const NeuronParams& p, double gain);
// Same, for already-real-valued pixel grids (validated to [0, 255]).
EncodedSample encode_image_current(const std::vector<double>& pixels,
                                   const NeuronParams& p, double gain);

// Independent draws per neuron per step with firing probability prob.
std::vector<SpikeTrain> bernoulli_spike_trains(int n_neurons, double prob, int n_steps, Rng& rng);

struct NormalizeResult {
    std::vector<Wave> values;
    bool zero_variance = false;  // inputs were constant; values are centered, not scaled
};

// Center and scale by the population mean/stddev over all streams and steps.
NormalizeResult normalize_pscs(const std::vector<Wave>& pscs);

}  // namespace snn
