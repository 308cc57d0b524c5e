#pragma once

#include <optional>
#include <string>

#include "snn/rng.hpp"
#include "snn/surrogate.hpp"

namespace snn {

enum class LayerKind { dense, conv2d, avgpool2d };
enum class WeightInit { kaiming_normal, kaiming_uniform };

// channels x height x width; dense streams use c = size, h = w = 1.
struct Shape3 {
    int c = 1;
    int h = 1;
    int w = 1;
    int size() const { return c * h * w; }
    bool operator==(const Shape3&) const = default;
};

struct LayerSpec {
    LayerKind kind = LayerKind::dense;
    int units = 0;         // dense: output width
    int out_channels = 0;  // conv2d
    int kernel = 0;        // conv2d: square kernel side
    int stride = 1;        // conv2d
    int padding = 0;       // conv2d: symmetric zero padding
    int window = 0;        // avgpool2d: square window side
    WeightInit init = WeightInit::kaiming_normal;
};

// Architecture strings: layers joined by '-'.
//   <n>C<k>  conv2d, n output channels, k x k kernel (stride 1, no padding)
//   P<w>     avgpool2d over w x w windows
//   <n>      dense layer with n neurons
// A leading bare integer declares the expected input width instead of a
// layer, so "784-400-10" is a 784-input net with dense layers of 400 and 10.
struct ParsedArchitecture {
    std::optional<int> declared_input;
    std::vector<LayerSpec> layers;
};
ParsedArchitecture parse_architecture(const std::string& text);

struct LayerState {
    LayerSpec spec;
    Shape3 in_shape, out_shape;
    Matrix weights;  // dense: [units x in_size]; conv: [out_c x in_c*k*k]
    Matrix m1, m2;   // optimizer moments, same shape as weights

    // Cache of the most recent forward pass (one sample). The buffers are
    // reused from sample to sample.
    std::vector<NeuronTrace> traces;  // spiking layers only
    std::vector<Wave> in_streams;
    std::vector<Wave> out_streams;
    bool has_cache = false;
};

struct BackwardOptions {
    enum class Method { na, surrogate } method = Method::na;
    ClipBound bound;
    NaOptions na;
    SurrogateParams sg;
};

Shape3 layer_out_shape(const LayerSpec& spec, const Shape3& in);
LayerState make_layer(const LayerSpec& spec, const Shape3& in, Rng& rng);

// Runs one layer over a sample's input streams and caches what backward
// needs. Spiking layers emit their neurons' PSCs; pooling passes averaged
// streams through untouched by any neuron dynamics. The returned reference
// points at the layer's reused output buffer.
const std::vector<Wave>& layer_forward(LayerState& layer, const std::vector<Wave>& in,
                                       const NeuronParams& p);

// Maps the error on this layer's outputs to a weight gradient and the error
// on its inputs, using the cached forward pass. propagate=false skips the
// input-error computation (the first layer of a model has no use for it).
LayerBackwardResult layer_backward(LayerState& layer, const std::vector<Wave>& g,
                                   const NeuronParams& p, const BackwardOptions& opt,
                                   bool propagate = true);

// Accumulating form: adds the weight gradient into grad_accum (shaped like
// the weights) and overwrites g_prev when propagate is set. Both buffers
// are caller-owned so batch loops run without per-sample allocation.
void layer_backward_accumulate(LayerState& layer, const std::vector<Wave>& g,
                               const NeuronParams& p, const BackwardOptions& opt, bool propagate,
                               Matrix& grad_accum, std::vector<Wave>& g_prev);

}  // namespace snn
