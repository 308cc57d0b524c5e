#pragma once

#include "snn/layers.hpp"
#include "snn/loss.hpp"

namespace snn {

struct Model {
    NeuronParams params;
    Shape3 input_shape;
    std::vector<LayerState> layers;

    explicit Model(const NeuronParams& p) : params(p) {}

    // Scratch for the backward sweep, reused across samples.
    std::vector<Wave> g_front, g_back;
};

// Assemble a model from an architecture string. A declared input width must
// match input_shape. When n_classes > 0 and the last layer is not a dense
// layer of that width, a dense readout of n_classes is appended.
Model build_model(const std::string& arch, const Shape3& input_shape, int n_classes,
                  const NeuronParams& params, Rng& rng);

// Run every layer over one sample; returns the output PSC streams and
// leaves each layer's forward cache populated for backward.
std::vector<Psc> model_forward(Model& model, const std::vector<Wave>& input_streams);

// Backpropagate the loss error through all layers; returns one gradient per
// layer (empty matrices for weightless layers). Requires a cached forward.
std::vector<Matrix> model_backward(Model& model, const std::vector<Wave>& loss_g,
                                   const BackwardOptions& opt);

// Batch-loop form: adds this sample's gradients into grad_accum, one
// pre-shaped matrix per layer.
void model_backward_accumulate(Model& model, const std::vector<Wave>& loss_g,
                               const BackwardOptions& opt, std::vector<Matrix>& grad_accum);

// One zero matrix per layer, shaped like its weights.
std::vector<Matrix> make_gradient_buffers(const Model& model);

// argmax over classes of the summed output PSC; ties go to the lowest index.
int classify(const std::vector<Psc>& outputs);

}  // namespace snn
