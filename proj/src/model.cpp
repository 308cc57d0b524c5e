#include "snn/model.hpp"

#include <limits>

namespace snn {

Model build_model(const std::string& arch, const Shape3& input_shape, int n_classes,
                  const NeuronParams& params, Rng& rng) {
    ParsedArchitecture parsed = parse_architecture(arch);
    if (parsed.declared_input && *parsed.declared_input != input_shape.size())
        throw std::invalid_argument("build_model: declared input width " +
                                    std::to_string(*parsed.declared_input) +
                                    " does not match input shape " +
                                    std::to_string(input_shape.size()));

    bool needs_readout = n_classes > 0;
    if (!parsed.layers.empty()) {
        const LayerSpec& last = parsed.layers.back();
        if (last.kind == LayerKind::dense && last.units == n_classes) needs_readout = false;
    }
    if (needs_readout) {
        LayerSpec readout;
        readout.kind = LayerKind::dense;
        readout.units = n_classes;
        readout.init = WeightInit::kaiming_normal;
        parsed.layers.push_back(readout);
    }
    if (parsed.layers.empty())
        throw std::invalid_argument("build_model: architecture has no layers");

    Model model(params);
    model.input_shape = input_shape;
    Shape3 shape = input_shape;
    for (const LayerSpec& spec : parsed.layers) {
        model.layers.push_back(make_layer(spec, shape, rng));
        shape = model.layers.back().out_shape;
    }
    return model;
}

std::vector<Psc> model_forward(Model& model, const std::vector<Wave>& input_streams) {
    const std::vector<Wave>* streams = &input_streams;
    for (LayerState& layer : model.layers)
        streams = &layer_forward(layer, *streams, model.params);
    return *streams;
}

std::vector<Matrix> make_gradient_buffers(const Model& model) {
    std::vector<Matrix> grads(model.layers.size());
    for (std::size_t i = 0; i < model.layers.size(); ++i)
        grads[i] = Matrix(model.layers[i].weights.rows, model.layers[i].weights.cols);
    return grads;
}

void model_backward_accumulate(Model& model, const std::vector<Wave>& loss_g,
                               const BackwardOptions& opt, std::vector<Matrix>& grad_accum) {
    if (grad_accum.size() != model.layers.size())
        throw std::invalid_argument("model_backward: one gradient buffer per layer required");
    model.g_front = loss_g;
    for (std::size_t i = model.layers.size(); i-- > 0;) {
        layer_backward_accumulate(model.layers[i], model.g_front, model.params, opt, i != 0,
                                  grad_accum[i], model.g_back);
        std::swap(model.g_front, model.g_back);
    }
}

std::vector<Matrix> model_backward(Model& model, const std::vector<Wave>& loss_g,
                                   const BackwardOptions& opt) {
    std::vector<Matrix> grads = make_gradient_buffers(model);
    model_backward_accumulate(model, loss_g, opt, grads);
    return grads;
}

int classify(const std::vector<Psc>& outputs) {
    int best = 0;
    double best_sum = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < outputs.size(); ++i) {
        double sum = 0.0;
        for (double v : outputs[i]) sum += v;
        if (sum > best_sum) {
            best_sum = sum;
            best = static_cast<int>(i);
        }
    }
    return best;
}

}  // namespace snn
