#include "snn/optimizer.hpp"

namespace snn {

void AdamW::step(Model& model, const std::vector<Matrix>& grads) {
    if (grads.size() != model.layers.size())
        throw std::invalid_argument("AdamW::step: one gradient per layer required");

    ++step_count_;
    const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(step_count_));
    const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(step_count_));

    for (std::size_t li = 0; li < model.layers.size(); ++li) {
        LayerState& layer = model.layers[li];
        const Matrix& g = grads[li];
        if (layer.weights.size() == 0) {
            if (g.size() != 0)
                throw std::invalid_argument("AdamW::step: gradient for a weightless layer");
            continue;
        }
        if (g.rows != layer.weights.rows || g.cols != layer.weights.cols)
            throw std::invalid_argument("AdamW::step: gradient shape mismatch at layer " +
                                        std::to_string(li));

        for (std::size_t k = 0; k < layer.weights.v.size(); ++k) {
            double gk = g.v[k];
            if (!std::isfinite(gk))
                throw std::runtime_error("AdamW::step: non-finite gradient at layer " +
                                         std::to_string(li));
            double& m = layer.m1.v[k];
            double& v = layer.m2.v[k];
            m = cfg_.beta1 * m + (1.0 - cfg_.beta1) * gk;
            v = cfg_.beta2 * v + (1.0 - cfg_.beta2) * gk * gk;
            double m_hat = m / bc1;
            double v_hat = v / bc2;
            double& w = layer.weights.v[k];
            w -= cfg_.lr * (m_hat / (std::sqrt(v_hat) + cfg_.eps) + cfg_.weight_decay * w);
        }
    }
}

}  // namespace snn
