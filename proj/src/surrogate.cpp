#include "snn/surrogate.hpp"

namespace snn {

double surrogate_derivative(double u_t, const NeuronParams& p, const SurrogateParams& sp) {
    double dist = std::abs(u_t - p.theta);
    switch (sp.kind) {
        case SurrogateKind::rectangular:
            return dist < sp.window ? 1.0 / (2.0 * sp.window) : 0.0;
        case SurrogateKind::fast_sigmoid: {
            double denom = 1.0 + dist / sp.window;
            return 1.0 / (sp.window * denom * denom);
        }
    }
    return 0.0;
}

void stbp_delta_into(const NeuronTrace& trace, const Wave& e, const NeuronParams& p,
                     const SurrogateParams& sp, double* delta) {
    if (e.size() != trace.u.size())
        throw std::invalid_argument("stbp_delta: error signal length mismatch");
    const double temporal = p.mem_decay();
    const double syn_gain = 1.0 / p.tau_s;
    double next = 0.0;
    for (std::size_t i = e.size(); i-- > 0;) {
        double da_du = syn_gain * surrogate_derivative(trace.u[i], p, sp);
        next = e[i] * da_du + temporal * next;
        delta[i] = next;
    }
}

Wave stbp_delta(const NeuronTrace& trace, const Wave& e, const NeuronParams& p,
                const SurrogateParams& sp) {
    Wave delta(e.size());
    stbp_delta_into(trace, e, p, sp, delta.data());
    return delta;
}

Matrix stbp_error_matrix(const std::vector<NeuronTrace>& traces, const std::vector<Wave>& g,
                         const NeuronParams& p, const SurrogateParams& sp) {
    if (traces.size() != g.size())
        throw std::invalid_argument("stbp_error_matrix: one error sequence per neuron required");
    Matrix err(static_cast<int>(traces.size()), p.n_steps);
    Wave e_buf;
    for (std::size_t i = 0; i < traces.size(); ++i) {
        psc_error_into(g[i], p, e_buf);
        stbp_delta_into(traces[i], e_buf, p, sp, err.row(static_cast<int>(i)));
    }
    return err;
}

LayerBackwardResult stbp_backward_layer(const std::vector<NeuronTrace>& traces,
                                        const std::vector<Wave>& g,
                                        const std::vector<Psc>& a_prev,
                                        const Matrix& weights,
                                        const NeuronParams& p,
                                        const SurrogateParams& sp) {
    if (weights.rows != static_cast<int>(traces.size()) ||
        weights.cols != static_cast<int>(a_prev.size()))
        throw std::invalid_argument("stbp_backward_layer: weight shape mismatch");

    Matrix err = stbp_error_matrix(traces, g, p, sp);
    LayerBackwardResult out;
    out.weight_grad = weight_gradient(a_prev, err);
    out.g_prev = hidden_g(weights, err);
    return out;
}

}  // namespace snn
