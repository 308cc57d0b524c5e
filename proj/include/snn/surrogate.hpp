#pragma once

#include "snn/na.hpp"

namespace snn {

enum class SurrogateKind { rectangular, fast_sigmoid };

struct SurrogateParams {
    double window = 0.5;  // half-width of the rectangular window / sharpness scale
    SurrogateKind kind = SurrogateKind::rectangular;
};

// Stand-in for the Heaviside derivative at u_t.
// rectangular: 1/(2*window) inside |u - theta| < window, else 0 (unit mass).
// fast_sigmoid: (1/window) / (1 + |u - theta|/window)^2, peak 1/window.
double surrogate_derivative(double u_t, const NeuronParams& p, const SurrogateParams& sp);

// Membrane-potential error delta via the backward-in-time recursion, with
// da[t]/du[t] = (1/tau_s) * surrogate(u[t]) and the temporal factor
// du[t+1]/du[t] fixed at (1 - 1/tau_m) (reset contribution omitted).
Wave stbp_delta(const NeuronTrace& trace, const Wave& e, const NeuronParams& p,
                const SurrogateParams& sp);
void stbp_delta_into(const NeuronTrace& trace, const Wave& e, const NeuronParams& p,
                     const SurrogateParams& sp, double* out);

// Per-layer delta rows, buffers reused across neurons.
Matrix stbp_error_matrix(const std::vector<NeuronTrace>& traces, const std::vector<Wave>& g,
                         const NeuronParams& p, const SurrogateParams& sp);

// Activation-smoothing counterpart of the aggregation backward pass: same
// inputs, same outputs, delta in place of the aggregated gradient.
LayerBackwardResult stbp_backward_layer(const std::vector<NeuronTrace>& traces,
                                        const std::vector<Wave>& g,
                                        const std::vector<Psc>& a_prev,
                                        const Matrix& weights,
                                        const NeuronParams& p,
                                        const SurrogateParams& sp);

}  // namespace snn
