#pragma once

#include "snn/mp_space.hpp"

namespace snn {

// Clip bound for the 1/d^3 scaling of finite differences. Values in [2, 20]
// are stable in practice; 10 is the default used everywhere.
struct ClipBound {
    double b = 10.0;
    ClipBound() = default;
    explicit ClipBound(double b_) : b(b_) {
        if (!(b > 0.0) || !std::isfinite(b))
            throw std::invalid_argument("ClipBound: b must be positive and finite");
    }
};

struct NaOptions {
    bool scaled = true;            // clip(1/d^3, -b, b) scaling; false = plain 1/d
    bool signed_distances = true;  // false drops the sign of theta - u[p] (A/B switch)
};

// Backward quantities of one neuron.
struct ErrorSignals {
    Wave g;         // instantaneous PSC error
    Wave e;         // PSC error signal, backward recursion over g
    Wave agg_grad;  // aggregated gradient replacing dL/du
};

// All three backward quantities of one neuron, mostly for inspection and
// tests; the layer sweeps use the flat-matrix path.
ErrorSignals na_error_signals(const NeuronTrace& trace, const Wave& g, const NeuronParams& p,
                              const ClipBound& bound, const NaOptions& opt = {});

// Output layer: g[t] = a[t] - (kernel * target)[t].
Wave output_g(const Psc& a, const SpikeTrain& target, const Wave& kernel);

// Hidden layer: g_i[t] = sum_p weights[p][i] * err_next[p][t], one sequence
// per presynaptic neuron.
std::vector<Wave> hidden_g(const Matrix& weights, const std::vector<Wave>& err_next);

// e[T] = g[T]; e[t] = g[t] + (1 - 1/tau_s) * e[t+1].
Wave psc_error(const Wave& g, const NeuronParams& p);
void psc_error_into(const Wave& g, const NeuronParams& p, Wave& e);

// Scaled finite difference e . (a_p - a) * clip(1 / signed_dist^3, -b, b).
double neighbor_finite_difference(const Wave& e, const Psc& a, const Psc& a_p,
                                  double signed_dist, const ClipBound& bound);

// Plain variant: e . (a_p - a) / signed_dist, no cube, no clip.
double neighbor_finite_difference_unscaled(const Wave& e, const Psc& a, const Psc& a_p,
                                           double signed_dist);

// Under single-flip neighborhoods the direction matrix is the signed
// standard basis, so the solve collapses to the finite differences
// themselves (signs already absorbed by the signed distances).
Wave aggregate_sns(const Wave& finite_diffs);

// General aggregation: minimum-norm least-squares solution of
// [directions] * grad = finite_diffs via a rank-revealing factorization,
// singular values below 1e-10 * largest treated as zero.
Wave aggregate_general(const std::vector<Wave>& directions, const Wave& finite_diffs);

// grad[i][j] = sum_t a_prev[j][t] * err[i][t].
Matrix weight_gradient(const std::vector<Psc>& a_prev, const std::vector<Wave>& err);
// Same contraction over an error matrix with one row per neuron.
Matrix weight_gradient(const std::vector<Psc>& a_prev, const Matrix& err);

// hidden_g over an error matrix row per downstream neuron.
std::vector<Wave> hidden_g(const Matrix& weights, const Matrix& err_next);

// Steps 2-5 for one neuron: single-flip neighborhood, signed distances,
// per-neighbor finite differences against the neighbor PSCs, stacked into
// the aggregated gradient. Equivalent to materializing sns_neighborhood and
// aggregating, without building the intermediate traces.
Wave na_aggregated_gradient(const NeuronTrace& trace, const Wave& e, const NeuronParams& p,
                            const ClipBound& bound, const NaOptions& opt = {});
void na_aggregated_gradient_into(const NeuronTrace& trace, const Wave& e, const NeuronParams& p,
                                 const ClipBound& bound, const NaOptions& opt, double* out);

// Aggregated gradients for a whole layer, one row per neuron; the buffers
// are reused across neurons so the sweep stays allocation-free.
Matrix na_error_matrix(const std::vector<NeuronTrace>& traces, const std::vector<Wave>& g,
                       const NeuronParams& p, const ClipBound& bound, const NaOptions& opt = {});

struct LayerBackwardResult {
    Matrix weight_grad;        // same shape as the layer's weights
    std::vector<Wave> g_prev;  // instantaneous error for each presynaptic neuron
};

// The five-step pipeline over a dense layer: per-neuron PSC error signals,
// aggregated gradients, weight gradients, and the error handed to the
// preceding layer.
LayerBackwardResult na_backward_layer(const std::vector<NeuronTrace>& traces,
                                      const std::vector<Wave>& g,
                                      const std::vector<Psc>& a_prev,
                                      const Matrix& weights,
                                      const NeuronParams& p,
                                      const ClipBound& bound,
                                      const NaOptions& opt = {});

}  // namespace snn
