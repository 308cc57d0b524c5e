#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace snn {

// One value per simulation step. Index k of a sequence is step t = k+1 of the
// update equations; the state before the first step is zero.
using Wave = std::vector<double>;
using Psc = Wave;
using SpikeTrain = std::vector<std::uint8_t>;

// Constants shared by every neuron of a network.
struct NeuronParams {
    double tau_m;   // membrane decay time constant, > 1
    double tau_s;   // synaptic kernel time constant, > 1
    double theta;   // firing threshold
    int n_steps;    // steps per simulated trace

    NeuronParams(double tau_m_, double tau_s_, double theta_, int n_steps_)
        : tau_m(tau_m_), tau_s(tau_s_), theta(theta_), n_steps(n_steps_) {
        if (!(tau_m > 1.0) || !std::isfinite(tau_m))
            throw std::invalid_argument("NeuronParams: tau_m must be > 1");
        if (!(tau_s > 1.0) || !std::isfinite(tau_s))
            throw std::invalid_argument("NeuronParams: tau_s must be > 1");
        if (!std::isfinite(theta))
            throw std::invalid_argument("NeuronParams: theta must be finite");
        if (n_steps < 1)
            throw std::invalid_argument("NeuronParams: n_steps must be >= 1");
    }

    double mem_decay() const { return 1.0 - 1.0 / tau_m; }
    double syn_decay() const { return 1.0 - 1.0 / tau_s; }
};

inline bool all_finite(const Wave& w) {
    return std::all_of(w.begin(), w.end(), [](double x) { return std::isfinite(x); });
}

// Row-major dense matrix; rows index postsynaptic neurons, cols presynaptic.
struct Matrix {
    int rows = 0;
    int cols = 0;
    std::vector<double> v;

    Matrix() = default;
    Matrix(int r, int c) : rows(r), cols(c), v(static_cast<std::size_t>(r) * c, 0.0) {}

    double& at(int r, int c) { return v[static_cast<std::size_t>(r) * cols + c]; }
    double at(int r, int c) const { return v[static_cast<std::size_t>(r) * cols + c]; }
    double* row(int r) { return v.data() + static_cast<std::size_t>(r) * cols; }
    const double* row(int r) const { return v.data() + static_cast<std::size_t>(r) * cols; }
    std::size_t size() const { return v.size(); }
    void fill(double x) { std::fill(v.begin(), v.end(), x); }
};

inline double dot(const Wave& x, const Wave& y) {
    double acc = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) acc += x[i] * y[i];
    return acc;
}

}  // namespace snn
