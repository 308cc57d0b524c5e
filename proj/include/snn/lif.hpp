#pragma once

#include "snn/common.hpp"

namespace snn {

// Full forward record of one neuron over n_steps.
struct NeuronTrace {
    Wave u;        // membrane potential
    SpikeTrain s;  // 1 wherever u >= theta
    Psc a;         // postsynaptic current generated by s
    Wave c;        // total synaptic input that produced u
};

// First-order synaptic kernel sigma[t] = (1/tau_s) * (1 - 1/tau_s)^t.
Wave psc_kernel(const NeuronParams& p);

// PSC recurrence a[t] = (1 - 1/tau_s) * a[t-1] + (1/tau_s) * s[t], zero
// initial state. Equals the convolution of the spike train with psc_kernel.
Psc psc_from_spikes(const SpikeTrain& s, const NeuronParams& p);

// Convolution of the kernel with a spike train, direct form. Used as the
// filtered target in the loss and as a cross-check of the recurrence.
Wave kernel_filter(const Wave& kernel, const SpikeTrain& s);

// Integrate synaptic input into a full trace from a zero initial state.
// A step fires whenever u >= theta (exact threshold hits fire); firing
// zeroes the potential carried into the next step.
NeuronTrace lif_forward(const Wave& c, const NeuronParams& p);
// Buffer-reusing form for hot loops.
void lif_forward_into(const Wave& c, const NeuronParams& p, NeuronTrace& out);

}  // namespace snn
