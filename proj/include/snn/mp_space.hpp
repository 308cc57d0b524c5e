#pragma once

#include "snn/lif.hpp"

namespace snn {

using Perturbation = Wave;

// Margin used to push a firing step strictly below threshold when flipping
// it to silent (exact threshold hits fire), and the floor applied to signed
// distances before they reach a division.
inline constexpr double kFlipMargin = 1e-6;

// Recover the synaptic input that produced a trace (inverse of lif_forward):
// c[t] = u[t] - (1 - 1/tau_m) * u[t-1] * (1 - s[t-1]).
Wave synaptic_input_of(const NeuronTrace& trace, const NeuronParams& p);

// Reset-aware addition. Re-integrates the membrane potential with eps
// injected into the synaptic input, resets taken from the perturbed
// waveform, so a nudge at step t chains into every later step. Returns the
// full perturbed trace (spike train, PSC, and input c + eps).
NeuronTrace mp_add(const NeuronTrace& trace, const Perturbation& eps, const NeuronParams& p);

// Reset-aware subtraction: the perturbation eps such that
// mp_add(base, eps) reproduces u_prime. Resets on the perturbed side come
// from thresholding u_prime, so arbitrary waveforms are accepted.
Perturbation mp_sub(const Wave& u_prime, const NeuronTrace& base, const NeuronParams& p);
Perturbation mp_sub(const NeuronTrace& u_prime, const NeuronTrace& base, const NeuronParams& p);

// L2 norm of the reset-aware difference.
double mp_dist(const Wave& u_prime, const NeuronTrace& base, const NeuronParams& p);
double mp_dist(const NeuronTrace& u_prime, const NeuronTrace& base, const NeuronParams& p);

// One single-flip neighbor of a trace.
struct Neighbor {
    int step = 0;           // flip position, 0-based
    NeuronTrace trace;      // perturbed waveform with chained spike/PSC changes
    double signed_dist = 0; // theta - u[step], magnitude floored at kFlipMargin
    Wave unit_dir;          // (perturbed boxminus base) normalized
};

struct Neighborhood {
    std::vector<Neighbor> members;  // one per step, in step order
};

// One neighbor per step: the smallest input nudge at that step that flips
// the step's firing status, chain effects materialized. Steps sitting
// exactly on the threshold still produce a neighbor; their signed distance
// is floored to +-kFlipMargin.
Neighborhood sns_neighborhood(const NeuronTrace& trace, const NeuronParams& p);

// theta - u[step]: matches the distance to the step's single-flip neighbor
// up to the flip margin. Negative when the step fired.
double sns_closed_form_dist(const NeuronTrace& trace, int step, const NeuronParams& p);

// Floor |d| at kFlipMargin keeping the firing-status sign (fired steps count
// as negative even when u[step] == theta exactly).
double floored_signed_dist(double theta_minus_u, bool fired);

// Spike train read as a binary number, first step most significant.
std::uint64_t spike_train_index(const SpikeTrain& s);
SpikeTrain spike_train_from_index(std::uint64_t index, int n_steps);

}  // namespace snn
