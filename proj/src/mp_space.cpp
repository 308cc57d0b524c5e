#include "snn/mp_space.hpp"

#include <cmath>

namespace snn {

namespace {

void check_trace(const NeuronTrace& tr, const NeuronParams& p, const char* who) {
    const auto n = static_cast<std::size_t>(p.n_steps);
    if (tr.u.size() != n || tr.s.size() != n)
        throw std::invalid_argument(std::string(who) + ": trace length != n_steps");
    for (std::size_t t = 0; t < n; ++t) {
        bool fired = tr.u[t] >= p.theta;
        if (fired != (tr.s[t] != 0))
            throw std::invalid_argument(std::string(who) + ": spike train inconsistent with u");
    }
}

}  // namespace

Wave synaptic_input_of(const NeuronTrace& trace, const NeuronParams& p) {
    check_trace(trace, p, "synaptic_input_of");
    const double decay = p.mem_decay();
    Wave c(trace.u.size());
    double carry = 0.0;
    for (std::size_t t = 0; t < trace.u.size(); ++t) {
        c[t] = trace.u[t] - decay * carry;
        carry = trace.s[t] ? 0.0 : trace.u[t];
    }
    return c;
}

NeuronTrace mp_add(const NeuronTrace& trace, const Perturbation& eps, const NeuronParams& p) {
    if (eps.size() != trace.u.size())
        throw std::invalid_argument("mp_add: perturbation length mismatch");
    if (!all_finite(eps))
        throw std::invalid_argument("mp_add: non-finite perturbation");
    if (trace.c.size() != trace.u.size())
        throw std::invalid_argument("mp_add: trace is missing its synaptic input");

    const Wave& c = trace.c;
    const double decay = p.mem_decay();
    NeuronTrace out;
    out.u.resize(c.size());
    out.s.resize(c.size());
    out.c.resize(c.size());
    double carry = 0.0;
    for (std::size_t t = 0; t < c.size(); ++t) {
        double u = decay * carry + eps[t] + c[t];
        bool fired = u >= p.theta;
        out.u[t] = u;
        out.s[t] = fired ? 1 : 0;
        out.c[t] = c[t] + eps[t];
        carry = fired ? 0.0 : u;
    }
    out.a = psc_from_spikes(out.s, p);
    return out;
}

Perturbation mp_sub(const Wave& u_prime, const NeuronTrace& base, const NeuronParams& p) {
    if (u_prime.size() != base.u.size())
        throw std::invalid_argument("mp_sub: waveform length mismatch");
    if (base.c.size() != base.u.size())
        throw std::invalid_argument("mp_sub: base trace is missing its synaptic input");

    const Wave& c = base.c;
    const double decay = p.mem_decay();
    Perturbation eps(c.size());
    double carry = 0.0;  // carried state of the perturbed waveform
    for (std::size_t t = 0; t < c.size(); ++t) {
        double unperturbed = decay * carry + c[t];
        eps[t] = u_prime[t] - unperturbed;
        carry = u_prime[t] >= p.theta ? 0.0 : u_prime[t];
    }
    return eps;
}

Perturbation mp_sub(const NeuronTrace& u_prime, const NeuronTrace& base, const NeuronParams& p) {
    return mp_sub(u_prime.u, base, p);
}

double mp_dist(const Wave& u_prime, const NeuronTrace& base, const NeuronParams& p) {
    Perturbation eps = mp_sub(u_prime, base, p);
    return std::sqrt(dot(eps, eps));
}

double mp_dist(const NeuronTrace& u_prime, const NeuronTrace& base, const NeuronParams& p) {
    return mp_dist(u_prime.u, base, p);
}

double floored_signed_dist(double theta_minus_u, bool fired) {
    if (fired) return std::min(theta_minus_u, -kFlipMargin);
    return std::max(theta_minus_u, kFlipMargin);
}

double sns_closed_form_dist(const NeuronTrace& trace, int step, const NeuronParams& p) {
    if (step < 0 || step >= p.n_steps)
        throw std::out_of_range("sns_closed_form_dist: step out of range");
    return p.theta - trace.u[static_cast<std::size_t>(step)];
}

Neighborhood sns_neighborhood(const NeuronTrace& trace, const NeuronParams& p) {
    check_trace(trace, p, "sns_neighborhood");
    const auto n = trace.u.size();
    Neighborhood hood;
    hood.members.resize(n);
    Perturbation eps(n, 0.0);
    for (std::size_t step = 0; step < n; ++step) {
        bool fired = trace.s[step] != 0;
        double raw = p.theta - trace.u[step];
        // Smallest nudge flipping the firing status under the >= convention.
        eps[step] = fired ? raw - kFlipMargin : raw;

        Neighbor& nb = hood.members[step];
        nb.step = static_cast<int>(step);
        nb.trace = mp_add(trace, eps, p);
        // theta - u[step] lands on the threshold only in exact arithmetic;
        // when rounding leaves the firing status unchanged, grow the nudge
        // by ulp-scale amounts until the flip takes effect.
        double bump = (std::abs(trace.u[step]) + std::abs(p.theta) + 1.0) * 0x1.0p-52;
        while (nb.trace.s[step] == trace.s[step]) {
            eps[step] += fired ? -bump : bump;
            bump *= 2.0;
            nb.trace = mp_add(trace, eps, p);
        }
        nb.signed_dist = floored_signed_dist(raw, fired);

        Perturbation diff = mp_sub(nb.trace, trace, p);
        double norm = std::sqrt(dot(diff, diff));
        nb.unit_dir.assign(n, 0.0);
        if (norm > 0.0)
            for (std::size_t t = 0; t < n; ++t) nb.unit_dir[t] = diff[t] / norm;

        eps[step] = 0.0;
    }
    return hood;
}

std::uint64_t spike_train_index(const SpikeTrain& s) {
    if (s.size() > 63)
        throw std::invalid_argument("spike_train_index: more than 63 steps overflows the index");
    std::uint64_t idx = 0;
    for (std::uint8_t bit : s) idx = (idx << 1) | (bit ? 1u : 0u);
    return idx;
}

SpikeTrain spike_train_from_index(std::uint64_t index, int n_steps) {
    if (n_steps < 0 || n_steps > 63)
        throw std::invalid_argument("spike_train_from_index: n_steps out of range");
    SpikeTrain s(static_cast<std::size_t>(n_steps));
    for (int t = n_steps - 1; t >= 0; --t) {
        s[static_cast<std::size_t>(t)] = index & 1u;
        index >>= 1;
    }
    if (index != 0)
        throw std::invalid_argument("spike_train_from_index: index does not fit in n_steps bits");
    return s;
}

}  // namespace snn
