#include "snn/lif.hpp"

namespace snn {

Wave psc_kernel(const NeuronParams& p) {
    Wave k(static_cast<std::size_t>(p.n_steps));
    const double decay = p.syn_decay();
    double v = 1.0 / p.tau_s;
    for (int t = 0; t < p.n_steps; ++t) {
        k[t] = v;
        v *= decay;
    }
    return k;
}

Psc psc_from_spikes(const SpikeTrain& s, const NeuronParams& p) {
    if (static_cast<int>(s.size()) != p.n_steps)
        throw std::invalid_argument("psc_from_spikes: spike train length != n_steps");
    Psc a(s.size());
    const double decay = p.syn_decay();
    const double gain = 1.0 / p.tau_s;
    double prev = 0.0;
    for (std::size_t t = 0; t < s.size(); ++t) {
        prev = decay * prev + gain * static_cast<double>(s[t]);
        a[t] = prev;
    }
    return a;
}

Wave kernel_filter(const Wave& kernel, const SpikeTrain& s) {
    Wave out(s.size(), 0.0);
    for (std::size_t t = 0; t < s.size(); ++t) {
        double acc = 0.0;
        for (std::size_t k = 0; k <= t; ++k)
            if (s[k]) acc += kernel[t - k];
        out[t] = acc;
    }
    return out;
}

void lif_forward_into(const Wave& c, const NeuronParams& p, NeuronTrace& tr) {
    if (static_cast<int>(c.size()) != p.n_steps)
        throw std::invalid_argument("lif_forward: input length != n_steps");
    if (!all_finite(c))
        throw std::invalid_argument("lif_forward: non-finite synaptic input");

    tr.c = c;
    tr.u.resize(c.size());
    tr.s.resize(c.size());
    tr.a.resize(c.size());
    const double decay = p.mem_decay();
    const double syn_decay = p.syn_decay();
    const double syn_gain = 1.0 / p.tau_s;
    double carry = 0.0;  // potential surviving into the next step (0 after a spike)
    double a_prev = 0.0;
    for (std::size_t t = 0; t < c.size(); ++t) {
        double u = decay * carry + c[t];
        bool fired = u >= p.theta;
        tr.u[t] = u;
        tr.s[t] = fired ? 1 : 0;
        carry = fired ? 0.0 : u;
        a_prev = syn_decay * a_prev + syn_gain * (fired ? 1.0 : 0.0);
        tr.a[t] = a_prev;
    }
}

NeuronTrace lif_forward(const Wave& c, const NeuronParams& p) {
    NeuronTrace tr;
    lif_forward_into(c, p, tr);
    return tr;
}

}  // namespace snn
