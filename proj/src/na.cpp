#include "snn/na.hpp"

#include <Eigen/Dense>

namespace snn {

Wave output_g(const Psc& a, const SpikeTrain& target, const Wave& kernel) {
    if (a.size() != target.size() || a.size() != kernel.size())
        throw std::invalid_argument("output_g: length mismatch");
    Wave filtered = kernel_filter(kernel, target);
    Wave g(a.size());
    for (std::size_t t = 0; t < a.size(); ++t) g[t] = a[t] - filtered[t];
    return g;
}

std::vector<Wave> hidden_g(const Matrix& weights, const std::vector<Wave>& err_next) {
    if (static_cast<int>(err_next.size()) != weights.rows)
        throw std::invalid_argument("hidden_g: error count != weight rows");
    const std::size_t n_steps = err_next.empty() ? 0 : err_next.front().size();
    for (const Wave& e : err_next)
        if (e.size() != n_steps) throw std::invalid_argument("hidden_g: ragged error sequences");

    std::vector<Wave> g(static_cast<std::size_t>(weights.cols), Wave(n_steps, 0.0));
    for (int post = 0; post < weights.rows; ++post) {
        const double* w = weights.row(post);
        const Wave& err = err_next[static_cast<std::size_t>(post)];
        for (int pre = 0; pre < weights.cols; ++pre) {
            if (w[pre] == 0.0) continue;
            Wave& gi = g[static_cast<std::size_t>(pre)];
            for (std::size_t t = 0; t < n_steps; ++t) gi[t] += w[pre] * err[t];
        }
    }
    return g;
}

void psc_error_into(const Wave& g, const NeuronParams& p, Wave& e) {
    e.resize(g.size());
    const double decay = p.syn_decay();
    double next = 0.0;
    for (std::size_t i = g.size(); i-- > 0;) {
        next = g[i] + decay * next;
        e[i] = next;
    }
}

Wave psc_error(const Wave& g, const NeuronParams& p) {
    Wave e;
    psc_error_into(g, p, e);
    return e;
}

namespace {

double clip(double x, double lo, double hi) { return std::min(std::max(x, lo), hi); }

double diff_dot(const Wave& e, const Psc& a, const Psc& a_p) {
    if (e.size() != a.size() || a.size() != a_p.size())
        throw std::invalid_argument("neighbor finite difference: length mismatch");
    double acc = 0.0;
    for (std::size_t t = 0; t < e.size(); ++t) acc += e[t] * (a_p[t] - a[t]);
    return acc;
}

}  // namespace

double neighbor_finite_difference(const Wave& e, const Psc& a, const Psc& a_p,
                                  double signed_dist, const ClipBound& bound) {
    double scale = clip(1.0 / (signed_dist * signed_dist * signed_dist), -bound.b, bound.b);
    return diff_dot(e, a, a_p) * scale;
}

double neighbor_finite_difference_unscaled(const Wave& e, const Psc& a, const Psc& a_p,
                                           double signed_dist) {
    return diff_dot(e, a, a_p) / signed_dist;
}

Wave aggregate_sns(const Wave& finite_diffs) { return finite_diffs; }

Wave aggregate_general(const std::vector<Wave>& directions, const Wave& finite_diffs) {
    if (directions.size() != finite_diffs.size())
        throw std::invalid_argument("aggregate_general: one finite difference per direction required");
    if (directions.empty()) return {};
    const std::size_t n = directions.front().size();
    if (!all_finite(finite_diffs))
        throw std::invalid_argument("aggregate_general: non-finite finite differences");

    Eigen::MatrixXd dir_rows(directions.size(), n);
    Eigen::VectorXd rhs(directions.size());
    for (std::size_t m = 0; m < directions.size(); ++m) {
        const Wave& d = directions[m];
        if (d.size() != n)
            throw std::invalid_argument("aggregate_general: ragged direction rows");
        if (!all_finite(d))
            throw std::invalid_argument("aggregate_general: non-finite direction");
        double norm2 = dot(d, d);
        if (std::abs(std::sqrt(norm2) - 1.0) > 1e-9)
            throw std::invalid_argument("aggregate_general: directions must have unit norm");
        for (std::size_t t = 0; t < n; ++t) dir_rows(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(t)) = d[t];
        rhs(static_cast<Eigen::Index>(m)) = finite_diffs[m];
    }

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(dir_rows, Eigen::ComputeThinU | Eigen::ComputeThinV);
    svd.setThreshold(1e-10);
    Eigen::VectorXd x = svd.solve(rhs);

    Wave grad(n);
    for (std::size_t t = 0; t < n; ++t) grad[t] = x(static_cast<Eigen::Index>(t));
    return grad;
}

Matrix weight_gradient(const std::vector<Psc>& a_prev, const std::vector<Wave>& err) {
    const std::size_t n_steps = err.empty() ? (a_prev.empty() ? 0 : a_prev.front().size())
                                            : err.front().size();
    for (const Wave& w : err)
        if (w.size() != n_steps) throw std::invalid_argument("weight_gradient: ragged error sequences");
    for (const Psc& a : a_prev)
        if (a.size() != n_steps) throw std::invalid_argument("weight_gradient: input/error length mismatch");

    Matrix grad(static_cast<int>(err.size()), static_cast<int>(a_prev.size()));
    for (std::size_t i = 0; i < err.size(); ++i) {
        double* row = grad.row(static_cast<int>(i));
        for (std::size_t j = 0; j < a_prev.size(); ++j)
            row[j] = dot(a_prev[j], err[i]);
    }
    return grad;
}

Matrix weight_gradient(const std::vector<Psc>& a_prev, const Matrix& err) {
    for (const Psc& a : a_prev)
        if (static_cast<int>(a.size()) != err.cols)
            throw std::invalid_argument("weight_gradient: input/error length mismatch");
    Matrix grad(err.rows, static_cast<int>(a_prev.size()));
    for (int i = 0; i < err.rows; ++i) {
        const double* e = err.row(i);
        double* row = grad.row(i);
        for (std::size_t j = 0; j < a_prev.size(); ++j) {
            const double* a = a_prev[j].data();
            double acc = 0.0;
            for (int t = 0; t < err.cols; ++t) acc += a[t] * e[t];
            row[j] = acc;
        }
    }
    return grad;
}

std::vector<Wave> hidden_g(const Matrix& weights, const Matrix& err_next) {
    if (err_next.rows != weights.rows)
        throw std::invalid_argument("hidden_g: error count != weight rows");
    const auto n_steps = static_cast<std::size_t>(err_next.cols);
    std::vector<Wave> g(static_cast<std::size_t>(weights.cols), Wave(n_steps, 0.0));
    for (int post = 0; post < weights.rows; ++post) {
        const double* w = weights.row(post);
        const double* err = err_next.row(post);
        for (int pre = 0; pre < weights.cols; ++pre) {
            if (w[pre] == 0.0) continue;
            Wave& gi = g[static_cast<std::size_t>(pre)];
            for (std::size_t t = 0; t < n_steps; ++t) gi[t] += w[pre] * err[t];
        }
    }
    return g;
}

void na_aggregated_gradient_into(const NeuronTrace& trace, const Wave& e, const NeuronParams& p,
                                 const ClipBound& bound, const NaOptions& opt, double* agg) {
    const std::size_t n = trace.u.size();
    if (e.size() != n)
        throw std::invalid_argument("na_aggregated_gradient: error signal length mismatch");
    if (trace.c.size() != n)
        throw std::invalid_argument("na_aggregated_gradient: trace is missing its synaptic input");

    const double mem_decay = p.mem_decay();
    const double syn_decay = p.syn_decay();
    const double syn_gain = 1.0 / p.tau_s;
    // |d| at or below this bound clips to +-b, no division needed.
    const double clip_dist = opt.scaled ? std::cbrt(1.0 / bound.b) : 0.0;

    for (std::size_t flip = 0; flip < n; ++flip) {
        const bool fired = trace.s[flip] != 0;
        const double raw = p.theta - trace.u[flip];
        double nudge = fired ? raw - kFlipMargin : raw;
        double d = floored_signed_dist(raw, fired);
        if (!opt.signed_distances) d = std::abs(d);

        // Re-integrate from the flip step; earlier steps are untouched, so
        // their PSC difference is exactly zero and the dot product starts here.
        double u_carry = flip == 0 ? 0.0 : (trace.s[flip - 1] ? 0.0 : trace.u[flip - 1]);
        double a_prev = flip == 0 ? 0.0 : trace.a[flip - 1];

        double base = mem_decay * u_carry + trace.c[flip];
        double u_flip = base + nudge;
        if ((u_flip >= p.theta) == fired) {
            // Rounding left the firing status unchanged; grow the nudge by
            // ulp-scale amounts until the flip takes effect.
            double bump = (std::abs(base) + std::abs(p.theta) + 1.0) * 0x1.0p-52;
            do {
                nudge += fired ? -bump : bump;
                bump *= 2.0;
                u_flip = base + nudge;
            } while ((u_flip >= p.theta) == fired);
        }

        double acc = 0.0;
        u_carry = u_flip >= p.theta ? 0.0 : u_flip;
        a_prev = syn_decay * a_prev + syn_gain * (u_flip >= p.theta ? 1.0 : 0.0);
        acc += e[flip] * (a_prev - trace.a[flip]);
        for (std::size_t t = flip + 1; t < n; ++t) {
            double u = mem_decay * u_carry + trace.c[t];
            bool spiked = u >= p.theta;
            u_carry = spiked ? 0.0 : u;
            a_prev = syn_decay * a_prev + syn_gain * (spiked ? 1.0 : 0.0);
            acc += e[t] * (a_prev - trace.a[t]);
        }

        double scale;
        if (opt.scaled) {
            double mag = std::abs(d);
            scale = mag <= clip_dist ? (d < 0.0 ? -bound.b : bound.b)
                                     : std::clamp(1.0 / (d * d * d), -bound.b, bound.b);
        } else {
            scale = 1.0 / d;
        }
        agg[flip] = acc * scale;
    }
}

Wave na_aggregated_gradient(const NeuronTrace& trace, const Wave& e, const NeuronParams& p,
                            const ClipBound& bound, const NaOptions& opt) {
    Wave agg(trace.u.size(), 0.0);
    na_aggregated_gradient_into(trace, e, p, bound, opt, agg.data());
    return agg;
}

ErrorSignals na_error_signals(const NeuronTrace& trace, const Wave& g, const NeuronParams& p,
                              const ClipBound& bound, const NaOptions& opt) {
    ErrorSignals sig;
    sig.g = g;
    sig.e = psc_error(g, p);
    sig.agg_grad = na_aggregated_gradient(trace, sig.e, p, bound, opt);
    return sig;
}

Matrix na_error_matrix(const std::vector<NeuronTrace>& traces, const std::vector<Wave>& g,
                       const NeuronParams& p, const ClipBound& bound, const NaOptions& opt) {
    if (traces.size() != g.size())
        throw std::invalid_argument("na_error_matrix: one error sequence per neuron required");
    Matrix err(static_cast<int>(traces.size()), p.n_steps);
    Wave e_buf;
    for (std::size_t i = 0; i < traces.size(); ++i) {
        psc_error_into(g[i], p, e_buf);
        na_aggregated_gradient_into(traces[i], e_buf, p, bound, opt, err.row(static_cast<int>(i)));
    }
    return err;
}

LayerBackwardResult na_backward_layer(const std::vector<NeuronTrace>& traces,
                                      const std::vector<Wave>& g,
                                      const std::vector<Psc>& a_prev,
                                      const Matrix& weights,
                                      const NeuronParams& p,
                                      const ClipBound& bound,
                                      const NaOptions& opt) {
    if (weights.rows != static_cast<int>(traces.size()) ||
        weights.cols != static_cast<int>(a_prev.size()))
        throw std::invalid_argument("na_backward_layer: weight shape mismatch");

    Matrix err = na_error_matrix(traces, g, p, bound, opt);
    LayerBackwardResult out;
    out.weight_grad = weight_gradient(a_prev, err);
    out.g_prev = hidden_g(weights, err);
    return out;
}

}  // namespace snn
