#include "snn/layers.hpp"

#include <cctype>

namespace snn {

namespace {

bool all_digits(const std::string& s) {
    if (s.empty()) return false;
    for (char ch : s)
        if (!std::isdigit(static_cast<unsigned char>(ch))) return false;
    return true;
}

int parse_int(const std::string& s, const std::string& ctx) {
    if (!all_digits(s)) throw std::invalid_argument("architecture: bad integer in " + ctx);
    long v = std::stol(s);
    if (v <= 0 || v > 1'000'000) throw std::invalid_argument("architecture: out-of-range size in " + ctx);
    return static_cast<int>(v);
}

LayerSpec parse_token(const std::string& tok) {
    LayerSpec spec;
    auto cpos = tok.find('C');
    if (tok.size() > 1 && tok.front() == 'P') {
        spec.kind = LayerKind::avgpool2d;
        spec.window = parse_int(tok.substr(1), tok);
        return spec;
    }
    if (cpos != std::string::npos) {
        spec.kind = LayerKind::conv2d;
        spec.out_channels = parse_int(tok.substr(0, cpos), tok);
        spec.kernel = parse_int(tok.substr(cpos + 1), tok);
        spec.init = WeightInit::kaiming_uniform;
        return spec;
    }
    spec.kind = LayerKind::dense;
    spec.units = parse_int(tok, tok);
    spec.init = WeightInit::kaiming_normal;
    return spec;
}

}  // namespace

ParsedArchitecture parse_architecture(const std::string& text) {
    ParsedArchitecture arch;
    std::size_t start = 0;
    bool first = true;
    while (start <= text.size()) {
        auto end = text.find('-', start);
        if (end == std::string::npos) end = text.size();
        std::string tok = text.substr(start, end - start);
        if (tok.empty()) throw std::invalid_argument("architecture: empty token");
        if (first && all_digits(tok)) {
            arch.declared_input = parse_int(tok, tok);
        } else {
            arch.layers.push_back(parse_token(tok));
        }
        first = false;
        start = end + 1;
        if (end == text.size()) break;
    }
    if (arch.layers.empty() && !arch.declared_input)
        throw std::invalid_argument("architecture: no layers");
    return arch;
}

Shape3 layer_out_shape(const LayerSpec& spec, const Shape3& in) {
    switch (spec.kind) {
        case LayerKind::dense:
            if (spec.units <= 0) throw std::invalid_argument("dense layer needs positive width");
            return {spec.units, 1, 1};
        case LayerKind::conv2d: {
            if (spec.out_channels <= 0 || spec.kernel <= 0 || spec.stride <= 0 || spec.padding < 0)
                throw std::invalid_argument("conv2d layer has non-positive shape parameters");
            int h = (in.h + 2 * spec.padding - spec.kernel) / spec.stride + 1;
            int w = (in.w + 2 * spec.padding - spec.kernel) / spec.stride + 1;
            if (in.h + 2 * spec.padding < spec.kernel || in.w + 2 * spec.padding < spec.kernel)
                throw std::invalid_argument("conv2d kernel does not fit the input");
            return {spec.out_channels, h, w};
        }
        case LayerKind::avgpool2d:
            if (spec.window <= 0) throw std::invalid_argument("avgpool2d needs a positive window");
            if (in.h % spec.window != 0 || in.w % spec.window != 0)
                throw std::invalid_argument("avgpool2d window does not divide the input dims");
            return {in.c, in.h / spec.window, in.w / spec.window};
    }
    throw std::logic_error("unknown layer kind");
}

LayerState make_layer(const LayerSpec& spec, const Shape3& in, Rng& rng) {
    LayerState st;
    st.spec = spec;
    st.in_shape = in;
    st.out_shape = layer_out_shape(spec, in);

    int fan_in = 0;
    if (spec.kind == LayerKind::dense) {
        fan_in = in.size();
        st.weights = Matrix(spec.units, fan_in);
    } else if (spec.kind == LayerKind::conv2d) {
        fan_in = in.c * spec.kernel * spec.kernel;
        st.weights = Matrix(spec.out_channels, fan_in);
    }
    if (st.weights.size() > 0) {
        if (spec.init == WeightInit::kaiming_normal) {
            double stddev = std::sqrt(2.0 / fan_in);
            for (double& w : st.weights.v) w = rng.normal(0.0, stddev);
        } else {
            double bound = std::sqrt(6.0 / fan_in);
            for (double& w : st.weights.v) w = rng.uniform(-bound, bound);
        }
        st.m1 = Matrix(st.weights.rows, st.weights.cols);
        st.m2 = Matrix(st.weights.rows, st.weights.cols);
    }
    return st;
}

namespace {

void dense_forward(LayerState& layer, const std::vector<Wave>& in, const NeuronParams& p) {
    const auto n_steps = static_cast<std::size_t>(p.n_steps);
    layer.traces.resize(static_cast<std::size_t>(layer.weights.rows));
    layer.out_streams.resize(layer.traces.size());
    Wave c(n_steps);
    for (int i = 0; i < layer.weights.rows; ++i) {
        std::fill(c.begin(), c.end(), 0.0);
        const double* w = layer.weights.row(i);
        for (int j = 0; j < layer.weights.cols; ++j) {
            const double wij = w[j];
            if (wij == 0.0) continue;
            const Wave& aj = in[static_cast<std::size_t>(j)];
            for (std::size_t t = 0; t < n_steps; ++t) c[t] += wij * aj[t];
        }
        auto idx = static_cast<std::size_t>(i);
        lif_forward_into(c, p, layer.traces[idx]);
        layer.out_streams[idx] = layer.traces[idx].a;
    }
}

void conv_forward(LayerState& layer, const std::vector<Wave>& in, const NeuronParams& p) {
    const auto n_steps = static_cast<std::size_t>(p.n_steps);
    const LayerSpec& sp = layer.spec;
    const Shape3& is = layer.in_shape;
    const Shape3& os = layer.out_shape;

    layer.traces.resize(static_cast<std::size_t>(os.size()));
    layer.out_streams.resize(layer.traces.size());
    Wave c(n_steps);
    for (int oc = 0; oc < os.c; ++oc) {
        const double* w = layer.weights.row(oc);
        for (int oy = 0; oy < os.h; ++oy) {
            for (int ox = 0; ox < os.w; ++ox) {
                std::fill(c.begin(), c.end(), 0.0);
                for (int ic = 0; ic < is.c; ++ic) {
                    for (int ky = 0; ky < sp.kernel; ++ky) {
                        int iy = oy * sp.stride + ky - sp.padding;
                        if (iy < 0 || iy >= is.h) continue;
                        for (int kx = 0; kx < sp.kernel; ++kx) {
                            int ix = ox * sp.stride + kx - sp.padding;
                            if (ix < 0 || ix >= is.w) continue;
                            double wv = w[(ic * sp.kernel + ky) * sp.kernel + kx];
                            const Wave& src = in[static_cast<std::size_t>((ic * is.h + iy) * is.w + ix)];
                            for (std::size_t t = 0; t < n_steps; ++t) c[t] += wv * src[t];
                        }
                    }
                }
                auto idx = static_cast<std::size_t>((oc * os.h + oy) * os.w + ox);
                lif_forward_into(c, p, layer.traces[idx]);
                layer.out_streams[idx] = layer.traces[idx].a;
            }
        }
    }
}

void pool_forward(LayerState& layer, const std::vector<Wave>& in, const NeuronParams& p) {
    const auto n_steps = static_cast<std::size_t>(p.n_steps);
    const int win = layer.spec.window;
    const Shape3& is = layer.in_shape;
    const Shape3& os = layer.out_shape;
    const double scale = 1.0 / (win * win);

    layer.out_streams.resize(static_cast<std::size_t>(os.size()));
    for (int ch = 0; ch < os.c; ++ch) {
        for (int oy = 0; oy < os.h; ++oy) {
            for (int ox = 0; ox < os.w; ++ox) {
                Wave& dst = layer.out_streams[static_cast<std::size_t>((ch * os.h + oy) * os.w + ox)];
                dst.assign(n_steps, 0.0);
                for (int dy = 0; dy < win; ++dy) {
                    for (int dx = 0; dx < win; ++dx) {
                        int iy = oy * win + dy;
                        int ix = ox * win + dx;
                        const Wave& src = in[static_cast<std::size_t>((ch * is.h + iy) * is.w + ix)];
                        for (std::size_t t = 0; t < n_steps; ++t) dst[t] += src[t];
                    }
                }
                for (std::size_t t = 0; t < n_steps; ++t) dst[t] *= scale;
            }
        }
    }
}

// Per-neuron backward error rows for the configured method.
Matrix layer_error_matrix(const std::vector<NeuronTrace>& traces, const std::vector<Wave>& g,
                          const NeuronParams& p, const BackwardOptions& opt) {
    if (opt.method == BackwardOptions::Method::na)
        return na_error_matrix(traces, g, p, opt.bound, opt.na);
    return stbp_error_matrix(traces, g, p, opt.sg);
}

// grad_accum[i][j] += sum_t a_prev[j][t] * err(i, t)
void weight_gradient_add(const std::vector<Wave>& a_prev, const Matrix& err, Matrix& grad_accum) {
    for (int i = 0; i < err.rows; ++i) {
        const double* e = err.row(i);
        double* row = grad_accum.row(i);
        for (std::size_t j = 0; j < a_prev.size(); ++j) {
            const double* a = a_prev[j].data();
            double acc = 0.0;
            for (int t = 0; t < err.cols; ++t) acc += a[t] * e[t];
            row[j] += acc;
        }
    }
}

void hidden_g_into(const Matrix& weights, const Matrix& err, std::vector<Wave>& g) {
    const auto n_steps = static_cast<std::size_t>(err.cols);
    g.resize(static_cast<std::size_t>(weights.cols));
    for (Wave& gi : g) gi.assign(n_steps, 0.0);
    for (int post = 0; post < weights.rows; ++post) {
        const double* w = weights.row(post);
        const double* e = err.row(post);
        for (int pre = 0; pre < weights.cols; ++pre) {
            if (w[pre] == 0.0) continue;
            Wave& gi = g[static_cast<std::size_t>(pre)];
            for (std::size_t t = 0; t < n_steps; ++t) gi[t] += w[pre] * e[t];
        }
    }
}

void conv_backward_accumulate(LayerState& layer, const std::vector<Wave>& g,
                              const NeuronParams& p, const BackwardOptions& opt, bool propagate,
                              Matrix& grad_accum, std::vector<Wave>& g_prev) {
    const auto n_steps = static_cast<std::size_t>(p.n_steps);
    const LayerSpec& sp = layer.spec;
    const Shape3& is = layer.in_shape;
    const Shape3& os = layer.out_shape;

    Matrix err = layer_error_matrix(layer.traces, g, p, opt);

    if (propagate) {
        g_prev.resize(static_cast<std::size_t>(is.size()));
        for (Wave& gp : g_prev) gp.assign(n_steps, 0.0);
    }

    for (int oc = 0; oc < os.c; ++oc) {
        double* grad = grad_accum.row(oc);
        const double* w = layer.weights.row(oc);
        for (int oy = 0; oy < os.h; ++oy) {
            for (int ox = 0; ox < os.w; ++ox) {
                const double* en = err.row((oc * os.h + oy) * os.w + ox);
                for (int ic = 0; ic < is.c; ++ic) {
                    for (int ky = 0; ky < sp.kernel; ++ky) {
                        int iy = oy * sp.stride + ky - sp.padding;
                        if (iy < 0 || iy >= is.h) continue;
                        for (int kx = 0; kx < sp.kernel; ++kx) {
                            int ix = ox * sp.stride + kx - sp.padding;
                            if (ix < 0 || ix >= is.w) continue;
                            auto in_idx = static_cast<std::size_t>((ic * is.h + iy) * is.w + ix);
                            int w_idx = (ic * sp.kernel + ky) * sp.kernel + kx;
                            const Wave& src = layer.in_streams[in_idx];
                            double acc = 0.0;
                            for (std::size_t t = 0; t < n_steps; ++t) acc += src[t] * en[t];
                            grad[w_idx] += acc;
                            if (propagate) {
                                Wave& gp = g_prev[in_idx];
                                for (std::size_t t = 0; t < n_steps; ++t)
                                    gp[t] += w[w_idx] * en[t];
                            }
                        }
                    }
                }
            }
        }
    }
}

void pool_backward_into(const LayerState& layer, const std::vector<Wave>& g,
                        const NeuronParams& p, std::vector<Wave>& g_prev) {
    const auto n_steps = static_cast<std::size_t>(p.n_steps);
    const int win = layer.spec.window;
    const Shape3& is = layer.in_shape;
    const Shape3& os = layer.out_shape;
    const double scale = 1.0 / (win * win);

    g_prev.resize(static_cast<std::size_t>(is.size()));
    for (Wave& gp : g_prev) gp.assign(n_steps, 0.0);
    for (int ch = 0; ch < os.c; ++ch) {
        for (int oy = 0; oy < os.h; ++oy) {
            for (int ox = 0; ox < os.w; ++ox) {
                const Wave& src = g[static_cast<std::size_t>((ch * os.h + oy) * os.w + ox)];
                for (int dy = 0; dy < win; ++dy) {
                    for (int dx = 0; dx < win; ++dx) {
                        int iy = oy * win + dy;
                        int ix = ox * win + dx;
                        Wave& dst = g_prev[static_cast<std::size_t>((ch * is.h + iy) * is.w + ix)];
                        for (std::size_t t = 0; t < n_steps; ++t) dst[t] += scale * src[t];
                    }
                }
            }
        }
    }
}

}  // namespace

const std::vector<Wave>& layer_forward(LayerState& layer, const std::vector<Wave>& in,
                                       const NeuronParams& p) {
    if (static_cast<int>(in.size()) != layer.in_shape.size())
        throw std::invalid_argument("layer_forward: input stream count != layer input size");
    for (const Wave& s : in)
        if (static_cast<int>(s.size()) != p.n_steps)
            throw std::invalid_argument("layer_forward: stream length != n_steps");

    layer.in_streams = in;
    layer.has_cache = true;
    switch (layer.spec.kind) {
        case LayerKind::dense: dense_forward(layer, in, p); break;
        case LayerKind::conv2d: conv_forward(layer, in, p); break;
        case LayerKind::avgpool2d: pool_forward(layer, in, p); break;
    }
    return layer.out_streams;
}

void layer_backward_accumulate(LayerState& layer, const std::vector<Wave>& g,
                               const NeuronParams& p, const BackwardOptions& opt, bool propagate,
                               Matrix& grad_accum, std::vector<Wave>& g_prev) {
    if (!layer.has_cache)
        throw std::logic_error("layer_backward: no cached forward pass");
    if (static_cast<int>(g.size()) != layer.out_shape.size())
        throw std::invalid_argument("layer_backward: error count != layer output size");
    if (grad_accum.rows != layer.weights.rows || grad_accum.cols != layer.weights.cols)
        throw std::invalid_argument("layer_backward: gradient accumulator shape mismatch");

    switch (layer.spec.kind) {
        case LayerKind::dense: {
            Matrix err = layer_error_matrix(layer.traces, g, p, opt);
            weight_gradient_add(layer.in_streams, err, grad_accum);
            if (propagate) hidden_g_into(layer.weights, err, g_prev);
            return;
        }
        case LayerKind::conv2d:
            conv_backward_accumulate(layer, g, p, opt, propagate, grad_accum, g_prev);
            return;
        case LayerKind::avgpool2d:
            pool_backward_into(layer, g, p, g_prev);
            return;
    }
    throw std::logic_error("unknown layer kind");
}

LayerBackwardResult layer_backward(LayerState& layer, const std::vector<Wave>& g,
                                   const NeuronParams& p, const BackwardOptions& opt,
                                   bool propagate) {
    LayerBackwardResult res;
    res.weight_grad = Matrix(layer.weights.rows, layer.weights.cols);
    layer_backward_accumulate(layer, g, p, opt, propagate, res.weight_grad, res.g_prev);
    return res;
}

}  // namespace snn
