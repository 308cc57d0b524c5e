#include <doctest.h>

#include "snn/config.hpp"
#include "snn/loss.hpp"
#include "snn/model.hpp"
#include "snn/optimizer.hpp"
#include "snn/train.hpp"
#include "test_util.hpp"

using namespace snn;

TEST_CASE("van_rossum_loss") {
    NeuronParams p(5.0, 2.0, 1.0, 4);
    Wave kernel = psc_kernel(p);
    SUBCASE("perfect match is free") {
        SpikeTrain d{0, 1, 0, 1};
        LossResult r = van_rossum_loss({psc_from_spikes(d, p)}, {d}, kernel);
        CHECK(r.loss == 0.0);
    }
    SUBCASE("silent output, single spike at the last step") {
        LossResult r = van_rossum_loss({Psc(4, 0.0)}, {SpikeTrain{0, 0, 0, 1}}, kernel);
        CHECK(r.loss == doctest::Approx(0.125).epsilon(1e-12));
    }
    SUBCASE("permutation invariance and non-negativity") {
        Rng rng(79);
        std::vector<Psc> a{Psc{0.1, 0.4, 0.2, 0.0}, Psc{0.5, 0.1, 0.0, 0.3}};
        std::vector<SpikeTrain> d{{1, 0, 0, 0}, {0, 0, 1, 0}};
        LossResult r1 = van_rossum_loss(a, d, kernel);
        std::swap(a[0], a[1]);
        std::swap(d[0], d[1]);
        LossResult r2 = van_rossum_loss(a, d, kernel);
        CHECK(r1.loss == doctest::Approx(r2.loss).epsilon(1e-12));
        CHECK(r1.loss >= 0.0);
    }
    SUBCASE("shape mismatch") {
        CHECK_THROWS_AS(van_rossum_loss({Psc(4, 0.0)}, {}, kernel), std::invalid_argument);
    }
}

TEST_CASE("parse_architecture") {
    SUBCASE("dense chain with declared input") {
        ParsedArchitecture a = parse_architecture("784-400-10");
        REQUIRE(a.declared_input.has_value());
        CHECK(*a.declared_input == 784);
        REQUIRE(a.layers.size() == 2);
        CHECK(a.layers[0].units == 400);
        CHECK(a.layers[1].units == 10);
    }
    SUBCASE("conv-pool notation") {
        ParsedArchitecture a = parse_architecture("15C5-P2-40C5-P2-300");
        CHECK(!a.declared_input.has_value());
        REQUIRE(a.layers.size() == 5);
        CHECK(a.layers[0].kind == LayerKind::conv2d);
        CHECK(a.layers[0].out_channels == 15);
        CHECK(a.layers[0].kernel == 5);
        CHECK(a.layers[1].kind == LayerKind::avgpool2d);
        CHECK(a.layers[1].window == 2);
        CHECK(a.layers[4].kind == LayerKind::dense);
        CHECK(a.layers[4].units == 300);
    }
    SUBCASE("rejects malformed strings") {
        CHECK_THROWS_AS(parse_architecture(""), std::invalid_argument);
        CHECK_THROWS_AS(parse_architecture("10--5"), std::invalid_argument);
        CHECK_THROWS_AS(parse_architecture("C5"), std::invalid_argument);
        CHECK_THROWS_AS(parse_architecture("5C"), std::invalid_argument);
    }
}

TEST_CASE("dense layer forward") {
    NeuronParams p(2.0, 2.0, 1.0, 3);
    Rng rng(83);
    SUBCASE("zero weights keep the layer silent") {
        LayerSpec spec;
        spec.kind = LayerKind::dense;
        spec.units = 3;
        LayerState layer = make_layer(spec, Shape3{2, 1, 1}, rng);
        layer.weights.fill(0.0);
        auto out = layer_forward(layer, {Psc{0.4, 0.2, 0.8}, Psc{0.1, 0.0, 0.5}}, p);
        for (const Wave& a : out) CHECK(a == Wave(3, 0.0));
    }
    SUBCASE("hand-built two-neuron simulation") {
        LayerSpec spec;
        spec.kind = LayerKind::dense;
        spec.units = 2;
        LayerState layer = make_layer(spec, Shape3{2, 1, 1}, rng);
        layer.weights.at(0, 0) = 1.0;
        layer.weights.at(0, 1) = 0.0;
        layer.weights.at(1, 0) = 0.0;
        layer.weights.at(1, 1) = 2.0;
        std::vector<Wave> in{Psc{0.6, 0.6, 0.6}, Psc{0.2, 0.3, 0.1}};
        auto out = layer_forward(layer, in, p);
        NeuronTrace tr0 = lif_forward({0.6, 0.6, 0.6}, p);
        NeuronTrace tr1 = lif_forward({0.4, 0.6, 0.2}, p);
        CHECK(out[0] == tr0.a);
        CHECK(out[1] == tr1.a);
    }
    SUBCASE("stream count mismatch") {
        LayerSpec spec;
        spec.kind = LayerKind::dense;
        spec.units = 1;
        LayerState layer = make_layer(spec, Shape3{2, 1, 1}, rng);
        CHECK_THROWS_AS(layer_forward(layer, {Psc{0.1, 0.1, 0.1}}, p), std::invalid_argument);
    }
}

TEST_CASE("conv2d layer") {
    NeuronParams p(2.0, 2.0, 1.0, 2);
    Rng rng(89);
    SUBCASE("zero kernel is silent") {
        LayerSpec spec;
        spec.kind = LayerKind::conv2d;
        spec.out_channels = 2;
        spec.kernel = 2;
        LayerState layer = make_layer(spec, Shape3{1, 3, 3}, rng);
        layer.weights.fill(0.0);
        std::vector<Wave> in(9, Wave{0.5, 0.5});
        for (const Wave& a : layer_forward(layer, in, p)) CHECK(a == Wave(2, 0.0));
    }
    SUBCASE("1x1 kernel equals a shared-scalar dense layer") {
        LayerSpec spec;
        spec.kind = LayerKind::conv2d;
        spec.out_channels = 1;
        spec.kernel = 1;
        LayerState conv = make_layer(spec, Shape3{1, 2, 2}, rng);
        const double wv = 0.9;
        conv.weights.fill(wv);

        LayerSpec dspec;
        dspec.kind = LayerKind::dense;
        dspec.units = 4;
        LayerState dense = make_layer(dspec, Shape3{4, 1, 1}, rng);
        dense.weights.fill(0.0);
        for (int i = 0; i < 4; ++i) dense.weights.at(i, i) = wv;

        std::vector<Wave> in{Wave{0.3, 0.9}, Wave{1.4, 0.0}, Wave{0.0, 1.2}, Wave{0.7, 0.7}};
        auto conv_out = layer_forward(conv, in, p);
        auto dense_out = layer_forward(dense, in, p);
        for (int i = 0; i < 4; ++i) CHECK(conv_out[i] == dense_out[i]);

        // Gradients: the conv scalar accumulates what the dense diagonal splits.
        std::vector<Wave> g(4, Wave{0.2, -0.1});
        BackwardOptions opt;
        auto conv_res = layer_backward(conv, g, p, opt);
        auto dense_res = layer_backward(dense, g, p, opt);
        double diag_sum = 0.0;
        for (int i = 0; i < 4; ++i) diag_sum += dense_res.weight_grad.at(i, i);
        CHECK(conv_res.weight_grad.at(0, 0) == doctest::Approx(diag_sum).epsilon(1e-9));
        for (int i = 0; i < 4; ++i)
            CHECK(test::max_abs_diff(conv_res.g_prev[i], dense_res.g_prev[i]) < 1e-12);
    }
    SUBCASE("centered Dirac kernel with same padding is the identity") {
        LayerSpec spec;
        spec.kind = LayerKind::conv2d;
        spec.out_channels = 1;
        spec.kernel = 3;
        spec.padding = 1;
        LayerState layer = make_layer(spec, Shape3{1, 3, 3}, rng);
        layer.weights.fill(0.0);
        layer.weights.at(0, 4) = 1.0;  // center of the 3x3 kernel
        std::vector<Wave> in(9);
        Rng data_rng(97);
        for (Wave& s : in) s = test::random_input(data_rng, 2, 0.0, 0.9);
        layer_forward(layer, in, p);
        for (int i = 0; i < 9; ++i)
            CHECK(test::max_abs_diff(layer.traces[i].c, in[i]) == 0.0);
    }
    SUBCASE("kernel larger than input") {
        LayerSpec spec;
        spec.kind = LayerKind::conv2d;
        spec.out_channels = 1;
        spec.kernel = 4;
        CHECK_THROWS_AS(layer_out_shape(spec, Shape3{1, 3, 3}), std::invalid_argument);
    }
}

TEST_CASE("avgpool2d layer") {
    NeuronParams p(2.0, 2.0, 1.0, 2);
    Rng rng(101);
    LayerSpec spec;
    spec.kind = LayerKind::avgpool2d;
    spec.window = 2;
    SUBCASE("averages currents and distributes error uniformly") {
        LayerState layer = make_layer(spec, Shape3{1, 2, 2}, rng);
        std::vector<Wave> in{Wave{0.0, 1.0}, Wave{0.0, 1.0}, Wave{0.0, 1.0}, Wave{4.0, 1.0}};
        auto out = layer_forward(layer, in, p);
        REQUIRE(out.size() == 1);
        CHECK(out[0] == Wave{1.0, 1.0});

        BackwardOptions opt;
        auto res = layer_backward(layer, {Wave{2.0, -4.0}}, p, opt);
        for (int i = 0; i < 4; ++i) CHECK(res.g_prev[i] == Wave{0.5, -1.0});
        CHECK(res.weight_grad.size() == 0);
    }
    SUBCASE("constant map is unchanged") {
        LayerState layer = make_layer(spec, Shape3{1, 2, 2}, rng);
        std::vector<Wave> in(4, Wave{0.7, 0.7});
        CHECK(layer_forward(layer, in, p)[0] == Wave{0.7, 0.7});
    }
    SUBCASE("indivisible dims are rejected") {
        CHECK_THROWS_AS(layer_out_shape(spec, Shape3{1, 3, 3}), std::invalid_argument);
    }
}

TEST_CASE("model assembly and forward") {
    NeuronParams p(5.0, 2.0, 1.0, 3);
    SUBCASE("declared input must match") {
        Rng rng(103);
        CHECK_THROWS_AS(build_model("10-5", Shape3{8, 1, 1}, 0, p, rng), std::invalid_argument);
    }
    SUBCASE("readout appended only when needed") {
        Rng rng(107);
        Model a = build_model("8-5", Shape3{8, 1, 1}, 10, p, rng);
        CHECK(a.layers.size() == 2);  // dense 5 + appended dense 10
        Model b = build_model("8-10", Shape3{8, 1, 1}, 10, p, rng);
        CHECK(b.layers.size() == 1);
    }
    SUBCASE("zero input stays zero") {
        Rng rng(109);
        Model m = build_model("4-3-2", Shape3{4, 1, 1}, 0, p, rng);
        auto out = model_forward(m, std::vector<Wave>(4, Wave(3, 0.0)));
        for (const Wave& a : out) CHECK(a == Wave(3, 0.0));
    }
    SUBCASE("single layer model equals the layer") {
        Rng rng(113);
        Model m = build_model("2-1", Shape3{2, 1, 1}, 0, p, rng);
        std::vector<Wave> in{Wave{0.4, 0.1, 0.9}, Wave{0.2, 0.2, 0.2}};
        auto out = model_forward(m, in);
        Wave c(3, 0.0);
        for (int j = 0; j < 2; ++j)
            for (int t = 0; t < 3; ++t) c[t] += m.layers[0].weights.at(0, j) * in[j][t];
        CHECK(out[0] == lif_forward(c, p).a);
    }
    SUBCASE("two-layer fixture against a scripted simulation") {
        Rng rng(127);
        Model m = build_model("2-2-1", Shape3{2, 1, 1}, 0, p, rng);
        std::vector<Wave> in{Wave{0.8, 0.0, 0.4}, Wave{0.1, 0.6, 0.3}};
        auto out = model_forward(m, in);

        std::vector<Psc> hidden;
        for (int i = 0; i < 2; ++i) {
            Wave c(3, 0.0);
            for (int j = 0; j < 2; ++j)
                for (int t = 0; t < 3; ++t) c[t] += m.layers[0].weights.at(i, j) * in[j][t];
            hidden.push_back(lif_forward(c, p).a);
        }
        Wave c(3, 0.0);
        for (int j = 0; j < 2; ++j)
            for (int t = 0; t < 3; ++t) c[t] += m.layers[1].weights.at(0, j) * hidden[j][t];
        CHECK(out[0] == lif_forward(c, p).a);
    }
}

TEST_CASE("model backward shapes and cache") {
    NeuronParams p(5.0, 2.0, 1.0, 2);
    Rng rng(131);
    SUBCASE("gradient shapes equal weight shapes everywhere") {
        Model m = build_model("2C2-P2-3", Shape3{1, 5, 5}, 3, p, rng);
        std::vector<Wave> in(25);
        for (Wave& s : in) s = test::random_input(rng, 2, 0.0, 1.0);
        model_forward(m, in);
        std::vector<Wave> g(3, Wave{0.1, -0.2});
        for (auto method : {BackwardOptions::Method::na, BackwardOptions::Method::surrogate}) {
            BackwardOptions opt;
            opt.method = method;
            auto grads = model_backward(m, g, opt);
            REQUIRE(grads.size() == m.layers.size());
            for (std::size_t i = 0; i < grads.size(); ++i) {
                CHECK(grads[i].rows == m.layers[i].weights.rows);
                CHECK(grads[i].cols == m.layers[i].weights.cols);
            }
        }
    }
    SUBCASE("zero loss error gives zero gradients under both methods") {
        Model m = build_model("3-2", Shape3{3, 1, 1}, 0, p, rng);
        std::vector<Wave> in(3, Wave{0.5, 0.5});
        model_forward(m, in);
        for (auto method : {BackwardOptions::Method::na, BackwardOptions::Method::surrogate}) {
            BackwardOptions opt;
            opt.method = method;
            auto grads = model_backward(m, std::vector<Wave>(2, Wave(2, 0.0)), opt);
            for (const Matrix& g : grads)
                for (double v : g.v) CHECK(v == 0.0);
        }
    }
    SUBCASE("backward without a forward is an error") {
        Model m = build_model("3-2", Shape3{3, 1, 1}, 0, p, rng);
        BackwardOptions opt;
        CHECK_THROWS_AS(model_backward(m, std::vector<Wave>(2, Wave(2, 0.0)), opt),
                        std::logic_error);
    }
}

TEST_CASE("adamw") {
    NeuronParams p(5.0, 2.0, 1.0, 1);
    Rng rng(137);
    SUBCASE("zero gradient leaves only the decay") {
        Model m = build_model("1-1", Shape3{1, 1, 1}, 0, p, rng);
        double w0 = m.layers[0].weights.at(0, 0);
        AdamWConfig cfg;
        cfg.lr = 0.1;
        cfg.weight_decay = 0.5;
        AdamW adam(cfg);
        adam.step(m, {Matrix(1, 1)});
        CHECK(m.layers[0].weights.at(0, 0) == doctest::Approx(w0 * (1.0 - 0.1 * 0.5)).epsilon(1e-12));
    }
    SUBCASE("first step moves by about -lr * sign(g)") {
        Model m = build_model("1-1", Shape3{1, 1, 1}, 0, p, rng);
        double w0 = m.layers[0].weights.at(0, 0);
        AdamWConfig cfg;
        cfg.lr = 0.01;
        cfg.weight_decay = 0.0;
        AdamW adam(cfg);
        Matrix g(1, 1);
        g.at(0, 0) = 0.73;
        adam.step(m, {g});
        CHECK(m.layers[0].weights.at(0, 0) ==
              doctest::Approx(w0 - 0.01).epsilon(1e-4));
    }
    SUBCASE("identical inputs give identical states") {
        Rng r1(5), r2(5);
        Model m1 = build_model("1-1", Shape3{1, 1, 1}, 0, p, r1);
        Model m2 = build_model("1-1", Shape3{1, 1, 1}, 0, p, r2);
        AdamW a1{AdamWConfig{}}, a2{AdamWConfig{}};
        Matrix g(1, 1);
        g.at(0, 0) = -0.4;
        a1.step(m1, {g});
        a1.step(m1, {g});
        a2.step(m2, {g});
        a2.step(m2, {g});
        CHECK(m1.layers[0].weights.v == m2.layers[0].weights.v);
    }
    SUBCASE("non-finite gradients name the layer") {
        Model m = build_model("1-2-1", Shape3{1, 1, 1}, 0, p, rng);
        std::vector<Matrix> grads{Matrix(2, 1), Matrix(1, 2)};
        grads[1].at(0, 0) = std::nan("");
        AdamW adam{AdamWConfig{}};
        CHECK_THROWS_WITH_AS(adam.step(m, grads), doctest::Contains("layer 1"),
                             std::runtime_error);
    }
}

TEST_CASE("classify") {
    CHECK(classify({Psc{0.9, 0.9}, Psc{0.1, 0.1}, Psc{0.5, 0.5}}) == 0);
    CHECK(classify({Psc{0.1, 0.1}, Psc{0.1, 0.1}}) == 0);  // tie goes to the lowest index
    CHECK(classify({Psc{0.1, 0.1}, Psc{0.9, 0.9}}) == 1);
}

TEST_CASE("encode_target is injective over classes") {
    for (const char* scheme : {"all_steps", "last_step"}) {
        std::vector<std::vector<SpikeTrain>> seen;
        for (int label = 0; label < 4; ++label) {
            auto t = encode_target(scheme, label, 4, 5);
            for (const auto& prev : seen) CHECK(prev != t);
            seen.push_back(t);
        }
    }
    CHECK_THROWS_AS(encode_target("all_steps", 4, 4, 5), std::invalid_argument);
}

TEST_CASE("train_epoch") {
    TrainConfig cfg;
    cfg.n_steps = 4;
    cfg.batch_size = 2;
    cfg.target_encoding = "all_steps";
    NeuronParams p = cfg.neuron_params();

    auto make_data = [&](int n, Rng& rng) {
        std::vector<EncodedSample> data(n);
        for (int i = 0; i < n; ++i) {
            data[i].currents.resize(3);
            for (Wave& s : data[i].currents) s = test::random_input(rng, 4, 0.0, 1.0);
            data[i].label = i % 2;
        }
        return data;
    };

    SUBCASE("zero learning rate freezes the model and the loss") {
        Rng rng(139);
        auto data = make_data(6, rng);
        Model m = build_model("3-2", Shape3{3, 1, 1}, 2, p, rng);
        auto w0 = m.layers[0].weights.v;
        AdamWConfig acfg;
        acfg.lr = 0.0;
        acfg.weight_decay = 0.0;
        AdamW adam(acfg);
        std::vector<IterationRecord> rec1, rec2;
        Rng shuffle1(7), shuffle2(7);
        train_epoch(m, adam, data, cfg, 2, shuffle1, 0, rec1);
        CHECK(m.layers[0].weights.v == w0);
        train_epoch(m, adam, data, cfg, 2, shuffle2, 1, rec2);
        REQUIRE(rec1.size() == rec2.size());
        for (std::size_t i = 0; i < rec1.size(); ++i)
            CHECK(rec1[i].mean_loss == rec2[i].mean_loss);
    }
    SUBCASE("drops the trailing partial batch") {
        Rng rng(149);
        auto data = make_data(5, rng);
        Model m = build_model("3-2", Shape3{3, 1, 1}, 2, p, rng);
        AdamW adam{AdamWConfig{}};
        std::vector<IterationRecord> rec;
        Rng shuffle(7);
        EpochResult r = train_epoch(m, adam, data, cfg, 2, shuffle, 0, rec);
        CHECK(r.iterations == 2);  // 5 samples, batch 2
    }
    SUBCASE("identical seeds give identical records") {
        Rng rng(151);
        auto data = make_data(6, rng);
        auto run = [&](std::uint64_t seed) {
            Rng mrng(seed);
            Model m = build_model("3-2", Shape3{3, 1, 1}, 2, p, mrng);
            AdamW adam{AdamWConfig{}};
            std::vector<IterationRecord> rec;
            Rng shuffle(seed);
            train_epoch(m, adam, data, cfg, 2, shuffle, 0, rec);
            return rec;
        };
        auto r1 = run(42), r2 = run(42);
        REQUIRE(r1.size() == r2.size());
        for (std::size_t i = 0; i < r1.size(); ++i) CHECK(r1[i].mean_loss == r2[i].mean_loss);
    }
    SUBCASE("snapshot recorder sees no change at zero learning rate") {
        Rng rng(157);
        auto data = make_data(4, rng);
        Model m = build_model("3-2", Shape3{3, 1, 1}, 2, p, rng);
        AdamWConfig acfg;
        acfg.lr = 0.0;
        AdamW adam(acfg);
        int calls = 0;
        SnapshotRecorder recorder;
        recorder.probe_streams = data[0].currents;
        recorder.on_update = [&](const TraceSnapshot& before, const TraceSnapshot& after) {
            ++calls;
            REQUIRE(before.size() == after.size());
            for (std::size_t li = 0; li < before.size(); ++li)
                for (std::size_t n = 0; n < before[li].size(); ++n)
                    CHECK(before[li][n].s == after[li][n].s);
        };
        std::vector<IterationRecord> rec;
        Rng shuffle(7);
        EpochResult r = train_epoch(m, adam, data, cfg, 2, shuffle, 0, rec, &recorder);
        CHECK(calls == r.iterations);
    }
}
