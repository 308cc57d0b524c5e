#include "snn/harness.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <iostream>
#include <ostream>

#include "snn/loss.hpp"

namespace snn {

void TransferMatrix::zero_diagonal() {
    for (auto it = counts.begin(); it != counts.end();) {
        if (it->first.first == it->first.second)
            it = counts.erase(it);
        else
            ++it;
    }
    diagonal_zeroed = true;
}

std::uint64_t TransferMatrix::total() const {
    std::uint64_t n = 0;
    for (const auto& [_, c] : counts) n += c;
    return n;
}

std::uint64_t TransferMatrix::total_off_diagonal() const {
    std::uint64_t n = 0;
    for (const auto& [key, c] : counts)
        if (key.first != key.second) n += c;
    return n;
}

DistanceRankCdf DistanceRankCdf::from_events(std::vector<double> event_distances) {
    DistanceRankCdf cdf;
    std::sort(event_distances.begin(), event_distances.end());
    cdf.distances = std::move(event_distances);
    cdf.cumulative.resize(cdf.distances.size());
    const double n = static_cast<double>(cdf.distances.size());
    for (std::size_t i = 0; i < cdf.cumulative.size(); ++i)
        cdf.cumulative[i] = static_cast<double>(i + 1) / n;
    return cdf;
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

double median_of(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    std::size_t mid = v.size() / 2;
    return v.size() % 2 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
}

double clamp_probability(double p, const char* name) {
    if (p >= 0.0 && p <= 1.0) return p;
    double clamped = std::min(std::max(p, 0.0), 1.0);
    std::cerr << "warning: " << name << "=" << p << " outside [0, 1], using " << clamped << "\n";
    return clamped;
}

std::string fmt_int(std::uint64_t v) { return std::to_string(v); }

// Accumulates spike-train transitions of the output neuron across weight
// updates of the single-neuron study.
struct TransitionCollector {
    explicit TransitionCollector(const NeuronParams& p) : params(p) { matrix.n_steps = p.n_steps; }

    NeuronParams params;
    TransferMatrix matrix;
    std::vector<double> event_distances;
    MetricsTable events{"events",
                        {"round", "iteration", "before_index", "after_index", "distance",
                         "flip_step", "rank"},
                        {}};
    std::uint64_t rank1_events = 0;
    std::uint64_t total_events = 0;

    void on_pair(int round, int iteration, const NeuronTrace& before, const NeuronTrace& after) {
        std::uint64_t bi = spike_train_index(before.s);
        std::uint64_t ai = spike_train_index(after.s);
        matrix.record(bi, ai);
        if (bi == ai) return;

        double dist = mp_dist(after, before, params);

        // The entered region first deviates at flip step q; its closed-form
        // distance ranks q among all single-flip candidates of the before
        // waveform (1 = nearest region).
        std::size_t q = 0;
        while (before.s[q] == after.s[q]) ++q;
        double dq = std::abs(params.theta - before.u[q]);
        int rank = 1;
        for (std::size_t p = 0; p < before.u.size(); ++p)
            if (std::abs(params.theta - before.u[p]) < dq) ++rank;

        ++total_events;
        if (rank == 1) ++rank1_events;
        event_distances.push_back(dist);
        events.add_row({std::to_string(round), std::to_string(iteration), fmt_int(bi), fmt_int(ai),
                        format_double(dist), std::to_string(q), std::to_string(rank)});
    }
};

struct SingleNeuronOutcome {
    RunManifest manifest;
    std::vector<MetricsTable> tables;
};

// One round of the single-neuron study plus the shared driver. NA and the
// surrogate baseline see identical inputs, targets, and initial weights for
// a given master seed.
SingleNeuronOutcome single_neuron_impl(const TrainConfig& cfg, TransitionCollector* collector) {
    const NeuronParams params = cfg.neuron_params();
    const Wave kernel = psc_kernel(params);
    const BackwardOptions opt = cfg.backward_options();
    const double p_in = clamp_probability(cfg.p_in, "p_in");
    const double p_out = clamp_probability(cfg.p_out, "p_out");

    MetricsTable metrics{"metrics", {"round", "iteration", "loss", "matched"}, {}};
    MetricsTable rounds{"rounds", {"round", "convergence_iteration", "final_loss"}, {}};

    AdamWConfig adam_cfg = cfg.adamw_config();
    adam_cfg.lr = cfg.single_neuron_lr;

    bool any_zero_variance = false;
    int converged_rounds = 0;
    std::vector<double> censored_convergence;
    const std::string arch = std::to_string(cfg.n_inputs) + "-1";

    auto t_start = Clock::now();
    for (int round = 0; round < cfg.rounds; ++round) {
        Rng rng = Rng(cfg.seed).fork(static_cast<std::uint64_t>(round));

        auto input_spikes = bernoulli_spike_trains(cfg.n_inputs, p_in, cfg.n_steps, rng);
        SpikeTrain target = bernoulli_spike_trains(1, p_out, cfg.n_steps, rng)[0];
        std::vector<Psc> pscs(input_spikes.size());
        for (std::size_t i = 0; i < input_spikes.size(); ++i)
            pscs[i] = psc_from_spikes(input_spikes[i], params);
        NormalizeResult norm = normalize_pscs(pscs);
        any_zero_variance |= norm.zero_variance;

        Model model = build_model(arch, Shape3{cfg.n_inputs, 1, 1}, 0, params, rng);
        // Inputs are normalized to unit variance; scale the initial weights
        // so the starting membrane potential sits at a workable fraction of
        // the threshold instead of the Kaiming default.
        {
            double target_std = cfg.single_neuron_init / std::sqrt(static_cast<double>(cfg.n_inputs));
            double kaiming_std = std::sqrt(2.0 / cfg.n_inputs);
            double rescale = target_std / kaiming_std;
            for (double& w : model.layers[0].weights.v) w *= rescale;
        }
        AdamW adam(adam_cfg);

        NeuronTrace prev_trace;
        int convergence = -1;
        double final_loss = 0.0;
        for (int iter = 0; iter < cfg.iterations; ++iter) {
            std::vector<Psc> out = model_forward(model, norm.values);
            const NeuronTrace& trace = model.layers.back().traces[0];
            if (collector && iter > 0) collector->on_pair(round, iter, prev_trace, trace);

            bool matched = trace.s == target;
            if (convergence < 0 && matched) convergence = iter;

            LossResult lr = van_rossum_loss(out, {target}, kernel);
            final_loss = lr.loss;
            metrics.add_row({std::to_string(round), std::to_string(iter), format_double(lr.loss),
                             matched ? "1" : "0"});

            std::vector<Matrix> grads = model_backward(model, lr.g, opt);
            adam.step(model, grads);
            prev_trace = trace;
        }
        if (collector) {
            // Close the pair opened by the last update.
            model_forward(model, norm.values);
            collector->on_pair(round, cfg.iterations, prev_trace, model.layers.back().traces[0]);
        }

        if (convergence >= 0) ++converged_rounds;
        censored_convergence.push_back(convergence >= 0 ? static_cast<double>(convergence)
                                                        : static_cast<double>(cfg.iterations + 1));
        rounds.add_row({std::to_string(round), std::to_string(convergence),
                        format_double(final_loss)});
    }

    SingleNeuronOutcome out;
    out.manifest.experiment = "single-neuron";
    out.manifest.seed = cfg.seed;
    out.manifest.config = cfg.to_json();
    out.manifest.flags["zero_variance_normalization"] = any_zero_variance;
    out.manifest.summary = {
        {"rounds", cfg.rounds},
        {"iterations", cfg.iterations},
        {"method", cfg.method},
        {"converged_rounds", converged_rounds},
        {"converged_fraction",
         cfg.rounds > 0 ? static_cast<double>(converged_rounds) / cfg.rounds : 0.0},
        {"median_convergence_iteration", median_of(censored_convergence)},
    };
    out.manifest.timings.emplace_back("total", seconds_since(t_start));
    out.tables.push_back(std::move(metrics));
    out.tables.push_back(std::move(rounds));
    return out;
}

std::filesystem::path out_path(const TrainConfig& cfg) { return cfg.out_dir; }

}  // namespace

RunManifest run_single_neuron(const TrainConfig& cfg) {
    if (cfg.record_snapshots) {
        TransitionCollector collector(cfg.neuron_params());
        SingleNeuronOutcome out = single_neuron_impl(cfg, &collector);
        out.tables.push_back(std::move(collector.events));
        write_metrics(out.manifest, out.tables, out_path(cfg));
        return read_manifest(out_path(cfg) / "manifest.json");
    }
    SingleNeuronOutcome out = single_neuron_impl(cfg, nullptr);
    write_metrics(out.manifest, out.tables, out_path(cfg));
    return read_manifest(out_path(cfg) / "manifest.json");
}

RunManifest run_mpdist_eval(const TrainConfig& cfg) {
    if (!cfg.record_snapshots)
        throw std::invalid_argument(
            "mpdist-eval: spike-train snapshots are required (record_snapshots=false)");

    TransitionCollector collector(cfg.neuron_params());
    SingleNeuronOutcome out = single_neuron_impl(cfg, &collector);

    collector.matrix.zero_diagonal();
    DistanceRankCdf cdf = DistanceRankCdf::from_events(collector.event_distances);

    MetricsTable transfer{"transfer_matrix", {"before_index", "after_index", "count"}, {}};
    for (const auto& [key, count] : collector.matrix.counts)
        transfer.add_row({fmt_int(key.first), fmt_int(key.second), fmt_int(count)});

    MetricsTable cdf_table{"cdf", {"rank", "distance", "cumulative_fraction"}, {}};
    for (std::size_t i = 0; i < cdf.distances.size(); ++i)
        cdf_table.add_row({std::to_string(i + 1), format_double(cdf.distances[i]),
                           format_double(cdf.cumulative[i])});

    // Events per region rank bucket (1 = transition into the nearest region).
    std::map<int, std::uint64_t> buckets;
    for (const auto& row : collector.events.rows) buckets[std::stoi(row[6])] += 1;
    MetricsTable bucket_table{"rank_buckets", {"rank", "events", "fraction"}, {}};
    for (const auto& [rank, n] : buckets)
        bucket_table.add_row({std::to_string(rank), fmt_int(n),
                              format_double(static_cast<double>(n) /
                                            static_cast<double>(collector.total_events))});

    out.manifest.experiment = "mpdist-eval";
    out.manifest.summary["transitions_observed"] = collector.matrix.total();
    out.manifest.summary["off_diagonal_events"] = collector.total_events;
    out.manifest.summary["nearest_rank_fraction"] =
        collector.total_events > 0
            ? static_cast<double>(collector.rank1_events) / collector.total_events
            : 0.0;
    out.manifest.summary["cdf_final"] = cdf.cumulative.empty() ? 0.0 : cdf.cumulative.back();
    out.manifest.summary["diagonal_zeroed"] = collector.matrix.diagonal_zeroed;

    out.tables.push_back(std::move(collector.events));
    out.tables.push_back(std::move(transfer));
    out.tables.push_back(std::move(cdf_table));
    out.tables.push_back(std::move(bucket_table));
    write_metrics(out.manifest, out.tables, out_path(cfg));
    return read_manifest(out_path(cfg) / "manifest.json");
}

RunManifest run_bench(const TrainConfig& cfg) {
    MetricsTable bench{"bench",
                       {"method", "n_steps", "batches", "batch_size", "reps", "final_mean_loss"},
                       {}};
    MetricsTable timings{"timings",
                         {"method", "n_steps", "rep", "forward_s", "backward_s", "optimizer_s"},
                         {}};

    RunManifest manifest;
    manifest.experiment = "bench";
    manifest.seed = cfg.seed;
    manifest.config = cfg.to_json();

    ParsedArchitecture arch = parse_architecture(cfg.bench_arch);
    if (!arch.declared_input)
        throw std::invalid_argument("bench_arch must declare its input width");
    if (arch.layers.empty() || arch.layers.back().kind != LayerKind::dense)
        throw std::invalid_argument("bench_arch must end in a dense layer");
    const int n_inputs = *arch.declared_input;
    const int n_classes = arch.layers.back().units;

    // One training state per (method, step count). All repetitions sweep the
    // points in a fixed interleaved order so machine-load drift hits every
    // point alike instead of whichever method happened to run last.
    struct BenchPoint {
        TrainConfig run_cfg;
        std::vector<EncodedSample> data;
        Model model;
        AdamW adam;
        Rng shuffle_rng;
        std::array<std::vector<double>, 3> phases;
        double final_loss = 0.0;
    };
    std::vector<BenchPoint> points;
    for (int steps : cfg.bench_steps) {
        for (const std::string& method : {std::string("na"), std::string("surrogate")}) {
            TrainConfig run_cfg = cfg;
            run_cfg.method = method;
            run_cfg.n_steps = steps;
            run_cfg.batch_size = cfg.bench_batch_size;
            const NeuronParams params = run_cfg.neuron_params();

            // Same fork for both methods: identical data and initial weights.
            Rng rng = Rng(cfg.seed).fork(static_cast<std::uint64_t>(steps));
            std::vector<EncodedSample> data(
                static_cast<std::size_t>(cfg.bench_batches * cfg.bench_batch_size));
            for (EncodedSample& sample : data) {
                auto spikes = bernoulli_spike_trains(n_inputs, 0.2, steps, rng);
                sample.currents.resize(spikes.size());
                for (std::size_t i = 0; i < spikes.size(); ++i)
                    sample.currents[i] = psc_from_spikes(spikes[i], params);
                sample.label =
                    static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(n_classes));
            }
            Model model = build_model(cfg.bench_arch, Shape3{n_inputs, 1, 1}, n_classes, params, rng);
            points.push_back({std::move(run_cfg), std::move(data), std::move(model),
                              AdamW(cfg.adamw_config()),
                              Rng(cfg.seed).fork(0xB37Cu + static_cast<std::uint64_t>(steps)),
                              {}, 0.0});
        }
    }

    auto t_start = Clock::now();
    std::vector<IterationRecord> scratch;
    for (int rep = -1; rep < cfg.bench_reps; ++rep) {  // rep -1 warms every point up
        for (BenchPoint& pt : points) {
            EpochResult r = train_epoch(pt.model, pt.adam, pt.data, pt.run_cfg, n_classes,
                                        pt.shuffle_rng, rep, scratch, nullptr);
            pt.final_loss = r.mean_loss;
            if (rep < 0) continue;
            pt.phases[0].push_back(r.timings.forward_s);
            pt.phases[1].push_back(r.timings.backward_s);
            pt.phases[2].push_back(r.timings.optimizer_s);
            timings.add_row({pt.run_cfg.method, std::to_string(pt.run_cfg.n_steps),
                             std::to_string(rep), format_double(r.timings.forward_s),
                             format_double(r.timings.backward_s),
                             format_double(r.timings.optimizer_s)});
        }
    }

    nlohmann::json medians = nlohmann::json::array();
    for (BenchPoint& pt : points) {
        bench.add_row({pt.run_cfg.method, std::to_string(pt.run_cfg.n_steps),
                       std::to_string(cfg.bench_batches), std::to_string(cfg.bench_batch_size),
                       std::to_string(cfg.bench_reps), format_double(pt.final_loss)});
        medians.push_back({{"method", pt.run_cfg.method},
                           {"n_steps", pt.run_cfg.n_steps},
                           {"forward_s", median_of(pt.phases[0])},
                           {"backward_s", median_of(pt.phases[1])},
                           {"optimizer_s", median_of(pt.phases[2])}});
    }
    manifest.summary["medians"] = medians;
    manifest.timings.emplace_back("total", seconds_since(t_start));
    write_metrics(manifest, {bench, timings}, out_path(cfg));
    return read_manifest(out_path(cfg) / "manifest.json");
}

RunManifest run_train(const TrainConfig& cfg) {
    namespace fs = std::filesystem;
    const fs::path dir = cfg.data_dir;
    IdxDataset train_set = load_mnist_idx((dir / "train-images-idx3-ubyte").string(),
                                          (dir / "train-labels-idx1-ubyte").string());
    IdxDataset test_set = load_mnist_idx((dir / "t10k-images-idx3-ubyte").string(),
                                         (dir / "t10k-labels-idx1-ubyte").string());

    const NeuronParams params = cfg.neuron_params();
    const int n_classes = 10;

    auto encode_set = [&](const IdxDataset& ds, int limit) {
        std::size_t n = ds.size();
        if (limit > 0) n = std::min(n, static_cast<std::size_t>(limit));
        std::vector<EncodedSample> out(n);
        for (std::size_t i = 0; i < n; ++i) {
            out[i] = encode_image_current(ds.images[i], params, cfg.input_gain);
            out[i].label = ds.labels[i];
        }
        return out;
    };
    std::vector<EncodedSample> train_data = encode_set(train_set, cfg.train_limit);
    std::vector<EncodedSample> test_data = encode_set(test_set, cfg.test_limit);
    if (train_data.empty()) throw std::runtime_error("run_train: empty training set");

    ParsedArchitecture arch = parse_architecture(cfg.arch);
    bool spatial = std::any_of(arch.layers.begin(), arch.layers.end(), [](const LayerSpec& s) {
        return s.kind != LayerKind::dense;
    });
    Shape3 input_shape = spatial ? Shape3{1, train_set.rows, train_set.cols}
                                 : Shape3{train_set.rows * train_set.cols, 1, 1};

    Rng weight_rng = Rng(cfg.seed).fork(0xAAu);
    Rng shuffle_rng = Rng(cfg.seed).fork(0xBBu);
    Model model = build_model(cfg.arch, input_shape, n_classes, params, weight_rng);
    AdamW adam(cfg.adamw_config());

    MetricsTable metrics{"metrics", {"epoch", "iteration", "loss"}, {}};
    MetricsTable evals{"evals", {"epoch", "test_accuracy", "train_accuracy"}, {}};

    PhaseTimings totals;
    double eval_seconds = 0.0;
    auto t0 = Clock::now();
    double acc = evaluate_accuracy(model, test_data);
    eval_seconds += seconds_since(t0);
    evals.add_row({"0", format_double(acc), ""});

    double best_acc = acc;
    std::vector<IterationRecord> records;
    auto t_start = Clock::now();
    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        records.clear();
        EpochResult r = train_epoch(model, adam, train_data, cfg, n_classes, shuffle_rng, epoch,
                                    records, nullptr);
        totals.forward_s += r.timings.forward_s;
        totals.backward_s += r.timings.backward_s;
        totals.optimizer_s += r.timings.optimizer_s;
        for (const IterationRecord& rec : records)
            metrics.add_row({std::to_string(rec.epoch), std::to_string(rec.iteration),
                             format_double(rec.mean_loss)});

        t0 = Clock::now();
        acc = evaluate_accuracy(model, test_data);
        eval_seconds += seconds_since(t0);
        best_acc = std::max(best_acc, acc);
        evals.add_row({std::to_string(epoch), format_double(acc),
                       format_double(r.train_accuracy)});
    }

    RunManifest manifest;
    manifest.experiment = "train";
    manifest.seed = cfg.seed;
    manifest.config = cfg.to_json();
    manifest.summary = {
        {"train_samples", train_data.size()},
        {"test_samples", test_data.size()},
        {"epochs", cfg.epochs},
        {"method", cfg.method},
        {"final_accuracy", acc},
        {"best_accuracy", best_acc},
    };
    manifest.timings.emplace_back("forward", totals.forward_s);
    manifest.timings.emplace_back("backward", totals.backward_s);
    manifest.timings.emplace_back("optimizer", totals.optimizer_s);
    manifest.timings.emplace_back("evaluation", eval_seconds);
    manifest.timings.emplace_back("total", seconds_since(t_start));
    write_metrics(manifest, {metrics, evals}, out_path(cfg));
    return read_manifest(out_path(cfg) / "manifest.json");
}

namespace {

MetricsTable load_named_table(const RunManifest& m, const std::filesystem::path& dir,
                              const std::string& name) {
    auto it = m.tables.find(name);
    if (it == m.tables.end())
        throw std::runtime_error("report: manifest has no \"" + name + "\" table");
    return read_table(dir / it->second);
}

}  // namespace

void report(const std::filesystem::path& manifest_file, std::ostream& out,
            const std::filesystem::path& table_dir) {
    RunManifest m = read_manifest(manifest_file);
    const std::filesystem::path dir = manifest_file.parent_path();
    const std::filesystem::path tdir = table_dir.empty() ? dir : table_dir;
    std::filesystem::create_directories(tdir);

    out << "experiment: " << m.experiment << "\n";
    out << "seed: " << m.seed << "\n";
    out << "summary:\n";
    for (const auto& [key, value] : m.summary.items())
        out << "  " << key << ": " << value.dump() << "\n";

    if (m.experiment == "single-neuron" || m.experiment == "mpdist-eval") {
        MetricsTable metrics = load_named_table(m, dir, "metrics");
        // Per-iteration mean and standard deviation of the loss across rounds.
        std::map<int, std::pair<double, double>> acc;  // iter -> (sum, sum_sq)
        std::map<int, int> counts;
        for (const auto& row : metrics.rows) {
            int iter = std::stoi(row[1]);
            double loss = std::strtod(row[2].c_str(), nullptr);
            acc[iter].first += loss;
            acc[iter].second += loss * loss;
            counts[iter] += 1;
        }
        MetricsTable curve{"loss_curve", {"iteration", "mean_loss", "std_loss"}, {}};
        for (const auto& [iter, sums] : acc) {
            double n = counts[iter];
            double mean = sums.first / n;
            double var = std::max(0.0, sums.second / n - mean * mean);
            curve.add_row({std::to_string(iter), format_double(mean),
                           format_double(std::sqrt(var))});
        }
        write_table(curve, tdir / "loss_curve.csv");
        out << "wrote " << (tdir / "loss_curve.csv").string() << " (" << curve.rows.size()
            << " iterations)\n";
    }

    if (m.experiment == "bench") {
        MetricsTable timings = load_named_table(m, dir, "timings");
        std::map<std::pair<std::string, int>, std::array<std::vector<double>, 3>> by_run;
        for (const auto& row : timings.rows) {
            auto key = std::make_pair(row[0], std::stoi(row[1]));
            by_run[key][0].push_back(std::strtod(row[3].c_str(), nullptr));
            by_run[key][1].push_back(std::strtod(row[4].c_str(), nullptr));
            by_run[key][2].push_back(std::strtod(row[5].c_str(), nullptr));
        }
        MetricsTable med{"bench_medians",
                         {"method", "n_steps", "forward_s", "backward_s", "optimizer_s"},
                         {}};
        for (auto& [key, phases] : by_run)
            med.add_row({key.first, std::to_string(key.second), format_double(median_of(phases[0])),
                         format_double(median_of(phases[1])), format_double(median_of(phases[2]))});
        write_table(med, tdir / "bench_medians.csv");
        out << "wrote " << (tdir / "bench_medians.csv").string() << "\n";
    }

    if (m.experiment == "train") {
        MetricsTable evals = load_named_table(m, dir, "evals");
        out << "test accuracy by epoch:\n";
        for (const auto& row : evals.rows) out << "  epoch " << row[0] << ": " << row[1] << "\n";
    }

    if (!m.timings.empty()) {
        out << "timings:\n";
        for (const auto& [label, seconds] : m.timings)
            out << "  " << label << ": " << format_double(seconds) << " s\n";
    }
}

}  // namespace snn
