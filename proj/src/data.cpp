#include "snn/data.hpp"

#include <cmath>
#include <fstream>

namespace snn {

namespace {

std::uint32_t read_be32(std::ifstream& in, const std::string& path) {
    unsigned char b[4];
    if (!in.read(reinterpret_cast<char*>(b), 4))
        throw IdxError(IdxError::Kind::truncated, path + ": truncated header");
    return (std::uint32_t(b[0]) << 24) | (std::uint32_t(b[1]) << 16) |
           (std::uint32_t(b[2]) << 8) | std::uint32_t(b[3]);
}

}  // namespace

IdxDataset load_mnist_idx(const std::string& images_path, const std::string& labels_path) {
    std::ifstream img(images_path, std::ios::binary);
    if (!img) throw IdxError(IdxError::Kind::io, "cannot open " + images_path);
    std::ifstream lab(labels_path, std::ios::binary);
    if (!lab) throw IdxError(IdxError::Kind::io, "cannot open " + labels_path);

    if (read_be32(img, images_path) != 0x00000803u)
        throw IdxError(IdxError::Kind::bad_magic, images_path + ": bad image magic");
    std::uint32_t n_images = read_be32(img, images_path);
    std::uint32_t rows = read_be32(img, images_path);
    std::uint32_t cols = read_be32(img, images_path);
    if (rows == 0 || cols == 0 || rows > 4096 || cols > 4096)
        throw IdxError(IdxError::Kind::bad_dims, images_path + ": implausible image dims");

    if (read_be32(lab, labels_path) != 0x00000801u)
        throw IdxError(IdxError::Kind::bad_magic, labels_path + ": bad label magic");
    std::uint32_t n_labels = read_be32(lab, labels_path);
    if (n_images != n_labels)
        throw IdxError(IdxError::Kind::count_mismatch,
                       images_path + ": image count " + std::to_string(n_images) +
                           " != label count " + std::to_string(n_labels));

    IdxDataset ds;
    ds.rows = static_cast<int>(rows);
    ds.cols = static_cast<int>(cols);
    ds.images.resize(n_images);
    ds.labels.resize(n_labels);

    const std::size_t pixels = static_cast<std::size_t>(rows) * cols;
    for (std::uint32_t i = 0; i < n_images; ++i) {
        ds.images[i].resize(pixels);
        if (!img.read(reinterpret_cast<char*>(ds.images[i].data()),
                      static_cast<std::streamsize>(pixels)))
            throw IdxError(IdxError::Kind::truncated, images_path + ": truncated image payload");
    }
    if (n_labels > 0 &&
        !lab.read(reinterpret_cast<char*>(ds.labels.data()), static_cast<std::streamsize>(n_labels)))
        throw IdxError(IdxError::Kind::truncated, labels_path + ": truncated label payload");
    return ds;
}

EncodedSample encode_image_current(const std::vector<double>& pixels, const NeuronParams& p,
                                   double gain) {
    EncodedSample sample;
    sample.currents.resize(pixels.size());
    for (std::size_t i = 0; i < pixels.size(); ++i) {
        double px = pixels[i];
        if (!(px >= 0.0 && px <= 255.0))
            throw std::invalid_argument("encode_image_current: pixel out of [0, 255]");
        sample.currents[i].assign(static_cast<std::size_t>(p.n_steps), gain * px / 255.0);
    }
    return sample;
}

EncodedSample encode_image_current(const std::vector<std::uint8_t>& pixels, const NeuronParams& p,
                                   double gain) {
    EncodedSample sample;
    sample.currents.resize(pixels.size());
    for (std::size_t i = 0; i < pixels.size(); ++i)
        sample.currents[i].assign(static_cast<std::size_t>(p.n_steps), gain * pixels[i] / 255.0);
    return sample;
}

std::vector<SpikeTrain> bernoulli_spike_trains(int n_neurons, double prob, int n_steps, Rng& rng) {
    if (!(prob >= 0.0 && prob <= 1.0))
        throw std::invalid_argument("bernoulli_spike_trains: probability outside [0, 1]");
    std::vector<SpikeTrain> trains(static_cast<std::size_t>(n_neurons),
                                   SpikeTrain(static_cast<std::size_t>(n_steps)));
    for (auto& s : trains)
        for (auto& bit : s) bit = rng.bernoulli(prob) ? 1 : 0;
    return trains;
}

NormalizeResult normalize_pscs(const std::vector<Wave>& pscs) {
    std::size_t count = 0;
    double mean = 0.0;
    for (const Wave& w : pscs)
        for (double v : w) {
            mean += v;
            ++count;
        }
    if (count < 2) throw std::invalid_argument("normalize_pscs: need at least 2 values");
    mean /= static_cast<double>(count);

    double var = 0.0;
    for (const Wave& w : pscs)
        for (double v : w) var += (v - mean) * (v - mean);
    var /= static_cast<double>(count);  // population variance

    NormalizeResult res;
    res.values = pscs;
    if (var == 0.0) {
        res.zero_variance = true;
        for (Wave& w : res.values)
            for (double& v : w) v -= mean;
        return res;
    }
    double inv_std = 1.0 / std::sqrt(var);
    for (Wave& w : res.values)
        for (double& v : w) v = (v - mean) * inv_std;
    return res;
}

}  // namespace snn
