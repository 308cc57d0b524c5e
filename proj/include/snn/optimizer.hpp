#pragma once

#include "snn/model.hpp"

namespace snn {

struct AdamWConfig {
    double lr = 5e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 0.01;
};

// AdamW with decoupled weight decay. Moment buffers live in the layers and
// start at zero; step() applies one update from per-layer gradients.
class AdamW {
  public:
    explicit AdamW(const AdamWConfig& cfg) : cfg_(cfg) {
        // lr == 0 is allowed: a no-op optimizer is useful for probing runs.
        if (!(cfg.lr >= 0.0)) throw std::invalid_argument("AdamW: learning rate must be >= 0");
    }

    void step(Model& model, const std::vector<Matrix>& grads);
    long step_count() const { return step_count_; }
    const AdamWConfig& config() const { return cfg_; }

  private:
    AdamWConfig cfg_;
    long step_count_ = 0;
};

}  // namespace snn
