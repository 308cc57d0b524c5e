#pragma once

#include "snn/na.hpp"

namespace snn {

struct LossResult {
    double loss = 0.0;
    std::vector<Wave> g;  // instantaneous PSC error per output neuron
};

// Squared distance between kernel-filtered target spike trains and the
// output PSCs: sum over neurons and steps of 0.5 * ((kernel*d)[t] - a[t])^2.
LossResult van_rossum_loss(const std::vector<Psc>& outputs,
                           const std::vector<SpikeTrain>& targets,
                           const Wave& kernel);

}  // namespace snn
