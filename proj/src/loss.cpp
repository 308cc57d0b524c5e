#include "snn/loss.hpp"

namespace snn {

LossResult van_rossum_loss(const std::vector<Psc>& outputs,
                           const std::vector<SpikeTrain>& targets,
                           const Wave& kernel) {
    if (outputs.size() != targets.size())
        throw std::invalid_argument("van_rossum_loss: one target per output neuron required");
    LossResult res;
    res.g.resize(outputs.size());
    for (std::size_t i = 0; i < outputs.size(); ++i) {
        res.g[i] = output_g(outputs[i], targets[i], kernel);
        for (double gt : res.g[i]) res.loss += 0.5 * gt * gt;
    }
    return res;
}

}  // namespace snn
