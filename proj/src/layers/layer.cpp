#include "tcl/layers/layer.hpp"

namespace tcl {

std::size_t Layer::parameterCount() {
    std::size_t n = 0;
    for (const Parameter* p : parameters()) n += p->value.size();
    return n;
}

Tensor gaussianTensor(Shape shape, double stddev, Rng& rng) {
    Tensor t(std::move(shape));
    std::normal_distribution<double> dist(0.0, stddev);
    for (auto& v : t.data()) v = dist(rng);
    return t;
}

}  // namespace tcl
