#pragma once

#include <random>
#include <string>
#include <vector>

#include "tcl/tensor.hpp"

namespace tcl {

enum class Phase { Train, Eval };

/// Gradients produced by one backward pass: the gradient with respect to
/// the layer input and one tensor per trainable parameter, in parameter order.
struct LayerGrad {
    Tensor inputGrad;
    std::vector<Tensor> paramGrads;
};

struct Parameter {
    std::string name;
    Tensor value;
    Tensor grad;
};

using Rng = std::mt19937_64;

/// A trainable or stateless layer operating on batch-first tensors.
/// forward() caches what backward() needs; backward() overwrites the
/// parameter gradients (no accumulation across calls).
class Layer {
public:
    virtual ~Layer() = default;

    virtual std::string kind() const = 0;
    virtual Tensor forward(const Tensor& x, Phase phase) = 0;
    virtual Tensor backward(const Tensor& upstream) = 0;

    virtual std::vector<Parameter*> parameters() { return {}; }
    std::size_t parameterCount();
};

Tensor gaussianTensor(Shape shape, double stddev, Rng& rng);

}  // namespace tcl
