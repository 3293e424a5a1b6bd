#include "tcl/layers/dense.hpp"

#include <cmath>

#include "tcl/error.hpp"

namespace tcl {

Tensor fcForward(const Tensor& weights, const Tensor& bias, const Tensor& x) {
    if (weights.order() != 2 || bias.order() != 1 || x.order() != 2 || x.dim(1) != weights.dim(1) ||
        bias.dim(0) != weights.dim(0)) {
        throw ShapeError("fc: input " + shapeToString(x.shape()) + ", weights " + shapeToString(weights.shape()) +
                         ", bias " + shapeToString(bias.shape()));
    }
    Tensor y = matmul(x, transpose(weights));
    const std::size_t h = weights.dim(0);
    for (std::size_t i = 0; i < x.dim(0); ++i)
        for (std::size_t j = 0; j < h; ++j) y[i * h + j] += bias[j];
    return y;
}

LayerGrad fcBackward(const Tensor& weights, const Tensor& bias, const Tensor& x, const Tensor& upstream) {
    if (upstream.order() != 2 || upstream.dim(0) != x.dim(0) || upstream.dim(1) != weights.dim(0)) {
        throw ShapeError("fc: upstream " + shapeToString(upstream.shape()) + " does not match output");
    }
    if (x.order() != 2 || x.dim(1) != weights.dim(1) || bias.size() != weights.dim(0)) {
        throw ShapeError("fc: input " + shapeToString(x.shape()) + " does not match weights");
    }
    LayerGrad g;
    g.inputGrad = matmul(upstream, weights);
    g.paramGrads.push_back(matmul(transpose(upstream), x));
    Tensor db(bias.shape());
    const std::size_t h = weights.dim(0);
    for (std::size_t i = 0; i < upstream.dim(0); ++i)
        for (std::size_t j = 0; j < h; ++j) db[j] += upstream[i * h + j];
    g.paramGrads.push_back(std::move(db));
    return g;
}

Linear::Linear(std::size_t inFeatures, std::size_t outFeatures, Rng& rng, std::string kind)
    : kind_(std::move(kind)),
      weights_{"weight", gaussianTensor({outFeatures, inFeatures}, std::sqrt(2.0 / static_cast<double>(inFeatures)), rng),
               Tensor({outFeatures, inFeatures})},
      bias_{"bias", Tensor({outFeatures}), Tensor({outFeatures})} {}

Linear::Linear(Tensor weights, Tensor bias, std::string kind)
    : kind_(std::move(kind)),
      weights_{"weight", weights, Tensor(weights.shape())},
      bias_{"bias", bias, Tensor(bias.shape())} {
    if (weights.order() != 2 || bias.order() != 1 || bias.dim(0) != weights.dim(0))
        throw ShapeError("fc: inconsistent weights and bias");
}

namespace {

Tensor flattenBatch(const Tensor& x) {
    if (x.order() < 2) throw ShapeError("expected a batch-first tensor, got " + shapeToString(x.shape()));
    return x.order() == 2 ? x : x.reshaped({x.dim(0), x.size() / x.dim(0)});
}

}  // namespace

Tensor Linear::forward(const Tensor& x, Phase) {
    inputShape_ = x.shape();
    cachedInput_ = flattenBatch(x);
    return fcForward(weights_.value, bias_.value, cachedInput_);
}

Tensor Linear::backward(const Tensor& upstream) {
    LayerGrad g = fcBackward(weights_.value, bias_.value, cachedInput_, upstream);
    weights_.grad = std::move(g.paramGrads[0]);
    bias_.grad = std::move(g.paramGrads[1]);
    return g.inputGrad.reshaped(inputShape_);
}

Tensor Flatten::forward(const Tensor& x, Phase) {
    inputShape_ = x.shape();
    return flattenBatch(x);
}

Tensor Flatten::backward(const Tensor& upstream) { return upstream.reshaped(inputShape_); }

Tensor reluForward(const Tensor& x) {
    Tensor y = x;
    for (auto& v : y.data()) v = v > 0.0 ? v : 0.0;
    return y;
}

Tensor reluBackward(const Tensor& x, const Tensor& upstream) {
    if (x.shape() != upstream.shape()) throw ShapeError("relu: upstream shape mismatch");
    Tensor g = upstream;
    for (std::size_t i = 0; i < g.size(); ++i)
        if (!(x[i] > 0.0)) g[i] = 0.0;
    return g;
}

Tensor Relu::forward(const Tensor& x, Phase) {
    cachedInput_ = x;
    return reluForward(x);
}

Tensor Relu::backward(const Tensor& upstream) { return reluBackward(cachedInput_, upstream); }

}  // namespace tcl
