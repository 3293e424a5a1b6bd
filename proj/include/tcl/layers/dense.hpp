#pragma once

#include "tcl/layers/layer.hpp"

namespace tcl {

/// x·Wᵀ + b for x of shape (batch, D), W (H, D), b (H).
Tensor fcForward(const Tensor& weights, const Tensor& bias, const Tensor& x);
/// paramGrads = {dW, db}.
LayerGrad fcBackward(const Tensor& weights, const Tensor& bias, const Tensor& x, const Tensor& upstream);

/// Fully-connected layer. Inputs of order > 2 are flattened over the
/// non-batch modes; the input gradient is returned in the original shape.
class Linear : public Layer {
public:
    Linear(std::size_t inFeatures, std::size_t outFeatures, Rng& rng, std::string kind = "fc");
    Linear(Tensor weights, Tensor bias, std::string kind = "fc");

    std::string kind() const override { return kind_; }
    Tensor forward(const Tensor& x, Phase phase) override;
    Tensor backward(const Tensor& upstream) override;
    std::vector<Parameter*> parameters() override { return {&weights_, &bias_}; }

    Tensor& weights() { return weights_.value; }
    Tensor& bias() { return bias_.value; }

private:
    std::string kind_;
    Parameter weights_;
    Parameter bias_;
    Tensor cachedInput_;
    Shape inputShape_;
};

class Flatten : public Layer {
public:
    std::string kind() const override { return "flatten"; }
    Tensor forward(const Tensor& x, Phase phase) override;
    Tensor backward(const Tensor& upstream) override;

private:
    Shape inputShape_;
};

Tensor reluForward(const Tensor& x);
Tensor reluBackward(const Tensor& x, const Tensor& upstream);

class Relu : public Layer {
public:
    std::string kind() const override { return "relu"; }
    Tensor forward(const Tensor& x, Phase phase) override;
    Tensor backward(const Tensor& upstream) override;

private:
    Tensor cachedInput_;
};

}  // namespace tcl
