#pragma once

#include "tcl/layers/layer.hpp"

namespace tcl {

struct ConvGeometry {
    std::size_t stride = 1;
    std::size_t padding = 0;
};

/// NCHW convolution (cross-correlation) with zero padding. Kernel shape
/// (C_out, C_in, k, k), bias (C_out).
Tensor conv2dForward(const Tensor& x, const Tensor& kernel, const Tensor& bias, ConvGeometry geometry);
/// paramGrads = {dkernel, dbias}.
LayerGrad conv2dBackward(const Tensor& x, const Tensor& kernel, const Tensor& bias, ConvGeometry geometry,
                         const Tensor& upstream);

std::size_t convOutputSize(std::size_t input, std::size_t kernel, ConvGeometry geometry);

class Conv2d : public Layer {
public:
    Conv2d(std::size_t inChannels, std::size_t outChannels, std::size_t kernel, ConvGeometry geometry, Rng& rng);

    std::string kind() const override { return "conv"; }
    Tensor forward(const Tensor& x, Phase phase) override;
    Tensor backward(const Tensor& upstream) override;
    std::vector<Parameter*> parameters() override { return {&kernel_, &bias_}; }

    Tensor& kernel() { return kernel_.value; }
    Tensor& bias() { return bias_.value; }

private:
    ConvGeometry geometry_;
    Parameter kernel_;
    Parameter bias_;
    Tensor cachedInput_;
};

/// Non-overlapping max pooling (window w, stride w). Ties go to the first
/// element in row-major scan order.
Tensor maxPool2dForward(const Tensor& x, std::size_t window);
Tensor maxPool2dBackward(const Tensor& x, std::size_t window, const Tensor& upstream);

class MaxPool2d : public Layer {
public:
    explicit MaxPool2d(std::size_t window) : window_(window) {}

    std::string kind() const override { return "maxpool"; }
    Tensor forward(const Tensor& x, Phase phase) override;
    Tensor backward(const Tensor& upstream) override;

private:
    std::size_t window_;
    Tensor cachedInput_;
};

}  // namespace tcl
