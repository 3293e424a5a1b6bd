#pragma once

#include <span>

#include "tcl/tensor.hpp"

namespace tcl {

struct LossResult {
    double loss = 0.0;
    Tensor inputGrad;  // (softmax - onehot) / batch
};

/// Mean softmax cross-entropy over the batch, log-sum-exp stabilized.
LossResult softmaxCrossEntropy(const Tensor& logits, std::span<const int> labels);

}  // namespace tcl
